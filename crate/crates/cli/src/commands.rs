use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use nlac::asymptotics::{
    final_time_profiles, run_sweep, water_channel, write_sweep_csv, SweepConfig, SweepParameter,
};
use nlac::fracderiv::{
    caputo_derivative, check_abel_coercivity, check_chain_rule_inequality, gamma, random_walks,
};
use nlac::harmonics::time_domain_spectrum;
use nlac::inversion::{
    add_noise, forward_map, gauss_newton_reconstruct, write_observations_csv, write_profile_csv,
    write_trace_csv, ForwardMode, InversionSetup, KappaProfile, SensorArray,
};
use nlac::multiharmonic::{cascade_solve, fixedpoint_solve, write_harmonics_csv};
use nlac::norms::norm_report;
use nlac::pulse::gaussian_pulse;
use nlac::timedomain::{
    simulate_until_failure, write_pressure_csv, write_snapshots_csv, Damping, Equation, InitialData,
    ModelSpec, Problem,
};
use nlac::{Formulation, Grid1D, TimeAxis};

use crate::config::{HarmonicSolver, RunConfig};
use crate::CliError;

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    fs::write(path, s).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let s = &cfg.simulate;
    let medium = cfg.medium.medium(s.formulation)?;
    let grid = Grid1D::new(s.length_m, s.n_nodes)?;
    let bump = |a: f64| gaussian_pulse(&grid, s.initial.center_m, s.initial.sigma_m, a);
    let problem = Problem {
        model: ModelSpec::new(s.equation, s.damping.damping(), s.formulation),
        medium,
        grid,
        time: TimeAxis::new(s.t_final_s, s.n_steps)?,
        bc: s.boundary.spec(medium.c),
        initial: InitialData {
            u0: bump(s.initial.u0_amplitude)?,
            u1: bump(s.initial.u1_amplitude)?,
            u2: s.equation.is_jmgt().then(|| vec![0.0; grid.n_nodes()]),
        },
        source: None,
    };
    let run = simulate_until_failure(&problem, &cfg.stepper)?;
    write_snapshots_csv(
        &out.join("snapshots.csv"),
        &run.history,
        problem.model.scheme(),
        s.snapshot_stride,
        None,
    )?;
    let norms = norm_report(&run.history);
    write_json(
        &out.join("summary.json"),
        &json!({
            "model": problem.model.tag(),
            "steps_completed": run.history.len() - 1,
            "t_reached_s": run.history.time.t_final(),
            "max_abs_u": run.history.u().iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())),
            "norms": norms,
        }),
    )?;
    match run.error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn sweep(out: &Path, sweep_cfg: SweepConfig, table: &str) -> Result<(), CliError> {
    let report = run_sweep(&sweep_cfg)?;
    write_sweep_csv(&out.join(table), &report)?;
    let profiles = final_time_profiles(&sweep_cfg)?;
    let labels: Vec<String> = profiles.iter().map(|(v, _)| format!("p_{v:e}")).collect();
    let data: Vec<Vec<f64>> = profiles.into_iter().map(|(_, p)| p).collect();
    write_pressure_csv(&out.join("profiles_final.csv"), &sweep_cfg.base.grid, &labels, &data)?;
    write_json(&out.join("summary.json"), &report)
}

pub fn sweep_tau(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let s = &cfg.sweep_tau;
    let first = *s
        .values_s
        .first()
        .ok_or_else(|| CliError::Schema("sweep_tau.values_s is empty".into()))?;
    let base = water_channel(s.n_nodes, s.n_steps)?;
    let medium = cfg.medium.medium(Formulation::PotentialWestervelt)?.with_tau(first);
    let mut sc = SweepConfig::new(SweepParameter::Tau, s.values_s.clone(), base.with_medium(medium));
    sc.stepper = cfg.stepper;
    sc.execution = cfg.execution;
    sweep(out, sc, "taus.csv")
}

pub fn sweep_delta(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let s = &cfg.sweep_delta;
    let mut base = water_channel(s.n_nodes, s.n_steps)?;
    base.model = ModelSpec::new(Equation::Westervelt, Damping::Thermoviscous, Formulation::PotentialWestervelt);
    base.initial.u2 = None;
    let base = base.with_medium(cfg.medium.medium(Formulation::PotentialWestervelt)?.with_tau(0.0));
    let mut sc = SweepConfig::new(SweepParameter::Delta, s.values_m2_per_s.clone(), base);
    sc.stepper = cfg.stepper;
    sc.execution = cfg.execution;
    sweep(out, sc, "deltas.csv")
}

pub fn harmonics(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let exc = cfg.harmonics.excitation();
    let medium = cfg.medium.medium(Formulation::PressureWestervelt)?;
    let nonlinear = time_domain_spectrum(&exc, &medium, &cfg.stepper)?;
    let linear = time_domain_spectrum(&exc, &medium.with_kappa(0.0), &cfg.stepper)?;
    let stack = cascade_solve(&exc.harmonic_problem(&medium)?)?;
    let node = nonlinear.sensor_node;
    let mut w = csv::Writer::from_path(out.join("spectrum.csv")).map_err(CliError::io)?;
    w.write_record(["harmonic", "td_re", "td_im", "td_abs", "linear_abs", "cascade_abs"])
        .map_err(CliError::io)?;
    for m in 1..=exc.m_max {
        let z = nonlinear.amplitudes[m - 1];
        w.write_record([
            m.to_string(),
            format!("{:e}", z.re),
            format!("{:e}", z.im),
            format!("{:e}", z.norm()),
            format!("{:e}", linear.amplitudes[m - 1].norm()),
            format!("{:e}", stack.harmonic(m)[node].norm()),
        ])
        .map_err(CliError::io)?;
    }
    w.flush().map_err(CliError::io)?;
    write_json(
        &out.join("summary.json"),
        &json!({
            "sensor_node": node,
            "sensor_x_m": exc.grid()?.x(node),
        }),
    )
}

pub fn cascade(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let exc = cfg.harmonics.excitation();
    let medium = cfg.medium.medium(Formulation::PressureWestervelt)?;
    let problem = exc.harmonic_problem(&medium)?;
    let (stack, summary) = match cfg.cascade.solver {
        HarmonicSolver::Cascade => (cascade_solve(&problem)?, json!({"solver": "cascade"})),
        HarmonicSolver::FixedPoint => {
            let mut fp = cfg.cascade.fixed_point;
            fp.execution = cfg.execution;
            let r = fixedpoint_solve(&problem, &fp)?;
            let s = json!({"solver": "fixed_point", "iterations": r.iterations, "update": r.update});
            (r.stack, s)
        }
    };
    write_harmonics_csv(&out.join("harmonics.csv"), &stack)?;
    write_json(&out.join("summary.json"), &summary)
}

pub fn invert(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let c = &cfg.invert;
    let medium = cfg.medium.medium(Formulation::PressureWestervelt)?;
    let grid = Grid1D::new(c.length_m, c.n_nodes)?;
    let r_hat: Vec<Complex64> = gaussian_pulse(&grid, c.source_center_m, c.source_width_m, c.amplitude_pa_per_s2)?
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    let mode = match c.solver {
        HarmonicSolver::Cascade => ForwardMode::Cascade,
        HarmonicSolver::FixedPoint => {
            let mut fp = c.fixed_point;
            fp.execution = nlac::Execution::Sequential;
            ForwardMode::FixedPoint(fp)
        }
    };
    let setup = InversionSetup {
        omega: 2.0 * std::f64::consts::PI * c.f0_hz,
        m_max: 2,
        r_hat,
        medium,
        grid,
        bc: c.boundary.spec(medium.c),
        sensors: SensorArray::new(&grid, &c.sensors_m)?,
        mode,
    };
    let truth = KappaProfile::new(c.breakpoints_m.clone(), c.kappa_true_per_pa.clone())?;
    let start = match &c.kappa_start_per_pa {
        Some(v) => truth.with_values(v.clone())?,
        None => truth.with_values(vec![medium.kappa; truth.n_params()])?,
    };
    let clean = forward_map(&truth, &setup)?;
    let data = add_noise(&clean, c.noise_level, c.noise_seed)?;
    write_observations_csv(&out.join("observations.csv"), &data, &setup.sensors)?;
    let mut gn = c.gauss_newton;
    gn.execution = cfg.execution;
    let res = gauss_newton_reconstruct(&data, &start, &setup, &gn)?;
    write_profile_csv(&out.join("profile.csv"), &grid, Some(&truth), &res.kappa)?;
    write_trace_csv(&out.join("trace.csv"), &res.trace)?;
    let rel: Vec<f64> = res
        .kappa
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| if *b != 0.0 { (a - b).abs() / b.abs() } else { (a - b).abs() })
        .collect();
    write_json(
        &out.join("summary.json"),
        &json!({
            "stop": res.stop,
            "iterations": res.iterations,
            "kappa_hat_per_pa": res.kappa.values(),
            "relative_error_per_piece": rel,
        }),
    )
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    bound: f64,
    pass: bool,
}

/// Property checks of the discrete fractional operators. Fails (exit 3) when
/// an exactness, chain-rule or coercivity check fails; the observed L1 order
/// is reported but not enforced.
pub fn frac_selftest(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let c = &cfg.frac_selftest;
    let mut checks = Vec::new();
    let mut orders = Vec::new();
    let dt = 1.0 / (c.n_points.max(2) - 1) as f64;
    let walks = random_walks(c.n_samples, c.n_points, dt, c.seed);
    for &alpha in &c.alphas {
        let mut linear_err = 0.0f64;
        let mut const_val = 0.0f64;
        let mut errs = Vec::new();
        for n in [16usize, 32, 64, 128] {
            let h = 1.0 / n as f64;
            let lin: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
            let quad: Vec<f64> = lin.iter().map(|t| t * t).collect();
            let e1 = 1.0 / gamma(2.0 - alpha);
            linear_err = linear_err.max((caputo_derivative(&lin, alpha, h)? - e1).abs() / e1);
            const_val = const_val.max(caputo_derivative(&vec![1.0; n + 1], alpha, h)?.abs());
            errs.push((caputo_derivative(&quad, alpha, h)? - 2.0 / gamma(3.0 - alpha)).abs());
        }
        let min_order = errs
            .windows(2)
            .map(|w| (w[0] / w[1]).log2())
            .fold(f64::INFINITY, f64::min);
        orders.push(json!({"alpha": alpha, "observed_order": min_order, "nominal_order": 2.0 - alpha}));
        let chain = check_chain_rule_inequality(&walks, alpha, dt, cfg.execution)?;
        let abel = check_abel_coercivity(&walks, alpha, dt, cfg.execution)?;
        checks.push(Check {
            name: format!("l1_linear_exact_alpha_{alpha}"),
            value: linear_err,
            bound: 1e-12,
            pass: linear_err <= 1e-12,
        });
        checks.push(Check {
            name: format!("l1_constant_zero_alpha_{alpha}"),
            value: const_val,
            bound: 0.0,
            pass: const_val == 0.0,
        });
        checks.push(Check {
            name: format!("chain_rule_margin_alpha_{alpha}"),
            value: chain.min_scaled_margin,
            bound: -1e-12,
            pass: chain.min_scaled_margin >= -1e-12,
        });
        checks.push(Check {
            name: format!("abel_coercivity_alpha_{alpha}"),
            value: abel.min_scaled_form,
            bound: -1e-12,
            pass: abel.min_scaled_form >= -1e-12,
        });
    }
    let all = checks.iter().all(|c| c.pass);
    write_json(
        &out.join("selftest.json"),
        &json!({"pass": all, "checks": checks, "l1_orders": orders}),
    )?;
    if all {
        Ok(())
    } else {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        Err(CliError::Check(format!("failed: {}", failed.join(", "))))
    }
}
