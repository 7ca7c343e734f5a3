//! Singular-limit sweeps: relaxation time `tau -> 0` (JMGT towards
//! Westervelt/Kuznetsov) and diffusivity `delta -> 0` (damped towards
//! undamped Kuznetsov).
//!
//! Every sweep member and the limit problem share grid, time axis, scheme and
//! initial data `(psi_0, psi_1)`; `psi_2` is used only by the `tau > 0` runs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{BoundarySpec, Formulation, Grid1D, Medium, TimeAxis};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::history::FieldHistory;
use crate::norms::{norm_report, NormReport};
use crate::pulse::{gaussian_pulse, DEFAULT_SIGMA};
use crate::timedomain::{
    pressure_from_potential, simulate, simulate_until_failure, Damping, Equation, InitialData,
    ModelSpec, Problem, StepperConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Tau,
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepNorm {
    /// `max_t |.|_{H1}`
    CH1,
    XbarW,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    /// Strictly decreasing, positive.
    pub values: Vec<f64>,
    /// A member of the family; its own value of the swept parameter is ignored.
    pub base: Problem,
    pub stepper: StepperConfig,
    pub norms: Vec<SweepNorm>,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub rel_err_c_h1: Option<f64>,
    pub rel_err_xbar_w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
    /// `|psi^{v_k} - psi^{v_{k+1}}|` in C(H1), one entry per consecutive pair.
    pub cauchy_c_h1: Vec<f64>,
    pub c_h1_monotone: bool,
    pub xbar_w_monotone: bool,
    /// Final time reached by the comparison (shorter than `T` when the limit
    /// problem stopped early).
    pub horizon: f64,
    pub horizon_steps: usize,
    /// Why the limit problem stopped early, if it did.
    pub limit_stop: Option<String>,
}

/// Default relaxation times `1e-7 * 2^-k`, `k = 0..6`.
pub fn default_tau_values() -> Vec<f64> {
    (0..7).map(|k| 1e-7 * 0.5f64.powi(k)).collect()
}

/// Default diffusivities `1e-2 * 4^-k`, `k = 0..5` (m^2/s).
pub fn default_delta_values() -> Vec<f64> {
    (0..6).map(|k| 1e-2 * 0.25f64.powi(k)).collect()
}

/// Water in a 1-D channel `[0, 0.2 m]`: zero initial potential, Gaussian
/// initial velocity potential rate `psi_1 = A exp(-(x-0.1)^2 / (2 sigma^2))`,
/// `A = 8e4 m^2/s^2`, zero `psi_2`, homogeneous Dirichlet ends, `T = 45 us`,
/// JMGT-Westervelt model with `tau = 0.1 us`.
pub fn water_channel(n_nodes: usize, n_steps: usize) -> Result<Problem> {
    let grid = Grid1D::new(0.2, n_nodes)?;
    let medium = Medium::water(Formulation::PotentialWestervelt).with_tau(1e-7);
    let u1 = gaussian_pulse(&grid, 0.1, DEFAULT_SIGMA, 8e4)?;
    Ok(Problem {
        model: ModelSpec::jmgt_westervelt(),
        medium,
        grid,
        time: TimeAxis::new(45e-6, n_steps)?,
        bc: BoundarySpec::dirichlet(),
        initial: InitialData {
            u0: vec![0.0; n_nodes],
            u1,
            u2: Some(vec![0.0; n_nodes]),
        },
        source: None,
    })
}

impl SweepConfig {
    pub fn new(parameter: SweepParameter, values: Vec<f64>, base: Problem) -> Self {
        Self {
            parameter,
            values,
            base,
            stepper: StepperConfig::default(),
            norms: vec![SweepNorm::CH1, SweepNorm::XbarW],
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(invalid("sweep needs at least one value"));
        }
        if self.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid("sweep values must be positive"));
        }
        if self.values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("sweep values must be strictly decreasing"));
        }
        if self.norms.is_empty() {
            return Err(invalid("sweep needs at least one norm"));
        }
        match self.parameter {
            SweepParameter::Tau if !self.base.model.equation.is_jmgt() => {
                Err(invalid("a tau sweep needs a JMGT base model"))
            }
            SweepParameter::Delta if self.base.model.equation.is_jmgt() => {
                Err(invalid("a delta sweep needs a second-order base model"))
            }
            SweepParameter::Delta if self.base.model.damping != Damping::Thermoviscous => {
                Err(invalid("a delta sweep needs thermoviscous damping"))
            }
            _ => Ok(()),
        }
    }

    /// The family member at parameter value `v`.
    pub fn member(&self, v: f64) -> Problem {
        let mut p = self.base.clone();
        match self.parameter {
            SweepParameter::Tau => {
                p.medium = p.medium.with_tau(v);
                if p.initial.u2.is_none() {
                    p.initial.u2 = Some(vec![0.0; p.grid.n_nodes()]);
                }
            }
            SweepParameter::Delta => p.medium = p.medium.with_delta(v),
        }
        p
    }

    /// The limit problem: `tau = 0` (second-order equation with `b = delta`)
    /// or `delta = 0`.
    pub fn limit(&self) -> Problem {
        let mut p = self.base.clone();
        match self.parameter {
            SweepParameter::Tau => {
                p.model.equation = match p.model.equation {
                    Equation::JmgtKuznetsov => Equation::Kuznetsov,
                    _ => Equation::Westervelt,
                };
                p.model.damping = Damping::Thermoviscous;
                p.medium = p.medium.with_tau(0.0);
                p.initial.u2 = None;
            }
            SweepParameter::Delta => p.medium = p.medium.with_delta(0.0),
        }
        p
    }
}

fn rel(num: &NormReport, den: &NormReport, norm: SweepNorm) -> f64 {
    let pick = |r: &NormReport| match norm {
        SweepNorm::CH1 => r.linf_h1,
        SweepNorm::XbarW => r.xbar_w,
    };
    let d = pick(den);
    if d > 0.0 {
        pick(num) / d
    } else {
        pick(num)
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Runs the limit problem and every member, then compares them snapshot-wise.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let limit = simulate_until_failure(&cfg.limit(), &cfg.stepper)?;
    let steps = limit.history.time.n_steps();
    let limit_h = limit.history;
    let members: Vec<FieldHistory> = cfg.execution.try_map_range(cfg.values.len(), |k| {
        let run = simulate_until_failure(&cfg.member(cfg.values[k]), &cfg.stepper)?;
        if run.history.time.n_steps() < steps {
            return Err(run.error.unwrap_or_else(|| invalid("member run ended early")));
        }
        run.history.truncated(steps)
    })?;
    let limit_norms = norm_report(&limit_h);
    let rows: Vec<SweepRow> = cfg
        .values
        .iter()
        .zip(&members)
        .map(|(&value, h)| {
            let d = norm_report(&h.difference(&limit_h)?);
            let want = |n| cfg.norms.contains(&n).then(|| rel(&d, &limit_norms, n));
            Ok(SweepRow {
                value,
                rel_err_c_h1: want(SweepNorm::CH1),
                rel_err_xbar_w: want(SweepNorm::XbarW),
            })
        })
        .collect::<Result<_>>()?;
    let cauchy_c_h1 = members
        .windows(2)
        .map(|w| Ok(norm_report(&w[0].difference(&w[1])?).linf_h1))
        .collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&SweepRow) -> Option<f64>| rows.iter().filter_map(f).collect::<Vec<_>>();
    Ok(SweepReport {
        parameter: cfg.parameter,
        c_h1_monotone: strictly_decreasing(&col(|r| r.rel_err_c_h1)),
        xbar_w_monotone: strictly_decreasing(&col(|r| r.rel_err_xbar_w)),
        rows,
        cauchy_c_h1,
        horizon: limit_h.time.t_final(),
        horizon_steps: steps,
        limit_stop: limit.error.map(|e: Error| e.to_string()),
    })
}

/// Final-time profile for every sweep value: `p = rho0 psi_t(., T)` for
/// potential models, `u(., T)` for pressure models.
pub fn final_time_profiles(cfg: &SweepConfig) -> Result<Vec<(f64, Vec<f64>)>> {
    cfg.validate()?;
    cfg.execution.try_map_range(cfg.values.len(), |k| {
        let v = cfg.values[k];
        let h = simulate(&cfg.member(v), &cfg.stepper)?;
        let profile = match h.medium.formulation {
            Formulation::PotentialWestervelt => pressure_from_potential(&h)?
                .pop()
                .expect("history is never empty"),
            Formulation::PressureWestervelt => h.final_u().to_vec(),
        };
        Ok((v, profile))
    })
}

fn io_err(e: impl std::fmt::Display) -> Error {
    invalid(format!("write failed: {e}"))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

/// `param_value,rel_err_C_H1,rel_err_XbarW`
pub fn write_sweep_csv(path: &Path, report: &SweepReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(["param_value", "rel_err_C_H1", "rel_err_XbarW"])
        .map_err(io_err)?;
    for r in &report.rows {
        w.write_record([format!("{:e}", r.value), opt(r.rel_err_c_h1), opt(r.rel_err_xbar_w)])
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
