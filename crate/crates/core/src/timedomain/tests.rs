use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::domain::BoundaryKind;
use crate::norms::trapezoid;

fn standing_mode(n_nodes: usize, n_steps: usize, model: ModelSpec, medium: Medium) -> Problem {
    let len = 1.0;
    let grid = Grid1D::new(len, n_nodes).unwrap();
    // one full period of the fundamental mode
    let t_final = 2.0 * len / medium.c;
    let u0 = grid.nodes().iter().map(|x| (PI * x / len).sin()).collect();
    Problem {
        model,
        medium,
        grid,
        time: TimeAxis::new(t_final, n_steps).unwrap(),
        bc: BoundarySpec::dirichlet(),
        initial: InitialData {
            u0,
            u1: vec![0.0; n_nodes],
            u2: None,
        },
        source: None,
    }
}

fn unit_medium(formulation: Formulation) -> Medium {
    Medium::new(1.0, 1.0, 0.0, 0.0, 0.0, formulation).unwrap()
}

fn linear() -> ModelSpec {
    ModelSpec::new(Equation::LinearWave, Damping::None, Formulation::PressureWestervelt)
}

fn energy(u: &[f64], v: &[f64], grid: &Grid1D, c2: f64) -> f64 {
    let ux = crate::norms::first_derivative(u, grid.dx());
    let e: Vec<f64> = v.iter().zip(&ux).map(|(a, b)| a * a + c2 * b * b).collect();
    0.5 * trapezoid(&e, grid.dx())
}

#[test]
fn standing_wave_returns_after_one_period() {
    let p = standing_mode(201, 400, linear(), unit_medium(Formulation::PressureWestervelt));
    let h = simulate(&p, &StepperConfig::default()).unwrap();
    let err = h
        .final_u()
        .iter()
        .zip(&p.initial.u0)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 2e-3, "err {err}");
}

#[test]
fn linear_wave_is_second_order_in_time() {
    // fine grid so that the temporal error dominates
    let n_nodes = 801;
    let dx = 1.0 / 800.0;
    let k2 = 4.0 / (dx * dx) * (0.5 * PI * dx).sin().powi(2);
    let omega = k2.sqrt();
    let mut errs = Vec::new();
    for steps in [40, 80, 160] {
        let p = standing_mode(n_nodes, steps, linear(), unit_medium(Formulation::PressureWestervelt));
        let h = simulate(&p, &StepperConfig::default()).unwrap();
        // exact semi-discrete solution of the mode; at a full period the
        // displacement error is fourth order, so compare the velocity
        let amp = -omega * (omega * p.time.t_final()).sin();
        let e = h
            .final_ut()
            .iter()
            .zip(&p.initial.u0)
            .map(|(a, b)| (a - amp * b).abs())
            .fold(0.0, f64::max);
        errs.push(e);
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}, errs {errs:?}");
    }
}

#[test]
fn undamped_energy_is_conserved() {
    let p = standing_mode(101, 300, linear(), unit_medium(Formulation::PressureWestervelt));
    let h = simulate(&p, &StepperConfig::default()).unwrap();
    let e0 = energy(&h.u()[0], &h.ut()[0], &p.grid, 1.0);
    for (u, v) in h.u().iter().zip(h.ut()) {
        let e = energy(u, v, &p.grid, 1.0);
        assert!((e - e0).abs() < 2e-3 * e0, "{e} vs {e0}");
    }
}

#[test]
fn westervelt_without_nonlinearity_matches_linear_bitwise() {
    let medium = unit_medium(Formulation::PressureWestervelt).with_kappa(0.0);
    let a = standing_mode(61, 120, linear(), medium);
    let mut b = a.clone();
    b.model = ModelSpec::new(Equation::Westervelt, Damping::None, Formulation::PressureWestervelt);
    let ha = simulate(&a, &StepperConfig::default()).unwrap();
    let hb = simulate(&b, &StepperConfig::default()).unwrap();
    assert_eq!(ha.u(), hb.u());
    assert_eq!(ha.ut(), hb.ut());
}

#[test]
fn strong_damping_dissipates_energy() {
    let model = ModelSpec::new(
        Equation::LinearWave,
        Damping::Strong { b: 0.01 },
        Formulation::PressureWestervelt,
    );
    let p = standing_mode(101, 200, model, unit_medium(Formulation::PressureWestervelt));
    let h = simulate(&p, &StepperConfig::default()).unwrap();
    let es: Vec<f64> = h
        .u()
        .iter()
        .zip(h.ut())
        .map(|(u, v)| energy(u, v, &p.grid, 1.0))
        .collect();
    assert!(es.last().unwrap() < &(0.95 * es[0]));
    // mode decays like exp(-b k^2 t / 2)
    let k2 = PI * PI;
    let expected = (-0.01 * k2 * p.time.t_final()).exp();
    let ratio = es.last().unwrap() / es[0];
    assert!((ratio - expected).abs() < 0.02, "{ratio} vs {expected}");
}

#[test]
fn fractional_order_one_is_close_to_strong_damping() {
    let medium = unit_medium(Formulation::PressureWestervelt);
    let strong = standing_mode(
        81,
        400,
        ModelSpec::new(Equation::LinearWave, Damping::Strong { b: 0.02 }, Formulation::PressureWestervelt),
        medium,
    );
    let mut frac = strong.clone();
    frac.model.damping = Damping::CaputoWismer { b: 0.02, beta: 1.0 };
    let hs = simulate(&strong, &StepperConfig::default()).unwrap();
    let hf = simulate(&frac, &StepperConfig::default()).unwrap();
    let diff = hs
        .final_u()
        .iter()
        .zip(hf.final_u())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 5e-3, "diff {diff}");
}

#[test]
fn fractional_damping_dissipates() {
    let medium = unit_medium(Formulation::PressureWestervelt);
    let mk = |beta: f64| {
        let model = ModelSpec::new(
            Equation::LinearWave,
            Damping::CaputoWismer { b: 0.05, beta },
            Formulation::PressureWestervelt,
        );
        let p = standing_mode(81, 200, model, medium);
        let h = simulate(&p, &StepperConfig::default()).unwrap();
        let e0 = energy(&h.u()[0], &h.ut()[0], &p.grid, 1.0);
        let e1 = energy(h.final_u(), h.final_ut(), &p.grid, 1.0);
        e1 / e0
    };
    let r = mk(0.5);
    assert!(r < 1.0 && r > 0.0, "ratio {r}");
}

#[test]
fn manufactured_pressure_westervelt_converges() {
    // u = A sin(pi x) cos(w t) solves the forced equation with
    // r = (1 - k u) u_tt - c^2 u_xx - b u_txx - k u_t^2
    let (amp, k, c, b) = (0.3, 0.8, 1.0, 0.01);
    let w = PI * c;
    let medium = Medium::new(1.0, c, b, 0.0, 0.0, Formulation::PressureWestervelt)
        .unwrap()
        .with_kappa(k);
    let exact = move |t: f64, x: f64| amp * (PI * x).sin() * (w * t).cos();
    let src: SourceFn = Arc::new(move |t, x| {
        let s = (PI * x).sin();
        let u = amp * s * (w * t).cos();
        let ut = -amp * w * s * (w * t).sin();
        let utt = -w * w * u;
        let uxx = -PI * PI * u;
        let utxx = -PI * PI * ut;
        (1.0 - k * u) * utt - c * c * uxx - b * utxx - k * ut * ut
    });
    let model = ModelSpec::new(Equation::Westervelt, Damping::Thermoviscous, Formulation::PressureWestervelt);
    let mut errs = Vec::new();
    for (nodes, steps) in [(41, 40), (81, 80), (161, 160)] {
        let mut p = standing_mode(nodes, steps, model, medium);
        p.initial.u0 = p.grid.nodes().iter().map(|&x| exact(0.0, x)).collect();
        p.source = Some(src.clone());
        let h = simulate(&p, &StepperConfig::default()).unwrap();
        let tf = p.time.t_final();
        let e = h
            .final_u()
            .iter()
            .enumerate()
            .map(|(i, u)| (u - exact(tf, p.grid.x(i))).abs())
            .fold(0.0, f64::max);
        errs.push(e);
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    assert!(orders[0] > 1.5 && orders[1] > 1.8, "orders {orders:?}, errs {errs:?}");
}

#[test]
fn manufactured_kuznetsov_converges() {
    // psi = A sin(pi x) sin(w t), N = 2 psi_x psi_xt
    let (amp, k, c, b) = (0.2, 0.5, 1.0, 0.02);
    let w = PI * c;
    let medium = Medium::new(1.0, c, b, 0.0, 0.0, Formulation::PotentialWestervelt)
        .unwrap()
        .with_kappa(k);
    let exact = move |t: f64, x: f64| amp * (PI * x).sin() * (w * t).sin();
    let exact_t = move |t: f64, x: f64| amp * w * (PI * x).sin() * (w * t).cos();
    let src: SourceFn = Arc::new(move |t, x| {
        let (s, co) = ((PI * x).sin(), (PI * x).cos());
        let u = amp * s * (w * t).sin();
        let ut = amp * w * s * (w * t).cos();
        let utt = -w * w * u;
        let ux = amp * PI * co * (w * t).sin();
        let uxt = amp * PI * w * co * (w * t).cos();
        (1.0 - k * ut) * utt + c * c * PI * PI * u + b * PI * PI * ut - 2.0 * ux * uxt
    });
    let model = ModelSpec::new(Equation::Kuznetsov, Damping::Thermoviscous, Formulation::PotentialWestervelt);
    let mut errs = Vec::new();
    for (nodes, steps) in [(41, 40), (81, 80), (161, 160)] {
        let mut p = standing_mode(nodes, steps, model, medium);
        p.initial.u0 = vec![0.0; nodes];
        p.initial.u1 = p.grid.nodes().iter().map(|&x| exact_t(0.0, x)).collect();
        p.source = Some(src.clone());
        let h = simulate(&p, &StepperConfig::default()).unwrap();
        let tf = p.time.t_final();
        let e = h
            .final_u()
            .iter()
            .enumerate()
            .map(|(i, u)| (u - exact(tf, p.grid.x(i))).abs())
            .fold(0.0, f64::max);
        errs.push(e);
    }
    for win in errs.windows(2) {
        let order = (win[0] / win[1]).log2();
        assert!(order > 1.7, "order {order}, errs {errs:?}");
    }
}

#[test]
fn manufactured_jmgt_converges() {
    // tau psi_ttt + (1 - k psi_t) psi_tt - c^2 psi_xx - b psi_txx = r
    let (amp, k, c, delta, tau) = (0.2, 0.5, 1.0, 0.01, 0.05);
    let b = delta + tau * c * c;
    let w = PI * c;
    let medium = Medium::new(1.0, c, delta, 0.0, tau, Formulation::PotentialWestervelt)
        .unwrap()
        .with_kappa(k);
    let exact = move |t: f64, x: f64| amp * (PI * x).sin() * (w * t).cos();
    let src: SourceFn = Arc::new(move |t, x| {
        let s = (PI * x).sin();
        let u = amp * s * (w * t).cos();
        let ut = -amp * w * s * (w * t).sin();
        let utt = -w * w * u;
        let uttt = -w * w * ut;
        tau * uttt + (1.0 - k * ut) * utt + c * c * PI * PI * u + b * PI * PI * ut
    });
    let mut errs = Vec::new();
    for (nodes, steps) in [(41, 40), (81, 80), (161, 160)] {
        let mut p = standing_mode(nodes, steps, ModelSpec::jmgt_westervelt(), medium);
        p.initial.u0 = p.grid.nodes().iter().map(|&x| exact(0.0, x)).collect();
        p.initial.u2 = Some(p.initial.u0.iter().map(|u| -w * w * u).collect());
        p.source = Some(src.clone());
        let h = simulate(&p, &StepperConfig::default()).unwrap();
        let tf = p.time.t_final();
        let e = h
            .final_u()
            .iter()
            .enumerate()
            .map(|(i, u)| (u - exact(tf, p.grid.x(i))).abs())
            .fold(0.0, f64::max);
        errs.push(e);
    }
    for win in errs.windows(2) {
        let order = (win[0] / win[1]).log2();
        assert!(order > 1.8, "order {order}, errs {errs:?}");
    }
}

#[test]
fn absorbing_ends_let_a_pulse_leave() {
    let c = 1.0;
    let grid = Grid1D::new(1.0, 201).unwrap();
    let u0 = crate::pulse::gaussian_pulse(&grid, 0.5, 0.05, 1.0).unwrap();
    let p = Problem {
        model: linear(),
        medium: unit_medium(Formulation::PressureWestervelt),
        grid,
        time: TimeAxis::new(1.5, 600).unwrap(),
        bc: BoundarySpec::absorbing(c),
        initial: InitialData {
            u0,
            u1: vec![0.0; 201],
            u2: None,
        },
        source: None,
    };
    let h = simulate(&p, &StepperConfig::default()).unwrap();
    let e0 = energy(&h.u()[0], &h.ut()[0], &grid, 1.0);
    let e1 = energy(h.final_u(), h.final_ut(), &grid, 1.0);
    assert!(e1 < 1e-3 * e0, "{e1} vs {e0}");
}

#[test]
fn neumann_preserves_mean_displacement_rate() {
    let grid = Grid1D::new(1.0, 101).unwrap();
    let u0 = crate::pulse::gaussian_pulse(&grid, 0.3, 0.05, 1.0).unwrap();
    let p = Problem {
        model: linear(),
        medium: unit_medium(Formulation::PressureWestervelt),
        grid,
        time: TimeAxis::new(1.0, 200).unwrap(),
        bc: BoundarySpec::neumann(),
        initial: InitialData {
            u0,
            u1: vec![0.0; 101],
            u2: None,
        },
        source: None,
    };
    let h = simulate(&p, &StepperConfig::default()).unwrap();
    let m0 = trapezoid(&h.u()[0], grid.dx());
    let m1 = trapezoid(h.final_u(), grid.dx());
    assert!((m0 - m1).abs() < 1e-10, "{m0} vs {m1}");
}

#[test]
fn degeneracy_is_reported_without_nans() {
    let medium = unit_medium(Formulation::PressureWestervelt).with_kappa(1.0);
    let model = ModelSpec::new(Equation::Westervelt, Damping::Strong { b: 1e-3 }, Formulation::PressureWestervelt);
    let mut p = standing_mode(101, 400, model, medium);
    // 1 - kappa u starts at 0.2 and the source drives u upward
    p.initial.u0.iter_mut().for_each(|u| *u *= 0.8);
    p.source = Some(Arc::new(|_, x| 50.0 * (PI * x).sin()));
    let run = simulate_until_failure(&p, &StepperConfig::default()).unwrap();
    assert!(run.history.all_finite());
    match run.error {
        Some(Error::Degeneracy { margin, floor, .. }) => {
            assert!(margin < floor);
        }
        other => panic!("expected degeneracy, got {other:?}"),
    }
    assert!(run.history.len() < 401);
    assert!(matches!(simulate(&p, &StepperConfig::default()), Err(Error::Degeneracy { .. })));
}

#[test]
fn initial_degeneracy_fails_outright() {
    let medium = unit_medium(Formulation::PressureWestervelt).with_kappa(1.0);
    let model = ModelSpec::new(Equation::Westervelt, Damping::None, Formulation::PressureWestervelt);
    let mut p = standing_mode(41, 10, model, medium);
    p.initial.u0.iter_mut().for_each(|u| *u *= 0.95);
    assert!(matches!(
        simulate_until_failure(&p, &StepperConfig::default()),
        Err(Error::Degeneracy { time, .. }) if time == 0.0
    ));
}

#[test]
fn rejects_inconsistent_models() {
    let medium = unit_medium(Formulation::PressureWestervelt);
    let p = standing_mode(21, 10, linear(), medium);
    let cfg = StepperConfig::default();

    let mut q = p.clone();
    q.model = ModelSpec::new(Equation::Kuznetsov, Damping::None, Formulation::PressureWestervelt);
    assert!(matches!(simulate(&q, &cfg), Err(Error::InvalidParameter(_))));

    let mut q = p.clone();
    q.model = ModelSpec::jmgt_westervelt();
    q.medium = unit_medium(Formulation::PotentialWestervelt).with_tau(0.1);
    assert!(matches!(simulate(&q, &cfg), Err(Error::InvalidParameter(_))));

    let mut q = p.clone();
    q.model = ModelSpec::jmgt_westervelt();
    q.medium = unit_medium(Formulation::PotentialWestervelt);
    q.initial.u2 = Some(vec![0.0; 21]);
    assert!(matches!(simulate(&q, &cfg), Err(Error::InvalidParameter(_))));

    let mut q = p.clone();
    q.model = ModelSpec::new(Equation::Westervelt, Damping::None, Formulation::PotentialWestervelt);
    assert!(matches!(simulate(&q, &cfg), Err(Error::InvalidParameter(_))));

    let mut q = p.clone();
    q.initial.u1.pop();
    assert!(matches!(simulate(&q, &cfg), Err(Error::DimensionMismatch { .. })));

    let cfg2 = StepperConfig {
        scheme: Some(Scheme::Trapezoid3rdOrder),
        ..cfg
    };
    assert!(matches!(simulate(&p, &cfg2), Err(Error::InvalidParameter(_))));

    let mut q = p.clone();
    q.model.damping = Damping::CaputoWismer { b: 0.1, beta: 1.5 };
    assert!(matches!(simulate(&q, &cfg), Err(Error::InvalidParameter(_))));

    let mut q = p;
    q.bc.left = BoundaryKind::Impedance { beta: 0.0, gamma: 0.0 };
    assert!(matches!(simulate(&q, &cfg), Err(Error::InvalidParameter(_))));
}

#[test]
fn effective_speed_and_pressure() {
    let medium = Medium::water(Formulation::PressureWestervelt);
    let c = effective_wave_speed(&[0.0, 1e6], &medium, 0.1).unwrap();
    assert_eq!(c[0], 1500.0);
    assert!(c[1] > 1500.0);
    assert!(effective_wave_speed(&[1e9], &medium, 0.1).is_err());

    let p = standing_mode(21, 10, linear(), Medium::water(Formulation::PotentialWestervelt));
    let mut p = p;
    p.initial.u1 = vec![2.0; 21];
    p.initial.u0 = vec![0.0; 21];
    let h = simulate(&p, &StepperConfig::default()).unwrap();
    let pr = pressure_from_potential(&h).unwrap();
    assert_eq!(pr[0][5], 2000.0);
    let hp = simulate(
        &standing_mode(21, 10, linear(), Medium::water(Formulation::PressureWestervelt)),
        &StepperConfig::default(),
    )
    .unwrap();
    assert!(pressure_from_potential(&hp).is_err());
}

#[test]
fn small_amplitude_westervelt_approaches_linear() {
    let medium = unit_medium(Formulation::PressureWestervelt).with_kappa(1.0);
    let model = ModelSpec::new(Equation::Westervelt, Damping::None, Formulation::PressureWestervelt);
    let base = standing_mode(81, 160, linear(), medium);
    let hl = simulate(&base, &StepperConfig::default()).unwrap();
    let mut prev = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3] {
        let mut p = base.clone();
        p.model = model;
        p.initial.u0.iter_mut().for_each(|u| *u *= eps);
        let h = simulate(&p, &StepperConfig::default()).unwrap();
        let dev = h
            .final_u()
            .iter()
            .zip(hl.final_u())
            .map(|(a, b)| (a / eps - b).abs())
            .fold(0.0, f64::max);
        assert!(dev < prev);
        prev = dev;
    }
    assert!(prev < 1e-2);
}

#[test]
fn snapshot_export_writes_csv_and_sidecar() {
    let p = standing_mode(11, 4, linear(), unit_medium(Formulation::PressureWestervelt));
    let h = simulate(&p, &StepperConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("snap.csv");
    write_snapshots_csv(&path, &h, Scheme::ImplicitMidpoint, 2, Some(7)).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,x,u,u_t,u_tt");
    // snapshots 0, 2, 4
    assert_eq!(text.lines().count(), 1 + 3 * 11);
    let side: SnapshotSidecar =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("snap.csv.json")).unwrap()).unwrap();
    assert_eq!(side.seed, Some(7));
    assert_eq!(side.grid, p.grid);
}
