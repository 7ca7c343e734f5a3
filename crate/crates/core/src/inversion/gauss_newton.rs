use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domain::Grid1D;
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;

use super::{forward_nodal, io_err, jacobian, InversionSetup, JacobianMode, KappaProfile, ObservationSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussNewtonConfig {
    /// Tikhonov weight; `None` picks `lambda_factor * mean(diag(J^T J))` at
    /// the first iteration.
    pub reg_lambda: Option<f64>,
    pub lambda_factor: f64,
    pub max_outer: usize,
    pub armijo: f64,
    pub max_halvings: usize,
    /// Discrepancy factor `tau_dp`.
    pub discrepancy: f64,
    pub update_floor: f64,
    /// Stop when the weighted residual falls below this fraction of the data.
    pub residual_floor: f64,
    pub fd_step: f64,
    pub jacobian: JacobianMode,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for GaussNewtonConfig {
    fn default() -> Self {
        Self {
            reg_lambda: None,
            lambda_factor: 1e-3,
            max_outer: 50,
            armijo: 1e-4,
            max_halvings: 30,
            discrepancy: 1.2,
            update_floor: 1e-8,
            residual_floor: 1e-12,
            fd_step: 1e-6,
            jacobian: JacobianMode::FiniteDifference,
            execution: Execution::default(),
        }
    }
}

impl GaussNewtonConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.lambda_factor,
            self.armijo,
            self.discrepancy,
            self.update_floor,
            self.residual_floor,
            self.fd_step,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid("Gauss-Newton tolerances must be positive"));
        }
        if let Some(l) = self.reg_lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(invalid("reg_lambda must be positive"));
            }
        }
        if self.max_outer == 0 {
            return Err(invalid("max_outer must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Weighted residual at or below `tau_dp * noise_level * |data|`.
    Discrepancy,
    ResidualFloor,
    UpdateFloor,
    /// No step length satisfied the Armijo condition.
    LineSearch,
    /// Iteration budget exhausted; the best iterate is returned.
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    /// Weighted residual norm after the iteration.
    pub residual: f64,
    pub lambda: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussNewtonResult {
    pub kappa: KappaProfile,
    pub stop: StopReason,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
}

/// Per-entry weights `1 / rms_m` of the data, harmonic by harmonic.
fn weights(data: &ObservationSet) -> Vec<f64> {
    let rms = data.rms_per_harmonic();
    let fallback = rms.iter().cloned().fold(0.0, f64::max);
    data.values
        .iter()
        .zip(&rms)
        .flat_map(|(h, &r)| {
            let w = if r > 0.0 {
                1.0 / r
            } else if fallback > 0.0 {
                1.0 / fallback
            } else {
                1.0
            };
            std::iter::repeat_n(w, 2 * h.len())
        })
        .collect()
}

struct Objective<'a> {
    setup: &'a InversionSetup,
    template: &'a KappaProfile,
    data: DVector<f64>,
    w: DVector<f64>,
    scale: f64,
}

impl Objective<'_> {
    fn profile(&self, p: &DVector<f64>) -> Result<KappaProfile> {
        self.template
            .with_values(p.iter().map(|v| v * self.scale).collect())
    }

    fn residual(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let obs = forward_nodal(self.profile(p)?.render(&self.setup.grid), self.setup)?;
        let f = DVector::from_vec(obs.stacked());
        Ok((&self.data - f).component_mul(&self.w))
    }
}

/// Regularized Gauss-Newton on the harmonic-weighted misfit with Armijo
/// backtracking and discrepancy-principle stopping. Only the values of
/// `kappa0` are updated; its breakpoints stay fixed.
pub fn gauss_newton_reconstruct(
    data: &ObservationSet,
    kappa0: &KappaProfile,
    setup: &InversionSetup,
    cfg: &GaussNewtonConfig,
) -> Result<GaussNewtonResult> {
    cfg.validate()?;
    setup.validate()?;
    kappa0.check_domain(&setup.grid)?;
    if data.values.len() != setup.n_harmonics()
        || data.values.iter().any(|h| h.len() != setup.sensors.len())
    {
        return Err(Error::DimensionMismatch {
            what: "observations",
            got: data.values.iter().map(Vec::len).sum(),
            expected: setup.n_harmonics() * setup.sensors.len(),
        });
    }
    if !data.all_finite() {
        return Err(invalid("observations must be finite"));
    }
    let scale = {
        let k = setup.medium.kappa.abs();
        let m = kappa0.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if k > 0.0 {
            k
        } else if m > 0.0 {
            m
        } else {
            1.0
        }
    };
    let obj = Objective {
        setup,
        template: kappa0,
        data: DVector::from_vec(data.stacked()),
        w: DVector::from_vec(weights(data)),
        scale,
    };
    let data_norm = obj.data.component_mul(&obj.w).norm();
    let target = (cfg.discrepancy * data.noise_level * data_norm).max(cfg.residual_floor * data_norm);

    let mut p = DVector::from_iterator(kappa0.n_params(), kappa0.values().iter().map(|v| v / scale));
    let mut r = obj.residual(&p)?;
    let mut phi = r.norm();
    let mut lambda = cfg.reg_lambda.unwrap_or(0.0);
    let mut trace = vec![TraceRow {
        iter: 0,
        residual: phi,
        lambda,
        step: 0.0,
    }];
    let finish = |p: &DVector<f64>, stop, iterations, trace| {
        Ok(GaussNewtonResult {
            kappa: obj.profile(p)?,
            stop,
            iterations,
            trace,
        })
    };

    for it in 1..=cfg.max_outer {
        if phi <= target {
            let stop = if phi <= cfg.discrepancy * data.noise_level * data_norm && data.noise_level > 0.0 {
                StopReason::Discrepancy
            } else {
                StopReason::ResidualFloor
            };
            return finish(&p, stop, it - 1, trace);
        }
        let kappa = obj.profile(&p)?;
        let j_raw = jacobian(&kappa, setup, cfg.jacobian, cfg.fd_step, cfg.execution)?;
        let j: DMatrix<f64> = DMatrix::from_fn(j_raw.nrows(), j_raw.ncols(), |a, b| {
            j_raw[(a, b)] * obj.w[a] * scale
        });
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        if lambda == 0.0 {
            let mean = jtj.diagonal().mean();
            if !(mean > 0.0) {
                return Err(Error::IllConditioned("the Jacobian vanishes".into()));
            }
            lambda = cfg.lambda_factor * mean;
        }
        let mut a = jtj.clone();
        for k in 0..a.nrows() {
            a[(k, k)] += lambda;
        }
        let h = match a.cholesky() {
            Some(c) => c.solve(&g),
            None => {
                return Err(Error::IllConditioned(format!(
                    "Cholesky factorization failed at iteration {it} (lambda {lambda:e})"
                )))
            }
        };
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::IllConditioned(format!("non-finite step at iteration {it}")));
        }
        let slope = g.dot(&h);
        let half0 = 0.5 * phi * phi;
        let mut s = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial = &p + s * &h;
            if let Ok(rt) = obj.residual(&trial) {
                let half = 0.5 * rt.norm_squared();
                if half.is_finite() && half <= half0 - cfg.armijo * s * slope && half < half0 {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            s *= 0.5;
        }
        let Some((p_new, r_new)) = accepted else {
            return finish(&p, StopReason::LineSearch, it - 1, trace);
        };
        let phi_new = r_new.norm();
        let rel_update = s * h.norm() / p_new.norm().max(f64::MIN_POSITIVE);
        trace.push(TraceRow {
            iter: it,
            residual: phi_new,
            lambda,
            step: s,
        });
        if phi_new > 0.5 * phi {
            lambda *= 0.5;
        }
        p = p_new;
        r = r_new;
        phi = phi_new;
        if rel_update < cfg.update_floor {
            return finish(&p, StopReason::UpdateFloor, it, trace);
        }
    }
    if phi <= target {
        let stop = if data.noise_level > 0.0 {
            StopReason::Discrepancy
        } else {
            StopReason::ResidualFloor
        };
        return finish(&p, stop, cfg.max_outer, trace);
    }
    finish(&p, StopReason::MaxIterations, cfg.max_outer, trace)
}

/// `x, kappa_true, kappa_hat` on the grid; `kappa_true` is left empty when unknown.
pub fn write_profile_csv(
    path: &Path,
    grid: &Grid1D,
    truth: Option<&KappaProfile>,
    estimate: &KappaProfile,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(["x", "kappa_true", "kappa_hat"]).map_err(io_err)?;
    for i in 0..grid.n_nodes() {
        let x = grid.x(i);
        w.write_record([
            format!("{x:e}"),
            truth.map_or_else(String::new, |t| format!("{:e}", t.eval(x))),
            format!("{:e}", estimate.eval(x)),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// `iter, residual, lambda, step`
pub fn write_trace_csv(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(["iter", "residual", "lambda", "step"]).map_err(io_err)?;
    for t in trace {
        w.write_record([
            t.iter.to_string(),
            format!("{:e}", t.residual),
            format!("{:e}", t.lambda),
            format!("{:e}", t.step),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
