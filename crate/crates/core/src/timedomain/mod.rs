//! Implicit time stepping for the 1-D damped wave, Westervelt, Kuznetsov and
//! JMGT equations.
//!
//! Second-order equations are written as
//!
//! ```text
//! m(u, u_t) u_tt - c^2 u_xx - b u_txx [- b1 D_t^beta u_xx] = N(u, u_t) + r
//! ```
//!
//! with `m = 1 - kappa u` (pressure form) or `m = 1 - kappa u_t` (potential
//! form), and advanced with the average-acceleration scheme on `(u, u_t)`.
//! JMGT adds `tau u_ttt` and is advanced with the trapezoidal rule on
//! `(psi, psi_t, psi_tt)`, `b = delta + tau c^2`. The quadratic term
//! convention is `(kappa/2) (u^2)_tt`, so the degeneracy factor is exactly
//! `1 - kappa u`.

mod export;
mod stepper;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use export::{write_pressure_csv, write_snapshots_csv, SnapshotSidecar};

use crate::domain::{BoundarySpec, Formulation, Grid1D, Medium, TimeAxis};
use crate::error::{check_len, invalid, Error, Result};
use crate::history::FieldHistory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    LinearWave,
    Westervelt,
    Kuznetsov,
    JmgtWestervelt,
    JmgtKuznetsov,
}

impl Equation {
    pub fn is_jmgt(self) -> bool {
        matches!(self, Equation::JmgtWestervelt | Equation::JmgtKuznetsov)
    }

    pub fn has_gradient_term(self) -> bool {
        matches!(self, Equation::Kuznetsov | Equation::JmgtKuznetsov)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Damping {
    None,
    /// `-b u_txx`
    Strong { b: f64 },
    /// `-b D_t^beta u_xx` with the Caputo derivative, `beta` in `(0, 1]`.
    CaputoWismer { b: f64, beta: f64 },
    /// `b` taken from the medium: `delta`, or `delta + tau c^2` for JMGT.
    Thermoviscous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub equation: Equation,
    pub damping: Damping,
    pub formulation: Formulation,
}

impl ModelSpec {
    pub fn new(equation: Equation, damping: Damping, formulation: Formulation) -> Self {
        Self {
            equation,
            damping,
            formulation,
        }
    }

    pub fn jmgt_westervelt() -> Self {
        Self::new(
            Equation::JmgtWestervelt,
            Damping::Thermoviscous,
            Formulation::PotentialWestervelt,
        )
    }

    pub fn tag(&self) -> String {
        let eq = match self.equation {
            Equation::LinearWave => "linear_wave",
            Equation::Westervelt => "westervelt",
            Equation::Kuznetsov => "kuznetsov",
            Equation::JmgtWestervelt => "jmgt_westervelt",
            Equation::JmgtKuznetsov => "jmgt_kuznetsov",
        };
        let form = match self.formulation {
            Formulation::PressureWestervelt => "pressure",
            Formulation::PotentialWestervelt => "potential",
        };
        format!("{eq}/{form}")
    }

    pub fn validate(&self, medium: &Medium) -> Result<()> {
        medium.validate()?;
        let potential = self.formulation == Formulation::PotentialWestervelt;
        if matches!(self.equation, Equation::Kuznetsov) || self.equation.is_jmgt() {
            if !potential {
                return Err(invalid(format!(
                    "{:?} is posed in the velocity potential",
                    self.equation
                )));
            }
        }
        if self.equation != Equation::LinearWave && medium.formulation != self.formulation {
            return Err(invalid(
                "medium kappa was derived for a different formulation than the model",
            ));
        }
        if self.equation.is_jmgt() {
            if !(medium.tau > 0.0) {
                return Err(invalid("JMGT models need a positive relaxation time"));
            }
            if self.damping != Damping::Thermoviscous {
                return Err(invalid("JMGT damping is delta + tau c^2; use Thermoviscous"));
            }
        }
        match self.damping {
            Damping::Strong { b } if !(b >= 0.0 && b.is_finite()) => {
                Err(invalid(format!("strong damping must be >= 0, got {b}")))
            }
            Damping::CaputoWismer { b, beta } => {
                if !(b >= 0.0 && b.is_finite()) {
                    return Err(invalid(format!("fractional damping must be >= 0, got {b}")));
                }
                if !(beta > 0.0 && beta <= 1.0) {
                    return Err(invalid(format!("fractional order must lie in (0,1], got {beta}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Coefficient of `-u_txx`.
    pub fn strong_damping(&self, medium: &Medium) -> f64 {
        match self.damping {
            Damping::None | Damping::CaputoWismer { .. } => 0.0,
            Damping::Strong { b } => b,
            Damping::Thermoviscous if self.equation.is_jmgt() => {
                medium.delta + medium.tau * medium.c2()
            }
            Damping::Thermoviscous => medium.delta,
        }
    }

    pub fn scheme(&self) -> Scheme {
        if self.equation.is_jmgt() {
            Scheme::Trapezoid3rdOrder
        } else {
            Scheme::ImplicitMidpoint
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Average-acceleration (trapezoidal) step on `(u, u_t)`, second order.
    ImplicitMidpoint,
    /// Trapezoidal rule on `(psi, psi_t, psi_tt)` for the third-order equation.
    Trapezoid3rdOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperConfig {
    /// Relative tolerance on the acceleration update of the Picard loop.
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Smallest admissible `1 - kappa u` (or `1 - kappa u_t`).
    pub degeneracy_floor: f64,
    /// Must match the equation when set.
    pub scheme: Option<Scheme>,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            picard_tol: 1e-10,
            picard_max_iter: 50,
            degeneracy_floor: 0.1,
            scheme: None,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.picard_tol > 0.0) {
            return Err(invalid("picard_tol must be positive"));
        }
        if self.picard_max_iter == 0 {
            return Err(invalid("picard_max_iter must be at least 1"));
        }
        if !(self.degeneracy_floor > 0.0 && self.degeneracy_floor < 1.0) {
            return Err(invalid("degeneracy floor must lie in (0,1)"));
        }
        Ok(())
    }
}

/// Volume source `r(t, x)`.
pub type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    /// Initial `psi_tt`; required by JMGT models only.
    pub u2: Option<Vec<f64>>,
}

impl InitialData {
    pub fn zeros(n: usize) -> Self {
        Self {
            u0: vec![0.0; n],
            u1: vec![0.0; n],
            u2: None,
        }
    }
}

#[derive(Clone)]
pub struct Problem {
    pub model: ModelSpec,
    pub medium: Medium,
    pub grid: Grid1D,
    pub time: TimeAxis,
    pub bc: BoundarySpec,
    pub initial: InitialData,
    pub source: Option<SourceFn>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("model", &self.model)
            .field("medium", &self.medium)
            .field("grid", &self.grid)
            .field("time", &self.time)
            .field("bc", &self.bc)
            .field("source", &self.source.is_some())
            .finish_non_exhaustive()
    }
}

impl Problem {
    pub fn validate(&self, config: &StepperConfig) -> Result<()> {
        config.validate()?;
        self.model.validate(&self.medium)?;
        self.bc.validate()?;
        if let Some(s) = config.scheme {
            if s != self.model.scheme() {
                return Err(invalid(format!(
                    "scheme {s:?} does not fit equation {:?}",
                    self.model.equation
                )));
            }
        }
        let n = self.grid.n_nodes();
        check_len("u0", self.initial.u0.len(), n)?;
        check_len("u1", self.initial.u1.len(), n)?;
        match (&self.initial.u2, self.model.equation.is_jmgt()) {
            (Some(u2), true) => check_len("u2", u2.len(), n)?,
            (None, true) => return Err(invalid("JMGT models need initial psi_tt (u2)")),
            (Some(_), false) => {
                return Err(invalid("u2 is only accepted by third-order (JMGT) models"))
            }
            (None, false) => {}
        }
        let finite = |v: &Vec<f64>| v.iter().all(|x| x.is_finite());
        if !finite(&self.initial.u0)
            || !finite(&self.initial.u1)
            || !self.initial.u2.as_ref().map_or(true, finite)
        {
            return Err(invalid("initial data must be finite"));
        }
        Ok(())
    }

    /// Same problem, same grid and data, different medium.
    pub fn with_medium(&self, medium: Medium) -> Self {
        Self {
            medium,
            ..self.clone()
        }
    }
}

/// Runs the full time interval.
pub fn simulate(problem: &Problem, config: &StepperConfig) -> Result<FieldHistory> {
    let run = simulate_until_failure(problem, config)?;
    match run.error {
        None => Ok(run.history),
        Some(e) => Err(e),
    }
}

/// Outcome of a run that may stop early.
#[derive(Debug, Clone)]
pub struct PartialRun {
    /// Snapshots up to the last completed step; its time axis is truncated
    /// accordingly.
    pub history: FieldHistory,
    pub error: Option<Error>,
}

/// Like [`simulate`], but keeps the completed part when a step fails.
/// Fails outright only on invalid input or when not even one step completes.
pub fn simulate_until_failure(problem: &Problem, config: &StepperConfig) -> Result<PartialRun> {
    problem.validate(config)?;
    stepper::run(problem, config)
}

/// `c / sqrt(1 - kappa u)` node-wise.
pub fn effective_wave_speed(u: &[f64], medium: &Medium, floor: f64) -> Result<Vec<f64>> {
    u.iter()
        .enumerate()
        .map(|(i, &v)| {
            let m = 1.0 - medium.kappa * v;
            if m < floor || !m.is_finite() {
                Err(Error::Degeneracy {
                    time: 0.0,
                    node: i,
                    margin: m,
                    floor,
                })
            } else {
                Ok(medium.c / m.sqrt())
            }
        })
        .collect()
}

/// `p = rho0 psi_t` for every snapshot of a potential history.
pub fn pressure_from_potential(history: &FieldHistory) -> Result<Vec<Vec<f64>>> {
    if history.medium.formulation != Formulation::PotentialWestervelt {
        return Err(invalid("pressure_from_potential needs a velocity-potential history"));
    }
    let rho = history.medium.rho0;
    Ok(history
        .ut()
        .iter()
        .map(|s| s.iter().map(|v| rho * v).collect())
        .collect())
}

#[cfg(test)]
mod tests;
