//! Higher-harmonic generation by a time-periodic interior source.
//!
//! The time-domain pressure Westervelt equation is driven by
//! `r(t, x) = ramp(t) * Re(r_hat(x) e^{i w t})` with absorbing ends, run to
//! steady state, and the sensor signal is Fourier-analysed over the final
//! periods. The same source profile feeds the multiharmonic solvers, so both
//! sides of the comparison see one problem.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundarySpec, Formulation, Grid1D, Medium, TimeAxis};
use crate::error::{invalid, Result};
use crate::multiharmonic::HarmonicProblem;
use crate::pulse::gaussian_pulse;
use crate::spectrum::harmonic_amplitudes;
use crate::timedomain::{
    simulate, Damping, Equation, InitialData, ModelSpec, Problem, SourceFn, StepperConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExcitationConfig {
    pub f0_hz: f64,
    /// Peak of the Gaussian source profile [Pa/s^2].
    pub amplitude: f64,
    pub length_m: f64,
    pub n_nodes: usize,
    pub source_center_m: f64,
    pub source_width_m: f64,
    pub sensor_m: f64,
    /// Total simulated periods; the last `analysis_periods` are analysed.
    pub periods: usize,
    pub analysis_periods: usize,
    pub ramp_periods: f64,
    pub steps_per_period: usize,
    pub m_max: usize,
}

impl Default for ExcitationConfig {
    fn default() -> Self {
        Self {
            f0_hz: 1e5,
            amplitude: 1e17,
            length_m: 0.05,
            n_nodes: 401,
            source_center_m: 0.01,
            source_width_m: 1e-3,
            sensor_m: 0.04,
            periods: 10,
            analysis_periods: 2,
            ramp_periods: 2.0,
            steps_per_period: 200,
            m_max: 3,
        }
    }
}

impl ExcitationConfig {
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.f0_hz
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.length_m, self.n_nodes)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f0_hz > 0.0) || !(self.amplitude >= 0.0) {
            return Err(invalid("need f0 > 0 and amplitude >= 0"));
        }
        if self.steps_per_period < 8 || self.periods == 0 {
            return Err(invalid("need at least 8 steps per period and one period"));
        }
        if self.analysis_periods == 0 || self.analysis_periods > self.periods {
            return Err(invalid("analysis window must lie inside the run"));
        }
        if self.m_max == 0 {
            return Err(invalid("m_max must be at least 1"));
        }
        if !(self.ramp_periods >= 0.0) {
            return Err(invalid("ramp length must be >= 0"));
        }
        let grid = self.grid()?;
        if !grid.contains(self.sensor_m) || !grid.contains(self.source_center_m) {
            return Err(invalid("sensor and source must lie in the domain"));
        }
        Ok(())
    }

    /// Real source profile `r_hat(x)`.
    pub fn source_profile(&self) -> Result<Vec<f64>> {
        gaussian_pulse(&self.grid()?, self.source_center_m, self.source_width_m, self.amplitude)
    }

    /// Frequency-domain counterpart with `kappa` from the medium.
    pub fn harmonic_problem(&self, medium: &Medium) -> Result<HarmonicProblem> {
        let r_hat = self
            .source_profile()?
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect();
        Ok(HarmonicProblem::uniform(
            self.omega(),
            self.m_max,
            r_hat,
            *medium,
            self.grid()?,
            BoundarySpec::absorbing(medium.c),
        ))
    }

    /// Time-domain counterpart.
    pub fn time_problem(&self, medium: &Medium) -> Result<Problem> {
        self.validate()?;
        if medium.formulation != Formulation::PressureWestervelt {
            return Err(invalid("harmonic generation runs use the pressure formulation"));
        }
        let grid = self.grid()?;
        let omega = self.omega();
        let period = 1.0 / self.f0_hz;
        let n_steps = self.periods * self.steps_per_period;
        let profile = Arc::new(self.source_profile()?);
        let dx = grid.dx();
        let ramp = self.ramp_periods * period;
        let source: SourceFn = Arc::new(move |t, x| {
            let i = (x / dx).round() as usize;
            let env = if t >= ramp || ramp == 0.0 {
                1.0
            } else {
                (0.5 * PI * t / ramp).sin().powi(2)
            };
            env * profile[i] * (omega * t).cos()
        });
        Ok(Problem {
            model: ModelSpec::new(Equation::Westervelt, Damping::Thermoviscous, Formulation::PressureWestervelt),
            medium: *medium,
            grid,
            time: TimeAxis::new(self.periods as f64 * period, n_steps)?,
            bc: BoundarySpec::absorbing(medium.c),
            initial: InitialData::zeros(grid.n_nodes()),
            source: Some(source),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSpectrum {
    pub sensor_node: usize,
    /// `c_m`, `m = 1..=m_max`, of the steady-state sensor signal.
    pub amplitudes: Vec<Complex64>,
}

/// Steady-state harmonic amplitudes at the sensor from a time-domain run.
pub fn time_domain_spectrum(
    cfg: &ExcitationConfig,
    medium: &Medium,
    stepper: &StepperConfig,
) -> Result<SensorSpectrum> {
    let problem = cfg.time_problem(medium)?;
    let h = simulate(&problem, stepper)?;
    let node = problem.grid.nearest_node(cfg.sensor_m);
    let signal: Vec<f64> = h.u().iter().map(|s| s[node]).collect();
    let amplitudes = harmonic_amplitudes(
        &signal,
        0.0,
        problem.time.dt(),
        cfg.omega(),
        cfg.analysis_periods,
        cfg.m_max,
    )?;
    Ok(SensorSpectrum {
        sensor_node: node,
        amplitudes,
    })
}
