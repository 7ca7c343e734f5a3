//! Nonlinearity-parameter tomography in 1-D: recover a piecewise-constant
//! `kappa(x)` from the first harmonics sampled at a sensor array.

mod gauss_newton;
mod jacobian;

use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use gauss_newton::{
    gauss_newton_reconstruct, write_profile_csv, write_trace_csv, GaussNewtonConfig,
    GaussNewtonResult, StopReason, TraceRow,
};
pub use jacobian::{jacobian, JacobianMode};

use crate::domain::{BoundarySpec, Grid1D, Medium};
use crate::error::{check_len, invalid, Result};
use crate::multiharmonic::{cascade_solve, fixedpoint_solve, FixedPointConfig, HarmonicProblem};

/// Right-continuous step function: `values[k]` on
/// `[breakpoints[k-1], breakpoints[k])`, with the outer pieces extended to
/// the domain ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl KappaProfile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(invalid(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("breakpoints must be strictly increasing"));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(invalid("breakpoints and values must be finite"));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_params(&self) -> usize {
        self.values.len()
    }

    /// Same breakpoints, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.breakpoints.clone(), values)
    }

    /// Breakpoints must lie strictly inside the domain.
    pub fn check_domain(&self, grid: &Grid1D) -> Result<()> {
        if self
            .breakpoints
            .iter()
            .any(|&b| !(b > 0.0 && b < grid.length()))
        {
            return Err(invalid("breakpoints must lie inside (0, L)"));
        }
        Ok(())
    }

    /// Index of the piece containing `x`.
    pub fn piece(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.piece(x)]
    }

    pub fn render(&self, grid: &Grid1D) -> Vec<f64> {
        (0..grid.n_nodes()).map(|i| self.eval(grid.x(i))).collect()
    }

    /// Node-wise indicator of piece `j`.
    pub fn indicator(&self, j: usize, grid: &Grid1D) -> Vec<f64> {
        (0..grid.n_nodes())
            .map(|i| if self.piece(grid.x(i)) == j { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Sensor positions snapped to grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorArray {
    positions: Vec<f64>,
    nodes: Vec<usize>,
}

impl SensorArray {
    pub fn new(grid: &Grid1D, positions: &[f64]) -> Result<Self> {
        if positions.is_empty() {
            return Err(invalid("sensor array is empty"));
        }
        if positions.iter().any(|&x| !grid.contains(x)) {
            return Err(invalid("sensor outside the domain"));
        }
        let nodes: Vec<usize> = positions.iter().map(|&x| grid.nearest_node(x)).collect();
        Ok(Self {
            positions: nodes.iter().map(|&i| grid.x(i)).collect(),
            nodes,
        })
    }

    /// `count` sensors evenly spaced on `[from, to]`.
    pub fn uniform(grid: &Grid1D, from: f64, to: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(invalid("sensor array is empty"));
        }
        let pos: Vec<f64> = if count == 1 {
            vec![from]
        } else {
            (0..count)
                .map(|k| from + (to - from) * k as f64 / (count - 1) as f64)
                .collect()
        };
        Self::new(grid, &pos)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForwardMode {
    Cascade,
    FixedPoint(FixedPointConfig),
}

/// Everything of the forward problem except `kappa`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionSetup {
    pub omega: f64,
    /// At least 2.
    pub m_max: usize,
    pub r_hat: Vec<Complex64>,
    pub medium: Medium,
    pub grid: Grid1D,
    pub bc: BoundarySpec,
    pub sensors: SensorArray,
    pub mode: ForwardMode,
}

impl InversionSetup {
    pub fn validate(&self) -> Result<()> {
        if self.m_max < 2 {
            return Err(invalid("inversion needs at least two harmonics"));
        }
        check_len("r_hat", self.r_hat.len(), self.grid.n_nodes())?;
        if self.sensors.nodes().iter().any(|&i| i >= self.grid.n_nodes()) {
            return Err(invalid("sensor node outside the grid"));
        }
        Ok(())
    }

    pub fn harmonic_problem(&self, kappa: Vec<f64>) -> HarmonicProblem {
        HarmonicProblem {
            omega: self.omega,
            m_max: self.m_max,
            r_hat: self.r_hat.clone(),
            medium: self.medium,
            kappa,
            grid: self.grid,
            bc: self.bc,
        }
    }

    /// Observed harmonics: the first two.
    pub fn n_harmonics(&self) -> usize {
        2
    }

    /// Length of the stacked real observation vector.
    pub fn n_obs_real(&self) -> usize {
        2 * self.n_harmonics() * self.sensors.len()
    }
}

/// Complex amplitudes `values[m-1][s]` for `m = 1, 2` at every sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub values: Vec<Vec<Complex64>>,
    /// Relative noise level that was applied (0 for clean data).
    pub noise_level: f64,
    pub rng_seed: Option<u64>,
}

impl ObservationSet {
    /// Harmonic-major, `(Re, Im)` interleaved per sensor.
    pub fn stacked(&self) -> Vec<f64> {
        self.values
            .iter()
            .flat_map(|h| h.iter().flat_map(|z| [z.re, z.im]))
            .collect()
    }

    /// Root-mean-square modulus of each harmonic.
    pub fn rms_per_harmonic(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|h| {
                if h.is_empty() {
                    0.0
                } else {
                    (h.iter().map(|z| z.norm_sqr()).sum::<f64>() / h.len() as f64).sqrt()
                }
            })
            .collect()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().flatten().all(|z| z.is_finite())
    }
}

/// Solves the harmonic system for `kappa` and samples `u_1, u_2` at the sensors.
pub fn forward_map(kappa: &KappaProfile, setup: &InversionSetup) -> Result<ObservationSet> {
    setup.validate()?;
    kappa.check_domain(&setup.grid)?;
    forward_nodal(kappa.render(&setup.grid), setup)
}

pub(crate) fn forward_nodal(kappa: Vec<f64>, setup: &InversionSetup) -> Result<ObservationSet> {
    let problem = setup.harmonic_problem(kappa);
    let stack = match setup.mode {
        ForwardMode::Cascade => cascade_solve(&problem)?,
        ForwardMode::FixedPoint(cfg) => fixedpoint_solve(&problem, &cfg)?.stack,
    };
    let values = (1..=setup.n_harmonics())
        .map(|m| {
            let h = stack.harmonic(m);
            setup.sensors.nodes().iter().map(|&i| h[i]).collect()
        })
        .collect();
    Ok(ObservationSet {
        values,
        noise_level: 0.0,
        rng_seed: None,
    })
}

/// Adds `level * rms_m * (xi_re + i xi_im) / sqrt(2)` to every entry of
/// harmonic `m`, `xi` standard normal from a ChaCha8 stream seeded by `seed`.
pub fn add_noise(obs: &ObservationSet, level: f64, seed: u64) -> Result<ObservationSet> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(invalid(format!("noise level must be >= 0, got {level}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rms = obs.rms_per_harmonic();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let values = obs
        .values
        .iter()
        .zip(&rms)
        .map(|(h, &r)| {
            h.iter()
                .map(|z| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    z + level * r * s * Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    Ok(ObservationSet {
        values,
        noise_level: level,
        rng_seed: Some(seed),
    })
}

pub(crate) fn io_err(e: impl std::fmt::Display) -> crate::error::Error {
    invalid(format!("write failed: {e}"))
}

/// `sensor_x, harmonic, re, im`
pub fn write_observations_csv(path: &Path, obs: &ObservationSet, sensors: &SensorArray) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(["sensor_x", "harmonic", "re", "im"]).map_err(io_err)?;
    for (m, h) in obs.values.iter().enumerate() {
        for (x, z) in sensors.positions().iter().zip(h) {
            w.write_record([
                format!("{x:e}"),
                (m + 1).to_string(),
                format!("{:e}", z.re),
                format!("{:e}", z.im),
            ])
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}
