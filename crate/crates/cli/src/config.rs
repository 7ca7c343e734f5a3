//! Run configuration. Every key carries its SI unit; unknown keys are
//! rejected. Missing sections and keys take the water defaults.

use nlac::asymptotics::{default_delta_values, default_tau_values};
use nlac::inversion::GaussNewtonConfig;
use nlac::multiharmonic::FixedPointConfig;
use nlac::timedomain::{Equation, StepperConfig};
use nlac::{BoundarySpec, Execution, Formulation, Medium};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub medium: MediumConfig,
    pub stepper: StepperConfig,
    pub execution: Execution,
    pub simulate: SimulateConfig,
    pub sweep_tau: SweepTauConfig,
    pub sweep_delta: SweepDeltaConfig,
    pub harmonics: HarmonicsConfig,
    pub cascade: CascadeConfig,
    pub invert: InvertConfig,
    pub frac_selftest: FracSelftestConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            medium: MediumConfig::default(),
            stepper: StepperConfig::default(),
            execution: Execution::default(),
            simulate: SimulateConfig::default(),
            sweep_tau: SweepTauConfig::default(),
            sweep_delta: SweepDeltaConfig::default(),
            harmonics: HarmonicsConfig::default(),
            cascade: CascadeConfig::default(),
            invert: InvertConfig::default(),
            frac_selftest: FracSelftestConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MediumConfig {
    pub rho0_kg_per_m3: f64,
    pub c_m_per_s: f64,
    pub delta_m2_per_s: f64,
    pub b_over_a: f64,
    /// Relaxation time for the third-order models.
    pub tau_s: f64,
    /// Replaces the coefficient derived from B/A when set (units follow the
    /// formulation: 1/Pa for pressure, s^2/m^2 for the potential).
    pub kappa_override: Option<f64>,
}

impl Default for MediumConfig {
    fn default() -> Self {
        Self {
            rho0_kg_per_m3: 1000.0,
            c_m_per_s: 1500.0,
            delta_m2_per_s: 6e-9,
            b_over_a: 5.0,
            tau_s: 0.0,
            kappa_override: None,
        }
    }
}

impl MediumConfig {
    pub fn medium(&self, formulation: Formulation) -> nlac::Result<Medium> {
        let m = Medium::new(
            self.rho0_kg_per_m3,
            self.c_m_per_s,
            self.delta_m2_per_s,
            self.b_over_a,
            self.tau_s,
            formulation,
        )?;
        Ok(match self.kappa_override {
            Some(k) => m.with_kappa(k),
            None => m,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryChoice {
    Dirichlet,
    Neumann,
    /// First-order absorbing, `beta = 1/c`.
    Absorbing,
}

impl BoundaryChoice {
    pub fn spec(self, c: f64) -> BoundarySpec {
        match self {
            BoundaryChoice::Dirichlet => BoundarySpec::dirichlet(),
            BoundaryChoice::Neumann => BoundarySpec::neumann(),
            BoundaryChoice::Absorbing => BoundarySpec::absorbing(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingConfig {
    None,
    Strong { b_m2_per_s: f64 },
    CaputoWismer { b_m2_per_s: f64, beta: f64 },
    Thermoviscous,
}

impl DampingConfig {
    pub fn damping(self) -> nlac::timedomain::Damping {
        use nlac::timedomain::Damping;
        match self {
            DampingConfig::None => Damping::None,
            DampingConfig::Strong { b_m2_per_s } => Damping::Strong { b: b_m2_per_s },
            DampingConfig::CaputoWismer { b_m2_per_s, beta } => Damping::CaputoWismer {
                b: b_m2_per_s,
                beta,
            },
            DampingConfig::Thermoviscous => Damping::Thermoviscous,
        }
    }
}

/// Gaussian initial data `A exp(-(x - center)^2 / (2 sigma^2))` per field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub center_m: f64,
    pub sigma_m: f64,
    /// Peak of `u(0)` in the unit of the unknown.
    pub u0_amplitude: f64,
    /// Peak of `u_t(0)` (unknown per second).
    pub u1_amplitude: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            center_m: 0.1,
            sigma_m: 0.01,
            u0_amplitude: 0.0,
            u1_amplitude: 8e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub equation: Equation,
    pub damping: DampingConfig,
    pub formulation: Formulation,
    pub length_m: f64,
    pub n_nodes: usize,
    pub t_final_s: f64,
    pub n_steps: usize,
    pub boundary: BoundaryChoice,
    pub initial: InitialConfig,
    pub snapshot_stride: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            equation: Equation::Westervelt,
            damping: DampingConfig::Thermoviscous,
            formulation: Formulation::PotentialWestervelt,
            length_m: 0.2,
            n_nodes: 251,
            t_final_s: 45e-6,
            n_steps: 800,
            boundary: BoundaryChoice::Dirichlet,
            initial: InitialConfig::default(),
            snapshot_stride: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepTauConfig {
    pub n_nodes: usize,
    pub n_steps: usize,
    /// Strictly decreasing.
    pub values_s: Vec<f64>,
}

impl Default for SweepTauConfig {
    fn default() -> Self {
        Self {
            n_nodes: 251,
            n_steps: 800,
            values_s: default_tau_values(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepDeltaConfig {
    pub n_nodes: usize,
    pub n_steps: usize,
    pub values_m2_per_s: Vec<f64>,
}

impl Default for SweepDeltaConfig {
    fn default() -> Self {
        Self {
            n_nodes: 251,
            n_steps: 800,
            values_m2_per_s: default_delta_values(),
        }
    }
}

/// Periodic interior source `amplitude * g(x) * cos(w t)` on `[0, length]`
/// with absorbing ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarmonicsConfig {
    pub f0_hz: f64,
    pub amplitude_pa_per_s2: f64,
    pub length_m: f64,
    pub n_nodes: usize,
    pub source_center_m: f64,
    pub source_width_m: f64,
    pub sensor_m: f64,
    pub periods: usize,
    pub analysis_periods: usize,
    pub ramp_periods: f64,
    pub steps_per_period: usize,
    pub m_max: usize,
}

impl Default for HarmonicsConfig {
    fn default() -> Self {
        Self::from_excitation(&nlac::harmonics::ExcitationConfig::default())
    }
}

impl HarmonicsConfig {
    fn from_excitation(e: &nlac::harmonics::ExcitationConfig) -> Self {
        Self {
            f0_hz: e.f0_hz,
            amplitude_pa_per_s2: e.amplitude,
            length_m: e.length_m,
            n_nodes: e.n_nodes,
            source_center_m: e.source_center_m,
            source_width_m: e.source_width_m,
            sensor_m: e.sensor_m,
            periods: e.periods,
            analysis_periods: e.analysis_periods,
            ramp_periods: e.ramp_periods,
            steps_per_period: e.steps_per_period,
            m_max: e.m_max,
        }
    }

    pub fn excitation(&self) -> nlac::harmonics::ExcitationConfig {
        nlac::harmonics::ExcitationConfig {
            f0_hz: self.f0_hz,
            amplitude: self.amplitude_pa_per_s2,
            length_m: self.length_m,
            n_nodes: self.n_nodes,
            source_center_m: self.source_center_m,
            source_width_m: self.source_width_m,
            sensor_m: self.sensor_m,
            periods: self.periods,
            analysis_periods: self.analysis_periods,
            ramp_periods: self.ramp_periods,
            steps_per_period: self.steps_per_period,
            m_max: self.m_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicSolver {
    Cascade,
    FixedPoint,
}

/// Frequency-domain solve of the `harmonics` excitation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CascadeConfig {
    pub solver: HarmonicSolver,
    pub fixed_point: FixedPointConfig,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            solver: HarmonicSolver::Cascade,
            fixed_point: FixedPointConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvertConfig {
    pub f0_hz: f64,
    pub length_m: f64,
    pub n_nodes: usize,
    pub source_center_m: f64,
    pub source_width_m: f64,
    pub amplitude_pa_per_s2: f64,
    pub boundary: BoundaryChoice,
    pub sensors_m: Vec<f64>,
    pub breakpoints_m: Vec<f64>,
    /// Synthetic truth, one value per piece [1/Pa].
    pub kappa_true_per_pa: Vec<f64>,
    /// Start of the iteration; `None` starts from the medium value everywhere.
    pub kappa_start_per_pa: Option<Vec<f64>>,
    pub noise_level: f64,
    pub noise_seed: u64,
    pub solver: HarmonicSolver,
    pub fixed_point: FixedPointConfig,
    pub gauss_newton: GaussNewtonConfig,
}

impl Default for InvertConfig {
    fn default() -> Self {
        let k = Medium::water(Formulation::PressureWestervelt).kappa;
        Self {
            f0_hz: 1e5,
            length_m: 0.05,
            n_nodes: 401,
            source_center_m: 0.008,
            source_width_m: 1e-3,
            amplitude_pa_per_s2: 1e17,
            boundary: BoundaryChoice::Absorbing,
            sensors_m: (0..16).map(|i| 0.0025 + 0.003 * i as f64).collect(),
            breakpoints_m: vec![0.02, 0.03],
            kappa_true_per_pa: vec![k, 2.0 * k, k],
            kappa_start_per_pa: None,
            noise_level: 0.01,
            noise_seed: 1,
            solver: HarmonicSolver::Cascade,
            fixed_point: FixedPointConfig::default(),
            gauss_newton: GaussNewtonConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FracSelftestConfig {
    pub alphas: Vec<f64>,
    pub n_samples: usize,
    pub n_points: usize,
    pub seed: u64,
}

impl Default for FracSelftestConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.25, 0.5, 0.75],
            n_samples: 1000,
            n_points: 160,
            seed: 2024,
        }
    }
}

/// Sets `path` (dot-separated) in `doc` to `raw`, parsed as JSON when
/// possible and as a string otherwise. Intermediate objects are created.
pub fn apply_override(doc: &mut Value, path: &str, raw: &str) -> Result<(), String> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(format!("malformed override key '{path}'"));
    }
    let mut cur = doc;
    for k in &keys[..keys.len() - 1] {
        if !cur.is_object() {
            return Err(format!("override '{path}': '{k}' is not inside an object"));
        }
        cur = cur
            .as_object_mut()
            .expect("checked above")
            .entry(k.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    match cur.as_object_mut() {
        Some(obj) => {
            obj.insert(keys[keys.len() - 1].to_string(), value);
            Ok(())
        }
        None => Err(format!("override '{path}' does not address an object field")),
    }
}
