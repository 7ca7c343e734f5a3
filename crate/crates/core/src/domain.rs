//! Medium constants, grids, time axes and boundary descriptions.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Which unknown the quadratic term acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Acoustic pressure `p`; nonlinear factor `1 - kappa*p`.
    PressureWestervelt,
    /// Velocity potential `psi`; nonlinear factor `1 - kappa*psi_t`.
    PotentialWestervelt,
}

/// Physical constants of the propagation medium (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub rho0: f64,
    pub c: f64,
    pub delta: f64,
    pub b_over_a: f64,
    pub tau: f64,
    pub formulation: Formulation,
    pub kappa: f64,
}

/// Coefficient of the quadratic term for the chosen formulation:
/// `(1 + B/2A) / (rho0 c^2)` for pressure, `B / (2 A c^2)` for the potential.
pub fn derive_kappa(rho0: f64, c: f64, b_over_a: f64, formulation: Formulation) -> f64 {
    match formulation {
        Formulation::PressureWestervelt => (1.0 + 0.5 * b_over_a) / (rho0 * c * c),
        Formulation::PotentialWestervelt => 0.5 * b_over_a / (c * c),
    }
}

impl Medium {
    pub fn new(
        rho0: f64,
        c: f64,
        delta: f64,
        b_over_a: f64,
        tau: f64,
        formulation: Formulation,
    ) -> Result<Self> {
        let medium = Self {
            rho0,
            c,
            delta,
            b_over_a,
            tau,
            formulation,
            kappa: derive_kappa(rho0, c, b_over_a, formulation),
        };
        medium.validate()?;
        Ok(medium)
    }

    /// Water at room temperature: c = 1500 m/s, delta = 6e-9 m^2/s,
    /// rho0 = 1000 kg/m^3, B/A = 5.
    pub fn water(formulation: Formulation) -> Self {
        Self::new(1000.0, 1500.0, 6e-9, 5.0, 0.0, formulation).expect("water constants are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) {
            return Err(invalid(format!("rho0 must be positive, got {}", self.rho0)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid(format!("c must be positive, got {}", self.c)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(invalid(format!("delta must be >= 0, got {}", self.delta)));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(invalid(format!("tau must be >= 0, got {}", self.tau)));
        }
        if !self.kappa.is_finite() || !self.b_over_a.is_finite() {
            return Err(invalid("kappa and B/A must be finite"));
        }
        Ok(())
    }

    pub fn c2(&self) -> f64 {
        self.c * self.c
    }

    /// Overrides the derived nonlinearity coefficient.
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }
}

/// Uniform 1-D grid on `[0, length]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    length: f64,
    n_nodes: usize,
}

impl Grid1D {
    pub fn new(length: f64, n_nodes: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(invalid(format!("grid length must be positive, got {length}")));
        }
        if n_nodes < 3 {
            return Err(invalid(format!("grid needs at least 3 nodes, got {n_nodes}")));
        }
        Ok(Self { length, n_nodes })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.n_nodes - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_nodes {
            self.length
        } else {
            i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.x(i)).collect()
    }

    /// Index of the node nearest to `x` (clamped into the domain).
    pub fn nearest_node(&self, x: f64) -> usize {
        let i = (x / self.dx()).round();
        (i.max(0.0) as usize).min(self.n_nodes - 1)
    }

    pub fn contains(&self, x: f64) -> bool {
        (0.0..=self.length).contains(&x)
    }
}

/// Uniform time axis `t_n = n * dt`, `n = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis {
    t_final: f64,
    n_steps: usize,
}

impl TimeAxis {
    pub fn new(t_final: f64, n_steps: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(invalid(format!("t_final must be positive, got {t_final}")));
        }
        if n_steps == 0 {
            return Err(invalid("time axis needs at least one step"));
        }
        Ok(Self { t_final, n_steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }
}

/// Boundary condition at one end of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryKind {
    /// `u = 0`.
    Dirichlet,
    /// `du/dn = 0`.
    Neumann,
    /// `beta u_t + gamma u + du/dn = 0`, `n` the outward normal.
    Impedance { beta: f64, gamma: f64 },
}

impl BoundaryKind {
    pub fn validate(&self) -> Result<()> {
        if let BoundaryKind::Impedance { beta, gamma } = *self {
            if !(beta >= 0.0 && gamma >= 0.0 && beta.is_finite() && gamma.is_finite()) {
                return Err(invalid(format!(
                    "impedance coefficients must be finite and >= 0, got beta={beta}, gamma={gamma}"
                )));
            }
            if beta == 0.0 && gamma == 0.0 {
                return Err(invalid("impedance with beta = gamma = 0 is Neumann; use Neumann"));
            }
        }
        Ok(())
    }

    /// `(beta, gamma)` of the Robin form, `None` for Dirichlet.
    pub fn robin(&self) -> Option<(f64, f64)> {
        match *self {
            BoundaryKind::Dirichlet => None,
            BoundaryKind::Neumann => Some((0.0, 0.0)),
            BoundaryKind::Impedance { beta, gamma } => Some((beta, gamma)),
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryKind::Dirichlet)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
}

impl BoundarySpec {
    pub fn new(left: BoundaryKind, right: BoundaryKind) -> Result<Self> {
        left.validate()?;
        right.validate()?;
        Ok(Self { left, right })
    }

    pub fn dirichlet() -> Self {
        Self {
            left: BoundaryKind::Dirichlet,
            right: BoundaryKind::Dirichlet,
        }
    }

    pub fn neumann() -> Self {
        Self {
            left: BoundaryKind::Neumann,
            right: BoundaryKind::Neumann,
        }
    }

    /// First-order absorbing ends, `beta = 1/c`, for outgoing plane waves.
    pub fn absorbing(c: f64) -> Self {
        let end = BoundaryKind::Impedance {
            beta: 1.0 / c,
            gamma: 0.0,
        };
        Self {
            left: end,
            right: end,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.left.validate()?;
        self.right.validate()
    }
}
