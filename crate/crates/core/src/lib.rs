//! Nonlinear acoustics in one space dimension: Westervelt, Kuznetsov and JMGT
//! time-domain solvers, discrete fractional calculus, singular-limit sweeps,
//! the multiharmonic frequency-domain formulation and nonlinearity-parameter
//! tomography.

pub mod asymptotics;
pub mod domain;
pub mod error;
pub mod exec;
pub mod fracderiv;
pub mod harmonics;
pub mod history;
pub mod inversion;
pub mod multiharmonic;
pub mod norms;
pub mod pulse;
pub mod spectrum;
pub mod stencil;
pub mod timedomain;
pub mod tridiag;

pub use domain::{derive_kappa, BoundaryKind, BoundarySpec, Formulation, Grid1D, Medium, TimeAxis};
pub use error::{Error, Result};
pub use exec::Execution;
pub use history::FieldHistory;
