//! Multiharmonic (harmonic balance) formulation of the pressure Westervelt
//! equation with a time-periodic source `r = Re(r_hat(x) e^{i w t})`.
//!
//! With `u = Re sum_m u_m e^{i m w t}` the harmonics satisfy
//!
//! ```text
//! -w^2 m^2 u_m - (c^2 + i w m b) u_xx,m = [m = 1] r_hat - kappa w^2 m^2 B_m(u)
//! B_m = 1/4 sum_{l=1}^{m-1} u_l u_{m-l} + 1/2 sum_{j>=1} conj(u_j) u_{m+j}
//! ```
//!
//! The cascade keeps only the first sum and is solved by forward
//! substitution; the fixed-point solver keeps both.

mod helmholtz;

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use helmholtz::HelmholtzOp1D;

use crate::domain::{BoundarySpec, Grid1D, Medium};
use crate::error::{check_len, invalid, Error, Result};
use crate::exec::Execution;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Complex spatial amplitudes `u_m`, `m = 1..=M` (stored at index `m - 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicStack {
    pub omega: f64,
    pub grid: Grid1D,
    pub medium: Medium,
    /// Node-wise nonlinearity coefficient used to build the stack.
    pub kappa: Vec<f64>,
    u_hat: Vec<Vec<Complex64>>,
}

impl HarmonicStack {
    pub fn new(
        omega: f64,
        grid: Grid1D,
        medium: Medium,
        kappa: Vec<f64>,
        u_hat: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if u_hat.is_empty() {
            return Err(invalid("a harmonic stack needs at least one harmonic"));
        }
        check_len("kappa", kappa.len(), grid.n_nodes())?;
        for h in &u_hat {
            check_len("harmonic", h.len(), grid.n_nodes())?;
        }
        Ok(Self {
            omega,
            grid,
            medium,
            kappa,
            u_hat,
        })
    }

    /// Truncation order `M`.
    pub fn m_max(&self) -> usize {
        self.u_hat.len()
    }

    /// `u_m` for `1 <= m <= M`.
    pub fn harmonic(&self, m: usize) -> &[Complex64] {
        &self.u_hat[m - 1]
    }

    pub fn harmonics(&self) -> &[Vec<Complex64>] {
        &self.u_hat
    }

    /// `u(x, t) = Re sum_m u_m e^{i m w t}` together with the largest
    /// imaginary residue of the symmetric (conjugate-paired) sum.
    pub fn reconstruct_with_residue(&self, t: f64) -> (Vec<f64>, f64) {
        let n = self.grid.n_nodes();
        let mut out = vec![ZERO; n];
        for (k, h) in self.u_hat.iter().enumerate() {
            let e = Complex64::from_polar(1.0, (k + 1) as f64 * self.omega * t);
            for (o, z) in out.iter_mut().zip(h) {
                let w = z * e;
                *o += 0.5 * (w + w.conj());
            }
        }
        let residue = out.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        (out.into_iter().map(|z| z.re).collect(), residue)
    }

    pub fn reconstruct(&self, t: f64) -> Vec<f64> {
        self.reconstruct_with_residue(t).0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BmMode {
    /// Auto-convolution sum only.
    Truncated,
    /// Adds the conjugate coupling `1/2 sum_j conj(u_j) u_{m+j}`.
    Full,
}

/// Node-wise `B_m` of a set of harmonics (`u_hat[k]` is harmonic `k + 1`).
pub fn bm_of(u_hat: &[Vec<Complex64>], m: usize, mode: BmMode) -> Vec<Complex64> {
    let big_m = u_hat.len();
    let n = u_hat.first().map_or(0, Vec::len);
    let mut out = vec![ZERO; n];
    for l in 1..m {
        if l > big_m || m - l > big_m {
            continue;
        }
        let (a, b) = (&u_hat[l - 1], &u_hat[m - l - 1]);
        for i in 0..n {
            out[i] += 0.25 * a[i] * b[i];
        }
    }
    if mode == BmMode::Full {
        for j in 1..=big_m.saturating_sub(m) {
            let (a, b) = (&u_hat[j - 1], &u_hat[m + j - 1]);
            for i in 0..n {
                out[i] += 0.5 * a[i].conj() * b[i];
            }
        }
    }
    out
}

/// `B_m` of a stack, `1 <= m <= M`.
pub fn bm_convolution(stack: &HarmonicStack, m: usize, mode: BmMode) -> Result<Vec<Complex64>> {
    if m == 0 || m > stack.m_max() {
        return Err(invalid(format!("harmonic {m} outside 1..={}", stack.m_max())));
    }
    Ok(bm_of(&stack.u_hat, m, mode))
}

/// Data of a time-harmonic problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicProblem {
    pub omega: f64,
    /// Truncation order `M >= 1`.
    pub m_max: usize,
    /// Complex source profile of the fundamental.
    pub r_hat: Vec<Complex64>,
    pub medium: Medium,
    /// Node-wise `kappa(x)`.
    pub kappa: Vec<f64>,
    pub grid: Grid1D,
    pub bc: BoundarySpec,
}

impl HarmonicProblem {
    /// Uniform `kappa` taken from the medium.
    pub fn uniform(
        omega: f64,
        m_max: usize,
        r_hat: Vec<Complex64>,
        medium: Medium,
        grid: Grid1D,
        bc: BoundarySpec,
    ) -> Self {
        let kappa = vec![medium.kappa; grid.n_nodes()];
        Self {
            omega,
            m_max,
            r_hat,
            medium,
            kappa,
            grid,
            bc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_max == 0 {
            return Err(invalid("truncation order must be at least 1"));
        }
        self.medium.validate()?;
        let n = self.grid.n_nodes();
        check_len("r_hat", self.r_hat.len(), n)?;
        check_len("kappa", self.kappa.len(), n)?;
        if self.kappa.iter().any(|k| !k.is_finite()) || self.r_hat.iter().any(|z| !z.is_finite()) {
            return Err(invalid("kappa and r_hat must be finite"));
        }
        Ok(())
    }

    /// Strong damping coefficient of the Helmholtz symbol.
    pub fn damping(&self) -> f64 {
        self.medium.delta
    }

    pub fn operators(&self) -> Result<Vec<HelmholtzOp1D>> {
        (1..=self.m_max)
            .map(|m| {
                HelmholtzOp1D::new(m, self.omega, self.medium.c, self.damping(), &self.grid, &self.bc)
            })
            .collect()
    }

    /// Right-hand side of harmonic `m` given `B_m`.
    pub fn rhs(&self, m: usize, bm: &[Complex64]) -> Vec<Complex64> {
        let w2m2 = (self.omega * m as f64).powi(2);
        (0..self.grid.n_nodes())
            .map(|i| {
                let src = if m == 1 { self.r_hat[i] } else { ZERO };
                src - self.kappa[i] * w2m2 * bm[i]
            })
            .collect()
    }

    fn stack(&self, u_hat: Vec<Vec<Complex64>>) -> HarmonicStack {
        HarmonicStack {
            omega: self.omega,
            grid: self.grid,
            medium: self.medium,
            kappa: self.kappa.clone(),
            u_hat,
        }
    }
}

/// Forward substitution through the triangular system without conjugate terms.
pub fn cascade_solve(problem: &HarmonicProblem) -> Result<HarmonicStack> {
    problem.validate()?;
    let ops = problem.operators()?;
    let mut u_hat: Vec<Vec<Complex64>> = Vec::with_capacity(problem.m_max);
    for (k, op) in ops.iter().enumerate() {
        let m = k + 1;
        let bm = if m == 1 {
            vec![ZERO; problem.grid.n_nodes()]
        } else {
            bm_of(&u_hat, m, BmMode::Truncated)
        };
        u_hat.push(op.solve(&problem.rhs(m, &bm))?);
    }
    Ok(problem.stack(u_hat))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Under-relaxation `theta` in `(0, 1]`.
    pub relaxation: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            relaxation: 0.5,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult {
    pub stack: HarmonicStack,
    pub iterations: usize,
    /// Last relative update.
    pub update: f64,
}

/// Max modulus; NaN entries propagate.
fn sup(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, |a, b| if b.is_nan() { b } else { a.max(b) })
}

/// Full coupled system by relaxed fixed-point iteration, started from the
/// cascade solution.
pub fn fixedpoint_solve(problem: &HarmonicProblem, cfg: &FixedPointConfig) -> Result<FixedPointResult> {
    problem.validate()?;
    if !(cfg.relaxation > 0.0 && cfg.relaxation <= 1.0) {
        return Err(invalid("relaxation must lie in (0, 1]"));
    }
    if !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(invalid("need tol > 0 and max_iter >= 1"));
    }
    let ops = problem.operators()?;
    let mut u_hat = cascade_solve(problem)?.u_hat;
    let theta = cfg.relaxation;
    let mut update = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let current = &u_hat;
        let next = cfg.execution.try_map_range(problem.m_max, |k| {
            let bm = bm_of(current, k + 1, BmMode::Full);
            ops[k].solve(&problem.rhs(k + 1, &bm))
        })?;
        update = 0.0;
        for (new, old) in next.iter().zip(&u_hat) {
            let diff: Vec<Complex64> = new.iter().zip(old).map(|(a, b)| a - b).collect();
            let d = sup(&diff);
            let s = sup(new);
            let r = if s > 0.0 { d / s } else { d };
            update = if r.is_finite() { update.max(r) } else { f64::INFINITY };
        }
        if !update.is_finite() {
            return Err(Error::NonContraction {
                iterations: it,
                update,
            });
        }
        for (new, old) in next.into_iter().zip(u_hat.iter_mut()) {
            for (o, z) in old.iter_mut().zip(new) {
                *o = theta * z + (1.0 - theta) * *o;
            }
        }
        if update < cfg.tol {
            return Ok(FixedPointResult {
                stack: problem.stack(u_hat),
                iterations: it,
                update,
            });
        }
    }
    Err(Error::NonContraction {
        iterations: cfg.max_iter,
        update,
    })
}

/// `x, re_u1, im_u1, re_u2, im_u2, ...`
pub fn write_harmonics_csv(path: &Path, stack: &HarmonicStack) -> Result<()> {
    let err = |e: csv::Error| invalid(format!("write failed: {e}"));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    let mut header = vec!["x".to_string()];
    for m in 1..=stack.m_max() {
        header.push(format!("re_u{m}"));
        header.push(format!("im_u{m}"));
    }
    w.write_record(&header).map_err(err)?;
    for i in 0..stack.grid.n_nodes() {
        let mut row = vec![format!("{:e}", stack.grid.x(i))];
        for h in &stack.u_hat {
            row.push(format!("{:e}", h[i].re));
            row.push(format!("{:e}", h[i].im));
        }
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| invalid(format!("write failed: {e}")))
}

#[cfg(test)]
mod tests;
