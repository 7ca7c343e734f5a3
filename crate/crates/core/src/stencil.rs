//! Second-order finite-difference Laplacian on a uniform 1-D grid.
//!
//! Robin ends (`Neumann`, `Impedance`) use a mirrored ghost node, so the
//! boundary row reads
//!
//! ```text
//! (2 w_1 - 2 w_0) / dx^2 - (2 / dx) * (beta * w_t(0) + gamma * w(0))
//! ```
//!
//! at the left end and symmetrically at the right. Dirichlet rows are never
//! evaluated; solvers pin them.

use crate::domain::{BoundaryKind, BoundarySpec, Grid1D};
use crate::tridiag::{Scalar, Tridiagonal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Laplacian1D {
    n: usize,
    dx: f64,
    pub left: BoundaryKind,
    pub right: BoundaryKind,
}

/// Robin data of one end: node index plus `(beta, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinEnd {
    pub node: usize,
    pub beta: f64,
    pub gamma: f64,
}

impl Laplacian1D {
    pub fn new(grid: &Grid1D, bc: &BoundarySpec) -> Self {
        Self {
            n: grid.n_nodes(),
            dx: grid.dx(),
            left: bc.left,
            right: bc.right,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// `2 / dx`, the weight of the boundary flux in a Robin row.
    pub fn flux_weight(&self) -> f64 {
        2.0 / self.dx
    }

    pub fn robin_ends(&self) -> impl Iterator<Item = RobinEnd> + '_ {
        let left = self.left.robin().map(|(beta, gamma)| RobinEnd {
            node: 0,
            beta,
            gamma,
        });
        let right = self.right.robin().map(|(beta, gamma)| RobinEnd {
            node: self.n - 1,
            beta,
            gamma,
        });
        left.into_iter().chain(right)
    }

    pub fn dirichlet_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        let left = self.left.is_dirichlet().then_some(0);
        let right = self.right.is_dirichlet().then_some(self.n - 1);
        left.into_iter().chain(right)
    }

    pub fn is_dirichlet(&self, i: usize) -> bool {
        (i == 0 && self.left.is_dirichlet()) || (i + 1 == self.n && self.right.is_dirichlet())
    }

    /// Ghost-node stencil without the Robin flux terms, `K w`.
    pub fn apply_stencil<T: Scalar>(&self, w: &[T], out: &mut [T]) {
        let n = self.n;
        let inv = 1.0 / (self.dx * self.dx);
        let s = |v: T| v * from_f64::<T>(inv);
        for i in 1..n - 1 {
            out[i] = s(w[i + 1] - w[i] - w[i] + w[i - 1]);
        }
        let two = from_f64::<T>(2.0);
        out[0] = if self.left.is_dirichlet() {
            T::zero()
        } else {
            s(two * (w[1] - w[0]))
        };
        out[n - 1] = if self.right.is_dirichlet() {
            T::zero()
        } else {
            s(two * (w[n - 2] - w[n - 1]))
        };
    }

    /// Full Laplacian of a real field `w` whose time derivative at the
    /// boundary nodes is `w_t`.
    pub fn apply(&self, w: &[f64], w_t: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply_stencil(w, &mut out);
        let f = self.flux_weight();
        for end in self.robin_ends() {
            let i = end.node;
            out[i] -= f * (end.beta * w_t[i] + end.gamma * w[i]);
        }
        out
    }

    /// Adds `scale * K` into a tridiagonal matrix.
    pub fn add_stencil<T: Scalar>(&self, m: &mut Tridiagonal<T>, scale: T) {
        let n = self.n;
        let inv = from_f64::<T>(1.0 / (self.dx * self.dx));
        let k = scale * inv;
        let two = from_f64::<T>(2.0);
        for i in 1..n - 1 {
            m.lower[i] = m.lower[i] + k;
            m.diag[i] = m.diag[i] - two * k;
            m.upper[i] = m.upper[i] + k;
        }
        if !self.left.is_dirichlet() {
            m.diag[0] = m.diag[0] - two * k;
            m.upper[0] = m.upper[0] + two * k;
        }
        if !self.right.is_dirichlet() {
            m.diag[n - 1] = m.diag[n - 1] - two * k;
            m.lower[n - 1] = m.lower[n - 1] + two * k;
        }
    }
}

fn from_f64<T: Scalar>(x: f64) -> T {
    T::from_real(x)
}
