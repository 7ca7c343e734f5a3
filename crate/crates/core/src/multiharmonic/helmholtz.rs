use num_complex::Complex64;

use crate::domain::{BoundarySpec, Grid1D};
use crate::error::{check_len, invalid, Result};
use crate::stencil::Laplacian1D;
use crate::tridiag::Tridiagonal;

/// `-w^2 m^2 u - (c^2 + i w m b) u_xx` for harmonic `m`, with impedance rows
/// `(i w m beta + gamma) u + du/dnu = 0` and pinned Dirichlet rows.
#[derive(Debug, Clone)]
pub struct HelmholtzOp1D {
    m: usize,
    omega: f64,
    c2: f64,
    b: f64,
    lap: Laplacian1D,
    matrix: Tridiagonal<Complex64>,
}

impl HelmholtzOp1D {
    pub fn new(m: usize, omega: f64, c: f64, b: f64, grid: &Grid1D, bc: &BoundarySpec) -> Result<Self> {
        if m == 0 {
            return Err(invalid("harmonic index starts at 1"));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid(format!("omega must be positive, got {omega}")));
        }
        if !(c > 0.0) || !(b >= 0.0) {
            return Err(invalid("need c > 0 and b >= 0"));
        }
        bc.validate()?;
        let lap = Laplacian1D::new(grid, bc);
        let mut op = Self {
            m,
            omega,
            c2: c * c,
            b,
            lap,
            matrix: Tridiagonal::zeros(grid.n_nodes()),
        };
        op.matrix = op.assemble();
        Ok(op)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn wm(&self) -> f64 {
        self.omega * self.m as f64
    }

    /// `c^2 + i w m b`
    pub fn stiffness(&self) -> Complex64 {
        Complex64::new(self.c2, self.wm() * self.b)
    }

    fn assemble(&self) -> Tridiagonal<Complex64> {
        let n = self.lap.n();
        let wm = self.wm();
        let s = self.stiffness();
        let mut mat = Tridiagonal::zeros(n);
        for d in mat.diag.iter_mut() {
            *d = Complex64::new(-wm * wm, 0.0);
        }
        self.lap.add_stencil(&mut mat, -s);
        let r = self.lap.flux_weight();
        for end in self.lap.robin_ends() {
            mat.diag[end.node] += s * r * Complex64::new(end.gamma, wm * end.beta);
        }
        for i in self.lap.dirichlet_nodes() {
            mat.pin_row(i, Complex64::new(1.0, 0.0));
        }
        mat
    }

    pub fn matrix(&self) -> &Tridiagonal<Complex64> {
        &self.matrix
    }

    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.matrix.apply(u)
    }

    /// Solves `op u = rhs`; Dirichlet entries of `rhs` are ignored (set to 0).
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("Helmholtz right-hand side", rhs.len(), self.lap.n())?;
        let mut r = rhs.to_vec();
        for i in self.lap.dirichlet_nodes() {
            r[i] = Complex64::new(0.0, 0.0);
        }
        self.matrix.solve(&r)
    }
}
