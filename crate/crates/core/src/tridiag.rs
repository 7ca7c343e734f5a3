//! Tridiagonal systems by direct elimination (Thomas algorithm), real or complex.

use std::ops::{Add, Div, Mul, Sub};

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};

/// Relative pivot threshold below which the system is reported singular.
pub const PIVOT_TOL: f64 = 1e-14;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Row `i` reads `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`;
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> Tridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![T::zero(); n],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Replaces row `i` with the identity row.
    pub fn pin_row(&mut self, i: usize, one: T) {
        self.lower[i] = T::zero();
        self.upper[i] = T::zero();
        self.diag[i] = one;
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s = s + self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s = s + self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Largest absolute entry, used to scale the pivot test.
    pub fn max_entry(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut m = self.diag[i].magnitude();
                if i > 0 {
                    m = m.max(self.lower[i].magnitude());
                }
                if i + 1 < n {
                    m = m.max(self.upper[i].magnitude());
                }
                m
            })
            .fold(0.0, f64::max)
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.len();
        check_len("right-hand side", rhs.len(), n)?;
        let scale = self.max_entry();
        if n == 0 {
            return Ok(Vec::new());
        }
        let tol = PIVOT_TOL * scale;
        let mut c = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];

        let mut pivot = self.diag[0];
        if !(pivot.magnitude() > tol) {
            return Err(Error::SingularOperator {
                row: 0,
                pivot: pivot.magnitude(),
            });
        }
        c[0] = self.upper[0] / pivot;
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i] * c[i - 1];
            if !(pivot.magnitude() > tol) {
                return Err(Error::SingularOperator {
                    row: i,
                    pivot: pivot.magnitude(),
                });
            }
            if i + 1 < n {
                c[i] = self.upper[i] / pivot;
            }
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] = d[i] - c[i] * d[i + 1];
        }
        Ok(d)
    }
}
