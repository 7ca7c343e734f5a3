//! Discrete Sobolev norms on the uniform grid and the space-time norms used to
//! compare solution histories.

use serde::{Deserialize, Serialize};

use crate::domain::Grid1D;
use crate::history::FieldHistory;

/// Composite trapezoid rule with uniform spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// First derivative: central differences inside, second-order one-sided at the ends.
pub fn first_derivative(u: &[f64], dx: f64) -> Vec<f64> {
    let n = u.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        return d;
    }
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
    for i in 1..n - 1 {
        d[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx);
    }
    d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dx);
    d
}

/// Second derivative with second-order one-sided stencils at the ends
/// (four-point; three nodes fall back to the single interior value).
pub fn second_derivative(u: &[f64], dx: f64) -> Vec<f64> {
    let n = u.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        return d;
    }
    let h2 = dx * dx;
    for i in 1..n - 1 {
        d[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
    }
    if n == 3 {
        d[0] = d[1];
        d[2] = d[1];
    } else {
        d[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h2;
        d[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / h2;
    }
    d
}

fn squared_integral(values: &[f64], dx: f64) -> f64 {
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    trapezoid(&sq, dx)
}

pub fn discrete_h1_norm(field: &[f64], grid: &Grid1D) -> f64 {
    let dx = grid.dx();
    let ux = first_derivative(field, dx);
    (squared_integral(field, dx) + squared_integral(&ux, dx)).sqrt()
}

pub fn discrete_h2_norm(field: &[f64], grid: &Grid1D) -> f64 {
    let dx = grid.dx();
    let ux = first_derivative(field, dx);
    let uxx = second_derivative(field, dx);
    (squared_integral(field, dx) + squared_integral(&ux, dx) + squared_integral(&uxx, dx)).sqrt()
}

/// Space-time norms of a history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    /// `max_n |u(t_n)|_{H1}`
    pub linf_h1: f64,
    /// `(int_0^T |u_tt|_{H1}^2 dt)^(1/2)`
    pub l2_h1_tt: f64,
    /// `max_n max(|u(t_n)|_{H2}, |u_t(t_n)|_{H2})`
    pub w1inf_h2: f64,
    /// `(l2_h1_tt^2 + w1inf_h2^2)^(1/2)`
    pub xbar_w: f64,
}

pub fn norm_report(history: &FieldHistory) -> NormReport {
    let grid = &history.grid;
    let linf_h1 = history
        .u()
        .iter()
        .map(|u| discrete_h1_norm(u, grid))
        .fold(0.0, f64::max);
    let tt_sq: Vec<f64> = history
        .utt()
        .iter()
        .map(|a| discrete_h1_norm(a, grid).powi(2))
        .collect();
    let l2_h1_tt = trapezoid(&tt_sq, history.time.dt()).sqrt();
    let w1inf_h2 = history
        .u()
        .iter()
        .zip(history.ut())
        .map(|(u, v)| discrete_h2_norm(u, grid).max(discrete_h2_norm(v, grid)))
        .fold(0.0, f64::max);
    NormReport {
        linf_h1,
        l2_h1_tt,
        w1inf_h2,
        xbar_w: l2_h1_tt.hypot(w1inf_h2),
    }
}
