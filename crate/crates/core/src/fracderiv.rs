//! Discrete fractional calculus on uniform time grids: the L1 scheme for the
//! Djrbashian-Caputo derivative, product integration for the Abel integral,
//! and empirical checks of the discrete chain-rule inequality and of Abel
//! coercivity.
//!
//! All histories are full (`u(t_0), ..., u(t_n)`); there is no memory
//! compression, so evaluating at step `n` costs `O(n)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::Execution;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("time step must be positive, got {dt}")))
    }
}

fn check_history(history: &[f64]) -> Result<()> {
    if history.len() < 2 {
        Err(invalid("fractional operators need at least two history samples"))
    } else {
        Ok(())
    }
}

/// L1 weights `w_k = (k+1)^(1-alpha) - k^(1-alpha)` and the prefactor
/// `dt^(-alpha) / Gamma(2-alpha)`.
#[derive(Debug, Clone)]
pub struct CaputoL1Kernel {
    alpha: f64,
    dt: f64,
    scale: f64,
    weights: Vec<f64>,
}

impl CaputoL1Kernel {
    /// Builds the kernel with weights cached for histories of up to
    /// `capacity + 1` samples. Longer histories compute the extra weights on
    /// the fly.
    pub fn new(alpha: f64, dt: f64, capacity: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("Caputo order must lie in (0,1), got {alpha}")));
        }
        check_dt(dt)?;
        let e = 1.0 - alpha;
        let weights = (0..capacity.max(1))
            .map(|k| ((k + 1) as f64).powf(e) - (k as f64).powf(e))
            .collect();
        Ok(Self {
            alpha,
            dt,
            scale: dt.powf(-alpha) / gamma(2.0 - alpha),
            weights,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `dt^(-alpha) / Gamma(2 - alpha)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn gamma_factor(&self) -> f64 {
        1.0 / gamma(2.0 - self.alpha)
    }

    pub fn weight(&self, k: usize) -> f64 {
        match self.weights.get(k) {
            Some(&w) => w,
            None => {
                let e = 1.0 - self.alpha;
                ((k + 1) as f64).powf(e) - (k as f64).powf(e)
            }
        }
    }

    pub fn cached_len(&self) -> usize {
        self.weights.len()
    }

    /// Memory part of the L1 sum at the newest sample: everything except the
    /// `k = 0` term, `sum_{k=1}^{n-1} w_k (u^{n-k} - u^{n-k-1})`, unscaled.
    pub fn memory_sum(&self, history: &[f64]) -> f64 {
        let n = history.len() - 1;
        (1..n)
            .map(|k| self.weight(k) * (history[n - k] - history[n - k - 1]))
            .sum()
    }
}

/// L1 approximation of the Caputo derivative at the last sample of `history`:
/// `dt^(-alpha)/Gamma(2-alpha) * sum_{k=0}^{n-1} w_k (u^{n-k} - u^{n-k-1})`.
pub fn caputo_l1(history: &[f64], kernel: &CaputoL1Kernel) -> Result<f64> {
    check_history(history)?;
    let n = history.len() - 1;
    let s: f64 = (0..n)
        .map(|k| kernel.weight(k) * (history[n - k] - history[n - k - 1]))
        .sum();
    Ok(kernel.scale * s)
}

/// `(u^n - u^{n-1}) / dt`, the `alpha -> 1` limit of the L1 scheme.
pub fn backward_difference(history: &[f64], dt: f64) -> Result<f64> {
    check_history(history)?;
    check_dt(dt)?;
    let n = history.len() - 1;
    Ok((history[n] - history[n - 1]) / dt)
}

/// Caputo derivative of order `alpha` in `(0, 1]`; `alpha = 1` takes the
/// backward-difference limit.
pub fn caputo_derivative(history: &[f64], alpha: f64, dt: f64) -> Result<f64> {
    if alpha == 1.0 {
        return backward_difference(history, dt);
    }
    let kernel = CaputoL1Kernel::new(alpha, dt, history.len())?;
    caputo_l1(history, &kernel)
}

/// Product-integration weights for `s^(gamma-1) / Gamma(gamma)` with the
/// integrand frozen at the right end of each step:
/// `a_k = dt^gamma ((k+1)^gamma - k^gamma) / Gamma(gamma+1)`.
#[derive(Debug, Clone)]
pub struct AbelKernel {
    order: f64,
    dt: f64,
    weights: Vec<f64>,
}

impl AbelKernel {
    pub fn new(order: f64, dt: f64, capacity: usize) -> Result<Self> {
        if !(order > 0.0 && order < 1.0) {
            return Err(invalid(format!("Abel order must lie in (0,1), got {order}")));
        }
        check_dt(dt)?;
        let kernel = Self {
            order,
            dt,
            weights: Vec::new(),
        };
        let weights = (0..capacity.max(1)).map(|k| kernel.raw_weight(k)).collect();
        Ok(Self { weights, ..kernel })
    }

    fn raw_weight(&self, k: usize) -> f64 {
        let g = self.order;
        self.dt.powf(g) * (((k + 1) as f64).powf(g) - (k as f64).powf(g)) / gamma(g + 1.0)
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights.get(k).copied().unwrap_or_else(|| self.raw_weight(k))
    }
}

/// `I^gamma u (t_n) ~ sum_{k=0}^{n-1} a_k u^{n-k}`; first order for continuous `u`,
/// exact for constants.
pub fn abel_integral(history: &[f64], kernel: &AbelKernel) -> Result<f64> {
    check_history(history)?;
    let n = history.len() - 1;
    Ok((0..n).map(|k| kernel.weight(k) * history[n - k]).sum())
}

/// `I^gamma u` at every sample `t_0..t_n` (zero at `t_0`).
pub fn abel_integral_series(history: &[f64], kernel: &AbelKernel) -> Result<Vec<f64>> {
    check_history(history)?;
    let mut out = vec![0.0; history.len()];
    for n in 1..history.len() {
        out[n] = abel_integral(&history[..=n], kernel)?;
    }
    Ok(out)
}

/// Riemann-Liouville derivative as the backward difference of
/// `I^(1-alpha) u`. Not used by any solver; it is singular at `t_0` and does
/// not annihilate constants.
pub fn riemann_liouville(history: &[f64], alpha: f64, dt: f64) -> Result<f64> {
    let kernel = AbelKernel::new(1.0 - alpha, dt, history.len())?;
    let series = abel_integral_series(history, &kernel)?;
    backward_difference(&series, dt)
}

/// Seeded random walks `w_0 ~ N(0,1)`, `w_{n+1} = w_n + sqrt(dt) N(0,1)`.
pub fn random_walks(n_samples: usize, n_points: usize, dt: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = dt.sqrt();
    (0..n_samples)
        .map(|_| {
            let mut w = Vec::with_capacity(n_points);
            let mut x: f64 = rng.sample(StandardNormal);
            for _ in 0..n_points {
                w.push(x);
                let z: f64 = rng.sample(StandardNormal);
                x += step * z;
            }
            w
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainRuleReport {
    /// `min over samples and n of w D^a w - 1/2 D^a (w^2)`.
    pub min_margin: f64,
    /// Same minimum with each margin divided by that sample's `max |w|^2`.
    pub min_scaled_margin: f64,
    pub evaluations: usize,
}

/// Evaluates `w(t_n) D^a w(t_n) - 1/2 D^a(w^2)(t_n)` with the L1 scheme at
/// every `n >= 1` of every sample.
pub fn check_chain_rule_inequality(
    samples: &[Vec<f64>],
    alpha: f64,
    dt: f64,
    exec: Execution,
) -> Result<ChainRuleReport> {
    let longest = samples.iter().map(Vec::len).max().unwrap_or(0);
    let kernel = CaputoL1Kernel::new(alpha, dt, longest)?;
    let per_sample = exec.map(samples, |w| -> Result<(f64, f64, usize)> {
        let sq: Vec<f64> = w.iter().map(|v| v * v).collect();
        let scale = sq.iter().copied().fold(0.0, f64::max);
        let mut min_m = f64::INFINITY;
        let mut min_s = f64::INFINITY;
        let mut count = 0;
        for n in 1..w.len() {
            let d_w = caputo_l1(&w[..=n], &kernel)?;
            let d_sq = caputo_l1(&sq[..=n], &kernel)?;
            let margin = w[n] * d_w - 0.5 * d_sq;
            min_m = min_m.min(margin);
            if scale > 0.0 {
                min_s = min_s.min(margin / scale);
            } else {
                min_s = min_s.min(margin);
            }
            count += 1;
        }
        Ok((min_m, min_s, count))
    });
    let mut report = ChainRuleReport {
        min_margin: f64::INFINITY,
        min_scaled_margin: f64::INFINITY,
        evaluations: 0,
    };
    for r in per_sample {
        let (m, s, c) = r?;
        report.min_margin = report.min_margin.min(m);
        report.min_scaled_margin = report.min_scaled_margin.min(s);
        report.evaluations += c;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    /// `min over samples of sum_n I^(1-a) w(t_n) w(t_n) dt`.
    pub min_form: f64,
    /// Same minimum with each form divided by `sum_n w(t_n)^2 dt`.
    pub min_scaled_form: f64,
}

/// Discrete Abel quadratic form for each sample, summed over `t_1..t_N`.
pub fn abel_quadratic_form(w: &[f64], kernel: &AbelKernel) -> Result<f64> {
    let series = abel_integral_series(w, kernel)?;
    Ok(series
        .iter()
        .zip(w)
        .skip(1)
        .map(|(i, v)| i * v)
        .sum::<f64>()
        * kernel.dt())
}

pub fn check_abel_coercivity(
    samples: &[Vec<f64>],
    alpha: f64,
    dt: f64,
    exec: Execution,
) -> Result<CoercivityReport> {
    let longest = samples.iter().map(Vec::len).max().unwrap_or(0);
    let kernel = AbelKernel::new(1.0 - alpha, dt, longest)?;
    let forms = exec.map(samples, |w| -> Result<(f64, f64)> {
        let form = abel_quadratic_form(w, &kernel)?;
        let norm_sq: f64 = w.iter().skip(1).map(|v| v * v).sum::<f64>() * dt;
        Ok((form, if norm_sq > 0.0 { form / norm_sq } else { form }))
    });
    let mut report = CoercivityReport {
        min_form: f64::INFINITY,
        min_scaled_form: f64::INFINITY,
    };
    for r in forms {
        let (f, s) = r?;
        report.min_form = report.min_form.min(f);
        report.min_scaled_form = report.min_scaled_form.min(s);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn samples(f: impl Fn(f64) -> f64, n: usize, t_end: f64) -> (Vec<f64>, f64) {
        let dt = t_end / n as f64;
        ((0..=n).map(|k| f(k as f64 * dt)).collect(), dt)
    }

    #[test]
    fn weights_start_at_one_and_decrease() {
        let k = CaputoL1Kernel::new(0.4, 0.01, 100).unwrap();
        assert_eq!(k.weight(0), 1.0);
        for j in 0..150 {
            assert!(k.weight(j) > k.weight(j + 1));
            assert!(k.weight(j + 1) > 0.0);
        }
        assert_relative_eq!(k.gamma_factor(), 1.0 / gamma(1.6));
    }

    #[test]
    fn constants_have_zero_caputo_derivative() {
        let k = CaputoL1Kernel::new(0.3, 0.1, 10).unwrap();
        assert_eq!(caputo_l1(&[7.0; 40], &k).unwrap(), 0.0);
    }

    #[test]
    fn linear_function_is_exact() {
        // D^a t = t^(1-a) / Gamma(2-a)
        let (h, dt) = samples(|t| t, 64, 1.0);
        let k = CaputoL1Kernel::new(0.5, dt, h.len()).unwrap();
        let exact = 1.0 / gamma(1.5);
        assert_relative_eq!(exact, 1.12838, max_relative = 1e-5);
        assert_relative_eq!(caputo_l1(&h, &k).unwrap(), exact, max_relative = 1e-12);
    }

    #[test]
    fn square_converges() {
        // D^a t^2 = 2 t^(2-a) / Gamma(3-a)
        let exact = 2.0 / gamma(2.5);
        assert_relative_eq!(exact, 1.50451, max_relative = 1e-5);
        let (h, dt) = samples(|t| t * t, 4000, 1.0);
        let k = CaputoL1Kernel::new(0.5, dt, h.len()).unwrap();
        assert_relative_eq!(caputo_l1(&h, &k).unwrap(), exact, max_relative = 1e-5);
    }

    #[test]
    fn order_out_of_range_rejected() {
        assert!(CaputoL1Kernel::new(0.0, 0.1, 4).is_err());
        assert!(CaputoL1Kernel::new(1.0, 0.1, 4).is_err());
        assert!(CaputoL1Kernel::new(1.2, 0.1, 4).is_err());
        assert!(AbelKernel::new(1.0, 0.1, 4).is_err());
        assert!(AbelKernel::new(-0.5, 0.1, 4).is_err());
        assert!(caputo_l1(&[1.0], &CaputoL1Kernel::new(0.5, 0.1, 4).unwrap()).is_err());
    }

    #[test]
    fn alpha_one_is_backward_difference() {
        let h = [0.0, 0.3, 1.1];
        assert_relative_eq!(caputo_derivative(&h, 1.0, 0.5).unwrap(), 1.6);
    }

    #[test]
    fn approaches_backward_difference_as_alpha_to_one() {
        let f = |t: f64| (2.0 * t).sin() + t * t;
        let mut last = f64::INFINITY;
        for (alpha, n) in [(0.9, 200), (0.99, 400), (0.999, 800)] {
            let (h, dt) = samples(f, n, 1.0);
            let d = caputo_derivative(&h, alpha, dt).unwrap();
            let bd = backward_difference(&h, dt).unwrap();
            let gap = (d - bd).abs();
            assert!(gap < last, "alpha {alpha}: gap {gap} did not shrink");
            last = gap;
        }
        assert!(last < 2e-2, "gap at alpha=0.999: {last}");
    }

    #[test]
    fn caputo_is_linear() {
        let (u, dt) = samples(|t| t.sin(), 100, 2.0);
        let (v, _) = samples(|t| (3.0 * t).exp(), 100, 2.0);
        let k = CaputoL1Kernel::new(0.7, dt, 101).unwrap();
        let (a, b) = (2.5, -0.75);
        let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let lhs = caputo_l1(&mix, &k).unwrap();
        let rhs = a * caputo_l1(&u, &k).unwrap() + b * caputo_l1(&v, &k).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn abel_integrates_constants_exactly() {
        for (g, n) in [(0.2, 17), (0.5, 100), (0.9, 3)] {
            let dt = 0.037;
            let k = AbelKernel::new(g, dt, n + 1).unwrap();
            let t = n as f64 * dt;
            let exact = t.powf(g) / gamma(g + 1.0);
            assert_relative_eq!(abel_integral(&vec![1.0; n + 1], &k).unwrap(), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn abel_of_linear_function() {
        // I^g t = t^(1+g) / Gamma(2+g)
        let exact = 1.0 / gamma(2.5);
        assert_relative_eq!(exact, 0.75225, max_relative = 1e-5);
        let mut errs = Vec::new();
        for n in [100, 200, 400] {
            let (h, dt) = samples(|t| t, n, 1.0);
            let k = AbelKernel::new(0.5, dt, h.len()).unwrap();
            errs.push((abel_integral(&h, &k).unwrap() - exact).abs());
        }
        assert!(errs[2] < 5e-3);
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 0.9);
        }
    }

    #[test]
    fn abel_of_zero_is_zero() {
        let k = AbelKernel::new(0.5, 0.1, 10).unwrap();
        assert_eq!(abel_integral(&[0.0; 10], &k).unwrap(), 0.0);
    }

    #[test]
    fn abel_semigroup_first_order() {
        let (g1, g2) = (0.3, 0.4);
        let f = |t: f64| 1.0 + t * t;
        let mut errs = Vec::new();
        for n in [50, 100, 200, 400] {
            let (h, dt) = samples(f, n, 1.0);
            let k1 = AbelKernel::new(g1, dt, h.len()).unwrap();
            let k2 = AbelKernel::new(g2, dt, h.len()).unwrap();
            let k12 = AbelKernel::new(g1 + g2, dt, h.len()).unwrap();
            let inner = abel_integral_series(&h, &k1).unwrap();
            let nested = abel_integral(&inner, &k2).unwrap();
            let direct = abel_integral(&h, &k12).unwrap();
            errs.push((nested - direct).abs());
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 0.8, "semigroup order {order}");
        }
    }

    #[test]
    fn riemann_liouville_of_constant_is_nonzero() {
        // RL derivative of 1 is t^(-a)/Gamma(1-a)
        let (h, dt) = samples(|_| 1.0, 1000, 1.0);
        let rl = riemann_liouville(&h, 0.5, dt).unwrap();
        assert_relative_eq!(rl, 1.0 / gamma(0.5), max_relative = 1e-3);
        assert!(caputo_derivative(&h, 0.5, dt).unwrap() == 0.0);
    }

    #[test]
    fn chain_rule_margin_zero_for_constant() {
        let r = check_chain_rule_inequality(&[vec![3.0; 50]], 0.5, 0.1, Execution::Sequential).unwrap();
        assert_eq!(r.min_margin, 0.0);
        assert_eq!(r.evaluations, 49);
    }

    #[test]
    fn chain_rule_holds_for_identity() {
        let (w, dt) = samples(|t| t, 200, 1.0);
        let r = check_chain_rule_inequality(&[w], 0.5, dt, Execution::Sequential).unwrap();
        assert!(r.min_margin >= 0.0, "{r:?}");
    }

    #[test]
    fn coercivity_zero_and_one() {
        let dt = 0.01;
        let alpha = 0.4;
        let r = check_abel_coercivity(&[vec![0.0; 100]], alpha, dt, Execution::Sequential).unwrap();
        assert_eq!(r.min_form, 0.0);

        let n = 100;
        let r = check_abel_coercivity(&[vec![1.0; n + 1]], alpha, dt, Execution::Sequential).unwrap();
        let exact: f64 = (1..=n)
            .map(|k| (k as f64 * dt).powf(1.0 - alpha) / gamma(2.0 - alpha))
            .sum::<f64>()
            * dt;
        assert!(r.min_form > 0.0);
        assert_relative_eq!(r.min_form, exact, max_relative = 1e-12);
    }

    #[test]
    fn random_walks_are_seeded() {
        let a = random_walks(3, 20, 0.01, 7);
        let b = random_walks(3, 20, 0.01, 7);
        let c = random_walks(3, 20, 0.01, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
