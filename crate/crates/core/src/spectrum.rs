//! Harmonic amplitudes of periodic time series.

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Complex amplitudes `c_m`, `m = 1..=m_max`, such that
/// `u(t) ~ Re sum_m c_m e^{i m omega t}`, from the last `periods` full
/// periods of a series sampled every `dt` starting at `t0`.
///
/// The window must hold an integer number of samples per period; the
/// discrete Fourier sum is then exact for trigonometric polynomials of
/// degree below half the samples per period.
pub fn harmonic_amplitudes(
    samples: &[f64],
    t0: f64,
    dt: f64,
    omega: f64,
    periods: usize,
    m_max: usize,
) -> Result<Vec<Complex64>> {
    if !(dt > 0.0 && omega > 0.0) || periods == 0 {
        return Err(invalid("spectrum needs dt > 0, omega > 0 and at least one period"));
    }
    let per_period = 2.0 * std::f64::consts::PI / omega / dt;
    let n_per = per_period.round();
    if (per_period - n_per).abs() > 1e-6 * per_period || n_per < 1.0 {
        return Err(invalid(format!(
            "the period is not a whole number of steps ({per_period:.6})"
        )));
    }
    let window = n_per as usize * periods;
    if window > samples.len() {
        return Err(invalid(format!(
            "window of {window} samples exceeds the series length {}",
            samples.len()
        )));
    }
    let start = samples.len() - window;
    let scale = 2.0 / window as f64;
    Ok((1..=m_max)
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &u) in samples[start..].iter().enumerate() {
                let t = t0 + (start + k) as f64 * dt;
                acc += u * Complex64::from_polar(1.0, -(m as f64) * omega * t);
            }
            acc * scale
        })
        .collect())
}
