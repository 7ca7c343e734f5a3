use crate::domain::Grid1D;
use crate::error::{invalid, Result};

/// Width used for the initial pulse when none is configured [m].
pub const DEFAULT_SIGMA: f64 = 0.01;

/// `amplitude * exp(-(x - center)^2 / (2 sigma^2))` sampled on the grid nodes.
pub fn gaussian_pulse(grid: &Grid1D, center: f64, sigma: f64, amplitude: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("pulse width must be positive, got {sigma}")));
    }
    if !grid.contains(center) {
        return Err(invalid(format!(
            "pulse center {center} outside [0, {}]",
            grid.length()
        )));
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    Ok(grid
        .nodes()
        .into_iter()
        .map(|x| {
            let d = x - center;
            amplitude * (-d * d * inv).exp()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn peak_equals_amplitude() {
        let g = Grid1D::new(0.2, 251).unwrap();
        let p = gaussian_pulse(&g, 0.1, 0.01, 8e4).unwrap();
        assert_eq!(p[125], 8e4);
    }

    #[test]
    fn one_sigma_off_center() {
        let g = Grid1D::new(0.2, 201).unwrap();
        let p = gaussian_pulse(&g, 0.1, 0.01, 1.0).unwrap();
        // node 110 sits at x = 0.11
        assert_relative_eq!(p[110], (-0.5f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(p[110], 0.60653, max_relative = 1e-5);
    }

    #[test]
    fn zero_amplitude_is_zero() {
        let g = Grid1D::new(1.0, 11).unwrap();
        assert!(gaussian_pulse(&g, 0.3, 0.1, 0.0).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_width_and_center() {
        let g = Grid1D::new(1.0, 11).unwrap();
        assert!(gaussian_pulse(&g, 0.5, 0.0, 1.0).is_err());
        assert!(gaussian_pulse(&g, 0.5, -0.1, 1.0).is_err());
        assert!(gaussian_pulse(&g, 1.5, 0.1, 1.0).is_err());
    }
}
