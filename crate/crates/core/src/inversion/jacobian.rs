use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::multiharmonic::{bm_of, cascade_solve, BmMode};

use super::{forward_nodal, ForwardMode, InversionSetup, KappaProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    /// Central differences with step `fd_step * max(|kappa_j|, kappa_ref)`.
    FiniteDifference,
    /// Sensitivity equations of the cascade, propagated through its
    /// triangular structure (cascade forward mode only).
    Linearized,
}

/// Scale below which a parameter's FD step is taken from the medium.
fn reference_kappa(kappa: &KappaProfile, setup: &InversionSetup) -> f64 {
    let m = kappa.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if setup.medium.kappa.abs() > 0.0 {
        setup.medium.kappa.abs().max(m)
    } else if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// `d(stacked observations) / d(kappa_j)`: `n_obs_real x n_params`.
pub fn jacobian(
    kappa: &KappaProfile,
    setup: &InversionSetup,
    mode: JacobianMode,
    fd_step: f64,
    exec: Execution,
) -> Result<DMatrix<f64>> {
    setup.validate()?;
    kappa.check_domain(&setup.grid)?;
    match mode {
        JacobianMode::FiniteDifference => finite_difference(kappa, setup, fd_step, exec),
        JacobianMode::Linearized => linearized(kappa, setup, exec),
    }
}

fn finite_difference(
    kappa: &KappaProfile,
    setup: &InversionSetup,
    fd_step: f64,
    exec: Execution,
) -> Result<DMatrix<f64>> {
    if !(fd_step > 0.0) {
        return Err(invalid("fd_step must be positive"));
    }
    let reference = reference_kappa(kappa, setup);
    let n = kappa.n_params();
    let cols = exec.try_map_range(n, |j| {
        let h = fd_step * kappa.values()[j].abs().max(reference);
        let shifted = |s: f64| {
            let mut v = kappa.values().to_vec();
            v[j] += s;
            forward_nodal(kappa.with_values(v)?.render(&setup.grid), setup)
        };
        let plus = shifted(h)?.stacked();
        let minus = shifted(-h)?.stacked();
        Ok(plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect::<Vec<f64>>())
    })?;
    Ok(DMatrix::from_fn(setup.n_obs_real(), n, |r, c| cols[c][r]))
}

fn linearized(kappa: &KappaProfile, setup: &InversionSetup, exec: Execution) -> Result<DMatrix<f64>> {
    if setup.mode != ForwardMode::Cascade {
        return Err(invalid(
            "the linearized Jacobian follows the cascade; use finite differences in fixed-point mode",
        ));
    }
    let nodal = kappa.render(&setup.grid);
    let problem = setup.harmonic_problem(nodal.clone());
    let stack = cascade_solve(&problem)?;
    let ops = problem.operators()?;
    let u = stack.harmonics();
    let n_nodes = setup.grid.n_nodes();
    let zero = Complex64::new(0.0, 0.0);
    let cols = exec.try_map_range(kappa.n_params(), |j| {
        let ind = kappa.indicator(j, &setup.grid);
        // du_1 = 0: the fundamental does not see kappa in the cascade
        let mut du: Vec<Vec<Complex64>> = vec![vec![zero; n_nodes]];
        for m in 2..=setup.m_max {
            let w2m2 = (setup.omega * m as f64).powi(2);
            let bm = bm_of(u, m, BmMode::Truncated);
            // dB_m = 1/2 sum_l du_l u_{m-l}
            let mut dbm = vec![zero; n_nodes];
            for l in 1..m {
                for i in 0..n_nodes {
                    dbm[i] += 0.5 * du[l - 1][i] * u[m - l - 1][i];
                }
            }
            let rhs: Vec<Complex64> = (0..n_nodes)
                .map(|i| -w2m2 * (ind[i] * bm[i] + nodal[i] * dbm[i]))
                .collect();
            du.push(ops[m - 1].solve(&rhs)?);
        }
        let col: Vec<f64> = du
            .iter()
            .take(setup.n_harmonics())
            .flat_map(|h| {
                setup
                    .sensors
                    .nodes()
                    .iter()
                    .flat_map(move |&i| [h[i].re, h[i].im])
            })
            .collect();
        Ok(col)
    })?;
    Ok(DMatrix::from_fn(setup.n_obs_real(), kappa.n_params(), |r, c| cols[c][r]))
}
