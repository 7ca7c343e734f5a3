use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::domain::Formulation;
use crate::pulse::gaussian_pulse;

fn random_stack(m_max: usize, n: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m_max)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        })
        .collect()
}

/// `m`-th real-form Fourier coefficient of `u^2` by sampling one period.
fn square_coefficient_by_sampling(u_hat: &[Vec<Complex64>], m: usize, node: usize) -> Complex64 {
    let samples = 64;
    let mut acc = ZERO;
    for s in 0..samples {
        let phase = 2.0 * PI * s as f64 / samples as f64;
        let u: f64 = u_hat
            .iter()
            .enumerate()
            .map(|(k, h)| (h[node] * Complex64::from_polar(1.0, (k + 1) as f64 * phase)).re)
            .sum();
        acc += u * u * Complex64::from_polar(1.0, -(m as f64) * phase);
    }
    acc * (2.0 / samples as f64)
}

#[test]
fn single_harmonic_squared() {
    let u = random_stack(2, 5, 1);
    let b = bm_of(&u, 2, BmMode::Truncated);
    for i in 0..5 {
        assert_eq!(b[i], 0.25 * u[0][i] * u[0][i]);
    }
    let zero = vec![vec![ZERO; 5]; 3];
    for m in 1..=3 {
        assert!(bm_of(&zero, m, BmMode::Full).iter().all(|z| *z == ZERO));
    }
}

#[test]
fn full_convolution_matches_sampled_square() {
    // the real-form coefficient of u^2 at harmonic m is 2 B_m once every
    // product lands inside the truncation; compare on a stack whose upper
    // half is zero so no product is cut off
    let mut u = random_stack(8, 3, 7);
    for h in u.iter_mut().skip(4) {
        h.iter_mut().for_each(|z| *z = ZERO);
    }
    for m in 1..=8 {
        let b = bm_of(&u, m, BmMode::Full);
        for node in 0..3 {
            let c = square_coefficient_by_sampling(&u, m, node);
            assert!((2.0 * b[node] - c).norm() < 1e-12 * (1.0 + c.norm()), "m={m}");
        }
    }
}

#[test]
fn truncated_drops_only_conjugate_terms() {
    let u = random_stack(4, 2, 3);
    let full = bm_of(&u, 1, BmMode::Full);
    let trunc = bm_of(&u, 1, BmMode::Truncated);
    assert!(trunc.iter().all(|z| *z == ZERO));
    let expected = 0.5 * (u[0][0].conj() * u[1][0] + u[1][0].conj() * u[2][0] + u[2][0].conj() * u[3][0]);
    assert!((full[0] - expected).norm() < 1e-15);
}

fn water_problem(amplitude: f64, m_max: usize) -> HarmonicProblem {
    let grid = Grid1D::new(0.05, 401).unwrap();
    let medium = Medium::water(Formulation::PressureWestervelt);
    let r: Vec<Complex64> = gaussian_pulse(&grid, 0.01, 1e-3, amplitude)
        .unwrap()
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    HarmonicProblem::uniform(
        2.0 * PI * 1e5,
        m_max,
        r,
        medium,
        grid,
        BoundarySpec::absorbing(medium.c),
    )
}

#[test]
fn linear_medium_has_no_higher_harmonics() {
    let mut p = water_problem(1e12, 3);
    p.kappa = vec![0.0; 401];
    let s = cascade_solve(&p).unwrap();
    assert!(sup(s.harmonic(1)) > 0.0);
    assert!(s.harmonic(2).iter().all(|z| *z == ZERO));
    assert!(s.harmonic(3).iter().all(|z| *z == ZERO));
}

#[test]
fn second_harmonic_solves_its_helmholtz_problem() {
    let p = water_problem(1e12, 2);
    let s = cascade_solve(&p).unwrap();
    let ops = p.operators().unwrap();
    let w2 = p.omega * p.omega;
    let rhs: Vec<Complex64> = s
        .harmonic(1)
        .iter()
        .zip(&p.kappa)
        .map(|(u, k)| -k * w2 * u * u)
        .collect();
    let u2 = ops[1].solve(&rhs).unwrap();
    let err: Vec<Complex64> = u2.iter().zip(s.harmonic(2)).map(|(a, b)| a - b).collect();
    assert!(sup(&err) <= 1e-13 * sup(&u2));
    assert!(sup(&u2) > 0.0);
}

#[test]
fn cascade_scales_linearly_and_quadratically() {
    let a = cascade_solve(&water_problem(1e12, 2)).unwrap();
    let b = cascade_solve(&water_problem(3e12, 2)).unwrap();
    let s1 = sup(a.harmonic(1));
    let s2 = sup(a.harmonic(2));
    for i in 0..401 {
        assert!((b.harmonic(1)[i] - 3.0 * a.harmonic(1)[i]).norm() <= 1e-12 * s1);
        assert!((b.harmonic(2)[i] - 9.0 * a.harmonic(2)[i]).norm() <= 1e-12 * 9.0 * s2);
    }
}

#[test]
fn growing_truncation_keeps_lower_harmonics() {
    let a = cascade_solve(&water_problem(1e12, 3)).unwrap();
    let b = cascade_solve(&water_problem(1e12, 5)).unwrap();
    for m in 1..=3 {
        assert_eq!(a.harmonic(m), b.harmonic(m));
    }
}

#[test]
fn reconstruction_is_real() {
    let s = cascade_solve(&water_problem(1e12, 3)).unwrap();
    for t in [0.0, 1.3e-6, 7.7e-6] {
        let (u, residue) = s.reconstruct_with_residue(t);
        let norm = u.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(residue <= 1e-13 * norm, "{residue} vs {norm}");
    }
}

#[test]
fn fixed_point_without_nonlinearity_is_the_cascade() {
    let mut p = water_problem(1e12, 3);
    p.kappa = vec![0.0; 401];
    let c = cascade_solve(&p).unwrap();
    let f = fixedpoint_solve(&p, &FixedPointConfig::default()).unwrap();
    assert_eq!(f.iterations, 1);
    assert_eq!(f.stack, c);
}

#[test]
fn conjugate_corrections_are_third_order() {
    let mut ratios = Vec::new();
    for amp in [1e17, 2e17, 4e17] {
        let p = water_problem(amp, 3);
        let c = cascade_solve(&p).unwrap();
        let f = fixedpoint_solve(&p, &FixedPointConfig::default()).unwrap();
        let diff: Vec<Complex64> = f
            .stack
            .harmonic(1)
            .iter()
            .zip(c.harmonic(1))
            .map(|(a, b)| a - b)
            .collect();
        ratios.push(sup(&diff) / amp.powi(3));
    }
    for r in &ratios[1..] {
        assert!((r / ratios[0] - 1.0).abs() < 0.05, "{ratios:?}");
    }
}

#[test]
fn overdriven_fixed_point_fails_to_contract() {
    let p = water_problem(1e21, 3);
    let cfg = FixedPointConfig {
        max_iter: 50,
        ..FixedPointConfig::default()
    };
    assert!(matches!(
        fixedpoint_solve(&p, &cfg),
        Err(Error::NonContraction { .. })
    ));
}

#[test]
fn policies_agree() {
    let p = water_problem(3e17, 4);
    let seq = fixedpoint_solve(
        &p,
        &FixedPointConfig {
            execution: Execution::Sequential,
            ..Default::default()
        },
    )
    .unwrap();
    let par = fixedpoint_solve(
        &p,
        &FixedPointConfig {
            execution: Execution::Parallel,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(seq, par);
}

#[test]
fn validation_and_csv() {
    let mut p = water_problem(1.0, 2);
    p.m_max = 0;
    assert!(cascade_solve(&p).is_err());
    let mut p = water_problem(1.0, 2);
    p.kappa.pop();
    assert!(cascade_solve(&p).is_err());
    let p = water_problem(1e12, 2);
    let s = cascade_solve(&p).unwrap();
    assert!(bm_convolution(&s, 3, BmMode::Full).is_err());
    assert_eq!(bm_convolution(&s, 2, BmMode::Truncated).unwrap().len(), 401);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    write_harmonics_csv(&path, &s).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,re_u1,im_u1,re_u2,im_u2");
    assert_eq!(text.lines().count(), 402);
}
