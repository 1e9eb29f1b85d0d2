//! Numerical kernels checked against independent computations.

mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{monomial_integral, random_system, random_triangle, rel_diff};
use wavebench::metrics::{simpson_weights, triangle_quadrature_points, SimpsonRule};
use wavebench::spectral::RidgeFit;

#[test]
fn divergence_oracle_sanity() {
    let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    assert!((monomial_integral(tri, 0, 0) - 0.5).abs() < 1e-15);
    assert!((monomial_integral(tri, 1, 0) - 1.0 / 6.0).abs() < 1e-15);
    assert!((monomial_integral(tri, 1, 1) - 1.0 / 24.0).abs() < 1e-15);
}

#[test]
fn quadrature_exact_on_cubic_monomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let tri = random_triangle(&mut rng);
        let pts = triangle_quadrature_points(tri);
        for a in 0..=3 {
            for b in 0..=(3 - a) {
                let q: f64 = pts.iter().map(|q| q.weight * q.x.powi(a) * q.y.powi(b)).sum();
                let exact = monomial_integral(tri, a, b);
                assert!((q - exact).abs() <= 1e-14, "x^{a} y^{b}: {q} vs {exact}");
            }
        }
    }
}

#[test]
fn quadrature_not_exact_on_quartic() {
    let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let q: f64 = triangle_quadrature_points(tri).iter().map(|q| q.weight * q.x.powi(4)).sum();
    assert!((q - monomial_integral(tri, 4, 0)).abs() > 1e-6);
}

proptest! {
    #[test]
    fn simpson_exact_on_cubics(c in prop::array::uniform4(-5.0f64..5.0), half in 1usize..60, t_final in 0.1f64..3.0) {
        let nt = 2 * half;
        let w = simpson_weights(nt, t_final, SimpsonRule::Standard).unwrap();
        let f = |t: f64| c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t;
        let approx: f64 = w.iter().enumerate().map(|(i, wi)| wi * f(t_final * i as f64 / nt as f64)).sum();
        let exact = c[0] * t_final + c[1] * t_final.powi(2) / 2.0 + c[2] * t_final.powi(3) / 3.0 + c[3] * t_final.powi(4) / 4.0;
        prop_assert!((approx - exact).abs() <= 1e-13 * (1.0 + exact.abs()), "{} vs {}", approx, exact);
    }
}

#[test]
fn halved_first_weight_is_not_cubic_exact() {
    let w = simpson_weights(10, 1.0, SimpsonRule::HalvedFirst).unwrap();
    let approx: f64 = w.iter().sum();
    assert!((approx - 1.0).abs() > 1e-3);
}

#[test]
fn odd_simpson_count_rejected() {
    assert!(simpson_weights(3, 1.0, SimpsonRule::Standard).is_err());
    assert!(simpson_weights(0, 1.0, SimpsonRule::Standard).is_err());
}

#[test]
fn ridge_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for &(m, p) in &[(20, 5), (60, 60), (120, 80), (200, 100), (50, 90)] {
        let (phi, y, dense) = random_system(&mut rng, m, p);
        let fit = RidgeFit::new(&phi, &y).unwrap();
        for &lambda in &[1e-3, 0.1, 1.0, 10.0] {
            let w = fit.weights(lambda).unwrap();
            let gram = dense.transpose() * &dense + DMatrix::identity(p, p) * lambda;
            let rhs = dense.transpose() * DVector::from_vec(y.clone());
            let oracle = gram.cholesky().expect("SPD").solve(&rhs);
            let d = rel_diff(&w, oracle.as_slice());
            assert!(d <= 1e-10, "{m}x{p}, lambda {lambda}: relative difference {d}");
        }
    }
}

#[test]
fn gcv_and_edof_match_dense_hat_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &(m, p) in &[(30, 10), (100, 40), (200, 100), (40, 70)] {
        let (phi, y, dense) = random_system(&mut rng, m, p);
        let fit = RidgeFit::new(&phi, &y).unwrap();
        let yv = DVector::from_vec(y.clone());
        for &lambda in &[1e-4, 1e-2, 1.0, 30.0] {
            // I - H = lambda (Phi Phi^T + lambda I)^{-1}, which avoids the
            // cancellation in m - tr H when tr H is close to m.
            let resolvent = (&dense * dense.transpose() + DMatrix::identity(m, m) * lambda).try_inverse().unwrap();
            let resid = &resolvent * &yv * lambda;
            let denom = lambda * resolvent.trace();
            let oracle = resid.norm_squared() / (denom * denom);
            let score = fit.gcv_score(lambda).unwrap();
            assert!((score - oracle).abs() <= 1e-10 * oracle, "{m}x{p} lambda {lambda}: {score} vs {oracle}");

            let gram = dense.transpose() * &dense + DMatrix::identity(p, p) * lambda;
            let hat = &dense * gram.try_inverse().unwrap() * dense.transpose();
            let edof = fit.effective_dof(lambda).unwrap();
            assert!((edof - hat.trace()).abs() <= 1e-10 * hat.trace(), "{edof} vs {}", hat.trace());
        }
    }
}

#[test]
fn unregularized_edof_is_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (phi, y, _) = random_system(&mut rng, 50, 20);
    let fit = RidgeFit::new(&phi, &y).unwrap();
    assert_eq!(fit.effective_dof(0.0).unwrap(), 20.0);
    assert!(fit.gcv_score(0.0).is_err());
}
