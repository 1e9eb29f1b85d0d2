//! Independent oracles shared by the kernel tests and the acceptance harness.

#![allow(dead_code)]

use faer::Mat;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use wavebench::spectral::DesignMatrix;

/// Exact `\int_T x^a y^b` by the divergence theorem: the integrand equals
/// `d/dx (x^{a+1} y^b / (a+1))`, so the area integral is the boundary integral of
/// that primitive times the outward normal's x-component. Each edge is a
/// polynomial of degree <= 4 in the edge parameter, integrated exactly by
/// 3-point Gauss-Legendre.
pub fn monomial_integral(p: [[f64; 2]; 3], a: i32, b: i32) -> f64 {
    let gl = [
        (-(0.6f64).sqrt(), 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        ((0.6f64).sqrt(), 5.0 / 9.0),
    ];
    let orient = {
        let cross = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        cross.signum()
    };
    let mut total = 0.0;
    for e in 0..3 {
        let (s, t) = (p[e], p[(e + 1) % 3]);
        // Counter-clockwise line integral of F dy with F = x^{a+1} y^b / (a+1).
        let dy = t[1] - s[1];
        for (xi, w) in gl {
            let u = 0.5 * (xi + 1.0);
            let x = s[0] + u * (t[0] - s[0]);
            let y = s[1] + u * (t[1] - s[1]);
            total += 0.5 * w * x.powi(a + 1) * y.powi(b) / (a + 1) as f64 * dy;
        }
    }
    orient * total
}

pub fn random_triangle(rng: &mut ChaCha8Rng) -> [[f64; 2]; 3] {
    loop {
        let p = [
            [rng.random::<f64>(), rng.random::<f64>()],
            [rng.random::<f64>(), rng.random::<f64>()],
            [rng.random::<f64>(), rng.random::<f64>()],
        ];
        let cross = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        if cross.abs() > 1e-3 {
            return p;
        }
    }
}

pub fn random_system(rng: &mut ChaCha8Rng, m: usize, p: usize) -> (DesignMatrix, Vec<f64>, DMatrix<f64>) {
    let dense = DMatrix::from_fn(m, p, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let values = Mat::from_fn(m, p, |i, j| dense[(i, j)]);
    let y: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    (DesignMatrix { values, points: vec![[0.0, 0.0]; m] }, y, dense)
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}
