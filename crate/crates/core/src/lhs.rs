//! Latin hypercube designs on the rectangle.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Where a point is placed inside its stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LhsMode {
    /// Stratum centers.
    Midpoint,
    /// Uniform draw inside each stratum.
    #[default]
    Jittered,
}

impl std::str::FromStr for LhsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(LhsMode::Midpoint),
            "jittered" => Ok(LhsMode::Jittered),
            other => Err(Error::invalid(format!("unknown sampling mode {other:?}"))),
        }
    }
}

/// `m` points in `[0, l1] x [0, l2]` with exactly one point in each of the
/// `m` equal-width strata of either coordinate.
///
/// The i-th point occupies x-stratum `i`; its y-stratum is drawn from a seeded
/// random permutation. The same `(m, seed, mode)` always yields the same design.
pub fn lhs_sample(m: usize, l1: f64, l2: f64, seed: u64, mode: LhsMode) -> Result<Vec<[f64; 2]>> {
    ensure(m >= 1, || "a Latin hypercube needs at least one point".into())?;
    ensure(l1 > 0.0 && l2 > 0.0, || format!("domain lengths must be positive, got {l1} x {l2}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairing: Vec<usize> = (0..m).collect();
    pairing.shuffle(&mut rng);
    Ok(lhs_with_pairing(&pairing, l1, l2, mode, &mut rng))
}

pub(crate) fn lhs_with_pairing(pairing: &[usize], l1: f64, l2: f64, mode: LhsMode, rng: &mut impl Rng) -> Vec<[f64; 2]> {
    let m = pairing.len() as f64;
    let mut offset = || match mode {
        LhsMode::Midpoint => 0.5,
        LhsMode::Jittered => rng.random::<f64>(),
    };
    pairing
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let x = (i as f64 + offset()) / m * l1;
            let y = (j as f64 + offset()) / m * l2;
            [x, y]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn occupancy(points: &[[f64; 2]], axis: usize, len: f64) -> Vec<usize> {
        let m = points.len();
        let mut counts = vec![0; m];
        for p in points {
            let s = ((p[axis] / len) * m as f64).floor() as usize;
            counts[s.min(m - 1)] += 1;
        }
        counts
    }

    #[test]
    fn identity_pairing_midpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts = lhs_with_pairing(&[0, 1, 2, 3], 1.0, 1.0, LhsMode::Midpoint, &mut rng);
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(pts.iter().map(|p| p[1]).collect::<Vec<_>>(), xs);
    }

    #[test]
    fn zero_points_rejected() {
        assert!(lhs_sample(0, 1.0, 1.0, 1, LhsMode::Jittered).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let a = lhs_sample(100, 1.0, 2.0, 42, LhsMode::Jittered).unwrap();
        let b = lhs_sample(100, 1.0, 2.0, 42, LhsMode::Jittered).unwrap();
        let c = lhs_sample(100, 1.0, 2.0, 43, LhsMode::Jittered).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    proptest! {
        #[test]
        fn one_point_per_stratum(m in 1usize..300, seed in any::<u64>(), jitter in any::<bool>()) {
            let mode = if jitter { LhsMode::Jittered } else { LhsMode::Midpoint };
            let pts = lhs_sample(m, 2.0, 0.5, seed, mode).unwrap();
            prop_assert_eq!(pts.len(), m);
            prop_assert!(occupancy(&pts, 0, 2.0).iter().all(|&c| c == 1));
            prop_assert!(occupancy(&pts, 1, 0.5).iter().all(|&c| c == 1));
            prop_assert!(pts.iter().all(|p| p[0] >= 0.0 && p[0] <= 2.0 && p[1] >= 0.0 && p[1] <= 0.5));
        }
    }
}
