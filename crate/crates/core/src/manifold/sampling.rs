//! Deterministic sample plans over the invariant region.

use super::chart::Region;
use crate::rng::{gaussian_vector, rng_for, stream};
use nalgebra::{DMatrix, DVector};

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut out = 0.0;
    let mut scale = inv;
    while i > 0 {
        out += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
    }
    out
}

/// The first `count` points of the Halton sequence (index from 1) mapped onto `region`.
pub fn halton_points(region: &Region, count: usize) -> Vec<DVector<f64>> {
    let dim = region.lo.len();
    assert!(dim <= PRIMES.len());
    (1..=count as u64)
        .map(|i| {
            DVector::from_fn(dim, |j, _| {
                let u = radical_inverse(i, PRIMES[j]);
                region.lo[j] + u * (region.hi[j] - region.lo[j])
            })
        })
        .collect()
}

/// Points at which sup-norms are estimated, plus the seeded direction budget.
#[derive(Clone, Debug)]
pub struct SamplePlan {
    pub points: Vec<DVector<f64>>,
    pub directions: usize,
    pub seed: u64,
}

impl SamplePlan {
    pub fn halton(region: &Region, count: usize, directions: usize, seed: u64) -> Self {
        SamplePlan {
            points: halton_points(region, count),
            directions,
            seed,
        }
    }

    pub fn explicit(points: Vec<DVector<f64>>, directions: usize, seed: u64) -> Self {
        SamplePlan {
            points,
            directions,
            seed,
        }
    }

    /// Seeded `g`-unit vectors attached to point `index`.
    pub fn unit_directions(&self, index: usize, g: &DMatrix<f64>) -> Vec<DVector<f64>> {
        let mut rng = rng_for(self.seed, stream::DIRECTIONS, index as u64);
        (0..self.directions)
            .map(|_| {
                let v = gaussian_vector(&mut rng, g.nrows());
                let n = crate::linalg::norm_in(g, &v);
                v / n
            })
            .collect()
    }
}
