//! Haar-random unimodular lattices.
//!
//! A lattice is drawn as `k_θ · N(x, y)` where `N` has columns
//! `(1/√y, 0)` and `(x/√y, √y)`: its shape `x + iy` is sampled from the
//! hyperbolic area `dx dy / y²` on the fundamental domain
//! `|x| ≤ 1/2, x² + y² ≥ 1`, and its rotation θ uniformly from `[0, π)`
//! (θ and θ + π give the same lattice since `-I` fixes every lattice).
//!
//! Sample `i` of seed `s` is drawn from its own ChaCha8 stream
//! `(s, i)`, so any batch is a pure function of `(seed, count)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Mat2, Vec2};
use crate::lattice::UnimodularBasis;

/// Largest batch [`sample_batch`] will materialise; use [`SampleStream`] beyond it.
pub const DEFAULT_BATCH_LIMIT: u64 = 10_000_000;

const SQRT3_OVER_2: f64 = 0.866_025_403_784_438_6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSample {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub basis: UnimodularBasis,
}

impl LatticeSample {
    /// Builds the lattice with shape `x + iy` rotated by θ.
    pub fn from_coordinates(x: f64, y: f64, theta: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && theta.is_finite()) {
            return Err(Error::Input(format!("non-finite coordinates ({x}, {y}, {theta})")));
        }
        if x.abs() > 0.5 || x * x + y * y < 1.0 - 1e-12 || y <= 0.0 {
            return Err(Error::Input(format!("({x}, {y}) is outside the fundamental domain")));
        }
        if !(0.0..std::f64::consts::PI).contains(&theta) {
            return Err(Error::Input(format!("rotation angle {theta} outside [0, π)")));
        }
        let root = y.sqrt();
        let shape = Mat2::new(1.0 / root, x / root, 0.0, root);
        let basis = UnimodularBasis::from_matrix(&(Mat2::rotation(theta) * shape))?;
        Ok(Self { x, y, theta, basis })
    }
}

/// Draws one Haar-distributed lattice from `rng`.
///
/// `x` is uniform on `[-1/2, 1/2]` and `y = √3/(2U)`, `U` uniform on `(0, 1]`,
/// which is exactly the density `∝ y⁻²` on `[√3/2, ∞)`; pairs with
/// `x² + y² < 1` are rejected (acceptance rate ≈ 0.77).
pub fn sample_haar<R: Rng + ?Sized>(rng: &mut R) -> LatticeSample {
    loop {
        let x = rng.gen::<f64>() - 0.5;
        let u = 1.0 - rng.gen::<f64>();
        let y = SQRT3_OVER_2 / u;
        if x * x + y * y >= 1.0 {
            let theta = std::f64::consts::PI * rng.gen::<f64>();
            return LatticeSample::from_coordinates(x, y, theta)
                .expect("rejection sampler produced a point outside the fundamental domain");
        }
    }
}

/// The random stream reserved for sample `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Sample `index` of the sequence determined by `seed`.
pub fn sample_at(seed: u64, index: u64) -> LatticeSample {
    sample_haar(&mut substream(seed, index))
}

/// Unbounded sequential iterator over the samples of one seed.
#[derive(Debug, Clone)]
pub struct SampleStream {
    seed: u64,
    next: u64,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, next: 0 }
    }

    pub fn starting_at(seed: u64, index: u64) -> Self {
        Self { seed, next: index }
    }
}

impl Iterator for SampleStream {
    type Item = LatticeSample;

    fn next(&mut self) -> Option<LatticeSample> {
        let sample = sample_at(self.seed, self.next);
        self.next += 1;
        Some(sample)
    }
}

/// Runs `job` inside a rayon pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, job: impl FnOnce() -> R + Send) -> Result<R> {
    if workers == 0 {
        return Err(Error::Input("worker count must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Input(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// The first `count` samples of `seed`, identical for every worker count.
pub fn sample_batch(seed: u64, count: u64, workers: usize) -> Result<Vec<LatticeSample>> {
    sample_batch_with_limit(seed, count, workers, DEFAULT_BATCH_LIMIT)
}

pub fn sample_batch_with_limit(seed: u64, count: u64, workers: usize, limit: u64) -> Result<Vec<LatticeSample>> {
    if count == 0 {
        return Err(Error::Input("batch size must be at least 1".into()));
    }
    if count > limit {
        return Err(Error::Resource { what: "sample batch", requested: count as f64, cap: limit as f64 });
    }
    with_workers(workers, || (0..count).into_par_iter().map(|i| sample_at(seed, i)).collect())
}

impl From<LatticeSample> for UnimodularBasis {
    fn from(s: LatticeSample) -> Self {
        s.basis
    }
}

impl LatticeSample {
    pub fn b1(&self) -> Vec2 {
        self.basis.b1()
    }

    pub fn b2(&self) -> Vec2 {
        self.basis.b2()
    }
}
