//! Seeded random streams and weighted index sampling.

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

/// A reproducible random stream.
///
/// Backed by xoshiro256++ (256-bit state), seeded from a single `u64` through
/// SplitMix64. Independent trials use `base_seed + trial_index`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    inner: Xoshiro256PlusPlus,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn for_trial(base_seed: u64, trial: usize) -> Self {
        Self::new(base_seed.wrapping_add(trial as u64))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.standard_normal()).collect()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

/// Draws index `i` with probability `w_i / Σ w`, by binary search over the
/// cumulative weights. Zero-weight indices are never returned.
#[derive(Clone, Debug)]
pub struct WeightedSampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl WeightedSampler {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        let mut last_positive = None;
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::invalid(format!(
                    "sampling weight {} at index {} is negative or not finite",
                    w,
                    i + 1
                )));
            }
            if w > 0.0 {
                last_positive = Some(i);
            }
            acc += w;
            cumulative.push(acc);
        }
        match last_positive {
            Some(last_positive) if acc > 0.0 => Ok(Self {
                cumulative,
                last_positive,
            }),
            _ => Err(Error::ZeroWeights),
        }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// First (0-based) index whose cumulative weight strictly exceeds `u`.
    pub fn index_for(&self, u: f64) -> usize {
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // u may round up to the total when scaled from [0, 1)
        idx.min(self.last_positive)
    }

    pub fn sample(&self, rng: &mut RngStream) -> usize {
        self.index_for(rng.uniform() * self.total())
    }
}
