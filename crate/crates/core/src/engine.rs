//! Deterministic block decomposition of Monte Carlo runs.
//!
//! A run of `M` samples is cut into fixed-size blocks of
//! [`BLOCK_SAMPLES`]; block `b` always draws from the ChaCha stream
//! `(seed, tag, b)`. Lanes only decide which blocks are processed together,
//! and per-block tallies are integer counts merged in block order, so the
//! result is bit-identical for any lane count and with or without the
//! `parallel` feature.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};

/// Samples per random-stream block.
pub const BLOCK_SAMPLES: u64 = 1 << 14;

/// Sample budget, seed and lane count of one estimator run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSpec {
    pub samples: u64,
    pub seed: u64,
    /// Number of work partitions. Processed concurrently when the
    /// `parallel` feature is enabled; never affects the result.
    pub lanes: usize,
}

impl RunSpec {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, lanes: 1 }
    }

    pub fn with_lanes(mut self, lanes: usize) -> Self {
        self.lanes = lanes;
        self
    }

    /// Number of random-stream blocks the samples are split into.
    pub fn blocks(&self) -> u64 {
        self.samples.div_ceil(BLOCK_SAMPLES)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(domain("sample count must be at least 1"));
        }
        if self.lanes == 0 {
            return Err(domain("lane count must be at least 1"));
        }
        Ok(())
    }
}

/// Separates the random streams of different consumers sharing a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamTag {
    Naive = 1,
    SphereIs = 2,
    BoxIs = 3,
    OracleMc = 4,
}

pub fn block_rng(seed: u64, tag: StreamTag, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((tag as u64) << 56) | block);
    rng
}

/// Per-block partial result.
pub trait Tally: Default + Send {
    fn merge(self, other: Self) -> Self;
}

/// Run `work(rng, n)` on every block and merge the tallies in block order.
pub fn run_blocks<T, F>(run: &RunSpec, tag: StreamTag, work: F) -> Result<T>
where
    T: Tally,
    F: Fn(&mut ChaCha8Rng, u64) -> Result<T> + Sync,
{
    run.validate()?;
    let blocks = run.blocks();
    let lanes = (run.lanes as u64).clamp(1, blocks.max(1));
    let per_lane = blocks.div_ceil(lanes);
    let lane = |l: u64| -> Result<T> {
        let start = l * per_lane;
        let end = ((l + 1) * per_lane).min(blocks);
        let mut acc = T::default();
        for b in start..end {
            let n = BLOCK_SAMPLES.min(run.samples - b * BLOCK_SAMPLES);
            let mut rng = block_rng(run.seed, tag, b);
            acc = acc.merge(work(&mut rng, n)?);
        }
        Ok(acc)
    };
    let partials: Vec<Result<T>> = map_lanes(lanes, lane);
    partials.into_iter().try_fold(T::default(), |acc, p| Ok(acc.merge(p?)))
}

#[cfg(feature = "parallel")]
fn map_lanes<T: Send, F: Fn(u64) -> T + Sync>(lanes: u64, f: F) -> Vec<T> {
    use rayon::prelude::*;
    if lanes == 1 {
        return vec![f(0)];
    }
    (0..lanes).into_par_iter().map(&f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_lanes<T: Send, F: Fn(u64) -> T + Sync>(lanes: u64, f: F) -> Vec<T> {
    (0..lanes).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[derive(Default, Debug, PartialEq)]
    struct Sum(u64, u64);

    impl Tally for Sum {
        fn merge(self, o: Self) -> Self {
            Sum(self.0 + o.0, self.1 + o.1)
        }
    }

    #[test]
    fn lane_count_does_not_change_results() {
        let work = |rng: &mut ChaCha8Rng, n: u64| -> Result<Sum> {
            Ok(Sum((0..n).map(|_| rng.random::<u32>() as u64 & 0xff).sum(), n))
        };
        let base = run_blocks(&RunSpec::new(100_003, 7), StreamTag::Naive, work).unwrap();
        assert_eq!(base.1, 100_003);
        for lanes in [2, 3, 4, 7, 64] {
            let r = run_blocks(&RunSpec::new(100_003, 7).with_lanes(lanes), StreamTag::Naive, work).unwrap();
            assert_eq!(r, base);
        }
    }

    #[test]
    fn rejects_empty_runs() {
        let work = |_: &mut ChaCha8Rng, n: u64| -> Result<Sum> { Ok(Sum(0, n)) };
        assert!(run_blocks(&RunSpec::new(0, 1), StreamTag::Naive, work).is_err());
        assert!(run_blocks(&RunSpec::new(10, 1).with_lanes(0), StreamTag::Naive, work).is_err());
    }

    #[test]
    fn tags_give_distinct_streams() {
        let a: u64 = block_rng(5, StreamTag::Naive, 0).random();
        let b: u64 = block_rng(5, StreamTag::SphereIs, 0).random();
        let c: u64 = block_rng(5, StreamTag::Naive, 1).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
