use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

/// Seeded sampler over subsets of coordinate blocks.
///
/// The support must cover every block with positive probability;
/// otherwise some coordinate would never be updated and the iteration
/// could not reach a fixed point.
#[derive(Debug, Clone)]
pub struct CoordinateSampler {
    num_blocks: usize,
    subsets: Vec<Vec<usize>>,
    cumulative: Vec<f64>,
    rng: Xoshiro256PlusPlus,
    draws: u64,
}

impl CoordinateSampler {
    pub fn new(num_blocks: usize, support: Vec<(Vec<usize>, f64)>, seed: u64) -> Result<Self> {
        if num_blocks == 0 {
            return Err(Error::InvalidSampler("no coordinate blocks".into()));
        }
        if support.is_empty() {
            return Err(Error::InvalidSampler("empty support".into()));
        }
        let mut covered = vec![false; num_blocks];
        let mut subsets = Vec::with_capacity(support.len());
        let mut cumulative = Vec::with_capacity(support.len());
        let mut total = 0.0;
        for (subset, p) in support {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidSampler(format!(
                    "probability {p} is not a finite nonnegative number"
                )));
            }
            let mut s = subset;
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::InvalidSampler("empty subset in support".into()));
            }
            if let Some(&j) = s.iter().find(|&&j| j >= num_blocks) {
                return Err(Error::InvalidSampler(format!(
                    "block index {j} out of range for {num_blocks} blocks"
                )));
            }
            if p > 0.0 {
                for &j in &s {
                    covered[j] = true;
                }
            }
            total += p;
            subsets.push(s);
            cumulative.push(total);
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSampler(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        if let Some(j) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidSampler(format!(
                "block {j} has zero activation probability"
            )));
        }
        Ok(CoordinateSampler {
            num_blocks,
            subsets,
            cumulative,
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            draws: 0,
        })
    }

    /// Uniform distribution over the singletons {0}, ..., {J-1}.
    pub fn uniform_singletons(num_blocks: usize, seed: u64) -> Self {
        let p = 1.0 / num_blocks as f64;
        Self::new(
            num_blocks,
            (0..num_blocks).map(|j| (vec![j], p)).collect(),
            seed,
        )
        .expect("uniform singleton support is always valid")
    }

    /// Degenerate sampler that activates every block each draw.
    pub fn always_full(num_blocks: usize, seed: u64) -> Self {
        Self::new(num_blocks, vec![((0..num_blocks).collect(), 1.0)], seed)
            .expect("full support is always valid")
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    /// Number of draws made so far, for replayable trajectories.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn draw(&mut self) -> &[usize] {
        self.draws += 1;
        let u: f64 = self.rng.gen();
        let idx = match self.cumulative.iter().position(|&c| u < c) {
            Some(i) => i,
            None => self.cumulative.len() - 1,
        };
        &self.subsets[idx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_uncovered_blocks() {
        let err = CoordinateSampler::new(3, vec![(vec![0, 1], 1.0)], 0);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(CoordinateSampler::new(1, vec![(vec![0], 0.5)], 0).is_err());
        assert!(CoordinateSampler::new(1, vec![(vec![0], f64::NAN)], 0).is_err());
        assert!(CoordinateSampler::new(2, vec![(vec![0], 0.5), (vec![1], 0.5)], 0).is_ok());
    }

    #[test]
    fn identical_seeds_reproduce_draws() {
        let mut a = CoordinateSampler::uniform_singletons(5, 123);
        let mut b = CoordinateSampler::uniform_singletons(5, 123);
        for _ in 0..100 {
            assert_eq!(a.draw(), b.draw());
        }
        assert_eq!(a.draws(), 100);
    }

    #[test]
    fn singleton_draw_frequencies_cover_all_blocks() {
        let mut s = CoordinateSampler::uniform_singletons(4, 7);
        let mut seen = [0usize; 4];
        for _ in 0..4000 {
            seen[s.draw()[0]] += 1;
        }
        for count in seen {
            assert!(
                count > 800,
                "roughly uniform activation expected, got {count}"
            );
        }
    }
}
