//! Smoothed-unigram negative sampler.

use rand::Rng;

use crate::error::{Error, Result};

/// Exponent applied to unit counts before normalization.
const UNIGRAM_POWER: f64 = 0.75;

/// Draws context indices with probability proportional to count^0.75,
/// via binary search over the cumulative mass.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(counts: &[u64]) -> Result<Self> {
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut acc = 0.0;
        for &c in counts {
            acc += (c as f64).powf(UNIGRAM_POWER);
            cumulative.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::Degenerate(
                "negative sampler needs at least one unit with positive count".into(),
            ));
        }
        Ok(Self { cumulative })
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    /// Exact sampling probability of index `i`.
    pub fn probability(&self, i: usize) -> f64 {
        let total = *self.cumulative.last().unwrap();
        let prev = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        (self.cumulative[i] - prev) / total
    }

    pub fn draw<G: Rng>(&self, rng: &mut G) -> usize {
        let total = *self.cumulative.last().unwrap();
        let x = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }

    /// Draw avoiding `avoid` (the positive context). Bounded redraws keep
    /// this total even on degenerate single-unit distributions; a residual
    /// collision is tolerated by the gradient step.
    pub fn draw_avoiding<G: Rng>(&self, rng: &mut G, avoid: usize) -> usize {
        let mut picked = self.draw(rng);
        for _ in 0..32 {
            if picked != avoid {
                break;
            }
            picked = self.draw(rng);
        }
        picked
    }
}
