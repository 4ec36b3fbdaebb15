//! Exact outcome probabilities and seeded multinomial shot sampling.
//!
//! Sampling is reproducible across platforms: the generator is ChaCha8
//! (`rand_chacha::ChaCha8Rng`) seeded through `SeedableRng::seed_from_u64`,
//! and a multinomial draw is taken as successive conditional binomials
//! (`rand_distr::Binomial`), outcome 0 first.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::StateVector;

/// Tolerance on `Σp = 1` accepted by the sampler.
pub const PROBABILITY_SUM_TOL: f64 = 1e-9;

/// Counts per computational-basis outcome.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub counts: Vec<u64>,
    pub shots: u64,
}

impl ShotCounts {
    pub fn new(counts: Vec<u64>) -> Self {
        let shots = counts.iter().sum();
        ShotCounts { counts, shots }
    }

    pub fn count(&self, outcome: usize) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    /// `count / shots`, or 0 for an empty record.
    pub fn frequency(&self, outcome: usize) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.count(outcome) as f64 / self.shots as f64
        }
    }
}

/// `|amplitude|²` per basis index.
pub fn outcome_probabilities(state: &StateVector) -> Vec<f64> {
    state.amplitudes().iter().map(|a| a.norm_sqr()).collect()
}

/// Multinomial draw of `shots` outcomes using a ChaCha8 stream seeded with `seed`.
pub fn sample_shots(probs: &[f64], shots: u64, seed: u64) -> Result<ShotCounts> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_shots_with(probs, shots, &mut rng)
}

/// Multinomial draw with a caller-supplied generator.
pub fn sample_shots_with<R: Rng + ?Sized>(
    probs: &[f64],
    shots: u64,
    rng: &mut R,
) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::InvalidProbabilities(
            "shots must be at least 1".into(),
        ));
    }
    let probs = checked_probabilities(probs)?;
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass_left = 1.0;
    let last = probs.len() - 1;
    for (k, &p) in probs.iter().enumerate().take(last) {
        if remaining == 0 {
            break;
        }
        if p > 0.0 {
            let q = if mass_left > 0.0 {
                (p / mass_left).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let draw = Binomial::new(remaining, q)
                .map_err(|e| Error::InvalidProbabilities(e.to_string()))?
                .sample(rng);
            counts[k] = draw;
            remaining -= draw;
        }
        mass_left -= p;
    }
    counts[last] += remaining;
    Ok(ShotCounts { counts, shots })
}

fn checked_probabilities(probs: &[f64]) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::InvalidProbabilities("empty table".into()));
    }
    if let Some(p) = probs
        .iter()
        .find(|p| !p.is_finite() || **p < -PROBABILITY_SUM_TOL)
    {
        return Err(Error::InvalidProbabilities(format!(
            "entry {p} is not a probability"
        )));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::InvalidProbabilities(format!(
            "probabilities sum to {sum}"
        )));
    }
    Ok(probs.iter().map(|p| p.max(0.0) / sum).collect())
}
