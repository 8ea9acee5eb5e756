//! Parameter estimation from sampled single-qubit error outcomes.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::pauli::PauliDistribution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub f_est: PauliDistribution,
    /// Every `|f_est - p|` is below this with probability at least `confidence`.
    pub epsilon: f64,
    pub confidence: f64,
    pub samples: usize,
}

/// Deviation bound for all four empirical frequencies at once: two-sided
/// Hoeffding per outcome plus a union bound, `sqrt(ln(8 / (1 - c)) / 2N)`.
pub fn hoeffding_epsilon(samples: usize, confidence: f64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::invalid("empty sample"));
    }
    if !(0.0..1.0).contains(&confidence) {
        return Err(Error::invalid(format!(
            "confidence {confidence} outside [0, 1)"
        )));
    }
    Ok(((8.0 / (1.0 - confidence)).ln() / (2.0 * samples as f64)).sqrt())
}

/// Empirical `f_{uv}` from observed `(u, v)` pairs.
pub fn estimate_rates(samples: &[(bool, bool)], confidence: f64) -> Result<RateEstimate> {
    let epsilon = hoeffding_epsilon(samples.len(), confidence)?;
    let mut counts = [0usize; 4];
    for &(u, v) in samples {
        counts[(u as usize) << 1 | v as usize] += 1;
    }
    let total = samples.len() as f64;
    let f = counts.map(|c| c as f64 / total);
    Ok(RateEstimate {
        f_est: PauliDistribution::new(f[0], f[1], f[2], f[3])?,
        epsilon,
        confidence,
        samples: samples.len(),
    })
}

/// `count` i.i.d. draws of `(u, v)` from `d`.
pub fn sample_errors(d: &PauliDistribution, count: usize, seed: u64) -> Result<Vec<(bool, bool)>> {
    d.validate()?;
    let dist =
        WeightedIndex::new(d.as_array()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let k = dist.sample(&mut rng);
            (k & 2 != 0, k & 1 != 0)
        })
        .collect())
}
