//! Decoding error of the PGM on randomly drawn phase-pattern sets.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::channel::PauliDistribution;
use crate::distill::LinearCode;
use crate::{Error, Result};

use super::ensemble::{phase_prior, Ensemble};
use super::measurement::{average_error, pgm_construct};

/// Largest `n` for which the ancilla space is diagonalized.
pub const MAX_SET_N: usize = 10;

/// Largest set handed to the PGM.
pub const MAX_SET_SIZE: usize = 1 << 10;

/// How the ambiguous phase-pattern set is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetMode {
    /// The coset of a random full-rank parity-check matrix containing a pattern
    /// drawn from the prior; its size is `2^round(n·exponent)`.
    #[default]
    Coset,
    /// A pattern drawn from the prior plus uniformly chosen others, for a total
    /// of `round(2^{n·exponent})` elements.
    Subset,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosetStatistics {
    pub n: usize,
    pub q: f64,
    pub p_z: f64,
    pub exponent: f64,
    pub mode: SetMode,
    pub set_size: usize,
    pub trials: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub min: f64,
    pub max: f64,
    pub quantiles: BTreeMap<String, f64>,
    pub errors: Vec<f64>,
}

pub fn set_size_for(n: usize, exponent: f64, mode: SetMode) -> Result<usize> {
    if !(0.0..=1.0).contains(&exponent) {
        return Err(Error::invalid(format!(
            "set exponent {exponent} outside [0, 1]"
        )));
    }
    if n == 0 || n > MAX_SET_N {
        return Err(Error::budget("phase-pattern length n", n, MAX_SET_N));
    }
    let size = match mode {
        SetMode::Coset => 1usize << (n as f64 * exponent).round() as usize,
        SetMode::Subset => ((n as f64 * exponent).exp2().round() as usize).clamp(1, 1 << n),
    };
    if size > MAX_SET_SIZE {
        return Err(Error::budget("phase-pattern set", size, MAX_SET_SIZE));
    }
    Ok(size)
}

/// Coset-mode statistics of the PGM error; see [`random_set_error`].
pub fn random_coset_error(
    n: usize,
    q: f64,
    d: &PauliDistribution,
    exponent: f64,
    trials: usize,
    seed: u64,
) -> Result<CosetStatistics> {
    random_set_error(n, q, d, exponent, trials, seed, SetMode::Coset)
}

/// Average PGM error on `{|φ^v> : v ∈ V}` for `trials` random sets `V`, with
/// priors proportional to the i.i.d. phase-error probabilities of `d`.
pub fn random_set_error(
    n: usize,
    q: f64,
    d: &PauliDistribution,
    exponent: f64,
    trials: usize,
    seed: u64,
    mode: SetMode,
) -> Result<CosetStatistics> {
    d.validate()?;
    crate::tolerance::clamp_probability(q)?;
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let set_size = set_size_for(n, exponent, mode)?;
    let p_z = d.marginals().p_z;
    let patterns: Vec<BitString> = BitString::all(n).collect();
    let priors: Vec<f64> = patterns.iter().map(|v| phase_prior(v, p_z)).collect();
    let draw =
        WeightedIndex::new(&priors).map_err(|e| Error::InvalidDistribution(e.to_string()))?;

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..trials).map(|_| master.gen()).collect();
    let errors = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let v0 = patterns[draw.sample(&mut rng)];
            let set = match mode {
                SetMode::Coset => {
                    let k = n - set_size.trailing_zeros() as usize;
                    let code = LinearCode::random(n, k, &mut rng)?;
                    code.coset(&code.syndrome(&v0)?)?
                }
                SetMode::Subset => {
                    let mut set = vec![v0];
                    let others: Vec<BitString> =
                        patterns.iter().copied().filter(|v| *v != v0).collect();
                    set.extend(
                        sample(&mut rng, others.len(), set_size - 1)
                            .into_iter()
                            .map(|i| others[i]),
                    );
                    set.sort();
                    set
                }
            };
            let weights: Vec<f64> = set.iter().map(|v| priors[v.index()]).collect();
            let e = Ensemble::phase_flipped(n, q, &set, &weights)?;
            average_error(&e, &pgm_construct(&e)?)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    let mean = errors.iter().sum::<f64>() / trials as f64;
    let var = if trials > 1 {
        errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
    } else {
        0.0
    };
    let quantiles = [
        ("p10", 0.10),
        ("p25", 0.25),
        ("p50", 0.50),
        ("p75", 0.75),
        ("p90", 0.90),
    ]
    .into_iter()
    .map(|(name, p)| (name.to_string(), nearest_rank(&sorted, p)))
    .collect();
    Ok(CosetStatistics {
        n,
        q,
        p_z,
        exponent,
        mode,
        set_size,
        trials,
        seed,
        mean,
        std_error: (var / trials as f64).sqrt(),
        min: sorted[0],
        max: sorted[trials - 1],
        quantiles,
        errors,
    })
}

fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let rank = (p * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb84(p: f64) -> PauliDistribution {
        PauliDistribution::new((1.0 - p) * (1.0 - p), (1.0 - p) * p, p * (1.0 - p), p * p).unwrap()
    }

    #[test]
    fn set_sizes() {
        assert_eq!(set_size_for(6, 0.5, SetMode::Coset).unwrap(), 8);
        assert_eq!(set_size_for(5, 0.3, SetMode::Subset).unwrap(), 3);
        assert_eq!(set_size_for(4, 0.0, SetMode::Coset).unwrap(), 1);
        assert!(set_size_for(4, 1.5, SetMode::Coset).is_err());
        assert!(set_size_for(11, 0.1, SetMode::Coset)
            .unwrap_err()
            .is_budget());
    }

    #[test]
    fn zero_exponent_is_error_free() {
        for mode in [SetMode::Coset, SetMode::Subset] {
            let s = random_set_error(4, 0.1, &bb84(0.1), 0.0, 5, 1, mode).unwrap();
            assert_eq!(s.set_size, 1);
            assert!(s.max < 1e-12);
        }
    }

    #[test]
    fn half_noise_is_error_free() {
        for mode in [SetMode::Coset, SetMode::Subset] {
            let s = random_set_error(4, 0.5, &bb84(0.1), 1.0, 3, 2, mode).unwrap();
            assert_eq!(s.set_size, 16);
            assert!(s.max < 1e-10);
        }
    }

    #[test]
    fn seeded_and_ordered() {
        let a = random_coset_error(5, 0.1, &bb84(0.2), 0.4, 8, 11).unwrap();
        let b = random_coset_error(5, 0.1, &bb84(0.2), 0.4, 8, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.min <= a.quantiles["p50"] && a.quantiles["p50"] <= a.max);
    }
}
