//! Numerical tolerances shared by every module.

/// Structural checks: normalization, Hermiticity, unitarity, trace.
pub const STRUCTURAL: f64 = 1e-10;

/// Entropies and quantities derived from spectra.
pub const ENTROPIC: f64 = 1e-9;

/// Eigenvalues below this are treated as exact zeros (entropy, pseudo-inverse support).
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Slack allowed outside [0, 1] for probabilities before they are rejected.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// Tolerance for probability vectors summing to one.
pub const DISTRIBUTION_SUM: f64 = 1e-12;

/// POVM completeness on the ensemble support.
pub const POVM_COMPLETENESS: f64 = 1e-9;

/// Completeness defect above which a Neumark extension is refused.
pub const NEUMARK_DEFECT: f64 = 1e-8;

/// Largest dense density matrix (entry count) materialized by the pipeline.
pub const DENSE_MATRIX_ENTRIES: usize = 1 << 20;

/// Largest dense Hilbert-space dimension purified for the key-security metric.
pub const PURIFICATION_DIM: usize = 1 << 10;

/// Clamp a probability that is allowed a tiny numerical excursion outside [0, 1].
pub fn clamp_probability(x: f64) -> crate::Result<f64> {
    if !x.is_finite() || !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&x) {
        return Err(crate::Error::InvalidProbability(x));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Largest number of stored amplitudes in a block state.
pub const BLOCK_ENTRIES: usize = 1 << 22;
