//! Pretty-good measurement on the phase-flipped ancilla ensemble
//! `|φ^v> = Z^v |φ>^{⊗n}`, its decoding error, and the Neumark extension that
//! turns it into the orthonormal family used for untwisting.

mod coset;
mod ensemble;
mod measurement;
mod neumark;

pub use coset::{random_coset_error, random_set_error, set_size_for, CosetStatistics, SetMode};
pub use ensemble::{phase_prior, phi_v, phi_vector, sigma_state, Ensemble};
pub use measurement::{
    average_error, gram_success_amplitudes, pgm_construct, success_amplitudes,
    success_probabilities, RankOnePOVM,
};
pub use neumark::{neumark_extend, IsometricExtension};

/// Register holding the noise purification.
pub const REG_A1: &str = crate::channel::REG_A1;
/// Ancilla register added by the Neumark extension.
pub const REG_A2: &str = "A''";
