//! The small-n distillation pipeline: bit correction, reduced-rate phase
//! correction, untwisting with the Neumark-extended PGM, and its certificate.
//!
//! Syndrome extraction is ideal (breeding with pre-shared key). For channels
//! whose bit and phase errors are correlated the PGM ensembles are conditioned
//! on the bit-error pattern, which the untwisting reads from `B'`.

mod code;
mod correct;
mod dense;
mod end_to_end;
mod security;
mod untwist;

pub use code::{gf2_rank, LinearCode, MAX_CODE_LENGTH};
pub use correct::{
    bit_error_correct, build_rho, phase_correct, BitCorrection, PhaseCorrection, REG_S,
};
pub use dense::{
    bit_correction_isometry, explicit_key_state, explicit_noisy_processing, explicit_pipeline,
    label_fidelity, phase_syndrome_isometry, ExplicitRun, MAX_EXPLICIT_QUBITS,
};
pub use end_to_end::{end_to_end, run_with_distribution, CodeSpec, EndToEndReport};
pub use security::{block_key_security, MAX_LABELS};
pub use untwist::{
    construct_untwisting, formula_fidelity, untwist_fidelity, DistillationOutcome, FormulaFidelity,
    Sector, SectorKey, Untwisting,
};
