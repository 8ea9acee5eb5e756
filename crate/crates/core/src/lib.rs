//! Numerical toolkit for the private-state distillation view of QKD with
//! noisy preprocessing.
//!
//! * [`qcore`]: dense states and operators over named registers, entropies, distances.
//! * [`channel`]: Pauli channels, protocol models and the coherent block states.
//! * [`pstate`]: private states, twisting operators, the key-security distance.
//! * [`pgm`]: pretty-good measurement, its error, Neumark extension, coset experiments.
//! * [`distill`]: the small-n distillation pipeline and its security certificate.
//! * [`rates`]: asymptotic key rate, added-noise optimization, thresholds.
//! * [`cli`]: the `pdit` command-line front end.

pub mod bits;
pub mod channel;
pub mod cli;
pub mod distill;
mod error;
pub mod pgm;
pub mod pstate;
pub mod qcore;
pub mod rates;
pub mod tolerance;

pub use bits::BitString;
pub use error::{Error, Result};
