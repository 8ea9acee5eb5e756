//! Pauli channels, protocol models, and the block-form coherent protocol states.

mod blocks;
mod config;
mod estimate;
mod pauli;

pub use blocks::*;
pub use config::ChannelConfig;
pub use estimate::{estimate_rates, hoeffding_epsilon, sample_errors, RateEstimate};
pub use pauli::*;
