//! Dense complex states and operators over named qubit registers, plus the
//! entropy and distance functionals used by the rest of the crate.
//!
//! Convention: qubit 0 (the first qubit of the first register) is the most
//! significant bit of a basis index; matrices are nalgebra's column-major
//! `DMatrix<Complex64>`.

mod density;
mod layout;
pub mod linalg;
mod measures;
mod operator;
pub mod random;
mod state;

pub use density::DensityOperator;
pub use layout::{Layout, Register};
pub use linalg::{CMatrix, CVector, C64};
pub use measures::{
    binary_entropy, fidelity, pure_trace_distance, shannon_entropy, trace_distance, trace_norm,
    von_neumann_entropy,
};
pub use operator::{Operator, OperatorKind};
pub use state::StateVector;

pub(crate) use layout::gather_bits;
pub use linalg::real;
