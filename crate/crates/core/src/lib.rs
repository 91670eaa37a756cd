// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channels;
pub mod convergence;
mod dd;
pub mod dilation;
pub mod error;
pub mod fidelity;
pub mod peeling;
pub mod symplectic;
pub mod teleport;
pub mod tolerance;

pub use error::{Result, TelesimError};
pub use tolerance::Tolerances;

pub use nalgebra;
