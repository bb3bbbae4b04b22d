//! Coherence of quantum operations analysed through their Choi states.

pub mod axioms;
pub mod channel;
pub mod closure;
pub mod coherence;
pub mod convex_roof;
pub mod document;
pub mod error;
pub mod matrix;
pub mod random;
pub mod superop;
pub mod tol;
pub mod verify;

pub use channel::{ChoiState, QuantumOperation, Representation};
pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, HermitianEig, C64};
pub use superop::Superoperation;
