//! Model-space quantum imaginary time evolution on a dense statevector
//! simulator, with QITE, folded-spectrum QITE, Krylov acceleration,
//! spin-shifted propagation and an exact-diagonalization reference.

pub mod driver;
pub mod error;
pub mod lanczos;
pub mod model_space;
pub mod numerics;
pub mod operators;
pub mod oracle;
pub mod pauli;
pub mod pool;
pub mod qite;
pub mod statevector;

pub use error::{Error, Result};
