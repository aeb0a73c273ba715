//! Likewise spaces of quasi-periodic functions, their Fock-space images under
//! the Segal-Bargmann transform, and the Riemann theta machinery behind the
//! reproducing kernel.

pub mod bargmann;
pub mod document;
pub mod error;
pub mod fock;
pub mod hermite;
pub mod lattice;
pub mod likewise;
pub mod linalg;
pub mod quadrature;
pub mod theta;

pub use error::{Error, Result};
