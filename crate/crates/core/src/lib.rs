//! Spectral engine for exactly solvable one-dimensional potentials: the
//! trigonometric Scarf, q-deformed hyperbolic Scarf and Manning-Rosen
//! families in Hermitian, PT-symmetric and non-PT variants, solved with the
//! Nikiforov-Uvarov method and checked against a finite-difference oracle.

pub mod cli;
pub mod error;
pub mod math;
pub mod nu;
pub mod oracle;
pub mod potentials;
pub mod spectra;
pub mod wavefunctions;

pub use error::{Error, Result};
