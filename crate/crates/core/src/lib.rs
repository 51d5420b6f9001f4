//! Conjugate-basis Bell functionals, exact local-realistic bounds and
//! quantum violation search over Fourier-multiport setups.

pub mod bases;
pub mod cglmp;
pub mod correlation;
pub mod document;
pub mod error;
pub mod functional;
pub mod lhv;
pub mod multiport;
pub mod optimize;
pub mod scenario;

pub use error::{Error, Result};
