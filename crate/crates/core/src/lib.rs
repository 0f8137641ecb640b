//! Discrete harmonic analysis for ultraspherical expansions on `ℕ`.

pub mod error;
pub mod harmonic;
pub mod harness;
pub mod hypergroup;
pub mod semigroup;
pub mod transform;
pub mod transplant;
pub mod specfun;

pub use error::{Error, Result};
pub use specfun::OrderParam;
