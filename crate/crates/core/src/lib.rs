//! Calculus on the local model supermanifold R^{m|n}.

pub mod calculus;
pub mod cli;
pub mod error;
pub mod grassmann;
pub mod linalg;
pub mod morse;
pub mod localization;

pub use error::{Error, Result};
