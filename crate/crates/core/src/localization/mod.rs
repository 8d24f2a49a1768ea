//! Equivariant localization: scenarios, the odd form `σ`, the invariant
//! cutoff and the stationary-phase comparison.

mod engine;
mod scenario;
mod sigma;
mod spa;

pub use engine::*;
pub use scenario::*;
pub use sigma::*;
pub use spa::*;
