//! Normal forms of Morse–Bott superfunctions.

mod jet;
mod normalize;
mod symplectic;

pub use jet::{truncate, JetFunction};
pub use normalize::{normalize_jet, CoordinateChange, MorseOptions, MorseResult, StepKind, SubstitutionStep};
pub use symplectic::{half_standard, symplectic_normalize, symplectic_normalize_at};
