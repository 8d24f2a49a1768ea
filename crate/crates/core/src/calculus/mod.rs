//! Vector fields, densities, Hessians and linearizations on one chart.

pub mod density;
pub mod hessian;
pub mod submanifold;
pub mod vector_field;

pub use density::{berezin_integrate, lie_derivative_density, Density};
pub use hessian::{hessian_at, linearize_at};
pub use submanifold::{infer_coordinate_locus, vanishing_locus, CoordinateSubmanifold, LocusReport};
pub use vector_field::SuperVectorField;
