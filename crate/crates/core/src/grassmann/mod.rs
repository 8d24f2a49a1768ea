//! Grassmann algebra over smooth coefficients on R^{m|n}.

pub mod constant;
pub mod parse;
pub mod quadrature;
pub mod scalar;
pub mod smooth;
pub mod superfn;

pub use constant::{rat, Const, Rational};
pub use parse::{parse_scalar, parse_superfunction, CoordNames};
pub use scalar::{diff_scalar, eval_scalar, Atom, Factors, NumericExpr, ScalarExpr};
pub use superfn::{full_mask, reorder_sign, Axis, Parity, SuperFunction};
pub use quadrature::{integrate_even, QuadratureConfig, QuadratureKind};
