//! Supermatrices, Berezinians, Pfaffians and orientations.

pub mod berezinian;
pub mod matrix;
pub mod orientation;
pub mod pfaffian;

pub use berezinian::{ber_of_form, berezinian_even, berezinian_odd, form_hat, sqrt_ber_line, BerLineElement};
pub use matrix::{det, mat_inverse, SuperMatrix};
pub use orientation::{
    body_sign, body_sign_at, invariant_metric, or01_of_form, or_compact_auto, orientation_ij, OrientationClass,
};
pub use pfaffian::{pfaffian, pfaffian_f64};
