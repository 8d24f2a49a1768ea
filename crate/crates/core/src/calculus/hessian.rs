//! Hessians of functions and linearizations of vector fields along a
//! coordinate subsupermanifold.

use super::submanifold::CoordinateSubmanifold;
use super::vector_field::SuperVectorField;
use crate::error::{Error, Result};
use crate::grassmann::{Parity, SuperFunction};
use crate::linalg::SuperMatrix;

/// Gram matrix `H(∂_a, ∂_b) = ∂_a ∂_b S |_N` over the normal directions
/// (even first). Requires `N` to be critical for `S`.
pub fn hessian_at(s: &SuperFunction, n_sub: &CoordinateSubmanifold) -> Result<SuperMatrix> {
    if s.dims() != n_sub.ambient() {
        return Err(Error::DimensionMismatch {
            expected: format!("{:?}", n_sub.ambient()),
            found: format!("{:?}", s.dims()),
        });
    }
    if !s.is_even() {
        return Err(Error::NotEven);
    }
    let (m, n) = s.dims();
    for i in 0..m {
        if !n_sub.in_ideal(&s.partial_even(i)?) {
            return Err(Error::NotCritical(format!("d/dx{} does not vanish on N", i + 1)));
        }
    }
    for a in 0..n {
        if !n_sub.in_ideal(&s.partial_odd(a)?) {
            return Err(Error::NotCritical(format!("d/dth{} does not vanish on N", a + 1)));
        }
    }
    let axes = n_sub.normal_axes();
    let mut rows = Vec::with_capacity(axes.len());
    for a in &axes {
        let mut row = Vec::with_capacity(axes.len());
        for b in &axes {
            row.push(n_sub.restrict(&s.partial(*b)?.partial(*a)?));
        }
        rows.push(row);
    }
    SuperMatrix::from_rows(n_sub.codim(), n_sub.codim(), Parity::Even, rows)
}

/// Matrix of `ξ ↦ [V, ξ]` on the normal bundle, in the coordinate basis
/// `∂_a` of normal directions (rows: target component, columns: source).
pub fn linearize_at(v: &SuperVectorField, n_sub: &CoordinateSubmanifold) -> Result<SuperMatrix> {
    if v.dims() != n_sub.ambient() {
        return Err(Error::DimensionMismatch {
            expected: format!("{:?}", n_sub.ambient()),
            found: format!("{:?}", v.dims()),
        });
    }
    if !n_sub.field_vanishes(v) {
        return Err(Error::Submanifold(
            "the vector field does not vanish on the declared submanifold".into(),
        ));
    }
    let (m, n) = v.dims();
    let axes = n_sub.normal_axes();
    let mut out = SuperMatrix::zero(m, n, n_sub.codim(), n_sub.codim(), v.parity());
    for (c, a) in axes.iter().enumerate() {
        let br = v.bracket(&SuperVectorField::coordinate(m, n, *a))?;
        for (r, b) in axes.iter().enumerate() {
            let e = n_sub.restrict(br.coeff(*b));
            // left coefficient -> matrix entry acting from the right
            let flip = b.parity() == Parity::Odd && e.parity() == Some(Parity::Odd) && !e.is_zero();
            out.set(r, c, if flip { e.neg() } else { e });
        }
    }
    out.validate()?;
    Ok(out)
}
