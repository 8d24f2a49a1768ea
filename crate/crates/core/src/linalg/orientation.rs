//! Orientation classes `or_{(i,j)}` and their computation from bilinear
//! forms and compact automorphisms.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grassmann::{Parity, SuperFunction};

use super::matrix::{det, SuperMatrix};
use super::pfaffian::{pfaffian, pfaffian_f64};

/// An element of `or_{(i,j)}` relative to the declared coordinate basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OrientationClass {
    pub kind: (u8, u8),
    pub sign: i8,
}

impl OrientationClass {
    pub fn new(kind: (u8, u8), sign: i8) -> Self {
        OrientationClass { kind, sign }
    }

    pub fn flipped(self) -> Self {
        OrientationClass { sign: -self.sign, ..self }
    }
}

/// Sign of the body of `f` at the chart origin.
pub fn body_sign(f: &SuperFunction) -> Result<i32> {
    body_sign_at(f, &vec![0.0; f.m()])
}

pub fn body_sign_at(f: &SuperFunction, x: &[f64]) -> Result<i32> {
    let b = f.body();
    if let Some(c) = b.as_constant() {
        return match c.real_sign() {
            Some(0) | None if c.is_zero() => Err(Error::BodySingular("zero body".into())),
            Some(s) => Ok(s),
            None => Err(Error::BodySingular(format!("non-real body {c}"))),
        };
    }
    let v = b.eval(x)?;
    if v.im.abs() > 1e-12 * v.norm().max(1.0) {
        return Err(Error::BodySingular(format!("non-real body {b}")));
    }
    if v.re == 0.0 {
        return Err(Error::BodySingular(format!("body {b} vanishes")));
    }
    Ok(if v.re > 0.0 { 1 } else { -1 })
}

/// `sgn(det(D_11)^i det(D_22)^j)` evaluated on the body at the origin.
pub fn orientation_ij(d: &SuperMatrix, i: bool, j: bool) -> Result<OrientationClass> {
    if d.parity() != Parity::Even || !d.is_square() {
        return Err(Error::NotEven);
    }
    let (m, n) = d.ambient();
    let mut s = 1;
    if i {
        s *= body_sign(&det(&d.block_a(), m, n))?;
    }
    if j {
        s *= body_sign(&det(&d.block_d(), m, n))?;
    }
    Ok(OrientationClass::new((i as u8, j as u8), s as i8))
}

/// `or_{(0,1)}(B)`: the declared odd basis is positive iff the Pfaffian of the
/// odd-odd Gram block is positive.
pub fn or01_of_form(gram: &SuperMatrix) -> Result<OrientationClass> {
    if gram.parity() != Parity::Even {
        return Err(Error::NotEven);
    }
    let (m, n) = gram.ambient();
    let pf = pfaffian(&gram.block_d(), m, n)?;
    let s = body_sign(&pf).map_err(|_| Error::Degenerate("odd block of the form".into()))?;
    Ok(OrientationClass::new((0, 1), s as i8))
}

fn is_pos_def(g: &DMatrix<f64>) -> bool {
    let sym = (g + g.transpose()) * 0.5;
    sym.symmetric_eigen().eigenvalues.iter().all(|&v| v > 1e-10)
}

/// Metric `g` (symmetric positive definite) with `gE` skew, if one exists.
pub fn invariant_metric(e: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = e.nrows();
    if e.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", e.nrows(), e.ncols()),
        });
    }
    // basis of symmetric matrices, map g -> gE + E^t g
    let mut basis = Vec::new();
    for a in 0..k {
        for b in a..k {
            let mut s = DMatrix::zeros(k, k);
            s[(a, b)] = 1.0;
            s[(b, a)] = 1.0;
            basis.push(s);
        }
    }
    let mut t = DMatrix::zeros(k * k, basis.len());
    for (c, s) in basis.iter().enumerate() {
        let img = s * e + e.transpose() * s;
        for (r, v) in img.iter().enumerate() {
            t[(r, c)] = *v;
        }
    }
    let scale = e.norm().max(1.0);
    let mut id = DMatrix::zeros(basis.len(), 1);
    for (c, s) in basis.iter().enumerate() {
        if s.trace() > 0.0 {
            id[(c, 0)] = 0.5;
        }
    }
    // projection of the identity onto the solution space
    let svd = t.clone().svd(true, true);
    let pinv = svd
        .pseudo_inverse(1e-12 * scale)
        .map_err(|e| Error::NotCompact(e.to_string()))?;
    let w = &id - &pinv * (&t * &id);
    let mut g = DMatrix::zeros(k, k);
    for (c, s) in basis.iter().enumerate() {
        g += s * w[(c, 0)];
    }
    let residual = (&g * e + e.transpose() * &g).norm();
    if is_pos_def(&g) && residual <= 1e-9 * scale * g.norm() {
        return Ok(g);
    }
    // average pullbacks of the identity along the flow
    let steps = 256;
    let period = 2.0 * std::f64::consts::PI * 16.0 / scale;
    let mut avg = DMatrix::zeros(k, k);
    for s in 0..steps {
        let u = (e * (period * s as f64 / steps as f64)).exp();
        avg += u.transpose() * &u;
    }
    avg /= steps as f64;
    let residual = (&avg * e + e.transpose() * &avg).norm();
    if is_pos_def(&avg) && residual <= 1e-6 * scale * avg.norm() {
        return Ok(avg);
    }
    Err(Error::NotCompact(
        "no positive-definite metric makes the automorphism skew".into(),
    ))
}

/// Orientation fixed by the symplectic form `(x, y) -> <x, E y>_g`.
pub fn or_compact_auto(e: &DMatrix<f64>) -> Result<OrientationClass> {
    let g = invariant_metric(e)?;
    let ge = &g * e;
    let rows: Vec<Vec<f64>> = (0..ge.nrows()).map(|r| (0..ge.ncols()).map(|c| ge[(r, c)]).collect()).collect();
    let pf = pfaffian_f64(&rows)?;
    if pf.abs() < 1e-12 * ge.norm().max(1.0).powi(ge.nrows() as i32 / 2) {
        return Err(Error::Degenerate("automorphism is not invertible".into()));
    }
    Ok(OrientationClass::new((0, 1), if pf > 0.0 { 1 } else { -1 }))
}
