//! Berezinians of even and odd supermatrices, of even bilinear forms, and
//! elements of Berezinian lines.

use crate::error::{Error, Result};
use crate::grassmann::{Parity, SuperFunction};

use super::matrix::{det, mat_inverse, mat_mul, mat_sub, SuperMatrix};
use super::orientation::{body_sign, OrientationClass};

/// `Ber(F) = det(A - B D^-1 C) / det(D)` for an even square matrix.
pub fn berezinian_even(f: &SuperMatrix) -> Result<SuperFunction> {
    if f.parity() != Parity::Even {
        return Err(Error::NotEven);
    }
    if !f.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square supermatrix".into(),
            found: format!("{:?} -> {:?}", f.cols(), f.rows()),
        });
    }
    f.validate()?;
    let (m, n) = f.ambient();
    let (p, _) = f.rows();
    let d = f.block_d();
    let det_d = det(&d, m, n);
    let det_d_inv = det_d
        .inverse()
        .map_err(|_| Error::BodySingular(format!("det D = {det_d}")))?;
    let dinv = mat_inverse(&d, m, n)?;
    let schur = mat_sub(&f.block_a(), &mat_mul(&mat_mul(&f.block_b(), &dinv, m, n, 0), &f.block_c(), m, n, p), m, n);
    Ok(det(&schur, m, n).mul(&det_d_inv))
}

/// Element `c · b_β^{⊗power}` of a Berezinian line, or of its dual when
/// `dual` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BerLineElement {
    pub coefficient: SuperFunction,
    pub basis: Vec<String>,
    pub power: u8,
    pub dual: bool,
    pub orientation: Option<OrientationClass>,
}

impl BerLineElement {
    pub fn new(coefficient: SuperFunction, basis: Vec<String>, power: u8, dual: bool) -> Self {
        BerLineElement {
            coefficient,
            basis,
            power,
            dual,
            orientation: None,
        }
    }

    /// Coefficient of the same element relative to the basis `G·β`, where
    /// `b_{Gβ} = Ber(G) b_β`.
    pub fn rebase(&self, g: &SuperMatrix, basis: Vec<String>) -> Result<BerLineElement> {
        let ber = berezinian_even(g)?;
        let factor = if self.dual { ber } else { ber.inverse()? };
        Ok(BerLineElement {
            coefficient: self.coefficient.mul(&factor.pow(self.power as u32)),
            basis,
            ..self.clone()
        })
    }

    /// Pairing of an element with its dual partner on the same basis.
    pub fn pair(&self, other: &BerLineElement) -> Result<SuperFunction> {
        if self.dual == other.dual || self.power != other.power || self.basis != other.basis {
            return Err(Error::DimensionMismatch {
                expected: "dual elements on the same basis".into(),
                found: format!("{:?} / {:?}", self.basis, other.basis),
            });
        }
        Ok(self.coefficient.mul(&other.coefficient))
    }
}

/// Berezinian of an odd isomorphism `E: (p|p) -> (p|p)`, an element of
/// `Ber(M)^{⊗2}` with coefficient `Ber(E·I')`.
pub fn berezinian_odd(e: &SuperMatrix, basis: Vec<String>) -> Result<BerLineElement> {
    if e.parity() != Parity::Odd {
        return Err(Error::NotOdd);
    }
    let (p, q) = e.rows();
    if !e.is_square() || p != q {
        return Err(Error::DimensionMismatch {
            expected: "odd map p|p -> p|p".into(),
            found: format!("{:?} -> {:?}", e.cols(), e.rows()),
        });
    }
    let (m, n) = e.ambient();
    let ei = e.mul(&SuperMatrix::odd_identity(m, n, p))?;
    Ok(BerLineElement::new(berezinian_even(&ei)?, basis, 2, false))
}

/// `Ĥ`: the map `M -> M*` whose supertranspose is the Gram matrix of the form.
pub fn form_hat(gram: &SuperMatrix) -> Result<SuperMatrix> {
    gram.supertranspose_inverse()
}

/// `Ber(B) ∈ Ber(M*)^{⊗2}` and `Ber^{-1}(B) ∈ Ber(M)^{⊗2}` for an even form
/// given by its Gram matrix `G_ab = B(e_a, e_b)`.
pub fn ber_of_form(gram: &SuperMatrix, basis: Vec<String>) -> Result<(BerLineElement, BerLineElement)> {
    if gram.parity() != Parity::Even {
        return Err(Error::NotEven);
    }
    let ber = berezinian_even(&form_hat(gram)?).map_err(|e| match e {
        Error::BodySingular(s) => Error::Degenerate(s),
        other => other,
    })?;
    let inv = ber
        .inverse()
        .map_err(|_| Error::Degenerate(format!("Ber = {ber}")))?;
    Ok((
        BerLineElement::new(ber, basis.clone(), 2, true),
        BerLineElement::new(inv, basis, 2, false),
    ))
}

/// `√(f b⊗b) = √|f| b` tagged with the (1,1)-orientation of `b`.
pub fn sqrt_ber_line(v: &BerLineElement) -> Result<BerLineElement> {
    if v.power != 2 {
        return Err(Error::Invariant("square root needs a tensor-square element".into()));
    }
    let f = &v.coefficient;
    let s = body_sign(f).map_err(|_| Error::NonInvertibleBody(f.to_string()))?;
    let abs = if s < 0 { f.neg() } else { f.clone() };
    let root = abs.sqrt_positive()?;
    Ok(BerLineElement {
        coefficient: root,
        basis: v.basis.clone(),
        power: 1,
        dual: v.dual,
        orientation: Some(OrientationClass::new((1, 1), 1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{Const, ScalarExpr};

    fn c(n: usize, v: i64) -> SuperFunction {
        SuperFunction::int(0, n, v)
    }

    fn th(n: usize, a: usize) -> SuperFunction {
        SuperFunction::odd_coord(0, n, a)
    }

    fn mat(rows: (usize, usize), par: Parity, data: Vec<Vec<SuperFunction>>) -> SuperMatrix {
        SuperMatrix::from_rows(rows, rows, par, data).unwrap()
    }

    #[test]
    fn supertranspose_examples() {
        let id = SuperMatrix::identity(0, 2, (1, 1));
        assert_eq!(id.supertranspose().unwrap(), id);
        let f = mat((1, 1), Parity::Even, vec![vec![c(2, 1), th(2, 0)], vec![th(2, 1), c(2, 1)]]);
        let st = f.supertranspose().unwrap();
        assert_eq!(st.block_b()[0][0], th(2, 1));
        assert_eq!(st.block_c()[0][0], th(2, 0).neg());
        assert_eq!(f.supertranspose_inverse().unwrap().supertranspose().unwrap(), f);
    }

    #[test]
    fn even_berezinians() {
        let d = mat((1, 1), Parity::Even, vec![vec![c(0, 2), c(0, 0)], vec![c(0, 0), c(0, 3)]]);
        assert_eq!(berezinian_even(&d).unwrap(), SuperFunction::constant(0, 0, Const::ratio(2, 3)));
        let f = mat((1, 1), Parity::Even, vec![vec![c(2, 1), th(2, 0)], vec![th(2, 1), c(2, 1)]]);
        let want = c(2, 1).sub(&th(2, 0).mul(&th(2, 1)));
        assert_eq!(berezinian_even(&f).unwrap(), want);
        // factor F = (1 th1; 0 1)(1 0; th2 1) up to the diagonal correction
        let u = mat((1, 1), Parity::Even, vec![vec![c(2, 1), th(2, 0)], vec![c(2, 0), c(2, 1)]]);
        let l = mat((1, 1), Parity::Even, vec![vec![c(2, 1), c(2, 0)], vec![th(2, 1), c(2, 1)]]);
        let ul = u.mul(&l).unwrap();
        assert_eq!(
            berezinian_even(&ul).unwrap(),
            berezinian_even(&u).unwrap().mul(&berezinian_even(&l).unwrap())
        );
        let pi = f.parity_swap();
        assert_eq!(berezinian_even(&pi).unwrap(), berezinian_even(&f).unwrap().inverse().unwrap());
        let sing = mat((1, 1), Parity::Even, vec![vec![c(0, 1), c(0, 0)], vec![c(0, 0), c(0, 0)]]);
        assert!(matches!(berezinian_even(&sing), Err(Error::BodySingular(_))));
    }

    #[test]
    fn odd_berezinians() {
        let e = mat((1, 1), Parity::Odd, vec![vec![c(0, 0), c(0, 1)], vec![c(0, 1), c(0, 0)]]);
        assert_eq!(berezinian_odd(&e, vec![]).unwrap().coefficient, c(0, 1));
        let e = mat((1, 1), Parity::Odd, vec![vec![c(0, 0), c(0, 2)], vec![c(0, 4), c(0, 0)]]);
        assert_eq!(
            berezinian_odd(&e, vec![]).unwrap().coefficient,
            SuperFunction::constant(0, 0, Const::ratio(1, 2))
        );
        // V = id, W = (0 1; -1 0)
        let z = || c(0, 0);
        let l = mat(
            (2, 2),
            Parity::Odd,
            vec![
                vec![z(), z(), c(0, 1), z()],
                vec![z(), z(), z(), c(0, 1)],
                vec![z(), c(0, 1), z(), z()],
                vec![c(0, -1), z(), z(), z()],
            ],
        );
        assert_eq!(berezinian_odd(&l, vec![]).unwrap().coefficient, c(0, 1));
        assert!(berezinian_odd(&SuperMatrix::identity(0, 0, (1, 1)), vec![]).is_err());
    }

    #[test]
    fn forms() {
        let z = || c(0, 0);
        let g = mat((2, 0), Parity::Even, vec![vec![c(0, 2), z()], vec![z(), c(0, 3)]]);
        assert_eq!(ber_of_form(&g, vec![]).unwrap().0.coefficient, c(0, 6));
        let g = mat((0, 2), Parity::Even, vec![vec![z(), c(0, -2)], vec![c(0, 2), z()]]);
        let (b, binv) = ber_of_form(&g, vec![]).unwrap();
        assert_eq!(b.coefficient, SuperFunction::constant(0, 0, Const::ratio(1, 4)));
        assert_eq!(b.pair(&binv).unwrap(), c(0, 1));
        let h = mat(
            (2, 2),
            Parity::Even,
            vec![
                vec![c(0, 2), z(), z(), z()],
                vec![z(), c(0, 2), z(), z()],
                vec![z(), z(), z(), c(0, -2)],
                vec![z(), z(), c(0, 2), z()],
            ],
        );
        assert_eq!(ber_of_form(&h, vec![]).unwrap().0.coefficient, c(0, 1));
        let deg = mat((0, 2), Parity::Even, vec![vec![z(), z()], vec![z(), z()]]);
        assert!(matches!(ber_of_form(&deg, vec![]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn square_roots_of_lines() {
        let v = BerLineElement::new(c(0, 4), vec!["b".into()], 2, false);
        let r = sqrt_ber_line(&v).unwrap();
        assert_eq!(r.coefficient, c(0, 2));
        assert_eq!(r.power, 1);
        assert_eq!(r.orientation, Some(OrientationClass::new((1, 1), 1)));
        let f = c(2, 1).add(&th(2, 0).mul(&th(2, 1)));
        let r = sqrt_ber_line(&BerLineElement::new(f.clone(), vec![], 2, false)).unwrap();
        assert_eq!(r.coefficient.mul(&r.coefficient), f);
        let r = sqrt_ber_line(&BerLineElement::new(c(0, -4), vec![], 2, false)).unwrap();
        assert_eq!(r.coefficient, c(0, 2));
        let x = SuperFunction::scalar(1, 0, ScalarExpr::var(0));
        assert!(sqrt_ber_line(&BerLineElement::new(x, vec![], 2, false)).is_err());
    }
}
