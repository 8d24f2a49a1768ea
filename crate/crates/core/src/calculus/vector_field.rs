//! Vector fields `V = Σ a^i ∂_{x^i} + Σ b^α ∂_{θ^α}` with coefficients on
//! the left, acting as superderivations.

use std::fmt;

use crate::error::{Error, Result};
use crate::grassmann::{Axis, CoordNames, Parity, SuperFunction};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperVectorField {
    m: usize,
    n: usize,
    parity: Parity,
    even: Vec<SuperFunction>,
    odd: Vec<SuperFunction>,
}

impl SuperVectorField {
    pub fn zero(m: usize, n: usize, parity: Parity) -> Self {
        SuperVectorField {
            m,
            n,
            parity,
            even: vec![SuperFunction::zero(m, n); m],
            odd: vec![SuperFunction::zero(m, n); n],
        }
    }

    /// Build from coefficient lists, checking dimensions and parities.
    pub fn new(parity: Parity, even: Vec<SuperFunction>, odd: Vec<SuperFunction>) -> Result<Self> {
        let (m, n) = (even.len(), odd.len());
        for f in even.iter().chain(&odd) {
            if f.dims() != (m, n) {
                return Err(Error::DimensionMismatch {
                    expected: format!("R^{{{m}|{n}}}"),
                    found: format!("R^{{{}|{}}}", f.m(), f.n()),
                });
            }
        }
        let v = SuperVectorField {
            m,
            n,
            parity,
            even,
            odd,
        };
        v.check_parity()?;
        Ok(v)
    }

    /// The coordinate field `∂_axis`.
    pub fn coordinate(m: usize, n: usize, axis: Axis) -> Self {
        let mut v = SuperVectorField::zero(m, n, axis.parity());
        match axis {
            Axis::Even(i) => v.even[i] = SuperFunction::one(m, n),
            Axis::Odd(a) => v.odd[a] = SuperFunction::one(m, n),
        }
        v
    }

    fn check_parity(&self) -> Result<()> {
        for f in &self.even {
            if !f.is_zero() && f.parity() != Some(self.parity) {
                return Err(Error::Inhomogeneous);
            }
        }
        for f in &self.odd {
            if !f.is_zero() && f.parity() != Some(self.parity.flip()) {
                return Err(Error::Inhomogeneous);
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn even_coeffs(&self) -> &[SuperFunction] {
        &self.even
    }

    pub fn odd_coeffs(&self) -> &[SuperFunction] {
        &self.odd
    }

    /// Value on a coordinate function: `V(x^i) = a^i`, `V(θ^α) = b^α`.
    pub fn coeff(&self, axis: Axis) -> &SuperFunction {
        match axis {
            Axis::Even(i) => &self.even[i],
            Axis::Odd(a) => &self.odd[a],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.even.iter().chain(&self.odd).all(SuperFunction::is_zero)
    }

    fn check(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: format!("R^{{{}|{}}}", self.m, self.n),
                found: format!("R^{{{}|{}}}", dims.0, dims.1),
            });
        }
        Ok(())
    }

    pub fn apply(&self, f: &SuperFunction) -> Result<SuperFunction> {
        self.check(f.dims())?;
        let mut acc = SuperFunction::zero(self.m, self.n);
        for (i, a) in self.even.iter().enumerate() {
            if !a.is_zero() {
                acc = acc.add(&a.mul(&f.partial_even(i)?));
            }
        }
        for (k, b) in self.odd.iter().enumerate() {
            if !b.is_zero() {
                acc = acc.add(&b.mul(&f.partial_odd(k)?));
            }
        }
        Ok(acc)
    }

    pub fn add(&self, o: &SuperVectorField) -> Result<SuperVectorField> {
        self.check(o.dims())?;
        if self.parity != o.parity && !self.is_zero() && !o.is_zero() {
            return Err(Error::Inhomogeneous);
        }
        let parity = if self.is_zero() { o.parity } else { self.parity };
        Ok(SuperVectorField {
            m: self.m,
            n: self.n,
            parity,
            even: self.even.iter().zip(&o.even).map(|(a, b)| a.add(b)).collect(),
            odd: self.odd.iter().zip(&o.odd).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn scale(&self, f: &SuperFunction) -> Result<SuperVectorField> {
        let parity = match f.parity() {
            Some(p) => self.parity.add(p),
            None => return Err(Error::Inhomogeneous),
        };
        Ok(SuperVectorField {
            m: self.m,
            n: self.n,
            parity,
            even: self.even.iter().map(|a| f.mul(a)).collect(),
            odd: self.odd.iter().map(|b| f.mul(b)).collect(),
        })
    }

    /// Supercommutator `[V, W] = VW - (-1)^{p(V)p(W)} WV`.
    pub fn bracket(&self, w: &SuperVectorField) -> Result<SuperVectorField> {
        self.check(w.dims())?;
        let both_odd = self.parity == Parity::Odd && w.parity == Parity::Odd;
        let comb = |x: SuperFunction, y: SuperFunction| if both_odd { x.add(&y) } else { x.sub(&y) };
        let mut even = Vec::with_capacity(self.m);
        for i in 0..self.m {
            even.push(comb(self.apply(&w.even[i])?, w.apply(&self.even[i])?));
        }
        let mut odd = Vec::with_capacity(self.n);
        for a in 0..self.n {
            odd.push(comb(self.apply(&w.odd[a])?, w.apply(&self.odd[a])?));
        }
        Ok(SuperVectorField {
            m: self.m,
            n: self.n,
            parity: self.parity.add(w.parity),
            even,
            odd,
        })
    }

    /// `½[Q, Q]`, which for an odd field is the composite `Q∘Q`.
    pub fn square(&self) -> Result<SuperVectorField> {
        if self.parity != Parity::Odd {
            return Err(Error::NotOdd);
        }
        let mut even = Vec::with_capacity(self.m);
        for a in &self.even {
            even.push(self.apply(a)?);
        }
        let mut odd = Vec::with_capacity(self.n);
        for b in &self.odd {
            odd.push(self.apply(b)?);
        }
        Ok(SuperVectorField {
            m: self.m,
            n: self.n,
            parity: Parity::Even,
            even,
            odd,
        })
    }

    pub fn fmt_with(&self, names: &CoordNames) -> String {
        let mut parts = Vec::new();
        let mut push = |f: &SuperFunction, d: &str| {
            if f.is_zero() {
                return;
            }
            let s = names.print(f);
            if f.coeffs().count() == 1 && !s.contains(" + ") {
                parts.push(format!("{s}*d/d{d}"));
            } else {
                parts.push(format!("({s})*d/d{d}"));
            }
        };
        for (i, a) in self.even.iter().enumerate() {
            push(a, &names.even[i]);
        }
        for (k, b) in self.odd.iter().enumerate() {
            push(b, &names.odd[k]);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ").replace(" + -", " - ")
        }
    }
}

impl fmt::Display for SuperVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&CoordNames::standard(self.m, self.n)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::parse_superfunction;

    /// `θ¹∂_x + θ²∂_y - y∂_{θ¹} + x∂_{θ²}` on R^{2|2}.
    pub(crate) fn dh_field() -> SuperVectorField {
        let names = CoordNames::new(vec!["x".into(), "y".into()], vec!["th1".into(), "th2".into()]).unwrap();
        let p = |s: &str| parse_superfunction(s, &names).unwrap();
        SuperVectorField::new(Parity::Odd, vec![p("th1"), p("th2")], vec![p("-y"), p("x")]).unwrap()
    }

    #[test]
    fn applies_as_derivation() {
        let names = CoordNames::standard(1, 1);
        let p = |s: &str| parse_superfunction(s, &names).unwrap();
        let dx = SuperVectorField::coordinate(1, 1, Axis::Even(0));
        assert_eq!(dx.apply(&p("x1^2")).unwrap(), p("2*x1"));
        let q = SuperVectorField::new(Parity::Odd, vec![p("th1")], vec![p("0")]).unwrap();
        assert_eq!(q.apply(&p("x1")).unwrap(), p("th1"));
        assert!(q.apply(&p("th1")).unwrap().is_zero());
        assert!(SuperVectorField::new(Parity::Odd, vec![p("x1")], vec![p("0")]).is_err());
    }

    #[test]
    fn golden_field() {
        let q = dh_field();
        let names = CoordNames::new(vec!["x".into(), "y".into()], vec!["th1".into(), "th2".into()]).unwrap();
        let p = |s: &str| parse_superfunction(s, &names).unwrap();
        assert_eq!(q.apply(&p("-y*th1 + x*th2")).unwrap(), p("x^2 + y^2 + 2*th1*th2"));
        let q2 = q.square().unwrap();
        let want = SuperVectorField::new(Parity::Even, vec![p("-y"), p("x")], vec![p("-th2"), p("th1")]).unwrap();
        assert_eq!(q2, want);
        let half = q.bracket(&q).unwrap();
        assert_eq!(half.even_coeffs()[0], p("-2*y"));
    }

    #[test]
    fn brackets() {
        let dx = SuperVectorField::coordinate(2, 0, Axis::Even(0));
        let dy = SuperVectorField::coordinate(2, 0, Axis::Even(1));
        assert!(dx.bracket(&dy).unwrap().is_zero());
        let names = CoordNames::standard(1, 1);
        let q = SuperVectorField::new(
            Parity::Odd,
            vec![parse_superfunction("th1", &names).unwrap()],
            vec![SuperFunction::zero(1, 1)],
        )
        .unwrap();
        assert!(q.square().unwrap().is_zero());
    }
}
