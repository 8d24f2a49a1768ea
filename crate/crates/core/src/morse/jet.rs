//! Polynomial superfunctions truncated at a fixed total degree in the even
//! coordinates.

use crate::error::{Error, Result};
use crate::grassmann::{Const, ScalarExpr, SuperFunction};

/// Approximate coefficients below this magnitude are treated as zero.
pub const APPROX_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetFunction {
    f: SuperFunction,
    order: u32,
}

/// Drop terms of even degree above `order` and negligible approximate terms.
pub fn truncate(f: &SuperFunction, order: u32) -> SuperFunction {
    f.map_coeffs(|_, c| {
        c.filter_terms(|t| t.degree() <= order).terms().fold(ScalarExpr::zero(), |acc, (t, k)| {
            if !k.is_exact() && k.to_c64().norm() < APPROX_EPS {
                acc
            } else {
                acc.add(&ScalarExpr::term(k.clone(), t.clone()))
            }
        })
    })
}

impl JetFunction {
    pub fn new(f: SuperFunction, order: u32) -> Result<Self> {
        if !f.is_polynomial() {
            return Err(Error::NonPolynomial(f.to_string()));
        }
        Ok(JetFunction {
            f: truncate(&f, order),
            order,
        })
    }

    pub fn function(&self) -> &SuperFunction {
        &self.f
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Smallest number of odd generators over the populated terms.
    pub fn j_degree(&self) -> Option<usize> {
        self.f.j_degree()
    }

    pub fn max_even_degree(&self) -> u32 {
        self.f
            .coeffs()
            .flat_map(|(_, c)| c.terms().map(|(t, _)| t.degree()).collect::<Vec<_>>())
            .max()
            .unwrap_or(0)
    }

    pub fn sub(&self, o: &SuperFunction) -> JetFunction {
        JetFunction {
            f: truncate(&self.f.sub(o), self.order),
            order: self.order,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero()
    }
}

/// Visit every monomial `c · x^α · θ^I` of a polynomial superfunction.
pub(crate) fn for_each_term(f: &SuperFunction, mut visit: impl FnMut(u64, &[(usize, u32)], &Const)) {
    for (mask, c) in f.coeffs() {
        for (t, k) in c.terms() {
            visit(mask, t.powers(), k);
        }
    }
}

/// Single monomial as a superfunction.
pub(crate) fn monomial(m: usize, n: usize, mask: u64, powers: &[(usize, u32)], c: &Const) -> SuperFunction {
    let mut e = ScalarExpr::constant(c.clone());
    for (v, p) in powers {
        e = e.mul(&ScalarExpr::var(*v).pow(*p));
    }
    SuperFunction::monomial(m, n, mask, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{parse_superfunction, CoordNames};

    #[test]
    fn truncation() {
        let names = CoordNames::standard(2, 2);
        let f = parse_superfunction("x1^2 + x1^3*x2 + x2^4*th1*th2", &names).unwrap();
        let j = JetFunction::new(f, 3).unwrap();
        assert_eq!(j.function(), &parse_superfunction("x1^2", &names).unwrap());
        assert!(JetFunction::new(parse_superfunction("exp(x1)", &names).unwrap(), 3).is_err());
        let tiny = SuperFunction::constant(2, 2, Const::approx(num_complex::Complex64::new(1e-15, 0.0)));
        assert!(truncate(&tiny, 3).is_zero());
    }
}
