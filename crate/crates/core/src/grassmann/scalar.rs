//! Scalar expressions over the even coordinates, kept in a canonical
//! sum-of-terms form. A term is `c * prod x_i^p_i * exp(E) * prod atom^q`
//! where `E` is itself a canonical expression. Two expressions are equal as
//! values of this type iff their canonical forms coincide, which makes exact
//! identity checks decidable in the rational sector.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use super::constant::{Const, Rational};
use super::smooth::step_derivative;
use crate::error::{Error, Result};

/// Transition atom `step^(deriv)(arg) / arg^inv_pow`, where `step` rises
/// smoothly from 0 at `lo` to 1 at `hi`. With `lo > 0` it is smooth and
/// finite everywhere because it vanishes identically near `arg = 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Atom {
    pub lo: Rational,
    pub hi: Rational,
    pub deriv: u32,
    pub inv_pow: u32,
    pub arg: Box<ScalarExpr>,
}

/// Non-constant part of a term.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Factors {
    powers: Vec<(usize, u32)>,
    exp: Option<Box<ScalarExpr>>,
    atoms: Vec<(Atom, u32)>,
}

fn merge_counts<K: Ord + Clone>(a: &[(K, u32)], b: &[(K, u32)]) -> Vec<(K, u32)> {
    let mut map: BTreeMap<K, u32> = BTreeMap::new();
    for (k, p) in a.iter().chain(b) {
        *map.entry(k.clone()).or_default() += p;
    }
    map.into_iter().filter(|(_, p)| *p > 0).collect()
}

impl Factors {
    pub fn powers(&self) -> &[(usize, u32)] {
        &self.powers
    }

    pub fn exp_arg(&self) -> Option<&ScalarExpr> {
        self.exp.as_deref()
    }

    pub fn atoms(&self) -> &[(Atom, u32)] {
        &self.atoms
    }

    pub fn is_unit(&self) -> bool {
        self.powers.is_empty() && self.exp.is_none() && self.atoms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.exp.is_none() && self.atoms.is_empty()
    }

    pub fn power_of(&self, var: usize) -> u32 {
        self.powers
            .iter()
            .find(|(v, _)| *v == var)
            .map(|(_, p)| *p)
            .unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().map(|(_, p)| p).sum()
    }

    pub fn monomial(powers: &[(usize, u32)]) -> Self {
        Factors {
            powers: merge_counts(powers, &[]),
            exp: None,
            atoms: Vec::new(),
        }
    }

    fn mul(&self, o: &Factors) -> Factors {
        let exp = match (&self.exp, &o.exp) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => {
                let s = a.add(b);
                if s.is_zero() {
                    None
                } else {
                    Some(Box::new(s))
                }
            }
        };
        Factors {
            powers: merge_counts(&self.powers, &o.powers),
            exp,
            atoms: merge_counts(&self.atoms, &o.atoms),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct ScalarExpr {
    terms: BTreeMap<Factors, Const>,
}

impl ScalarExpr {
    pub fn zero() -> Self {
        ScalarExpr::default()
    }

    pub fn one() -> Self {
        ScalarExpr::constant(Const::one())
    }

    pub fn constant(c: Const) -> Self {
        ScalarExpr::term(c, Factors::default())
    }

    pub fn int(v: i64) -> Self {
        ScalarExpr::constant(Const::int(v))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        ScalarExpr::constant(Const::ratio(p, q))
    }

    /// The coordinate `x_axis` (0-based).
    pub fn var(axis: usize) -> Self {
        ScalarExpr::term(Const::one(), Factors::monomial(&[(axis, 1)]))
    }

    pub fn term(c: Const, f: Factors) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(f, c);
        }
        ScalarExpr { terms }
    }

    pub fn atom(atom: Atom) -> Self {
        ScalarExpr::term(
            Const::one(),
            Factors {
                powers: Vec::new(),
                exp: None,
                atoms: vec![(atom, 1)],
            },
        )
    }

    /// Smooth transition of `arg` from 0 (at `lo`) to 1 (at `hi`).
    pub fn step(lo: Rational, hi: Rational, arg: ScalarExpr) -> Self {
        ScalarExpr::transition(lo, hi, 0, 0, arg)
    }

    pub fn transition(lo: Rational, hi: Rational, deriv: u32, inv_pow: u32, arg: ScalarExpr) -> Self {
        ScalarExpr::atom(Atom {
            lo,
            hi,
            deriv,
            inv_pow,
            arg: Box::new(arg),
        })
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Factors, &Const)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` if the expression is a constant (zero included).
    pub fn as_constant(&self) -> Option<Const> {
        match self.terms.len() {
            0 => Some(Const::zero()),
            1 => {
                let (f, c) = self.terms.iter().next().unwrap();
                f.is_unit().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn constant_term(&self) -> Const {
        self.terms
            .get(&Factors::default())
            .cloned()
            .unwrap_or_else(Const::zero)
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(Factors::is_monomial)
    }

    pub fn is_exact(&self) -> bool {
        self.terms.iter().all(|(f, c)| {
            c.is_exact()
                && f.exp.as_ref().map_or(true, |e| e.is_exact())
                && f.atoms.iter().all(|(a, _)| a.arg.is_exact())
        })
    }

    /// Largest coordinate index referenced anywhere in the tree.
    pub fn max_var(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for f in self.terms.keys() {
            let mut cands: Vec<Option<usize>> = f.powers.iter().map(|(v, _)| Some(*v)).collect();
            cands.push(f.exp.as_ref().and_then(|e| e.max_var()));
            cands.extend(f.atoms.iter().map(|(a, _)| a.arg.max_var()));
            for c in cands.into_iter().flatten() {
                best = Some(best.map_or(c, |b| b.max(c)));
            }
        }
        best
    }

    pub fn add(&self, o: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        out.add_assign(o);
        out
    }

    pub fn add_assign(&mut self, o: &ScalarExpr) {
        for (f, c) in &o.terms {
            self.add_term(f, c.clone());
        }
    }

    fn add_term(&mut self, f: &Factors, c: Const) {
        match self.terms.get_mut(f) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(f);
                } else {
                    *v = s;
                }
            }
            None if !c.is_zero() => {
                self.terms.insert(f.clone(), c);
            }
            None => {}
        }
    }

    pub fn neg(&self) -> ScalarExpr {
        ScalarExpr {
            terms: self.terms.iter().map(|(f, c)| (f.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, o: &ScalarExpr) -> ScalarExpr {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &Const) -> ScalarExpr {
        if k.is_zero() {
            return ScalarExpr::zero();
        }
        ScalarExpr {
            terms: self
                .terms
                .iter()
                .map(|(f, c)| (f.clone(), c.mul(k)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn mul(&self, o: &ScalarExpr) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (fa, ca) in &self.terms {
            for (fb, cb) in &o.terms {
                out.add_term(&fa.mul(fb), ca.mul(cb));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> ScalarExpr {
        let mut acc = ScalarExpr::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn exp(&self) -> ScalarExpr {
        if self.is_zero() {
            return ScalarExpr::one();
        }
        ScalarExpr::term(
            Const::one(),
            Factors {
                powers: Vec::new(),
                exp: Some(Box::new(self.clone())),
                atoms: Vec::new(),
            },
        )
    }

    /// Symbolic partial derivative along `axis`.
    pub fn diff(&self, axis: usize) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (f, c) in &self.terms {
            // power factors
            for (i, (v, p)) in f.powers.iter().enumerate() {
                if *v != axis {
                    continue;
                }
                let mut g = f.clone();
                if *p == 1 {
                    g.powers.remove(i);
                } else {
                    g.powers[i].1 -= 1;
                }
                out.add_assign(&ScalarExpr::term(c.mul(&Const::int(*p as i64)), g));
            }
            // exponential factor
            if let Some(e) = &f.exp {
                let de = e.diff(axis);
                if !de.is_zero() {
                    out.add_assign(&ScalarExpr::term(c.clone(), f.clone()).mul(&de));
                }
            }
            // transition atoms
            for (i, (a, q)) in f.atoms.iter().enumerate() {
                let darg = a.arg.diff(axis);
                if darg.is_zero() {
                    continue;
                }
                let mut rest = f.clone();
                if *q == 1 {
                    rest.atoms.remove(i);
                } else {
                    rest.atoms[i].1 -= 1;
                }
                let up = ScalarExpr::transition(
                    a.lo.clone(),
                    a.hi.clone(),
                    a.deriv + 1,
                    a.inv_pow,
                    (*a.arg).clone(),
                );
                let mut da = up;
                if a.inv_pow > 0 {
                    let down = ScalarExpr::transition(
                        a.lo.clone(),
                        a.hi.clone(),
                        a.deriv,
                        a.inv_pow + 1,
                        (*a.arg).clone(),
                    );
                    da = da.sub(&down.scale(&Const::int(a.inv_pow as i64)));
                }
                let t = ScalarExpr::term(c.mul(&Const::int(*q as i64)), rest)
                    .mul(&da)
                    .mul(&darg);
                out.add_assign(&t);
            }
        }
        out
    }

    /// Replace every coordinate `x_i` by `sub(i)`.
    pub fn substitute(&self, sub: &dyn Fn(usize) -> ScalarExpr) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (f, c) in &self.terms {
            let mut t = ScalarExpr::constant(c.clone());
            for (v, p) in &f.powers {
                t = t.mul(&sub(*v).pow(*p));
                if t.is_zero() {
                    break;
                }
            }
            if t.is_zero() {
                continue;
            }
            if let Some(e) = &f.exp {
                t = t.mul(&e.substitute(sub).exp());
            }
            for (a, q) in &f.atoms {
                let at = ScalarExpr::transition(
                    a.lo.clone(),
                    a.hi.clone(),
                    a.deriv,
                    a.inv_pow,
                    a.arg.substitute(sub),
                );
                t = t.mul(&at.pow(*q));
            }
            out.add_assign(&t);
        }
        out
    }

    /// Keep only the terms accepted by `keep`.
    pub fn filter_terms(&self, keep: impl Fn(&Factors) -> bool) -> ScalarExpr {
        ScalarExpr {
            terms: self
                .terms
                .iter()
                .filter(|(f, _)| keep(f))
                .map(|(f, c)| (f.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn to_numeric(&self) -> NumericExpr {
        NumericExpr {
            terms: self
                .terms
                .iter()
                .map(|(f, c)| NumTerm {
                    c: c.to_c64(),
                    powers: f.powers.iter().map(|(v, p)| (*v, *p as i32)).collect(),
                    exp: f.exp.as_ref().map(|e| Box::new(e.to_numeric())),
                    atoms: f
                        .atoms
                        .iter()
                        .map(|(a, q)| {
                            (
                                NumAtom {
                                    lo: a.lo.to_f64().unwrap_or(f64::NAN),
                                    hi: a.hi.to_f64().unwrap_or(f64::NAN),
                                    deriv: a.deriv,
                                    inv_pow: a.inv_pow as i32,
                                    arg: a.arg.to_numeric(),
                                },
                                *q as i32,
                            )
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Value at a real point; every referenced coordinate must be in range.
    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if let Some(v) = self.max_var() {
            if v >= x.len() {
                return Err(Error::DimensionMismatch {
                    expected: format!("point with at least {} coordinates", v + 1),
                    found: format!("{}", x.len()),
                });
            }
        }
        Ok(self.to_numeric().eval(x))
    }

    pub fn fmt_with(&self, names: &dyn Fn(usize) -> String) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self.terms.iter().map(|(f, c)| fmt_term(f, c, names)).collect();
        parts.join(" + ").replace(" + -", " - ")
    }
}

fn fmt_term(f: &Factors, c: &Const, names: &dyn Fn(usize) -> String) -> String {
    let mut factors: Vec<String> = Vec::new();
    for (v, p) in &f.powers {
        if *p == 1 {
            factors.push(names(*v));
        } else {
            factors.push(format!("{}^{}", names(*v), p));
        }
    }
    if let Some(e) = &f.exp {
        factors.push(format!("exp({})", e.fmt_with(names)));
    }
    for (a, q) in &f.atoms {
        let s = format!(
            "step({}, {}, {}, {}, {})",
            Const::real(a.lo.clone()),
            Const::real(a.hi.clone()),
            a.deriv,
            a.inv_pow,
            a.arg.fmt_with(names)
        );
        factors.push(if *q == 1 { s } else { format!("{s}^{q}") });
    }
    if factors.is_empty() {
        return c.to_string();
    }
    let body = factors.join("*");
    if c.is_one() {
        body
    } else if c.neg().is_one() {
        format!("-{body}")
    } else if c.is_simple() {
        format!("{c}*{body}")
    } else {
        format!("({c})*{body}")
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&|i| format!("x{}", i + 1)))
    }
}

impl From<Const> for ScalarExpr {
    fn from(c: Const) -> Self {
        ScalarExpr::constant(c)
    }
}

#[derive(Clone, Debug)]
struct NumAtom {
    lo: f64,
    hi: f64,
    deriv: u32,
    inv_pow: i32,
    arg: NumericExpr,
}

#[derive(Clone, Debug)]
struct NumTerm {
    c: Complex64,
    powers: Vec<(usize, i32)>,
    exp: Option<Box<NumericExpr>>,
    atoms: Vec<(NumAtom, i32)>,
}

/// Floating-point image of a [`ScalarExpr`] for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct NumericExpr {
    terms: Vec<NumTerm>,
}

impl NumericExpr {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut acc = Complex64::zero();
        for t in &self.terms {
            let mut v = t.c;
            for (i, p) in &t.powers {
                v *= x[*i].powi(*p);
            }
            if let Some(e) = &t.exp {
                v *= e.eval(x).exp();
            }
            for (a, q) in &t.atoms {
                let u = a.arg.eval(x).re;
                let s = step_derivative(a.lo, a.hi, a.deriv, u);
                let val = if s == 0.0 { 0.0 } else { s / u.powi(a.inv_pow) };
                v *= val.powi(*q);
            }
            acc += v;
        }
        acc
    }
}

/// Evaluate `e` at `x`, requiring `x` to have exactly `m` entries.
pub fn eval_scalar(e: &ScalarExpr, x: &[f64], m: usize) -> Result<Complex64> {
    if x.len() != m {
        return Err(Error::DimensionMismatch {
            expected: format!("{m}"),
            found: format!("{}", x.len()),
        });
    }
    e.eval(x)
}

/// Symbolic partial derivative with a range check against the even dimension.
pub fn diff_scalar(e: &ScalarExpr, axis: usize, m: usize) -> Result<ScalarExpr> {
    if axis >= m {
        return Err(Error::AxisOutOfRange { axis, dim: m });
    }
    Ok(e.diff(axis))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> ScalarExpr {
        ScalarExpr::var(i)
    }

    #[test]
    fn eval_examples() {
        let e = x(0).pow(2).add(&x(1).pow(2));
        assert_eq!(eval_scalar(&e, &[1.0, 2.0], 2).unwrap().re, 5.0);
        assert_eq!(ScalarExpr::int(0).neg().exp().eval(&[0.0, 0.0]).unwrap().re, 1.0);
        let g = e.scale(&Const::ratio(-1, 2)).exp();
        let v = g.eval(&[1.0, 1.0]).unwrap().re;
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!(eval_scalar(&e, &[1.0], 2).is_err());
    }

    #[test]
    fn diff_examples() {
        assert_eq!(x(0).pow(2).diff(0), x(0).scale(&Const::int(2)));
        assert!(x(0).pow(2).diff(1).is_zero());
        assert!(diff_scalar(&x(0), 2, 2).is_err());
        // d/dx exp(-x^2) at 0.5 against a central difference
        let e = x(0).pow(2).neg().exp();
        let d = e.diff(0).eval(&[0.5]).unwrap().re;
        let h = 1e-5;
        let fd = (e.eval(&[0.5 + h]).unwrap().re - e.eval(&[0.5 - h]).unwrap().re) / (2.0 * h);
        assert!((d - fd).abs() < 1e-9);
        assert!((d - (-0.778801)).abs() < 1e-6);
    }

    #[test]
    fn canonical_form_cancels() {
        let a = x(0).add(&x(1)).pow(2);
        let b = x(0).pow(2).add(&x(0).mul(&x(1)).scale(&Const::int(2))).add(&x(1).pow(2));
        assert_eq!(a, b);
        let e = x(0).exp().mul(&x(0).neg().exp());
        assert_eq!(e, ScalarExpr::one());
    }

    #[test]
    fn transition_atom_chain_rule() {
        let u = x(0).pow(2).add(&x(1).pow(2));
        let a = ScalarExpr::transition(super::super::constant::rat(1, 1), super::super::constant::rat(4, 1), 0, 1, u);
        let d = a.diff(0);
        let p = [1.2, 0.7];
        let h = 1e-6;
        let fd = (a.eval(&[p[0] + h, p[1]]).unwrap().re - a.eval(&[p[0] - h, p[1]]).unwrap().re) / (2.0 * h);
        assert!((d.eval(&p).unwrap().re - fd).abs() < 1e-7);
    }
}
