//! Superfunctions on R^{m|n}: polynomials in the odd generators with
//! [`ScalarExpr`] coefficients, indexed by bitmask.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::constant::Const;
use super::scalar::{Factors, ScalarExpr};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(b: usize) -> Parity {
        if b % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn flip(self) -> Parity {
        Parity::from_bit(self.bit() + 1)
    }

    pub fn add(self, o: Parity) -> Parity {
        Parity::from_bit(self.bit() + o.bit())
    }
}

/// A coordinate direction on R^{m|n}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Even(usize),
    Odd(usize),
}

impl Axis {
    pub fn parity(self) -> Parity {
        match self {
            Axis::Even(_) => Parity::Even,
            Axis::Odd(_) => Parity::Odd,
        }
    }
}

/// Sign of `theta^a * theta^b` after sorting into increasing order
/// (zero overlap assumed).
pub fn reorder_sign(a: u64, b: u64) -> i64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        swaps += (a >> (j + 1)).count_ones();
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SuperFunction {
    m: usize,
    n: usize,
    coeffs: BTreeMap<u64, ScalarExpr>,
}

fn check_dims(a: &SuperFunction, b: &SuperFunction) -> Result<()> {
    if a.m != b.m || a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: format!("R^{{{}|{}}}", a.m, a.n),
            found: format!("R^{{{}|{}}}", b.m, b.n),
        });
    }
    Ok(())
}

impl SuperFunction {
    pub fn zero(m: usize, n: usize) -> Self {
        assert!(n <= 63, "at most 63 odd generators");
        SuperFunction {
            m,
            n,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(m: usize, n: usize) -> Self {
        SuperFunction::scalar(m, n, ScalarExpr::one())
    }

    pub fn constant(m: usize, n: usize, c: Const) -> Self {
        SuperFunction::scalar(m, n, ScalarExpr::constant(c))
    }

    pub fn int(m: usize, n: usize, v: i64) -> Self {
        SuperFunction::constant(m, n, Const::int(v))
    }

    pub fn scalar(m: usize, n: usize, e: ScalarExpr) -> Self {
        SuperFunction::monomial(m, n, 0, e)
    }

    pub fn monomial(m: usize, n: usize, mask: u64, e: ScalarExpr) -> Self {
        let mut f = SuperFunction::zero(m, n);
        assert!(mask >> n == 0, "odd mask out of range");
        if !e.is_zero() {
            f.coeffs.insert(mask, e);
        }
        f
    }

    /// The even coordinate `x_i` (0-based).
    pub fn even_coord(m: usize, n: usize, i: usize) -> Self {
        assert!(i < m, "even axis out of range");
        SuperFunction::scalar(m, n, ScalarExpr::var(i))
    }

    /// The odd generator `theta_a` (0-based).
    pub fn odd_coord(m: usize, n: usize, a: usize) -> Self {
        assert!(a < n, "odd axis out of range");
        SuperFunction::monomial(m, n, 1 << a, ScalarExpr::one())
    }

    pub fn coord(m: usize, n: usize, axis: Axis) -> Self {
        match axis {
            Axis::Even(i) => SuperFunction::even_coord(m, n, i),
            Axis::Odd(a) => SuperFunction::odd_coord(m, n, a),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn coeff(&self, mask: u64) -> ScalarExpr {
        self.coeffs.get(&mask).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (u64, &ScalarExpr)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    /// Coefficient of `theta_1 ... theta_n`.
    pub fn top_coefficient(&self) -> ScalarExpr {
        self.coeff(full_mask(self.n))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.values().all(ScalarExpr::is_exact)
    }

    pub fn is_polynomial(&self) -> bool {
        self.coeffs.values().all(ScalarExpr::is_polynomial)
    }

    /// `None` for inhomogeneous elements; zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut p: Option<Parity> = None;
        for k in self.coeffs.keys() {
            let q = Parity::from_bit(k.count_ones() as usize);
            match p {
                None => p = Some(q),
                Some(r) if r != q => return None,
                _ => {}
            }
        }
        Some(p.unwrap_or(Parity::Even))
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Some(Parity::Even)
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == Some(Parity::Odd) && !self.is_zero()
    }

    /// Minimum number of odd generators over populated terms.
    pub fn j_degree(&self) -> Option<usize> {
        self.coeffs.keys().map(|k| k.count_ones() as usize).min()
    }

    pub fn body(&self) -> ScalarExpr {
        self.coeff(0)
    }

    pub fn soul(&self) -> SuperFunction {
        let mut s = self.clone();
        s.coeffs.remove(&0);
        s
    }

    /// Part of odd degree exactly `k`.
    pub fn graded_part(&self, k: usize) -> SuperFunction {
        self.filter_masks(|m| m.count_ones() as usize == k)
    }

    pub fn filter_masks(&self, keep: impl Fn(u64) -> bool) -> SuperFunction {
        SuperFunction {
            m: self.m,
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| keep(**k))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    /// Apply `f` to every coefficient, pruning zeros.
    pub fn map_coeffs(&self, f: impl Fn(u64, &ScalarExpr) -> ScalarExpr) -> SuperFunction {
        SuperFunction {
            m: self.m,
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (*k, f(*k, v)))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    pub fn add(&self, o: &SuperFunction) -> SuperFunction {
        check_dims(self, o).expect("add");
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &o.coeffs {
            let s = coeffs.get(k).map_or_else(|| v.clone(), |a| a.add(v));
            if s.is_zero() {
                coeffs.remove(k);
            } else {
                coeffs.insert(*k, s);
            }
        }
        SuperFunction {
            m: self.m,
            n: self.n,
            coeffs,
        }
    }

    pub fn neg(&self) -> SuperFunction {
        self.map_coeffs(|_, v| v.neg())
    }

    pub fn sub(&self, o: &SuperFunction) -> SuperFunction {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Const) -> SuperFunction {
        self.map_coeffs(|_, v| v.scale(c))
    }

    /// Multiply by an even scalar function.
    pub fn scale_expr(&self, e: &ScalarExpr) -> SuperFunction {
        self.map_coeffs(|_, v| v.mul(e))
    }

    /// Grassmann product; panics on a dimension mismatch (see [`SuperFunction::multiply`]).
    pub fn mul(&self, o: &SuperFunction) -> SuperFunction {
        self.multiply(o).expect("mul")
    }

    pub fn multiply(&self, o: &SuperFunction) -> Result<SuperFunction> {
        check_dims(self, o)?;
        let mut acc: BTreeMap<u64, ScalarExpr> = BTreeMap::new();
        for (a, fa) in &self.coeffs {
            for (b, gb) in &o.coeffs {
                if a & b != 0 {
                    continue;
                }
                let mut t = fa.mul(gb);
                if reorder_sign(*a, *b) < 0 {
                    t = t.neg();
                }
                acc.entry(a | b).or_default().add_assign(&t);
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(SuperFunction {
            m: self.m,
            n: self.n,
            coeffs: acc,
        })
    }

    pub fn pow(&self, k: u32) -> SuperFunction {
        let mut acc = SuperFunction::one(self.m, self.n);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Graded commutator `fg - (-1)^{|f||g|} gf` for homogeneous inputs.
    pub fn supercommutator(&self, o: &SuperFunction) -> SuperFunction {
        let s = match (self.parity(), o.parity()) {
            (Some(Parity::Odd), Some(Parity::Odd)) => -1,
            _ => 1,
        };
        let ba = o.mul(self);
        if s < 0 {
            self.mul(o).add(&ba)
        } else {
            self.mul(o).sub(&ba)
        }
    }

    pub fn partial_even(&self, i: usize) -> Result<SuperFunction> {
        if i >= self.m {
            return Err(Error::AxisOutOfRange { axis: i, dim: self.m });
        }
        Ok(self.map_coeffs(|_, v| v.diff(i)))
    }

    /// Left derivative along `theta_a`.
    pub fn partial_odd(&self, a: usize) -> Result<SuperFunction> {
        if a >= self.n {
            return Err(Error::AxisOutOfRange { axis: a, dim: self.n });
        }
        let bit = 1u64 << a;
        let below = bit - 1;
        let mut coeffs = BTreeMap::new();
        for (k, v) in &self.coeffs {
            if k & bit == 0 {
                continue;
            }
            let t = if (k & below).count_ones() % 2 == 1 {
                v.neg()
            } else {
                v.clone()
            };
            coeffs.insert(k & !bit, t);
        }
        Ok(SuperFunction {
            m: self.m,
            n: self.n,
            coeffs,
        })
    }

    pub fn partial(&self, axis: Axis) -> Result<SuperFunction> {
        match axis {
            Axis::Even(i) => self.partial_even(i),
            Axis::Odd(a) => self.partial_odd(a),
        }
    }

    /// Multiplicative inverse; the body must be a nonzero constant or a
    /// single exponential term.
    pub fn inverse(&self) -> Result<SuperFunction> {
        let b = self.body();
        let binv = scalar_inverse(&b)
            .ok_or_else(|| Error::NonInvertibleBody(b.to_string()))?;
        let binv_sf = SuperFunction::scalar(self.m, self.n, binv);
        // f = b(1 + u), u = soul/b, f^-1 = b^-1 sum (-u)^k
        let u = self.soul().mul(&binv_sf).neg();
        let mut acc = SuperFunction::one(self.m, self.n);
        let mut p = SuperFunction::one(self.m, self.n);
        for _ in 0..self.n {
            p = p.mul(&u);
            if p.is_zero() {
                break;
            }
            acc = acc.add(&p);
        }
        Ok(acc.mul(&binv_sf))
    }

    /// Positive square root of an even element with positive body.
    pub fn sqrt_positive(&self) -> Result<SuperFunction> {
        if !self.is_even() {
            return Err(Error::NotEven);
        }
        let b = self.body();
        let rb = scalar_sqrt_positive(&b).ok_or_else(|| Error::NonPositiveBody(b.to_string()))?;
        let binv = scalar_inverse(&b).ok_or_else(|| Error::NonPositiveBody(b.to_string()))?;
        let u = self
            .soul()
            .mul(&SuperFunction::scalar(self.m, self.n, binv));
        // sqrt(1+u) = sum binom(1/2, k) u^k
        let half = Const::ratio(1, 2);
        let mut coef = Const::one();
        let mut acc = SuperFunction::one(self.m, self.n);
        let mut p = SuperFunction::one(self.m, self.n);
        for k in 1..=(self.n as i64 / 2 + 1) {
            p = p.mul(&u);
            if p.is_zero() {
                break;
            }
            coef = coef.mul(&half.sub(&Const::int(k - 1))).mul(&Const::ratio(1, k));
            acc = acc.add(&p.scale(&coef));
        }
        Ok(acc.scale_expr(&rb))
    }

    /// Exponential of an even element: `exp(body) * sum soul^k / k!`.
    pub fn exp_even(&self) -> Result<SuperFunction> {
        if !self.is_even() {
            return Err(Error::NotEven);
        }
        let s = self.soul();
        let mut acc = SuperFunction::one(self.m, self.n);
        let mut p = SuperFunction::one(self.m, self.n);
        for k in 1..=(self.n as i64 / 2 + 1) {
            p = p.mul(&s).scale(&Const::ratio(1, k));
            if p.is_zero() {
                break;
            }
            acc = acc.add(&p);
        }
        Ok(acc.scale_expr(&self.body().exp()))
    }

    /// Numeric coefficients at a real even point.
    pub fn eval(&self, x: &[f64]) -> Result<BTreeMap<u64, Complex64>> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: format!("{}", self.m),
                found: format!("{}", x.len()),
            });
        }
        self.coeffs
            .iter()
            .map(|(k, v)| v.eval(x).map(|z| (*k, z)))
            .collect()
    }

    /// Pull back along a coordinate map: `x_i -> even[i]`, `theta_a -> odd[a]`,
    /// all images living on R^{m'|n'}. Non-polynomial coefficients are
    /// expanded in a finite Taylor series around the body of the images.
    pub fn substitute(&self, even: &[SuperFunction], odd: &[SuperFunction]) -> Result<SuperFunction> {
        if even.len() != self.m || odd.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: format!("{}|{} images", self.m, self.n),
                found: format!("{}|{}", even.len(), odd.len()),
            });
        }
        let (m2, n2) = even
            .first()
            .or(odd.first())
            .map(|f| f.dims())
            .unwrap_or((0, 0));
        for f in even.iter().chain(odd) {
            if f.dims() != (m2, n2) {
                return Err(Error::DimensionMismatch {
                    expected: format!("R^{{{m2}|{n2}}}"),
                    found: format!("R^{{{}|{}}}", f.m, f.n),
                });
            }
        }
        for f in even {
            if !f.is_even() {
                return Err(Error::NotEven);
            }
        }
        for f in odd {
            if !(f.is_zero() || f.is_odd()) {
                return Err(Error::NotOdd);
            }
        }
        let bodies: Vec<ScalarExpr> = even.iter().map(|f| f.body()).collect();
        let souls: Vec<SuperFunction> = even.iter().map(|f| f.soul()).collect();
        let mut out = SuperFunction::zero(m2, n2);
        for (mask, c) in &self.coeffs {
            let mut odd_part = SuperFunction::one(m2, n2);
            for a in 0..self.n {
                if mask & (1 << a) != 0 {
                    odd_part = odd_part.mul(&odd[a]);
                }
            }
            if odd_part.is_zero() {
                continue;
            }
            let cf = if c.is_polynomial() {
                poly_substitute(c, even, m2, n2)
            } else {
                taylor_substitute(c, &bodies, &souls, m2, n2)
            };
            out = out.add(&cf.mul(&odd_part));
        }
        Ok(out)
    }

    pub fn fmt_with(&self, even: &dyn Fn(usize) -> String, odd: &dyn Fn(usize) -> String) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (mask, c) in &self.coeffs {
            let gens: Vec<String> = (0..self.n).filter(|a| mask & (1 << a) != 0).map(odd).collect();
            let cs = c.fmt_with(even);
            if gens.is_empty() {
                parts.push(cs);
            } else if c.as_constant().is_some_and(|k| k.is_one()) {
                parts.push(gens.join("*"));
            } else if c.num_terms() == 1 {
                parts.push(format!("{cs}*{}", gens.join("*")));
            } else {
                parts.push(format!("({cs})*{}", gens.join("*")));
            }
        }
        parts.join(" + ").replace(" + -", " - ")
    }
}

pub fn full_mask(n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        u64::MAX >> (64 - n)
    }
}

fn poly_substitute(c: &ScalarExpr, even: &[SuperFunction], m2: usize, n2: usize) -> SuperFunction {
    let mut out = SuperFunction::zero(m2, n2);
    for (f, k) in c.terms() {
        let mut t = SuperFunction::constant(m2, n2, k.clone());
        for (v, p) in f.powers() {
            t = t.mul(&even[*v].pow(*p));
        }
        out = out.add(&t);
    }
    out
}

fn taylor_substitute(
    c: &ScalarExpr,
    bodies: &[ScalarExpr],
    souls: &[SuperFunction],
    m2: usize,
    n2: usize,
) -> SuperFunction {
    let mut out = SuperFunction::zero(m2, n2);
    let mut alpha = vec![0u32; souls.len()];
    taylor_rec(
        c,
        0,
        SuperFunction::one(m2, n2),
        &mut alpha,
        bodies,
        souls,
        n2 / 2,
        &mut out,
    );
    out
}

// Enumerates multi-indices as non-decreasing axis sequences; dividing by the
// running multiplicity at each step accumulates 1/alpha!.
#[allow(clippy::too_many_arguments)]
fn taylor_rec(
    d: &ScalarExpr,
    start: usize,
    prod: SuperFunction,
    alpha: &mut Vec<u32>,
    bodies: &[ScalarExpr],
    souls: &[SuperFunction],
    left: usize,
    out: &mut SuperFunction,
) {
    if d.is_zero() {
        return;
    }
    let base = d.substitute(&|i| bodies[i].clone());
    *out = out.add(&prod.scale_expr(&base));
    if left == 0 {
        return;
    }
    for i in start..souls.len() {
        if souls[i].is_zero() {
            continue;
        }
        let next = prod.mul(&souls[i]);
        if next.is_zero() {
            continue;
        }
        alpha[i] += 1;
        let next = next.scale(&Const::ratio(1, alpha[i] as i64));
        taylor_rec(&d.diff(i), i, next, alpha, bodies, souls, left - 1, out);
        alpha[i] -= 1;
    }
}

/// Inverse of a scalar that is a nonzero constant or `c * exp(E)`.
pub fn scalar_inverse(b: &ScalarExpr) -> Option<ScalarExpr> {
    if let Some(c) = b.as_constant() {
        return c.inv().map(ScalarExpr::constant);
    }
    let (f, c) = single_exp_term(b)?;
    Some(f.exp_arg()?.neg().exp().scale(&c.inv()?))
}

/// Positive root of a scalar that is a positive constant or `c * exp(E)`
/// with `c > 0` and real `E`.
pub fn scalar_sqrt_positive(b: &ScalarExpr) -> Option<ScalarExpr> {
    if let Some(c) = b.as_constant() {
        if c.real_sign()? <= 0 {
            return None;
        }
        return c.sqrt_positive().map(ScalarExpr::constant);
    }
    let (f, c) = single_exp_term(b)?;
    if c.real_sign()? <= 0 {
        return None;
    }
    let e = f.exp_arg()?;
    if !e.terms().all(|(_, k)| k.to_c64().im == 0.0) {
        return None;
    }
    Some(e.scale(&Const::ratio(1, 2)).exp().scale(&c.sqrt_positive()?))
}

fn single_exp_term(b: &ScalarExpr) -> Option<(&Factors, Const)> {
    if b.num_terms() != 1 {
        return None;
    }
    let (f, c) = b.terms().next()?;
    (f.powers().is_empty() && f.atoms().is_empty() && f.exp_arg().is_some()).then(|| (f, c.clone()))
}

impl fmt::Display for SuperFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.fmt_with(&|i| format!("x{}", i + 1), &|a| format!("th{}", a + 1));
        write!(f, "{s}")
    }
}
