//! Coefficient constants with an exact (Gaussian rational) and an approximate
//! (double precision complex) representation. Mixing the two promotes to the
//! approximate one.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

#[derive(Clone, Debug)]
pub enum Const {
    Exact(Complex<Rational>),
    Approx(Complex64),
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

impl Const {
    pub fn zero() -> Self {
        Const::Exact(Complex::new(Rational::zero(), Rational::zero()))
    }

    pub fn one() -> Self {
        Const::int(1)
    }

    pub fn int(v: i64) -> Self {
        Const::real(Rational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Const::real(rat(p, q))
    }

    pub fn real(r: Rational) -> Self {
        Const::Exact(Complex::new(r, Rational::zero()))
    }

    pub fn i() -> Self {
        Const::Exact(Complex::new(Rational::zero(), Rational::one()))
    }

    pub fn approx(z: Complex64) -> Self {
        // -0.0 and 0.0 must compare equal under the total order
        let fix = |v: f64| if v == 0.0 { 0.0 } else { v };
        Const::Approx(Complex64::new(fix(z.re), fix(z.im)))
    }

    /// Exact conversion of a finite double.
    pub fn from_f64_exact(v: f64) -> Option<Self> {
        Rational::from_float(v).map(Const::real)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Const::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Const::Exact(c) => c.re.is_zero() && c.im.is_zero(),
            Const::Approx(c) => c.re == 0.0 && c.im == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Const::Exact(c) => c.re.is_one() && c.im.is_zero(),
            Const::Approx(_) => false,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Const::Exact(c) => Complex64::new(
                c.re.to_f64().unwrap_or(f64::NAN),
                c.im.to_f64().unwrap_or(f64::NAN),
            ),
            Const::Approx(c) => *c,
        }
    }

    /// Real part as an exact rational when the constant is exact and real.
    pub fn as_real_rational(&self) -> Option<&Rational> {
        match self {
            Const::Exact(c) if c.im.is_zero() => Some(&c.re),
            _ => None,
        }
    }

    /// Sign of a real constant (approximate constants must have negligible
    /// imaginary part).
    pub fn real_sign(&self) -> Option<i32> {
        match self {
            Const::Exact(c) => {
                if !c.im.is_zero() || c.re.is_zero() {
                    None
                } else if c.re.is_positive() {
                    Some(1)
                } else {
                    Some(-1)
                }
            }
            Const::Approx(c) => {
                if c.re == 0.0 || c.im.abs() > 1e-12 * c.re.abs().max(1.0) {
                    None
                } else {
                    Some(if c.re > 0.0 { 1 } else { -1 })
                }
            }
        }
    }

    pub fn add(&self, o: &Const) -> Const {
        match (self, o) {
            (Const::Exact(a), Const::Exact(b)) => Const::Exact(a + b),
            _ => Const::approx(self.to_c64() + o.to_c64()),
        }
    }

    pub fn sub(&self, o: &Const) -> Const {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Const) -> Const {
        match (self, o) {
            (Const::Exact(a), Const::Exact(b)) => Const::Exact(a * b),
            _ => Const::approx(self.to_c64() * o.to_c64()),
        }
    }

    pub fn neg(&self) -> Const {
        match self {
            Const::Exact(a) => Const::Exact(-a.clone()),
            Const::Approx(a) => Const::approx(-*a),
        }
    }

    pub fn inv(&self) -> Option<Const> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Const::Exact(a) => Const::Exact(a.inv()),
            Const::Approx(a) => Const::approx(a.inv()),
        })
    }

    pub fn pow(&self, k: u32) -> Const {
        let mut acc = Const::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Principal square root of a positive real constant. Exact when the
    /// rational is a perfect square.
    pub fn sqrt_positive(&self) -> Option<Const> {
        if self.real_sign()? < 0 {
            return None;
        }
        if let Some(r) = self.as_real_rational() {
            let (n, d) = (r.numer(), r.denom());
            let (sn, sd) = (n.sqrt(), d.sqrt());
            if &(&sn * &sn) == n && &(&sd * &sd) == d {
                return Some(Const::real(Rational::new(sn, sd)));
            }
        }
        Some(Const::approx(Complex64::new(self.to_c64().re.sqrt(), 0.0)))
    }
}

fn cmp_rat_complex(a: &Complex<Rational>, b: &Complex<Rational>) -> Ordering {
    a.re.cmp(&b.re).then_with(|| a.im.cmp(&b.im))
}

impl Ord for Const {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Const::Exact(a), Const::Exact(b)) => cmp_rat_complex(a, b),
            (Const::Exact(_), Const::Approx(_)) => Ordering::Less,
            (Const::Approx(_), Const::Exact(_)) => Ordering::Greater,
            (Const::Approx(a), Const::Approx(b)) => {
                a.re.total_cmp(&b.re).then_with(|| a.im.total_cmp(&b.im))
            }
        }
    }
}

impl PartialOrd for Const {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Const {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Const {}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_f64(v: f64) -> String {
    let s = format!("{v:?}");
    s.replace("inf", "1e999")
}

impl Const {
    /// True when the printed form is a single signed factor that needs no
    /// parentheses inside a product.
    pub(crate) fn is_simple(&self) -> bool {
        match self {
            Const::Exact(c) => c.im.is_zero() || c.re.is_zero() && c.im.is_one(),
            Const::Approx(c) => c.im == 0.0,
        }
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Exact(c) => {
                if c.im.is_zero() {
                    write!(f, "{}", fmt_rational(&c.re))
                } else if c.re.is_zero() {
                    if c.im.is_one() {
                        write!(f, "I")
                    } else {
                        write!(f, "({}*I)", fmt_rational(&c.im))
                    }
                } else {
                    write!(f, "({} + {}*I)", fmt_rational(&c.re), fmt_rational(&c.im))
                }
            }
            Const::Approx(c) => {
                if c.im == 0.0 {
                    write!(f, "{}", fmt_f64(c.re))
                } else {
                    write!(f, "({} + {}*I)", fmt_f64(c.re), fmt_f64(c.im))
                }
            }
        }
    }
}

impl From<i64> for Const {
    fn from(v: i64) -> Self {
        Const::int(v)
    }
}

impl From<Rational> for Const {
    fn from(v: Rational) -> Self {
        Const::real(v)
    }
}
