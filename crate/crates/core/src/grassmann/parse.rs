//! Plain-text syntax for scalar expressions and superfunctions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*        divisor must be a nonzero constant
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | 'I' | name | 'exp' '(' expr ')'
//!         | 'step' '(' expr ',' expr ',' integer ',' integer ',' expr ')'
//!         | '(' expr ')'
//! ```
//!
//! Numbers in decimal or exponent notation are read as exact rationals.
//! `step(lo, hi, d, k, u)` is the d-th derivative of a smooth 0-to-1 step
//! between `lo` and `hi`, divided by `u^k`. `exp` takes an even argument.

use num_bigint::BigInt;
use num_traits::{Pow, ToPrimitive};

use super::constant::{Const, Rational};
use super::scalar::ScalarExpr;
use super::superfn::SuperFunction;
use crate::error::{Error, Result};

/// Coordinate names used by the parser and printer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordNames {
    pub even: Vec<String>,
    pub odd: Vec<String>,
}

impl CoordNames {
    /// `x1..xm`, `th1..thn`.
    pub fn standard(m: usize, n: usize) -> Self {
        CoordNames {
            even: (1..=m).map(|i| format!("x{i}")).collect(),
            odd: (1..=n).map(|i| format!("th{i}")).collect(),
        }
    }

    pub fn new(even: Vec<String>, odd: Vec<String>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for s in even.iter().chain(&odd) {
            let ok = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                && !matches!(s.as_str(), "I" | "exp" | "step");
            if !ok {
                return Err(Error::Parse {
                    pos: 0,
                    msg: format!("invalid coordinate name '{s}'"),
                });
            }
            if !seen.insert(s.clone()) {
                return Err(Error::Parse {
                    pos: 0,
                    msg: format!("duplicate coordinate name '{s}'"),
                });
            }
        }
        Ok(CoordNames { even, odd })
    }

    pub fn m(&self) -> usize {
        self.even.len()
    }

    pub fn n(&self) -> usize {
        self.odd.len()
    }

    pub fn print(&self, f: &SuperFunction) -> String {
        f.fmt_with(&|i| self.even[i].clone(), &|a| self.odd[a].clone())
    }

    pub fn print_scalar(&self, e: &ScalarExpr) -> String {
        e.fmt_with(&|i| self.even[i].clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && i + 1 < b.len() && b[i + 1].is_ascii_digit()) {
            let start = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    while j < b.len() && b[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let r = parse_decimal(&s[start..i]).ok_or_else(|| Error::Parse {
                pos: start,
                msg: format!("bad number '{}'", &s[start..i]),
            })?;
            out.push((start, Tok::Num(r)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(s[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Parse {
                pos: i,
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

/// Exact value of a decimal literal such as `12`, `0.25` or `1.5e-3`.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = match mant.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mant, ""),
    };
    if int.is_empty() && frac.is_empty() || frac.contains('.') {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let e = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Some(if e >= 0 {
        Rational::from_integer(n * Pow::pow(&ten, e as u32))
    } else {
        Rational::new(n, Pow::pow(&ten, (-e) as u32))
    })
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    names: &'a CoordNames,
    end: usize,
}

impl Parser<'_> {
    fn m(&self) -> usize {
        self.names.m()
    }

    fn n(&self) -> usize {
        self.names.n()
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<SuperFunction> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<SuperFunction> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat('/') {
                let at = self.here();
                let d = self.unary()?;
                let c = as_const(&d).and_then(|c| c.inv()).ok_or(Error::Parse {
                    pos: at,
                    msg: "divisor must be a nonzero constant".into(),
                })?;
                acc = acc.scale(&c);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<SuperFunction> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<SuperFunction> {
        let base = self.atom()?;
        if self.eat('^') {
            let k = self.uint()?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<u32> {
        match self.peek().cloned() {
            Some(Tok::Num(r)) if r.is_integer() => {
                let v = r.to_integer().to_u32();
                match v {
                    Some(v) if v <= 4096 => {
                        self.pos += 1;
                        Ok(v)
                    }
                    _ => self.err("integer out of range"),
                }
            }
            _ => self.err("expected a non-negative integer"),
        }
    }

    fn atom(&mut self) -> Result<SuperFunction> {
        let (m, n) = (self.m(), self.n());
        match self.peek().cloned() {
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Ok(SuperFunction::constant(m, n, Const::real(r)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(id)) => {
                self.pos += 1;
                match id.as_str() {
                    "I" => Ok(SuperFunction::constant(m, n, Const::i())),
                    "exp" => {
                        self.expect('(')?;
                        let at = self.here();
                        let e = self.expr()?;
                        self.expect(')')?;
                        e.exp_even().map_err(|_| Error::Parse {
                            pos: at,
                            msg: "exp needs an even argument".into(),
                        })
                    }
                    "step" => self.step(),
                    _ => {
                        if let Some(i) = self.names.even.iter().position(|s| *s == id) {
                            Ok(SuperFunction::even_coord(m, n, i))
                        } else if let Some(a) = self.names.odd.iter().position(|s| *s == id) {
                            Ok(SuperFunction::odd_coord(m, n, a))
                        } else {
                            self.pos -= 1;
                            self.err(format!("unknown name '{id}'"))
                        }
                    }
                }
            }
            Some(Tok::Sym(c)) => self.err(format!("unexpected '{c}'")),
            None => self.err("unexpected end of input"),
        }
    }

    fn real_const(&mut self) -> Result<Rational> {
        let at = self.here();
        let e = self.expr()?;
        as_const(&e)
            .and_then(|c| c.as_real_rational().cloned())
            .ok_or(Error::Parse {
                pos: at,
                msg: "expected an exact real constant".into(),
            })
    }

    fn step(&mut self) -> Result<SuperFunction> {
        self.expect('(')?;
        let lo = self.real_const()?;
        self.expect(',')?;
        let hi = self.real_const()?;
        self.expect(',')?;
        let d = self.uint()?;
        self.expect(',')?;
        let k = self.uint()?;
        self.expect(',')?;
        let at = self.here();
        let u = self.expr()?;
        self.expect(')')?;
        if lo <= Rational::from_integer(0.into()) && k > 0 || lo >= hi {
            return Err(Error::Parse {
                pos: at,
                msg: "step needs 0 < lo < hi when k > 0, and lo < hi".into(),
            });
        }
        if !u.soul().is_zero() {
            return Err(Error::Parse {
                pos: at,
                msg: "step argument must be a function of the even coordinates".into(),
            });
        }
        Ok(SuperFunction::scalar(
            self.m(),
            self.n(),
            ScalarExpr::transition(lo, hi, d, k, u.body()),
        ))
    }
}

fn as_const(f: &SuperFunction) -> Option<Const> {
    if !f.soul().is_zero() {
        return None;
    }
    f.body().as_constant()
}

/// Parse a superfunction over the given coordinate names.
pub fn parse_superfunction(s: &str, names: &CoordNames) -> Result<SuperFunction> {
    let toks = tokenize(s)?;
    let mut p = Parser {
        toks,
        pos: 0,
        names,
        end: s.len(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parse an expression in the even coordinates only.
pub fn parse_scalar(s: &str, names: &CoordNames) -> Result<ScalarExpr> {
    let f = parse_superfunction(s, names)?;
    if !f.soul().is_zero() {
        return Err(Error::Parse {
            pos: 0,
            msg: "odd generators are not allowed here".into(),
        });
    }
    Ok(f.body())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("0.25").unwrap(), Rational::new(1.into(), 4.into()));
        assert_eq!(parse_decimal("1.5e-3").unwrap(), Rational::new(3.into(), 2000.into()));
        assert_eq!(parse_decimal("2E2").unwrap(), Rational::from_integer(200.into()));
    }

    #[test]
    fn parses_golden_density() {
        let names = CoordNames::standard(2, 2);
        let f = parse_superfunction("exp(-(x1^2+x2^2)/2)*(1 + th1*th2)", &names).unwrap();
        let top = f.coeff(0b11);
        let v = top.eval(&[1.0, 1.0]).unwrap().re;
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(f.coeff(0), top);
    }

    #[test]
    fn reports_position() {
        let names = CoordNames::standard(1, 1);
        match parse_superfunction("x1 + y", &names) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(parse_superfunction("x1 / x1", &names).is_err());
        assert!(parse_superfunction("exp(th1)", &names).is_err());
        assert!(parse_superfunction("(x1", &names).is_err());
    }

    #[test]
    fn round_trip() {
        let names = CoordNames::standard(2, 2);
        for s in [
            "3/4*x1^2 - I*th1*th2",
            "exp(-(x1^2+x2^2)/2)*(1 + th1*th2)",
            "(2 + 3*I)*x2*th2 + 0.5",
            "step(1/4, 4, 0, 1, x1^2 + x2^2)*th1",
        ] {
            let a = parse_superfunction(s, &names).unwrap();
            let b = parse_superfunction(&names.print(&a), &names).unwrap();
            assert_eq!(a, b, "{s} -> {}", names.print(&a));
        }
    }
}
