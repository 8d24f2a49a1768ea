//! Pfaffians of skew-symmetric matrices with commuting entries.

use crate::error::{Error, Result};
use crate::grassmann::SuperFunction;

/// Pfaffian by expansion along the first row.
pub fn pfaffian(s: &[Vec<SuperFunction>], m: usize, n: usize) -> Result<SuperFunction> {
    let k = s.len();
    if s.iter().any(|r| r.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: format!("{k}x{k}"),
            found: "ragged rows".into(),
        });
    }
    if k % 2 == 1 {
        return Err(Error::OddDimension(k));
    }
    for i in 0..k {
        if !s[i][i].is_zero() {
            return Err(Error::NotSkew);
        }
        for j in 0..i {
            if s[i][j] != s[j][i].neg() {
                return Err(Error::NotSkew);
            }
        }
        if s[i].iter().any(|e| !e.is_even()) {
            return Err(Error::NotEven);
        }
    }
    let idx: Vec<usize> = (0..k).collect();
    Ok(pf_rec(s, &idx, m, n))
}

fn pf_rec(s: &[Vec<SuperFunction>], idx: &[usize], m: usize, n: usize) -> SuperFunction {
    if idx.is_empty() {
        return SuperFunction::one(m, n);
    }
    let i = idx[0];
    let mut acc = SuperFunction::zero(m, n);
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        if s[i][j].is_zero() {
            continue;
        }
        let rest: Vec<usize> = idx.iter().copied().filter(|&t| t != i && t != j).collect();
        let t = s[i][j].mul(&pf_rec(s, &rest, m, n));
        // sign (-1)^(pos+1) with pos counted from 0
        acc = if pos % 2 == 1 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

/// Floating-point Pfaffian, same expansion.
pub fn pfaffian_f64(s: &[Vec<f64>]) -> Result<f64> {
    let k = s.len();
    if k % 2 == 1 {
        return Err(Error::OddDimension(k));
    }
    let idx: Vec<usize> = (0..k).collect();
    Ok(pf_rec_f64(s, &idx))
}

fn pf_rec_f64(s: &[Vec<f64>], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let i = idx[0];
    let mut acc = 0.0;
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        if s[i][j] == 0.0 {
            continue;
        }
        let rest: Vec<usize> = idx.iter().copied().filter(|&t| t != i && t != j).collect();
        let t = s[i][j] * pf_rec_f64(s, &rest);
        acc += if pos % 2 == 1 { t } else { -t };
    }
    acc
}
