//! Symplectic Gram–Schmidt: bases in which a skew form is standard.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grassmann::{Const, ScalarExpr};

fn check_skew(s: &[Vec<Const>]) -> Result<usize> {
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
        for j in 0..k {
            if s[i][j] != s[j][i].neg() {
                return Err(Error::NotSkew);
            }
        }
    }
    Ok(k)
}

fn form(s: &[Vec<Const>], u: &[Const], v: &[Const]) -> Const {
    let mut acc = Const::zero();
    for (i, ui) in u.iter().enumerate() {
        if ui.is_zero() {
            continue;
        }
        for (j, vj) in v.iter().enumerate() {
            if !vj.is_zero() && !s[i][j].is_zero() {
                acc = acc.add(&ui.mul(&s[i][j]).mul(vj));
            }
        }
    }
    acc
}

/// `T` with `TᵗST = ½·blockdiag((0 −1; 1 0), …)` for a constant
/// nondegenerate skew matrix; exact on rational input. Pairs are chosen
/// lowest index first.
pub fn symplectic_normalize(s: &[Vec<Const>]) -> Result<Vec<Vec<Const>>> {
    let k = check_skew(s)?;
    let mut pool: Vec<Vec<Const>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { Const::one() } else { Const::zero() }).collect())
        .collect();
    let mut cols: Vec<Vec<Const>> = Vec::with_capacity(k);
    let minus_half = Const::ratio(-1, 2);
    while !pool.is_empty() {
        let t1 = pool.remove(0);
        let pos = pool
            .iter()
            .position(|w| !form(s, &t1, w).is_zero())
            .ok_or_else(|| Error::Degenerate("skew form is degenerate".into()))?;
        let w = pool.remove(pos);
        let om = form(s, &t1, &w);
        let scale = minus_half.mul(&om.inv().expect("nonzero"));
        let t2: Vec<Const> = w.iter().map(|c| c.mul(&scale)).collect();
        let o12 = form(s, &t1, &t2);
        let o12_inv = o12.inv().expect("nonzero");
        for u in pool.iter_mut() {
            let a = form(s, u, &t2).neg().mul(&o12_inv);
            let b = form(s, u, &t1).mul(&o12_inv);
            for i in 0..k {
                u[i] = u[i].add(&a.mul(&t1[i])).add(&b.mul(&t2[i]));
            }
        }
        cols.push(t1);
        cols.push(t2);
    }
    Ok((0..k).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect())
}

/// Pointwise version for a skew matrix of functions: one `T` per sample point.
pub fn symplectic_normalize_at(s: &[Vec<ScalarExpr>], points: &[Vec<f64>]) -> Result<Vec<DMatrix<f64>>> {
    let k = s.len();
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let vals: Vec<Vec<f64>> = s
            .iter()
            .map(|r| r.iter().map(|e| e.eval(p).map(|z| z.re)).collect::<Result<Vec<f64>>>())
            .collect::<Result<_>>()?;
        let sm = DMatrix::from_fn(k, k, |i, j| vals[i][j]);
        out.push(symplectic_f64(&sm)?);
    }
    Ok(out)
}

fn symplectic_f64(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = s.nrows();
    if k % 2 == 1 {
        return Err(Error::OddDimension(k));
    }
    let scale = s.norm().max(1e-300);
    let form = |u: &DMatrix<f64>, v: &DMatrix<f64>| (u.transpose() * s * v)[(0, 0)];
    let mut pool: Vec<DMatrix<f64>> = (0..k).map(|i| DMatrix::from_fn(k, 1, |r, _| if r == i { 1.0 } else { 0.0 })).collect();
    let mut cols = Vec::with_capacity(k);
    while !pool.is_empty() {
        let t1 = pool.remove(0);
        // largest pairing for stability
        let (pos, om) = pool
            .iter()
            .enumerate()
            .map(|(i, w)| (i, form(&t1, w)))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .ok_or_else(|| Error::Degenerate("skew form is degenerate".into()))?;
        if om.abs() < 1e-12 * scale {
            return Err(Error::Degenerate("skew form is degenerate at a sample point".into()));
        }
        let w = pool.remove(pos);
        let t2 = w * (-0.5 / om);
        let o12 = form(&t1, &t2);
        for u in pool.iter_mut() {
            let a = -form(u, &t2) / o12;
            let b = form(u, &t1) / o12;
            *u = &*u + &t1 * a + &t2 * b;
        }
        cols.push(t1);
        cols.push(t2);
    }
    Ok(DMatrix::from_fn(k, k, |r, c| cols[c][(r, 0)]))
}

/// `½·blockdiag((0 −1; 1 0), …)`.
pub fn half_standard(k: usize) -> Vec<Vec<Const>> {
    let mut out = vec![vec![Const::zero(); k]; k];
    for p in (0..k).step_by(2) {
        out[p][p + 1] = Const::ratio(-1, 2);
        out[p + 1][p] = Const::ratio(1, 2);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn congruence(t: &[Vec<Const>], s: &[Vec<Const>]) -> Vec<Vec<Const>> {
        let k = s.len();
        let mut out = vec![vec![Const::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                let mut acc = Const::zero();
                for a in 0..k {
                    for b in 0..k {
                        acc = acc.add(&t[a][i].mul(&s[a][b]).mul(&t[b][j]));
                    }
                }
                out[i][j] = acc;
            }
        }
        out
    }

    #[test]
    fn standard_is_fixed() {
        let s = half_standard(4);
        let t = symplectic_normalize(&s).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(t[i][j], if i == j { Const::one() } else { Const::zero() });
            }
        }
    }

    #[test]
    fn two_by_two() {
        let s = vec![vec![Const::zero(), Const::int(3)], vec![Const::int(-3), Const::zero()]];
        let t = symplectic_normalize(&s).unwrap();
        assert_eq!(t[0][0], Const::one());
        assert_eq!(t[1][1], Const::ratio(-1, 6));
        assert_eq!(congruence(&t, &s), half_standard(2));
    }

    #[test]
    fn random_four_by_four() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut s = vec![vec![0.0f64; 4]; 4];
            for i in 0..4 {
                for j in i + 1..4 {
                    let v: f64 = rng.random_range(-2.0..2.0);
                    s[i][j] = v;
                    s[j][i] = -v;
                }
            }
            let sm = DMatrix::from_fn(4, 4, |i, j| s[i][j]);
            let t = symplectic_f64(&sm).unwrap();
            let std = DMatrix::from_fn(4, 4, |i, j| half_standard(4)[i][j].to_c64().re);
            assert!((t.transpose() * &sm * &t - std).norm() < 1e-10);
        }
        let exprs: Vec<Vec<ScalarExpr>> = vec![
            vec![ScalarExpr::zero(), ScalarExpr::var(0).add(&ScalarExpr::int(2))],
            vec![ScalarExpr::var(0).add(&ScalarExpr::int(2)).neg(), ScalarExpr::zero()],
        ];
        let ts = symplectic_normalize_at(&exprs, &[vec![0.0], vec![1.0]]).unwrap();
        assert!((ts[1][(1, 1)] + 1.0 / 6.0).abs() < 1e-14);
        assert!(symplectic_normalize_at(&exprs, &[vec![-2.0]]).is_err());
    }
}
