//! Block supermatrices `(p|q) -> (p'|q')` with superfunction entries.
//! Rows index the target basis, columns the source basis; even basis
//! vectors come first.

use std::fmt;

use crate::error::{Error, Result};
use crate::grassmann::{Parity, SuperFunction};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperMatrix {
    m: usize,
    n: usize,
    rows: (usize, usize),
    cols: (usize, usize),
    parity: Parity,
    entries: Vec<SuperFunction>,
}

impl SuperMatrix {
    /// Zero matrix of the given shape over R^{m|n}.
    pub fn zero(m: usize, n: usize, rows: (usize, usize), cols: (usize, usize), parity: Parity) -> Self {
        let len = (rows.0 + rows.1) * (cols.0 + cols.1);
        SuperMatrix {
            m,
            n,
            rows,
            cols,
            parity,
            entries: vec![SuperFunction::zero(m, n); len],
        }
    }

    pub fn identity(m: usize, n: usize, dims: (usize, usize)) -> Self {
        let mut s = SuperMatrix::zero(m, n, dims, dims, Parity::Even);
        for i in 0..dims.0 + dims.1 {
            s.set(i, i, SuperFunction::one(m, n));
        }
        s
    }

    /// `I' = (0 id; id 0)`, the odd identification of a `p|p` module with its parity flip.
    pub fn odd_identity(m: usize, n: usize, p: usize) -> Self {
        let mut s = SuperMatrix::zero(m, n, (p, p), (p, p), Parity::Odd);
        for i in 0..p {
            s.set(i, p + i, SuperFunction::one(m, n));
            s.set(p + i, i, SuperFunction::one(m, n));
        }
        s
    }

    /// Build from full rows, checking entry parities.
    pub fn from_rows(
        rows: (usize, usize),
        cols: (usize, usize),
        parity: Parity,
        data: Vec<Vec<SuperFunction>>,
    ) -> Result<Self> {
        let (r, c) = (rows.0 + rows.1, cols.0 + cols.1);
        if data.len() != r || data.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: format!("{r}x{c} entries"),
                found: format!("{} rows", data.len()),
            });
        }
        let (m, n) = data
            .iter()
            .flatten()
            .next()
            .map(|f| f.dims())
            .unwrap_or((0, 0));
        let s = SuperMatrix {
            m,
            n,
            rows,
            cols,
            parity,
            entries: data.into_iter().flatten().collect(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Build from blocks `A (p'xp), B (p'xq), C (q'xp), D (q'xq)`.
    pub fn from_blocks(
        a: Vec<Vec<SuperFunction>>,
        b: Vec<Vec<SuperFunction>>,
        c: Vec<Vec<SuperFunction>>,
        d: Vec<Vec<SuperFunction>>,
        parity: Parity,
    ) -> Result<Self> {
        let p1 = a.len().max(b.len());
        let q1 = c.len().max(d.len());
        let p = a.first().map_or_else(|| c.first().map_or(0, Vec::len), Vec::len);
        let q = b.first().map_or_else(|| d.first().map_or(0, Vec::len), Vec::len);
        let mut data = Vec::new();
        for i in 0..p1 {
            let mut row = a.get(i).cloned().unwrap_or_default();
            row.extend(b.get(i).cloned().unwrap_or_default());
            data.push(row);
        }
        for i in 0..q1 {
            let mut row = c.get(i).cloned().unwrap_or_default();
            row.extend(d.get(i).cloned().unwrap_or_default());
            data.push(row);
        }
        SuperMatrix::from_rows((p1, q1), (p, q), parity, data)
    }

    /// Check that every entry has the parity its position requires.
    pub fn validate(&self) -> Result<()> {
        for r in 0..self.nrows() {
            for c in 0..self.ncols() {
                let e = self.get(r, c);
                if e.dims() != (self.m, self.n) {
                    return Err(Error::DimensionMismatch {
                        expected: format!("entries on R^{{{}|{}}}", self.m, self.n),
                        found: format!("R^{{{}|{}}}", e.m(), e.n()),
                    });
                }
                if e.is_zero() {
                    continue;
                }
                if e.parity() != Some(self.entry_parity(r, c)) {
                    return Err(Error::Inhomogeneous);
                }
            }
        }
        Ok(())
    }

    pub fn row_parity(&self, r: usize) -> Parity {
        if r < self.rows.0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn col_parity(&self, c: usize) -> Parity {
        if c < self.cols.0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Parity an entry must have for the matrix to be homogeneous.
    pub fn entry_parity(&self, r: usize, c: usize) -> Parity {
        self.row_parity(r).add(self.col_parity(c)).add(self.parity)
    }

    pub fn ambient(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn rows(&self) -> (usize, usize) {
        self.rows
    }

    pub fn cols(&self) -> (usize, usize) {
        self.cols
    }

    pub fn nrows(&self) -> usize {
        self.rows.0 + self.rows.1
    }

    pub fn ncols(&self) -> usize {
        self.cols.0 + self.cols.1
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &SuperFunction {
        &self.entries[r * self.ncols() + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: SuperFunction) {
        let k = r * self.ncols() + c;
        self.entries[k] = v;
    }

    fn sub_block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Vec<Vec<SuperFunction>> {
        (r0..r1)
            .map(|r| (c0..c1).map(|c| self.get(r, c).clone()).collect())
            .collect()
    }

    pub fn block_a(&self) -> Vec<Vec<SuperFunction>> {
        self.sub_block(0, self.rows.0, 0, self.cols.0)
    }

    pub fn block_b(&self) -> Vec<Vec<SuperFunction>> {
        self.sub_block(0, self.rows.0, self.cols.0, self.ncols())
    }

    pub fn block_c(&self) -> Vec<Vec<SuperFunction>> {
        self.sub_block(self.rows.0, self.nrows(), 0, self.cols.0)
    }

    pub fn block_d(&self) -> Vec<Vec<SuperFunction>> {
        self.sub_block(self.rows.0, self.nrows(), self.cols.0, self.ncols())
    }

    pub fn map(&self, f: impl Fn(&SuperFunction) -> SuperFunction) -> SuperMatrix {
        SuperMatrix {
            entries: self.entries.iter().map(f).collect(),
            ..self.clone()
        }
    }

    pub fn neg(&self) -> SuperMatrix {
        self.map(SuperFunction::neg)
    }

    pub fn add(&self, o: &SuperMatrix) -> Result<SuperMatrix> {
        if self.rows != o.rows || self.cols != o.cols || self.parity != o.parity {
            return Err(Error::DimensionMismatch {
                expected: self.shape(),
                found: o.shape(),
            });
        }
        Ok(SuperMatrix {
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.add(b)).collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, o: &SuperMatrix) -> Result<SuperMatrix> {
        self.add(&o.neg())
    }

    fn shape(&self) -> String {
        format!(
            "{}|{} -> {}|{} ({:?})",
            self.cols.0, self.cols.1, self.rows.0, self.rows.1, self.parity
        )
    }

    /// Composition `self ∘ o` (ordinary matrix product).
    pub fn mul(&self, o: &SuperMatrix) -> Result<SuperMatrix> {
        if self.cols != o.rows || self.ambient() != o.ambient() {
            return Err(Error::DimensionMismatch {
                expected: format!("source {}|{}", self.cols.0, self.cols.1),
                found: format!("target {}|{}", o.rows.0, o.rows.1),
            });
        }
        let mut out = SuperMatrix::zero(self.m, self.n, self.rows, o.cols, self.parity.add(o.parity));
        for r in 0..self.nrows() {
            for c in 0..o.ncols() {
                let mut acc = SuperFunction::zero(self.m, self.n);
                for k in 0..self.ncols() {
                    let (x, y) = (self.get(r, k), o.get(k, c));
                    if !x.is_zero() && !y.is_zero() {
                        acc = acc.add(&x.mul(y));
                    }
                }
                out.set(r, c, acc);
            }
        }
        Ok(out)
    }

    /// Supertranspose: even `(A^t C^t; -B^t D^t)`, odd `(A^t -C^t; B^t D^t)`.
    pub fn supertranspose(&self) -> Result<SuperMatrix> {
        self.validate()?;
        let mut out = SuperMatrix::zero(self.m, self.n, self.cols, self.rows, self.parity);
        for r in 0..self.nrows() {
            for c in 0..self.ncols() {
                let v = self.get(r, c);
                // entry (r, c) moves to (c, r); B sits at even row / odd column
                let neg = match self.parity {
                    Parity::Even => self.row_parity(r) == Parity::Even && self.col_parity(c) == Parity::Odd,
                    Parity::Odd => self.row_parity(r) == Parity::Odd && self.col_parity(c) == Parity::Even,
                };
                out.set(c, r, if neg { v.neg() } else { v.clone() });
            }
        }
        Ok(out)
    }

    /// Inverse of the supertranspose.
    pub fn supertranspose_inverse(&self) -> Result<SuperMatrix> {
        // st^2 negates the off-diagonal blocks, so st^-1 = st^3 = flip(st)
        let once = self.supertranspose()?;
        Ok(once.flip_off_diagonal())
    }

    fn flip_off_diagonal(&self) -> SuperMatrix {
        let mut out = self.clone();
        for r in 0..self.nrows() {
            for c in 0..self.ncols() {
                if self.row_parity(r) != self.col_parity(c) {
                    out.set(r, c, self.get(r, c).neg());
                }
            }
        }
        out
    }

    /// Parity-swapped matrix `ΠF = (D C; B A)`.
    pub fn parity_swap(&self) -> SuperMatrix {
        let rows = (self.rows.1, self.rows.0);
        let cols = (self.cols.1, self.cols.0);
        let mut out = SuperMatrix::zero(self.m, self.n, rows, cols, self.parity);
        let rmap = |r: usize| if r < self.rows.1 { self.rows.0 + r } else { r - self.rows.1 };
        let cmap = |c: usize| if c < self.cols.1 { self.cols.0 + c } else { c - self.cols.1 };
        for r in 0..self.nrows() {
            for c in 0..self.ncols() {
                out.set(r, c, self.get(rmap(r), cmap(c)).clone());
            }
        }
        out
    }

    /// Inverse of an even square supermatrix via the Schur complement.
    pub fn inverse(&self) -> Result<SuperMatrix> {
        if !self.is_square() || self.parity != Parity::Even {
            return Err(Error::NotEven);
        }
        let (m, n) = self.ambient();
        let (p, q) = self.rows;
        let a = self.block_a();
        let b = self.block_b();
        let c = self.block_c();
        let d = self.block_d();
        let dinv = mat_inverse(&d, m, n)?;
        let s = mat_sub(&a, &mat_mul(&mat_mul(&b, &dinv, m, n, p), &c, m, n, p), m, n);
        let sinv = mat_inverse(&s, m, n)?;
        let sbd = mat_mul(&mat_mul(&sinv, &b, m, n, q), &dinv, m, n, q);
        let dcs = mat_mul(&mat_mul(&dinv, &c, m, n, p), &sinv, m, n, p);
        let dd = mat_add(&dinv, &mat_mul(&dcs, &mat_mul(&b, &dinv, m, n, q), m, n, q), m, n);
        SuperMatrix::from_blocks_sized(m, n, (p, q), sinv, mat_neg(&sbd), mat_neg(&dcs), dd)
    }

    fn from_blocks_sized(
        m: usize,
        n: usize,
        dims: (usize, usize),
        a: Vec<Vec<SuperFunction>>,
        b: Vec<Vec<SuperFunction>>,
        c: Vec<Vec<SuperFunction>>,
        d: Vec<Vec<SuperFunction>>,
    ) -> Result<SuperMatrix> {
        let (p, q) = dims;
        let mut out = SuperMatrix::zero(m, n, dims, dims, Parity::Even);
        for i in 0..p + q {
            for j in 0..p + q {
                let v = match (i < p, j < p) {
                    (true, true) => &a[i][j],
                    (true, false) => &b[i][j - p],
                    (false, true) => &c[i - p][j],
                    (false, false) => &d[i - p][j - p],
                };
                out.set(i, j, v.clone());
            }
        }
        Ok(out)
    }

    /// Body of every entry evaluated at `x`, real parts.
    pub fn body_at(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        (0..self.nrows())
            .map(|r| {
                (0..self.ncols())
                    .map(|c| self.get(r, c).body().eval(x).map(|z| z.re))
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for SuperMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.nrows() {
            let row: Vec<String> = (0..self.ncols()).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

// Plain matrices of mutually commuting (even) entries.

pub(crate) fn mat_mul(
    a: &[Vec<SuperFunction>],
    b: &[Vec<SuperFunction>],
    m: usize,
    n: usize,
    cols: usize,
) -> Vec<Vec<SuperFunction>> {
    let inner = b.len();
    let cols = b.first().map_or(cols, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = SuperFunction::zero(m, n);
                    for k in 0..inner {
                        acc = acc.add(&row[k].mul(&b[k][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub(crate) fn mat_add(a: &[Vec<SuperFunction>], b: &[Vec<SuperFunction>], _m: usize, _n: usize) -> Vec<Vec<SuperFunction>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u.add(v)).collect())
        .collect()
}

pub(crate) fn mat_sub(a: &[Vec<SuperFunction>], b: &[Vec<SuperFunction>], m: usize, n: usize) -> Vec<Vec<SuperFunction>> {
    mat_add(a, &mat_neg(b), m, n)
}

pub(crate) fn mat_neg(a: &[Vec<SuperFunction>]) -> Vec<Vec<SuperFunction>> {
    a.iter().map(|r| r.iter().map(SuperFunction::neg).collect()).collect()
}

/// Determinant by cofactor expansion; entries must commute.
pub fn det(a: &[Vec<SuperFunction>], m: usize, n: usize) -> SuperFunction {
    let k = a.len();
    if k == 0 {
        return SuperFunction::one(m, n);
    }
    if k == 1 {
        return a[0][0].clone();
    }
    let mut acc = SuperFunction::zero(m, n);
    for j in 0..k {
        if a[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<SuperFunction>> = a[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let t = a[0][j].mul(&det(&minor, m, n));
        acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

/// Inverse of a square matrix with commuting entries via the adjugate.
pub fn mat_inverse(a: &[Vec<SuperFunction>], m: usize, n: usize) -> Result<Vec<Vec<SuperFunction>>> {
    let k = a.len();
    let d = det(a, m, n);
    let dinv = d
        .inverse()
        .map_err(|_| Error::BodySingular(format!("determinant {d}")))?;
    let mut out = vec![vec![SuperFunction::zero(m, n); k]; k];
    for i in 0..k {
        for j in 0..k {
            let minor: Vec<Vec<SuperFunction>> = a
                .iter()
                .enumerate()
                .filter(|(r, _)| *r != j)
                .map(|(_, row)| row.iter().enumerate().filter(|(c, _)| *c != i).map(|(_, v)| v.clone()).collect())
                .collect();
            let cof = det(&minor, m, n);
            let cof = if (i + j) % 2 == 0 { cof } else { cof.neg() };
            out[i][j] = cof.mul(&dinv);
        }
    }
    Ok(out)
}
