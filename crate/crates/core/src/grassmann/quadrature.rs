//! Integration of scalar expressions over R^m.
//!
//! Terms of the form `c * x^alpha * exp(E)` with `E` a separable quadratic
//! whose squared coefficients have negative real part are integrated with a
//! complex-shifted Gauss–Hermite rule, which is exact for the polynomial
//! amplitude. Everything else needs a finite box: oscillating integrands use
//! composite Gauss–Legendre panels sized to the local phase frequency, the
//! rest nested adaptive Simpson.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use num_traits::Zero;

use super::scalar::{Factors, NumericExpr, ScalarExpr};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureKind {
    Auto,
    GaussHermite,
    Oscillatory,
    AdaptiveSimpson,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub kind: QuadratureKind,
    /// Gauss–Hermite order per axis.
    pub points: usize,
    /// Integration box, one interval per even axis.
    pub bounds: Option<Vec<(f64, f64)>>,
    pub tol: f64,
    /// Minimum nodes per local oscillation period on the oscillatory grid.
    pub nodes_per_period: usize,
}

/// Default Gauss–Hermite order; `SUPERLOC_QUAD_POINTS` overrides it.
pub fn default_points() -> usize {
    std::env::var("SUPERLOC_QUAD_POINTS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&p| p > 0)
        .unwrap_or(64)
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            kind: QuadratureKind::Auto,
            points: default_points(),
            bounds: None,
            tol: 1e-8,
            nodes_per_period: 40,
        }
    }
}

impl QuadratureConfig {
    pub fn on_box(bounds: Vec<(f64, f64)>) -> Self {
        QuadratureConfig {
            bounds: Some(bounds),
            ..Default::default()
        }
    }

    pub fn with_kind(mut self, kind: QuadratureKind) -> Self {
        self.kind = kind;
        self
    }
}

const MAX_GRID_NODES: f64 = 2e8;

/// Integral of `e` over R^m (or over the configured box).
pub fn integrate_even(e: &ScalarExpr, m: usize, cfg: &QuadratureConfig) -> Result<Complex64> {
    if let Some(v) = e.max_var() {
        if v >= m {
            return Err(Error::DimensionMismatch {
                expected: format!("expression in {m} even coordinates"),
                found: format!("coordinate index {v}"),
            });
        }
    }
    if let Some(b) = &cfg.bounds {
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: format!("{m} box intervals"),
                found: format!("{}", b.len()),
            });
        }
        if b.iter().any(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::Quadrature("box intervals must be finite with lo < hi".into()));
        }
    }
    if m == 0 {
        return e.eval(&[]);
    }
    let (gauss, rest): (Vec<_>, Vec<_>) = match cfg.kind {
        QuadratureKind::Oscillatory | QuadratureKind::AdaptiveSimpson => (Vec::new(), e.terms().collect()),
        _ => e
            .terms()
            .partition(|(f, _)| gaussian_form(f, m).is_some() || quadratic_form(f, m).is_some()),
    };
    if cfg.kind == QuadratureKind::GaussHermite && !rest.is_empty() {
        return Err(Error::Quadrature(
            "integrand is not a polynomial times a decaying Gaussian".into(),
        ));
    }
    let mut total = Complex64::zero();
    if !gauss.is_empty() {
        let rule = GaussHermite::new(NonZeroUsize::new(cfg.points).ok_or_else(|| {
            Error::Quadrature("Gauss–Hermite order must be positive".into())
        })?);
        for (f, c) in gauss {
            total += c.to_c64()
                * match gaussian_form(f, m) {
                    Some(g) => gaussian_term(&g, f, m, &rule, cfg.points)?,
                    None => coupled_term(&quadratic_form(f, m).expect("checked"), f)?,
                };
        }
    }
    if !rest.is_empty() {
        let mut r = ScalarExpr::zero();
        for (f, c) in rest {
            r = r.add(&ScalarExpr::term(c.clone(), f.clone()));
        }
        let bounds = cfg.bounds.as_ref().ok_or_else(|| {
            Error::Quadrature("integrand does not decay and no finite box was configured".into())
        })?;
        let freq = phase_frequency(&r, bounds)?;
        let oscillating = freq.iter().zip(bounds).any(|(w, (lo, hi))| w * (hi - lo) > 8.0 * std::f64::consts::PI);
        total += match cfg.kind {
            QuadratureKind::AdaptiveSimpson => simpson_box(&r.to_numeric(), bounds, cfg.tol)?,
            QuadratureKind::Oscillatory => legendre_grid(&r.to_numeric(), bounds, &freq, cfg.nodes_per_period)?,
            _ if oscillating => legendre_grid(&r.to_numeric(), bounds, &freq, cfg.nodes_per_period)?,
            _ => simpson_box(&r.to_numeric(), bounds, cfg.tol)?,
        };
    }
    Ok(total)
}

/// Per-axis `(a_i, b_i)` and constant `c` with `E = c + sum(-a_i x_i^2 + b_i x_i)`.
struct Gaussian {
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Complex64,
}

fn gaussian_form(f: &Factors, m: usize) -> Option<Gaussian> {
    if !f.atoms().is_empty() {
        return None;
    }
    let e = f.exp_arg()?;
    let mut g = Gaussian {
        a: vec![Complex64::zero(); m],
        b: vec![Complex64::zero(); m],
        c: Complex64::zero(),
    };
    for (t, k) in e.terms() {
        if !t.is_monomial() {
            return None;
        }
        let k = k.to_c64();
        match t.powers() {
            [] => g.c += k,
            [(v, 1)] => g.b[*v] += k,
            [(v, 2)] => g.a[*v] -= k,
            _ => return None,
        }
    }
    g.a.iter().all(|a| a.re > 0.0).then_some(g)
}

fn gaussian_term(g: &Gaussian, f: &Factors, m: usize, rule: &GaussHermite, order: usize) -> Result<Complex64> {
    let mut v = g.c.exp();
    for i in 0..m {
        let k = f.power_of(i) as usize;
        if k >= 2 * order {
            return Err(Error::Quadrature(format!(
                "polynomial degree {k} too high for a {order}-point Gauss–Hermite rule"
            )));
        }
        let (a, b) = (g.a[i], g.b[i]);
        let sa = a.sqrt();
        let x0 = b / (a * 2.0);
        let mut s = Complex64::zero();
        for &(t, w) in rule.as_node_weight_pairs() {
            s += w * (x0 + t / sa).powu(k as u32);
        }
        v *= s * (b * b / (a * 4.0)).exp() / sa;
    }
    Ok(v)
}

/// `E = c + bᵀx − xᵀAx` with `A` symmetric and `Re A` positive definite.
struct Quadratic {
    a: Vec<Vec<Complex64>>,
    b: Vec<Complex64>,
    c: Complex64,
}

fn quadratic_form(f: &Factors, m: usize) -> Option<Quadratic> {
    if !f.atoms().is_empty() {
        return None;
    }
    let e = f.exp_arg()?;
    let mut q = Quadratic {
        a: vec![vec![Complex64::zero(); m]; m],
        b: vec![Complex64::zero(); m],
        c: Complex64::zero(),
    };
    for (t, k) in e.terms() {
        if !t.is_monomial() {
            return None;
        }
        let k = k.to_c64();
        match t.powers() {
            [] => q.c += k,
            [(v, 1)] => q.b[*v] += k,
            [(v, 2)] => q.a[*v][*v] -= k,
            [(v, 1), (w, 1)] => {
                q.a[*v][*w] -= k * 0.5;
                q.a[*w][*v] -= k * 0.5;
            }
            _ => return None,
        }
    }
    let re = nalgebra::DMatrix::from_fn(m, m, |r, c| q.a[r][c].re);
    re.symmetric_eigen().eigenvalues.iter().all(|&v| v > 0.0).then_some(q)
}

/// `A = C Cᵀ` without conjugation; pivots keep positive real part when
/// `Re A` is positive definite, so the principal root is the right branch.
fn symmetric_cholesky(a: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let m = a.len();
    let mut c = vec![vec![Complex64::zero(); m]; m];
    for j in 0..m {
        let mut d = a[j][j];
        for k in 0..j {
            d -= c[j][k] * c[j][k];
        }
        c[j][j] = d.sqrt();
        for i in j + 1..m {
            let mut s = a[i][j];
            for k in 0..j {
                s -= c[i][k] * c[j][k];
            }
            c[i][j] = s / c[j][j];
        }
    }
    c
}

/// `∫ x^α e^E`: with `x = x₀ + C⁻ᵀu` the exponent becomes `E(x₀) − |u|²`,
/// and a tensor Gauss–Hermite rule of order `|α|/2 + 1` is exact.
fn coupled_term(q: &Quadratic, f: &Factors) -> Result<Complex64> {
    let m = q.b.len();
    let c = symmetric_cholesky(&q.a);
    // x₀ = A⁻¹b/2 by forward then backward substitution
    let mut y = vec![Complex64::zero(); m];
    for i in 0..m {
        let mut s = q.b[i] * 0.5;
        for k in 0..i {
            s -= c[i][k] * y[k];
        }
        y[i] = s / c[i][i];
    }
    let mut x0 = vec![Complex64::zero(); m];
    for i in (0..m).rev() {
        let mut s = y[i];
        for k in i + 1..m {
            s -= c[k][i] * x0[k];
        }
        x0[i] = s / c[i][i];
    }
    // C⁻ᵀ column by column
    let mut cinv_t = vec![vec![Complex64::zero(); m]; m];
    for col in 0..m {
        for i in (0..m).rev() {
            let mut s = if i == col { Complex64::new(1.0, 0.0) } else { Complex64::zero() };
            for k in i + 1..m {
                s -= c[k][i] * cinv_t[k][col];
            }
            cinv_t[i][col] = s / c[i][i];
        }
    }
    let mut peak = q.c;
    for i in 0..m {
        peak += q.b[i] * x0[i] * 0.5;
    }
    let det: Complex64 = (0..m).map(|i| c[i][i]).product();
    let order = f.degree() as usize / 2 + 1;
    let rule = GaussHermite::new(NonZeroUsize::new(order).unwrap());
    let nodes = rule.as_node_weight_pairs();
    let mut idx = vec![0usize; m];
    let mut acc = Complex64::zero();
    loop {
        let mut w = 1.0;
        let mut val = Complex64::new(1.0, 0.0);
        for r in 0..m {
            let mut xr = x0[r];
            for k in 0..m {
                xr += cinv_t[r][k] * nodes[idx[k]].0;
            }
            val *= xr.powu(f.power_of(r));
        }
        for &i in &idx {
            w *= nodes[i].1;
        }
        acc += val * w;
        let mut k = 0;
        loop {
            if k == m {
                return Ok(acc * peak.exp() / det);
            }
            idx[k] += 1;
            if idx[k] < order {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Upper bound of `|d/dx_i Im(phase)|` over the box, sampled on a grid.
fn phase_frequency(e: &ScalarExpr, bounds: &[(f64, f64)]) -> Result<Vec<f64>> {
    let m = bounds.len();
    let mut grads: Vec<Vec<NumericExpr>> = Vec::new();
    for (f, _) in e.terms() {
        if let Some(arg) = f.exp_arg() {
            grads.push((0..m).map(|i| arg.diff(i).to_numeric()).collect());
        }
    }
    let mut w = vec![0.0f64; m];
    if grads.is_empty() {
        return Ok(w);
    }
    let per_axis: usize = if m == 1 { 257 } else if m == 2 { 65 } else { 17 };
    let total = per_axis.pow(m as u32);
    let mut x = vec![0.0; m];
    for idx in 0..total {
        let mut r = idx;
        for (i, (lo, hi)) in bounds.iter().enumerate() {
            let j = r % per_axis;
            r /= per_axis;
            x[i] = lo + (hi - lo) * j as f64 / (per_axis - 1) as f64;
        }
        for g in &grads {
            for i in 0..m {
                w[i] = w[i].max(g[i].eval(&x).im.abs());
            }
        }
    }
    // widen by a grid-spacing margin so peaks between samples are covered
    Ok(w.into_iter().map(|v| v * 1.25).collect())
}

fn legendre_grid(e: &NumericExpr, bounds: &[(f64, f64)], freq: &[f64], per_period: usize) -> Result<Complex64> {
    const ORDER: usize = 8;
    let rule = GaussLegendre::new(NonZeroUsize::new(ORDER).unwrap());
    let mut axes: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut count = 1.0f64;
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        let periods = freq[i] * (hi - lo) / (2.0 * std::f64::consts::PI);
        let nodes = (periods * per_period as f64).max(400.0);
        let panels = (nodes / ORDER as f64).ceil() as usize;
        count *= (panels * ORDER) as f64;
        if count > MAX_GRID_NODES {
            return Err(Error::Quadrature(format!(
                "oscillatory grid would need more than {MAX_GRID_NODES:e} nodes"
            )));
        }
        let h = (hi - lo) / panels as f64;
        let mut pts = Vec::with_capacity(panels * ORDER);
        for p in 0..panels {
            let (a, b) = (lo + p as f64 * h, lo + (p + 1) as f64 * h);
            for &(t, w) in rule.as_node_weight_pairs() {
                pts.push((0.5 * (a + b) + 0.5 * (b - a) * t, 0.5 * (b - a) * w));
            }
        }
        axes.push(pts);
    }
    let m = bounds.len();
    let mut x = vec![0.0; m];
    let mut idx = vec![0usize; m];
    let mut acc = Complex64::zero();
    loop {
        let mut w = 1.0;
        for i in 0..m {
            let (xi, wi) = axes[i][idx[i]];
            x[i] = xi;
            w *= wi;
        }
        acc += e.eval(&x) * w;
        let mut i = 0;
        loop {
            if i == m {
                return Ok(acc);
            }
            idx[i] += 1;
            if idx[i] < axes[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

struct Simpson<'a> {
    e: &'a NumericExpr,
    bounds: &'a [(f64, f64)],
    tol: f64,
    failed: bool,
}

const MAX_DEPTH: u32 = 40;

impl Simpson<'_> {
    // integral over axes[axis..] with x[..axis] fixed
    fn axis(&mut self, axis: usize, x: &mut Vec<f64>) -> Complex64 {
        let (a, b) = self.bounds[axis];
        let fa = self.inner(axis, a, x);
        let fb = self.inner(axis, b, x);
        // seed with a fixed subdivision so narrow features are not skipped
        let seg = 16;
        let h = (b - a) / seg as f64;
        let mut acc = Complex64::zero();
        let mut left = fa;
        for s in 0..seg {
            let l = a + s as f64 * h;
            let r = if s + 1 == seg { b } else { l + h };
            let fr = if s + 1 == seg { fb } else { self.inner(axis, r, x) };
            let mid = 0.5 * (l + r);
            let fm = self.inner(axis, mid, x);
            let whole = (r - l) / 6.0 * (left + 4.0 * fm + fr);
            acc += self.refine(axis, x, l, r, left, fm, fr, whole, self.tol / seg as f64, 0);
            left = fr;
        }
        acc
    }

    fn inner(&mut self, axis: usize, t: f64, x: &mut Vec<f64>) -> Complex64 {
        x[axis] = t;
        if axis + 1 == self.bounds.len() {
            self.e.eval(x)
        } else {
            self.axis(axis + 1, x)
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        axis: usize,
        x: &mut Vec<f64>,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let flm = self.inner(axis, lm, x);
        let frm = self.inner(axis, rm, x);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.norm() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        if depth >= MAX_DEPTH {
            self.failed = true;
            return left + right + delta / 15.0;
        }
        self.refine(axis, x, a, m, fa, flm, fm, left, tol / 2.0, depth + 1)
            + self.refine(axis, x, m, b, fm, frm, fb, right, tol / 2.0, depth + 1)
    }
}

fn simpson_box(e: &NumericExpr, bounds: &[(f64, f64)], tol: f64) -> Result<Complex64> {
    let mut s = Simpson {
        e,
        bounds,
        tol,
        failed: false,
    };
    let mut x = vec![0.0; bounds.len()];
    let v = s.axis(0, &mut x);
    if s.failed || !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::Quadrature("adaptive Simpson did not converge".into()));
    }
    Ok(v)
}
