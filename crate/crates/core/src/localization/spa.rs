//! Stationary-phase leading terms and contraction of densities onto `N`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::calculus::{berezin_integrate, hessian_at, CoordinateSubmanifold, Density};
use crate::error::{Error, Result};
use crate::grassmann::{reorder_sign, QuadratureConfig, SuperFunction};
use crate::linalg::{ber_of_form, or01_of_form, sqrt_ber_line, SuperMatrix};

/// Re-express a function restricted to `N` in the tangent coordinates of `N`.
fn to_tangent(f: &SuperFunction, n_sub: &CoordinateSubmanifold) -> Result<SuperFunction> {
    let (m, n) = n_sub.ambient();
    let te = n_sub.tangent_even();
    let to = n_sub.tangent_odd();
    let (m2, n2) = (te.len(), to.len());
    let even: Vec<SuperFunction> = (0..m)
        .map(|i| match te.iter().position(|&t| t == i) {
            Some(p) => SuperFunction::even_coord(m2, n2, p),
            None => SuperFunction::zero(m2, n2),
        })
        .collect();
    let odd: Vec<SuperFunction> = (0..n)
        .map(|a| match to.iter().position(|&t| t == a) {
            Some(p) => SuperFunction::odd_coord(m2, n2, p),
            None => SuperFunction::zero(m2, n2),
        })
        .collect();
    f.substitute(&even, &odd)
}

/// `⟨c·b_ν ⊗ sign, μ⟩`: the density on `N` (in its tangent coordinates) with
/// coefficient `sign · c|_N · f|_N`. Writing the top monomial as
/// `θ^{tangent} θ^{normal}` contributes the reorder sign.
pub fn contract_density(coefficient: &SuperFunction, sign: i8, mu: &Density, n_sub: &CoordinateSubmanifold) -> Result<Density> {
    if mu.dims() != n_sub.ambient() || coefficient.dims() != n_sub.ambient() {
        return Err(Error::DimensionMismatch {
            expected: format!("{:?}", n_sub.ambient()),
            found: format!("{:?}", mu.dims()),
        });
    }
    let tangent_mask = n_sub.tangent_odd().iter().fold(0u64, |acc, a| acc | (1 << a));
    let s = sign as i64 * reorder_sign(tangent_mask, n_sub.normal_mask()) * mu.orientation as i64;
    let c = n_sub.restrict(coefficient).mul(&n_sub.restrict(&mu.coefficient));
    let f = to_tangent(&c, n_sub)?;
    Ok(Density::with_orientation(f, s as i8))
}

/// Quadrature config for `N`: the ambient box restricted to tangent axes.
pub fn tangent_quadrature(quad: &QuadratureConfig, n_sub: &CoordinateSubmanifold) -> QuadratureConfig {
    let mut q = quad.clone();
    q.bounds = quad
        .bounds
        .as_ref()
        .map(|b| n_sub.tangent_even().iter().map(|&i| b[i]).collect());
    q
}

/// Body of the even block at the chart origin.
pub fn body_matrix(h: &SuperMatrix) -> Result<DMatrix<f64>> {
    let a = h.block_a();
    let k = a.len();
    let origin = vec![0.0; h.ambient().0];
    let mut out = DMatrix::zeros(k, k);
    for (r, row) in a.iter().enumerate() {
        for (c, e) in row.iter().enumerate() {
            out[(r, c)] = e.body().eval(&origin)?.re;
        }
    }
    Ok(out)
}

/// Signature (#positive − #negative eigenvalues) of a symmetric matrix.
pub fn signature(a: &DMatrix<f64>) -> Result<i64> {
    if a.nrows() == 0 {
        return Ok(0);
    }
    let scale = a.norm().max(1e-300);
    let eig = a.clone().symmetric_eigen().eigenvalues;
    let mut s = 0;
    for v in eig.iter() {
        if v.abs() <= 1e-12 * scale {
            return Err(Error::Degenerate("even Hessian is singular".into()));
        }
        s += if *v > 0.0 { 1 } else { -1 };
    }
    Ok(s)
}

/// Pieces of the leading term that do not depend on `λ`.
#[derive(Clone, Debug)]
pub struct SpaData {
    pub critical_value: Complex64,
    pub signature: i64,
    pub k: usize,
    pub l: usize,
    /// `∫_N ⟨√Ber⁻¹H ⊗ or_{(0,1)}(H), μ⟩`.
    pub contracted_integral: Complex64,
    pub or01: i8,
}

impl SpaData {
    /// `e^{iλC} e^{iπ sgn/4} (2π/λ)^{k/2} (−iλ)^l ∫_N ⟨…⟩`.
    pub fn leading_term(&self, lambda: f64) -> Complex64 {
        let i = Complex64::i();
        let phase = (i * lambda * self.critical_value).exp() * (i * std::f64::consts::FRAC_PI_4 * self.signature as f64).exp();
        let even = (2.0 * std::f64::consts::PI / lambda).powf(self.k as f64 / 2.0);
        let odd = (-i * lambda).powi(self.l as i32);
        phase * even * odd * self.contracted_integral
    }

    /// With `k = 2l` the explicit powers of `λ` cancel: `(2π/λ)^l (−iλ)^l = (−2πi)^l`.
    pub fn lambda_independent(&self) -> bool {
        self.k == 2 * self.l && self.critical_value.norm() == 0.0
    }
}

pub fn stationary_phase_data(s: &SuperFunction, mu: &Density, n_sub: &CoordinateSubmanifold, quad: &QuadratureConfig) -> Result<SpaData> {
    let h = hessian_at(s, n_sub)?;
    let (k, q) = n_sub.codim();
    if q % 2 == 1 {
        return Err(Error::OddDimension(q));
    }
    let (_, ber_inv) = ber_of_form(&h, Vec::new())?;
    let root = sqrt_ber_line(&ber_inv)?;
    let or01 = if q == 0 { 1 } else { or01_of_form(&h)?.sign };
    let sig = signature(&body_matrix(&h)?)?;
    let c = n_sub.restrict(s);
    let origin = vec![0.0; s.m()];
    let critical_value = c.body().eval(&origin)?;
    let dens = contract_density(&root.coefficient, or01, mu, n_sub)?;
    let contracted_integral = berezin_integrate(&dens, &tangent_quadrature(quad, n_sub))?;
    Ok(SpaData {
        critical_value,
        signature: sig,
        k,
        l: q / 2,
        contracted_integral,
        or01,
    })
}

/// Leading term of `∫ μ e^{iλS}` from the critical submanifold `N`.
pub fn stationary_phase_rhs(s: &SuperFunction, mu: &Density, n_sub: &CoordinateSubmanifold, quad: &QuadratureConfig, lambda: f64) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::Invariant("stationary phase needs λ > 0".into()));
    }
    Ok(stationary_phase_data(s, mu, n_sub, quad)?.leading_term(lambda))
}
