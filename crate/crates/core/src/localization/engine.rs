//! `Z(λ)`, the localization right-hand side, the proof's identity suite and
//! the per-scenario report.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::scenario::Scenario;
use super::sigma::{alpha_norm_squared, build_invariant_cutoff, build_sigma, invariant_odd_metric};
use super::spa::{body_matrix, contract_density, signature, stationary_phase_data, tangent_quadrature, SpaData};
use crate::calculus::{berezin_integrate, hessian_at, linearize_at, vanishing_locus};
use crate::error::{Error, Result};
use crate::grassmann::{Axis, Const, QuadratureConfig, QuadratureKind, ScalarExpr, SuperFunction};
use crate::linalg::{
    berezinian_even, berezinian_odd, form_hat, or01_of_form, or_compact_auto, sqrt_ber_line, SuperMatrix,
};

/// Names of the identity checks, in report order.
pub const IDENTITY_NAMES: [&str; 8] = [
    "q2_sigma_zero",
    "qsigma_body_is_norm",
    "z_constant",
    "hl_eq_minus_lst_h",
    "av_eq_wt_d",
    "ber_HLIprime_eq_1",
    "or01_eq_sign_o",
    "sgn_hred_eq_2l",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityCheck {
    pub holds: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSample {
    pub lambda: f64,
    pub z: Option<Complex64>,
    /// Stationary-phase leading term; absent at `λ = 0` or on a degenerate locus.
    pub spa: Option<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationReport {
    pub id: String,
    pub exact: bool,
    pub direct: Option<Complex64>,
    pub sigma: Option<String>,
    pub samples: Vec<LambdaSample>,
    pub nondegenerate: bool,
    pub l: Option<usize>,
    pub localization_rhs: Option<Complex64>,
    /// `|direct − RHS| / |direct|` (absolute when the direct integral vanishes).
    pub localization_residual: Option<f64>,
    pub spa_lambda_independent: Option<bool>,
    pub cutoff_integral: Option<Complex64>,
    pub cutoff_residual: Option<f64>,
    pub identities: Vec<(String, IdentityCheck)>,
    /// Sub-operation failures; any entry fails the report.
    pub errors: Vec<String>,
    pub pass: bool,
}

impl LocalizationReport {
    pub fn identity(&self, name: &str) -> Option<IdentityCheck> {
        self.identities.iter().find(|(n, _)| n == name).map(|(_, c)| *c)
    }

    pub fn max_identity_residual(&self) -> f64 {
        self.identities.iter().map(|(_, c)| c.residual).fold(0.0, f64::max)
    }
}

// deterministic probe points for numeric residuals
fn probes(m: usize) -> Vec<Vec<f64>> {
    let base = [0.0, 0.37, -0.81, 1.3];
    (0..base.len())
        .map(|k| (0..m).map(|i| if k == 0 { 0.0 } else { base[(k + i) % base.len()] }).collect())
        .collect()
}

fn scalar_residual(e: &ScalarExpr, m: usize) -> f64 {
    if e.is_zero() {
        return 0.0;
    }
    let r = probes(m)
        .iter()
        .map(|x| e.eval(x).map(|v| v.norm()).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    // symbolically nonzero: never report an exact zero
    if r == 0.0 { f64::MIN_POSITIVE } else { r }
}

fn function_residual(f: &SuperFunction) -> f64 {
    f.coeffs().map(|(_, c)| scalar_residual(c, f.m())).fold(0.0, f64::max)
}

fn matrix_residual(rows: &[Vec<SuperFunction>]) -> f64 {
    rows.iter().flatten().map(function_residual).fold(0.0, f64::max)
}

fn block_mul(a: &[Vec<SuperFunction>], b: &[Vec<SuperFunction>], m: usize, n: usize) -> Vec<Vec<SuperFunction>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|c| (0..inner).fold(SuperFunction::zero(m, n), |acc, k| acc.add(&row[k].mul(&b[k][c]))))
                .collect()
        })
        .collect()
}

fn transpose(a: &[Vec<SuperFunction>]) -> Vec<Vec<SuperFunction>> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|c| a.iter().map(|r| r[c].clone()).collect()).collect()
}

fn sub_blocks(a: &[Vec<SuperFunction>], b: &[Vec<SuperFunction>]) -> Vec<Vec<SuperFunction>> {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.sub(y)).collect()).collect()
}

struct Checker {
    exact: bool,
    tol: f64,
    out: Vec<(String, IdentityCheck)>,
}

impl Checker {
    /// Symbolic quantity that should vanish.
    fn zero(&mut self, name: &str, symbolic_zero: bool, residual: f64) {
        let holds = if self.exact { symbolic_zero } else { symbolic_zero || residual <= self.tol };
        let residual = if symbolic_zero { 0.0 } else { residual };
        self.out.push((name.into(), IdentityCheck { holds, residual }));
    }

    fn numeric(&mut self, name: &str, residual: f64, tol: f64) {
        self.out.push((name.into(), IdentityCheck { holds: residual <= tol, residual }));
    }

    fn discrete(&mut self, name: &str, lhs: i64, rhs: i64) {
        let residual = (lhs - rhs).abs() as f64;
        self.out.push((name.into(), IdentityCheck { holds: residual == 0.0, residual }));
    }
}

/// `Z(λ) = ∫ μ e^{iλQσ}`.
pub fn z_lambda(scn: &Scenario, sigma: &SuperFunction, lambda: f64) -> Result<Complex64> {
    if lambda == 0.0 {
        return berezin_integrate(&scn.mu, &scn.quad);
    }
    let qs = scn.q.apply(sigma)?;
    let phase = qs.scale(&Const::approx(Complex64::new(0.0, lambda))).exp_even()?;
    berezin_integrate(&scn.mu.times(&phase), &scn.quad)
}

/// Orientation `o` of the compact automorphism `L²` on the odd normal directions.
pub fn compact_orientation(l: &SuperMatrix) -> Result<i8> {
    let l2 = l.mul(l)?;
    let d = l2.block_d();
    if d.is_empty() {
        return Ok(1);
    }
    let origin = vec![0.0; l.ambient().0];
    let k = d.len();
    let mut e = DMatrix::zeros(k, k);
    for (r, row) in d.iter().enumerate() {
        for (c, f) in row.iter().enumerate() {
            e[(r, c)] = f.body().eval(&origin)?.re;
        }
    }
    Ok(or_compact_auto(&e)?.sign)
}

#[derive(Clone, Debug)]
pub struct LocalizationData {
    pub l: usize,
    pub linearization: SuperMatrix,
    /// Coefficient of `Ber(L)` on the coordinate basis.
    pub ber_l: SuperFunction,
    pub o: i8,
    pub contracted_integral: Complex64,
    pub rhs: Complex64,
}

pub fn localization_data(scn: &Scenario) -> Result<LocalizationData> {
    let locus = vanishing_locus(&scn.q, &scn.n_sub)?;
    let l = match (locus.nondegenerate, locus.l) {
        (true, Some(l)) => l,
        _ => return Err(Error::Degenerate("Q is degenerate along N".into())),
    };
    let lin = linearize_at(&scn.q, &scn.n_sub)?;
    let (ber_l, root) = if l == 0 {
        (SuperFunction::one(lin.ambient().0, lin.ambient().1), SuperFunction::one(lin.ambient().0, lin.ambient().1))
    } else {
        let b = berezinian_odd(&lin, Vec::new())?;
        let r = sqrt_ber_line(&b)?;
        (b.coefficient, r.coefficient)
    };
    let o = compact_orientation(&lin)?;
    let dens = contract_density(&root, o, &scn.mu, &scn.n_sub)?;
    let contracted_integral = berezin_integrate(&dens, &tangent_quadrature(&scn.quad, &scn.n_sub))?;
    let rhs = contracted_integral * (-2.0 * PI).powi(l as i32);
    Ok(LocalizationData {
        l,
        linearization: lin,
        ber_l,
        o,
        contracted_integral,
        rhs,
    })
}

/// `(−2π)^l ∫_N ⟨√Ber(L) ⊗ o, μ⟩`.
pub fn localization_rhs(scn: &Scenario) -> Result<Complex64> {
    Ok(localization_data(scn)?.rhs)
}

// ĤL = −L^{st}Ĥ, AV = WᵗD, Ber(ĤLI′) = 1, or01(H) = (−1)^l o, sgn(H_red) = 2l
fn proof_identities(ck: &mut Checker, qs: &SuperFunction, data: &LocalizationData, scn: &Scenario) -> Result<()> {
    let (m, n) = scn.dims();
    let h = hessian_at(qs, &scn.n_sub)?;
    let hat = form_hat(&h)?;
    let lin = &data.linearization;
    let lhs = hat.mul(lin)?.add(&lin.supertranspose()?.mul(&hat)?)?;
    let rows: Vec<Vec<SuperFunction>> = (0..lhs.nrows()).map(|r| (0..lhs.ncols()).map(|c| lhs.get(r, c).clone()).collect()).collect();
    ck.zero("hl_eq_minus_lst_h", rows.iter().flatten().all(|f| f.is_zero()), matrix_residual(&rows));

    let av = block_mul(&hat.block_a(), &lin.block_b(), m, n);
    let wd = block_mul(&transpose(&lin.block_c()), &hat.block_d(), m, n);
    let diff = sub_blocks(&av, &wd);
    ck.zero("av_eq_wt_d", diff.iter().flatten().all(|f| f.is_zero()), matrix_residual(&diff));

    let p = 2 * data.l;
    let b = berezinian_even(&hat.mul(lin)?.mul(&SuperMatrix::odd_identity(m, n, p))?)?;
    let d = scn.n_sub.restrict(&b).sub(&SuperFunction::one(m, n));
    ck.zero("ber_HLIprime_eq_1", d.is_zero(), function_residual(&d));

    let or01 = if p == 0 { 1 } else { or01_of_form(&h)?.sign };
    let sign = if data.l % 2 == 0 { 1 } else { -1 };
    ck.discrete("or01_eq_sign_o", or01 as i64, (sign * data.o) as i64);
    ck.discrete("sgn_hred_eq_2l", signature(&body_matrix(&h)?)?, p as i64);
    Ok(())
}

/// Box for the cutoff check: a margin past `R` on rotated axes, the scenario
/// box (or ±10) elsewhere.
fn cutoff_box(scn: &Scenario, big_r: f64) -> Vec<(f64, f64)> {
    let (m, _) = scn.dims();
    (0..m)
        .map(|i| {
            let rotated = scn.rotation.iter().any(|p| p.plane.0 == Axis::Even(i) || p.plane.1 == Axis::Even(i));
            if rotated {
                (-(big_r + 0.25), big_r + 0.25)
            } else {
                scn.quad.bounds.as_ref().map_or((-10.0, 10.0), |b| b[i])
            }
        })
        .collect()
}

fn relative(a: Complex64, b: Complex64) -> f64 {
    let d = (a - b).norm();
    if a.norm() > 0.0 { d / a.norm() } else { d }
}

/// Run the full pipeline. Validation failures are returned as errors; every
/// later failure is attached to the report and fails it.
pub fn verify_scenario(scn: &Scenario) -> Result<LocalizationReport> {
    scn.validate()?;
    let exact = scn.is_exact();
    let mut errors = Vec::new();
    let mut ck = Checker {
        exact,
        tol: scn.tol.identity,
        out: Vec::new(),
    };
    let mut note = |e: Error, what: &str| errors.push(format!("{what}: {e}"));

    let direct = berezin_integrate(&scn.mu, &scn.quad).map_err(|e| note(e, "direct integral")).ok();
    let sigma = build_sigma(scn).map_err(|e| note(e, "sigma")).ok();
    let qs = match &sigma {
        Some(s) => scn.q.apply(s).map_err(|e| note(e, "Q(sigma)")).ok(),
        None => None,
    };

    let zs: Vec<Result<Complex64>> = match &sigma {
        Some(s) => std::thread::scope(|sc| {
            let handles: Vec<_> = scn.lambdas.iter().map(|&l| sc.spawn(move || z_lambda(scn, s, l))).collect();
            handles.into_iter().map(|h| h.join().expect("quadrature thread panicked")).collect()
        }),
        None => Vec::new(),
    };
    let mut z_vals = Vec::new();
    for (r, &l) in zs.into_iter().zip(&scn.lambdas) {
        match r {
            Ok(v) => z_vals.push(Some(v)),
            Err(e) => {
                note(e, &format!("Z({l})"));
                z_vals.push(None);
            }
        }
    }

    if let Some(qs) = &qs {
        let q2s = scn.q.apply(qs).map_err(|e| note(e, "Q²sigma")).ok();
        if let Some(q2s) = q2s {
            ck.zero("q2_sigma_zero", q2s.is_zero(), function_residual(&q2s));
        }
        match invariant_odd_metric(scn.dims().1, &scn.rotation) {
            Ok(g) => {
                let d = qs.body().sub(&alpha_norm_squared(&scn.q, &g));
                ck.zero("qsigma_body_is_norm", d.is_zero(), scalar_residual(&d, scn.dims().0));
            }
            Err(e) => note(e, "odd metric"),
        }
    }
    if let Some(d) = direct {
        let scale = d.norm().max(1.0);
        let dev = z_vals.iter().flatten().map(|z| (z - d).norm() / scale).fold(0.0, f64::max);
        ck.numeric("z_constant", dev, scn.tol.constancy);
    }

    let mut nondegenerate = false;
    let mut l = None;
    let mut rhs = None;
    let mut spa: Option<SpaData> = None;
    match vanishing_locus(&scn.q, &scn.n_sub) {
        Ok(locus) => nondegenerate = locus.nondegenerate,
        Err(e) => note(e, "vanishing locus"),
    }
    if nondegenerate {
        match localization_data(scn) {
            Ok(data) => {
                l = Some(data.l);
                rhs = Some(data.rhs);
                if let Some(qs) = &qs {
                    if let Err(e) = proof_identities(&mut ck, qs, &data, scn) {
                        note(e, "identity suite");
                    }
                    match stationary_phase_data(qs, &scn.mu, &scn.n_sub, &scn.quad) {
                        Ok(d) => spa = Some(d),
                        Err(e) => note(e, "stationary phase"),
                    }
                }
            }
            Err(e) => note(e, "localization"),
        }
    }

    let samples = scn
        .lambdas
        .iter()
        .zip(&z_vals)
        .map(|(&lambda, z)| LambdaSample {
            lambda,
            z: *z,
            spa: spa.as_ref().filter(|_| lambda > 0.0).map(|d| d.leading_term(lambda)),
        })
        .collect();

    let mut cutoff_integral = None;
    let mut cutoff_residual = None;
    if let (Some((r, big_r)), Some(s), Some(d)) = (scn.cutoff, &sigma, direct) {
        let run = || -> Result<Complex64> {
            let g0 = build_invariant_cutoff(&scn.q, s, r, big_r)?;
            let cfg = QuadratureConfig::on_box(cutoff_box(scn, big_r)).with_kind(QuadratureKind::Oscillatory);
            berezin_integrate(&scn.mu.times(&g0), &cfg)
        };
        match run() {
            Ok(v) => {
                cutoff_integral = Some(v);
                cutoff_residual = Some(relative(d, v));
            }
            Err(e) => note(e, "cutoff"),
        }
    }

    let localization_residual = match (direct, rhs) {
        (Some(d), Some(r)) => Some(relative(d, r)),
        _ => None,
    };
    let identities_hold = ck.out.iter().all(|(_, c)| c.holds);
    let pass = errors.is_empty()
        && identities_hold
        && cutoff_residual.is_none_or(|r| r <= scn.tol.localization)
        && (!nondegenerate || localization_residual.is_some_and(|r| r <= scn.tol.localization));
    Ok(LocalizationReport {
        id: scn.id.clone(),
        exact,
        direct,
        sigma: sigma.as_ref().map(|s| scn.names.print(s)),
        samples,
        nondegenerate,
        l,
        localization_rhs: rhs,
        localization_residual,
        spa_lambda_independent: spa.as_ref().map(SpaData::lambda_independent),
        cutoff_integral,
        cutoff_residual,
        identities: ck.out,
        errors,
        pass,
    })
}
