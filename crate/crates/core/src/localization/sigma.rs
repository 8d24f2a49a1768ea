//! The odd function `σ` with `Q²σ = 0` whose `Qσ` localizes the integral,
//! and the `Q`-invariant cutoff built from it.

use std::collections::BTreeSet;

use super::scenario::{rotation_generator, RotationPlane, Scenario};
use crate::calculus::SuperVectorField;
use crate::error::{Error, Result};
use crate::grassmann::{rat, Axis, Const, Rational, ScalarExpr, SuperFunction};

/// Torus-averaged inner product on the odd directions. Coordinate-plane
/// rotations are orthogonal for the standard product, so averaging returns
/// it unchanged; the skewness of the odd rotation block is still checked.
pub fn invariant_odd_metric(n: usize, planes: &[RotationPlane]) -> Result<Vec<Vec<Const>>> {
    let g: Vec<Vec<Const>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Const::one() } else { Const::zero() }).collect())
        .collect();
    let mut e = vec![vec![Const::zero(); n]; n];
    for p in planes {
        if let (Axis::Odd(a), Axis::Odd(b)) = p.plane {
            e[b][a] = e[b][a].add(&p.weight);
            e[a][b] = e[a][b].sub(&p.weight);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if e[i][j] != e[j][i].neg() {
                return Err(Error::NotCompact("odd rotation block is not skew".into()));
            }
        }
    }
    Ok(g)
}

/// Highest combined degree of the plane's coordinates over the terms of `f`.
fn plane_degree(f: &SuperFunction, plane: (Axis, Axis)) -> u32 {
    let deg_axis = |mask: u64, t: &crate::grassmann::Factors, a: Axis| match a {
        Axis::Even(i) => t.power_of(i),
        Axis::Odd(k) => ((mask >> k) & 1) as u32,
    };
    let mut best = 0;
    for (mask, c) in f.coeffs() {
        for (t, _) in c.terms() {
            best = best.max(deg_axis(mask, t, plane.0) + deg_axis(mask, t, plane.1));
        }
    }
    best
}

/// Projection onto `ker R` for the rotation generator `R`: the torus average.
/// `R` acts on polynomials with eigenvalues `i Σ w_j k_j`, so the projection
/// is `Π_s (R² + s²)/s²` over the positive frequencies `s`.
pub fn torus_average(f: &SuperFunction, planes: &[RotationPlane]) -> Result<SuperFunction> {
    let (m, n) = f.dims();
    let r = rotation_generator(m, n, planes)?;
    if r.apply(f)?.is_zero() {
        return Ok(f.clone());
    }
    if !f.is_polynomial() {
        return Err(Error::NotCompact("cannot average a non-polynomial function".into()));
    }
    let mut freqs: BTreeSet<Rational> = BTreeSet::new();
    freqs.insert(rat(0, 1));
    for p in planes {
        let w = p
            .weight
            .as_real_rational()
            .cloned()
            .ok_or_else(|| Error::NotCompact("averaging needs exact real weights".into()))?;
        let d = plane_degree(f, p.plane) as i64;
        let mut next = BTreeSet::new();
        for s in &freqs {
            for k in -d..=d {
                next.insert(s + &w * rat(k, 1));
            }
        }
        freqs = next;
    }
    let positive: BTreeSet<Rational> = freqs
        .into_iter()
        .map(|s| if s < rat(0, 1) { -s } else { s })
        .filter(|s| *s > rat(0, 1))
        .collect();
    let mut out = f.clone();
    for s in positive {
        let s2 = Const::real(&s * &s);
        let rr = r.apply(&r.apply(&out)?)?;
        out = rr.add(&out.scale(&s2)).scale(&s2.inv().expect("positive"));
    }
    if !r.apply(&out)?.is_zero() {
        return Err(Error::Invariant("torus average is not invariant".into()));
    }
    Ok(out)
}

/// `σ = Σ g_{αβ} b^α θ^β` averaged over the torus, where `b^α` is the body of
/// the `∂_{θ^α}` coefficient of `Q`. An override is validated and returned.
pub fn build_sigma(scn: &Scenario) -> Result<SuperFunction> {
    let (m, n) = scn.dims();
    let q2 = scn.q.square()?;
    if let Some(s) = &scn.sigma {
        if !q2.apply(s)?.is_zero() {
            return Err(Error::Invariant("sigma override: Q²σ ≠ 0".into()));
        }
        return Ok(s.clone());
    }
    let g = invariant_odd_metric(n, &scn.rotation)?;
    let mut sigma = SuperFunction::zero(m, n);
    for (a, row) in g.iter().enumerate() {
        let b = scn.q.odd_coeffs()[a].body();
        if b.is_zero() {
            continue;
        }
        for (beta, gab) in row.iter().enumerate() {
            if !gab.is_zero() {
                let t = SuperFunction::monomial(m, n, 1 << beta, b.clone()).scale(gab);
                sigma = sigma.add(&t);
            }
        }
    }
    let sigma = torus_average(&sigma, &scn.rotation)?;
    if !q2.apply(&sigma)?.is_zero() {
        return Err(Error::Invariant("Q²σ ≠ 0 after averaging".into()));
    }
    Ok(sigma)
}

/// `‖α(Q)‖²_g = Σ g_{αβ} b^α b^β`.
pub fn alpha_norm_squared(q: &SuperVectorField, g: &[Vec<Const>]) -> ScalarExpr {
    let b: Vec<ScalarExpr> = q.odd_coeffs().iter().map(|f| f.body()).collect();
    let mut acc = ScalarExpr::zero();
    for (a, row) in g.iter().enumerate() {
        for (c, gac) in row.iter().enumerate() {
            if !gac.is_zero() {
                acc = acc.add(&b[a].mul(&b[c]).scale(gac));
            }
        }
    }
    acc
}

/// `g₀ = 1 − Q(σ f₁(b)/Qσ)` where `b` is the body of `Qσ` and `f₁` rises
/// from 0 at `b = r²` to 1 at `b = R²`. With `Qσ = b + ψ`,
/// `f₁(b)/Qσ = Σ_k (−ψ)^k f₁(b)/b^{k+1}`, which stays finite where `b` vanishes.
pub fn build_invariant_cutoff(q: &SuperVectorField, sigma: &SuperFunction, r: f64, big_r: f64) -> Result<SuperFunction> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::Invariant("cutoff radii need 0 < r < R".into()));
    }
    let (m, n) = q.dims();
    let qs = q.apply(sigma)?;
    let b = qs.body();
    let psi = qs.soul();
    let lo = Rational::from_float(r * r).ok_or_else(|| Error::Invariant("radius".into()))?;
    let hi = Rational::from_float(big_r * big_r).ok_or_else(|| Error::Invariant("radius".into()))?;
    let minus_psi = psi.neg();
    let mut pow = SuperFunction::one(m, n);
    let mut frac = SuperFunction::zero(m, n);
    for k in 0..=(n / 2 + 1) as u32 {
        if pow.is_zero() {
            break;
        }
        let atom = ScalarExpr::transition(lo.clone(), hi.clone(), 0, k + 1, b.clone());
        frac = frac.add(&pow.scale_expr(&atom));
        pow = pow.mul(&minus_psi);
    }
    let g0 = SuperFunction::one(m, n).sub(&q.apply(&sigma.mul(&frac))?);
    if !q.apply(&g0)?.is_zero() {
        return Err(Error::Invariant("cutoff is not Q-invariant".into()));
    }
    Ok(g0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::parse_superfunction;
    use crate::localization::load_scenario;

    fn golden() -> Scenario {
        let path = format!("{}/../../scenarios/golden.json", env!("CARGO_MANIFEST_DIR"));
        load_scenario(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    #[test]
    fn golden_sigma() {
        let scn = golden();
        let p = |s: &str| parse_superfunction(s, &scn.names).unwrap();
        let sigma = build_sigma(&scn).unwrap();
        assert_eq!(sigma, p("-y*th1 + x*th2"));
        assert_eq!(scn.q.apply(&sigma).unwrap(), p("x^2 + y^2 + 2*th1*th2"));
        let g = invariant_odd_metric(2, &scn.rotation).unwrap();
        assert_eq!(alpha_norm_squared(&scn.q, &g), p("x^2 + y^2").body());
    }

    #[test]
    fn sigma_override() {
        let mut scn = golden();
        let p = |s: &str| parse_superfunction(s, &scn.names).unwrap();
        let o = p("2*(-y*th1 + x*th2)");
        scn.sigma = Some(o.clone());
        assert_eq!(build_sigma(&scn).unwrap(), o);
        scn.sigma = Some(p("x*th1"));
        assert!(build_sigma(&scn).is_err());
    }

    #[test]
    fn averaging_projects_onto_invariants() {
        let scn = golden();
        let p = |s: &str| parse_superfunction(s, &scn.names).unwrap();
        // x*th1 averages to (x*th1 + y*th2)/2
        assert_eq!(torus_average(&p("x*th1"), &scn.rotation).unwrap(), p("(x*th1 + y*th2)/2"));
    }

    #[test]
    fn cutoff() {
        let scn = golden();
        let sigma = build_sigma(&scn).unwrap();
        let g0 = build_invariant_cutoff(&scn.q, &sigma, 1.0, 2.0).unwrap();
        assert!(g0.is_even());
        for (pt, want) in [([0.0, 0.0], 1.0), ([0.6, -0.5], 1.0), ([2.1, 0.0], 0.0), ([-1.5, 1.8], 0.0)] {
            let v = g0.body().eval(&pt).unwrap();
            assert!((v.re - want).abs() < 1e-12 && v.im.abs() < 1e-12, "{pt:?}: {v}");
        }
        let mid = g0.body().eval(&[1.5, 0.0]).unwrap().re;
        assert!(mid > 0.0 && mid < 1.0);
        let zero = SuperVectorField::zero(2, 2, crate::grassmann::Parity::Odd);
        let one = build_invariant_cutoff(&zero, &SuperFunction::zero(2, 2), 1.0, 2.0).unwrap();
        assert_eq!(one, SuperFunction::one(2, 2));
        assert!(build_invariant_cutoff(&scn.q, &sigma, 2.0, 1.0).is_err());
    }
}
