//! Verification scenarios and their JSON file format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calculus::{lie_derivative_density, CoordinateSubmanifold, Density, SuperVectorField};
use crate::error::{Error, Result};
use crate::grassmann::{parse_superfunction, Axis, Const, CoordNames, Parity, QuadratureConfig, QuadratureKind, SuperFunction};

/// Rotation `w (c₁ ∂_{c₂} − c₂ ∂_{c₁})` in a coordinate plane.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationPlane {
    pub plane: (Axis, Axis),
    pub weight: Const,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance for `∫μ` against the localization right-hand side.
    pub localization: f64,
    /// Tolerance for `|Z(λ) − Z(0)|`, relative to `max(1, |Z(0)|)`.
    pub constancy: f64,
    /// Identity residuals in the numeric sector (exact sector requires zero).
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            localization: 1e-6,
            constancy: 1e-5,
            identity: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: String,
    pub names: CoordNames,
    pub q: SuperVectorField,
    pub mu: Density,
    pub rotation: Vec<RotationPlane>,
    pub n_sub: CoordinateSubmanifold,
    pub sigma: Option<SuperFunction>,
    pub lambdas: Vec<f64>,
    pub quad: QuadratureConfig,
    pub tol: Tolerances,
    /// Inner and outer radius of the invariant cutoff check.
    pub cutoff: Option<(f64, f64)>,
}

/// Vector field generated by the declared rotations.
pub fn rotation_generator(m: usize, n: usize, planes: &[RotationPlane]) -> Result<SuperVectorField> {
    let mut even = vec![SuperFunction::zero(m, n); m];
    let mut odd = vec![SuperFunction::zero(m, n); n];
    let coord = |a: Axis| match a {
        Axis::Even(i) => SuperFunction::even_coord(m, n, i),
        Axis::Odd(k) => SuperFunction::odd_coord(m, n, k),
    };
    for p in planes {
        let (c1, c2) = p.plane;
        if c1.parity() != c2.parity() || c1 == c2 {
            return Err(Error::Scenario("rotation plane needs two distinct coordinates of equal parity".into()));
        }
        let mut put = |a: Axis, f: SuperFunction| match a {
            Axis::Even(i) => even[i] = even[i].add(&f),
            Axis::Odd(k) => odd[k] = odd[k].add(&f),
        };
        put(c2, coord(c1).scale(&p.weight));
        put(c1, coord(c2).scale(&p.weight).neg());
    }
    SuperVectorField::new(Parity::Even, even, odd)
}

impl Scenario {
    /// Checks the load-time invariants: the declared rotation generates `Q²`
    /// and `μ` is `Q`-invariant.
    pub fn validate(&self) -> Result<()> {
        let (m, n) = self.q.dims();
        if self.mu.dims() != (m, n) || self.n_sub.ambient() != (m, n) {
            return Err(Error::Scenario("dims: Q, mu and N disagree".into()));
        }
        if self.q.parity() != Parity::Odd {
            return Err(Error::Scenario("Q: must be odd".into()));
        }
        let q2 = self.q.square()?;
        let rot = rotation_generator(m, n, &self.rotation)?;
        if q2 != rot {
            return Err(if self.rotation.is_empty() {
                Error::NotCompact(format!("rotation_action: Q² = {} is not declared as a rotation", q2.fmt_with(&self.names)))
            } else {
                Error::Scenario(format!(
                    "rotation_action: declared generator {} differs from Q² = {}",
                    rot.fmt_with(&self.names),
                    q2.fmt_with(&self.names)
                ))
            });
        }
        let lq = lie_derivative_density(&self.q, &self.mu)?;
        if !lq.is_zero() {
            return Err(Error::Scenario(format!(
                "mu: not Q-invariant, L_Q mu = {}",
                self.names.print(&lq.coefficient)
            )));
        }
        if let Some(s) = &self.sigma {
            if !s.is_odd() {
                return Err(Error::Scenario("sigma: must be odd".into()));
            }
        }
        if let Some((r, big_r)) = self.cutoff {
            if !(r > 0.0 && r < big_r) {
                return Err(Error::Scenario("cutoff: need 0 < inner < outer".into()));
            }
        }
        Ok(())
    }

    /// Every constant in the scenario is exact.
    pub fn is_exact(&self) -> bool {
        self.q.even_coeffs().iter().chain(self.q.odd_coeffs()).all(|f| f.is_exact())
            && self.mu.coefficient.is_exact()
            && self.sigma.as_ref().is_none_or(|s| s.is_exact())
    }

    pub fn dims(&self) -> (usize, usize) {
        self.q.dims()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsFile {
    pub m: usize,
    pub n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinatesFile {
    pub even: Vec<String>,
    pub odd: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub coefficient: String,
    #[serde(default = "one_i8")]
    pub orientation: i8,
}

fn one_i8() -> i8 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneFile {
    pub plane: [String; 2],
    pub weight: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmanifoldFile {
    #[serde(default)]
    pub normal_even: Vec<String>,
    #[serde(default)]
    pub normal_odd: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureFile {
    pub kind: Option<String>,
    #[serde(rename = "box")]
    pub bounds: Option<Vec<[f64; 2]>>,
    pub points: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesFile {
    pub localization: Option<f64>,
    pub constancy: Option<f64>,
    pub identity: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffFile {
    pub inner: f64,
    pub outer: f64,
}

/// On-disk scenario; keys mirror [`Scenario`]. Expressions are strings in
/// the text grammar over the declared coordinate names.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub id: String,
    pub dims: DimsFile,
    pub coordinates: Option<CoordinatesFile>,
    #[serde(rename = "Q")]
    pub q: BTreeMap<String, String>,
    pub mu: DensityFile,
    #[serde(default)]
    pub rotation_action: Vec<PlaneFile>,
    #[serde(rename = "N")]
    pub n: SubmanifoldFile,
    pub sigma: Option<String>,
    #[serde(default)]
    pub lambda_grid: Vec<f64>,
    #[serde(default)]
    pub quadrature: QuadratureFile,
    #[serde(default)]
    pub tolerances: TolerancesFile,
    pub cutoff: Option<CutoffFile>,
}

fn key_err(key: &str, e: impl std::fmt::Display) -> Error {
    Error::Scenario(format!("{key}: {e}"))
}

fn axis_of(names: &CoordNames, s: &str, key: &str) -> Result<Axis> {
    if let Some(i) = names.even.iter().position(|e| e == s) {
        return Ok(Axis::Even(i));
    }
    if let Some(a) = names.odd.iter().position(|e| e == s) {
        return Ok(Axis::Odd(a));
    }
    Err(key_err(key, format!("unknown coordinate `{s}`")))
}

fn parse_weight(s: &str, key: &str) -> Result<Const> {
    let e = crate::grassmann::parse_scalar(s, &CoordNames::standard(0, 0)).map_err(|e| key_err(key, e))?;
    e.as_constant().ok_or_else(|| key_err(key, "weight must be a constant"))
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<ScenarioFile> {
        serde_json::from_str(text).map_err(|e| {
            // serde names the offending field in its message
            Error::Scenario(format!("json: {e}"))
        })
    }

    pub fn into_scenario(self) -> Result<Scenario> {
        let (m, n) = (self.dims.m, self.dims.n);
        let names = match &self.coordinates {
            Some(c) => {
                if c.even.len() != m || c.odd.len() != n {
                    return Err(key_err("coordinates", format!("expected {m} even and {n} odd names")));
                }
                CoordNames::new(c.even.clone(), c.odd.clone()).map_err(|e| key_err("coordinates", e))?
            }
            None => CoordNames::standard(m, n),
        };
        let parse = |key: &str, src: &str| parse_superfunction(src, &names).map_err(|e| key_err(key, e));
        let mut even = vec![SuperFunction::zero(m, n); m];
        let mut odd = vec![SuperFunction::zero(m, n); n];
        for (c, src) in &self.q {
            let key = format!("Q.{c}");
            let f = parse(&key, src)?;
            match axis_of(&names, c, &key)? {
                Axis::Even(i) => even[i] = f,
                Axis::Odd(a) => odd[a] = f,
            }
        }
        let q = SuperVectorField::new(Parity::Odd, even, odd).map_err(|e| key_err("Q", e))?;
        let mu_f = parse("mu.coefficient", &self.mu.coefficient)?;
        if self.mu.orientation != 1 && self.mu.orientation != -1 {
            return Err(key_err("mu.orientation", "must be 1 or -1"));
        }
        let mu = Density::with_orientation(mu_f, self.mu.orientation);
        let mut rotation = Vec::new();
        for (i, p) in self.rotation_action.iter().enumerate() {
            let key = format!("rotation_action[{i}]");
            rotation.push(RotationPlane {
                plane: (axis_of(&names, &p.plane[0], &key)?, axis_of(&names, &p.plane[1], &key)?),
                weight: parse_weight(&p.weight, &key)?,
            });
        }
        let mut ne = Vec::new();
        for s in &self.n.normal_even {
            match axis_of(&names, s, "N.normal_even")? {
                Axis::Even(i) => ne.push(i),
                Axis::Odd(_) => return Err(key_err("N.normal_even", format!("`{s}` is odd"))),
            }
        }
        let mut no = Vec::new();
        for s in &self.n.normal_odd {
            match axis_of(&names, s, "N.normal_odd")? {
                Axis::Odd(a) => no.push(a),
                Axis::Even(_) => return Err(key_err("N.normal_odd", format!("`{s}` is even"))),
            }
        }
        let n_sub = CoordinateSubmanifold::new(m, n, ne, no).map_err(|e| key_err("N", e))?;
        let sigma = self.sigma.as_deref().map(|s| parse("sigma", s)).transpose()?;
        let mut quad = QuadratureConfig::default();
        if let Some(k) = &self.quadrature.kind {
            quad.kind = match k.as_str() {
                "auto" => QuadratureKind::Auto,
                "gauss_hermite" => QuadratureKind::GaussHermite,
                "oscillatory" => QuadratureKind::Oscillatory,
                "adaptive_simpson" => QuadratureKind::AdaptiveSimpson,
                other => return Err(key_err("quadrature.kind", format!("unknown kind `{other}`"))),
            };
        }
        if let Some(b) = &self.quadrature.bounds {
            if b.len() != m {
                return Err(key_err("quadrature.box", format!("expected {m} intervals")));
            }
            quad.bounds = Some(b.iter().map(|[lo, hi]| (*lo, *hi)).collect());
        }
        if let Some(p) = self.quadrature.points {
            if p == 0 {
                return Err(key_err("quadrature.points", "must be positive"));
            }
            quad.points = p;
        }
        if let Some(t) = self.quadrature.tol {
            quad.tol = t;
        }
        let d = Tolerances::default();
        let tol = Tolerances {
            localization: self.tolerances.localization.unwrap_or(d.localization),
            constancy: self.tolerances.constancy.unwrap_or(d.constancy),
            identity: self.tolerances.identity.unwrap_or(d.identity),
        };
        if self.lambda_grid.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(key_err("lambda_grid", "values must be finite and non-negative"));
        }
        let scn = Scenario {
            id: self.id,
            names,
            q,
            mu,
            rotation,
            n_sub,
            sigma,
            lambdas: self.lambda_grid,
            quad,
            tol,
            cutoff: self.cutoff.map(|c| (c.inner, c.outer)),
        };
        scn.validate()?;
        Ok(scn)
    }
}

/// Parse and validate a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    ScenarioFile::from_json(text)?.into_scenario()
}
