//! Jet-level normal form of a Morse–Bott superfunction near a point of a
//! coordinate critical submanifold.
//!
//! All work happens modulo even degree above the jet order. Each stage is a
//! substitution expressing the old coordinates through the new ones; the
//! transformed function is recomputed exactly and then truncated.

use crate::calculus::CoordinateSubmanifold;
use crate::error::{Error, Result};
use crate::grassmann::{Const, ScalarExpr, SuperFunction};
use crate::linalg::mat_inverse;

use super::jet::{for_each_term, monomial, truncate, JetFunction};
use super::symplectic::symplectic_normalize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    ClassicalLinear,
    ClassicalCompletion,
    SymplecticLinear,
    SymplecticRefinement,
    /// Odd shift `θ → θ ± G` removing terms linear in a normal odd coordinate.
    GSubstitution,
    /// Even shift `x → x ∓ ½ x F` removing even-normal quadratic terms.
    FSubstitution,
    /// Both shifts at once, used for the higher nilpotent levels.
    Combined,
}

/// One substitution: images of the old coordinates as functions of the new.
#[derive(Clone, Debug)]
pub struct SubstitutionStep {
    pub kind: StepKind,
    /// Nilpotent level handled by the step (`1` for the base case).
    pub level: usize,
    pub even: Vec<SuperFunction>,
    pub odd: Vec<SuperFunction>,
    inverse: Option<(Vec<SuperFunction>, Vec<SuperFunction>)>,
}

impl SubstitutionStep {
    /// Exact for linear steps, first order otherwise: `new = old − δ(old)`.
    pub fn truncated_inverse(&self) -> (Vec<SuperFunction>, Vec<SuperFunction>) {
        if let Some(inv) = &self.inverse {
            return inv.clone();
        }
        let (m, n) = (self.even.len(), self.odd.len());
        let two = Const::int(2);
        let even = (0..m)
            .map(|i| SuperFunction::even_coord(m, n, i).scale(&two).sub(&self.even[i]))
            .collect();
        let odd = (0..n)
            .map(|a| SuperFunction::odd_coord(m, n, a).scale(&two).sub(&self.odd[a]))
            .collect();
        (even, odd)
    }
}

#[derive(Clone, Debug)]
pub struct CoordinateChange {
    m: usize,
    n: usize,
    order: u32,
    steps: Vec<SubstitutionStep>,
}

impl CoordinateChange {
    pub fn identity(m: usize, n: usize, order: u32) -> Self {
        CoordinateChange {
            m,
            n,
            order,
            steps: Vec::new(),
        }
    }

    pub fn steps(&self) -> &[SubstitutionStep] {
        &self.steps
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn kinds(&self) -> Vec<StepKind> {
        self.steps.iter().map(|s| s.kind).collect()
    }

    /// Pull `f` back through every step, truncating after each.
    pub fn apply(&self, f: &SuperFunction) -> Result<SuperFunction> {
        let mut cur = truncate(f, self.order);
        for s in &self.steps {
            cur = truncate(&cur.substitute(&s.even, &s.odd)?, self.order);
        }
        Ok(cur)
    }

    /// Old coordinates as functions of the final ones.
    pub fn images(&self) -> Result<(Vec<SuperFunction>, Vec<SuperFunction>)> {
        let (m, n) = (self.m, self.n);
        let mut even: Vec<_> = (0..m).map(|i| SuperFunction::even_coord(m, n, i)).collect();
        let mut odd: Vec<_> = (0..n).map(|a| SuperFunction::odd_coord(m, n, a)).collect();
        for s in &self.steps {
            for f in even.iter_mut().chain(odd.iter_mut()) {
                *f = truncate(&f.substitute(&s.even, &s.odd)?, self.order);
            }
        }
        Ok((even, odd))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MorseOptions {
    /// Even degrees above this are discarded.
    pub jet_order: u32,
    /// Normal form holds modulo `J^{2 a_max}`; `None` means all levels.
    pub a_max: Option<usize>,
}

impl Default for MorseOptions {
    fn default() -> Self {
        MorseOptions {
            jet_order: 6,
            a_max: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MorseResult {
    pub change: CoordinateChange,
    pub normal_form: JetFunction,
    pub critical_value: Const,
    /// Normal even coordinates and the signs of their squares.
    pub normal_even: Vec<usize>,
    pub signs: Vec<i8>,
    /// Normal odd coordinates paired as `θ^a θ^b`.
    pub pairs: Vec<(usize, usize)>,
}

impl MorseResult {
    /// `S(p) + Σ ±x² + Σ θ^a θ^b`.
    pub fn standard_form(&self) -> SuperFunction {
        let (m, n) = self.normal_form.function().dims();
        SuperFunction::constant(m, n, self.critical_value.clone()).add(&standard_part(
            m,
            n,
            &self.normal_even,
            &self.signs,
            &self.pairs,
        ))
    }

    /// What is left beyond the standard form (nonzero only above the
    /// requested nilpotent level).
    pub fn residual(&self) -> SuperFunction {
        truncate(&self.normal_form.function().sub(&self.standard_form()), self.normal_form.order())
    }
}

fn standard_part(m: usize, n: usize, ke: &[usize], eps: &[i8], pairs: &[(usize, usize)]) -> SuperFunction {
    let mut out = SuperFunction::zero(m, n);
    for (x, e) in ke.iter().zip(eps) {
        let sq = ScalarExpr::var(*x).pow(2).scale(&Const::int(*e as i64));
        out = out.add(&SuperFunction::scalar(m, n, sq));
    }
    for (a, b) in pairs {
        out = out.add(&SuperFunction::monomial(m, n, (1 << a) | (1 << b), ScalarExpr::one()));
    }
    out
}

struct Work {
    m: usize,
    n: usize,
    order: u32,
    ke: Vec<usize>,
    ko: Vec<usize>,
    odd_normal: u64,
    eps: Vec<i8>,
    pairs: Vec<(usize, usize)>,
    cur: SuperFunction,
    change: CoordinateChange,
}

impl Work {
    fn id_even(&self) -> Vec<SuperFunction> {
        (0..self.m).map(|i| SuperFunction::even_coord(self.m, self.n, i)).collect()
    }

    fn id_odd(&self) -> Vec<SuperFunction> {
        (0..self.n).map(|a| SuperFunction::odd_coord(self.m, self.n, a)).collect()
    }

    fn push(&mut self, step: SubstitutionStep) -> Result<()> {
        self.cur = truncate(&self.cur.substitute(&step.even, &step.odd)?, self.order);
        self.change.steps.push(step);
        Ok(())
    }

    fn residual(&self) -> SuperFunction {
        truncate(&self.cur.sub(&standard_part(self.m, self.n, &self.ke, &self.eps, &self.pairs)), self.order)
    }

    /// Normal degree of a term: ≥ 2 means the term lies in `I²`.
    fn normal_degree(&self, mask: u64, powers: &[(usize, u32)]) -> u32 {
        let xs: u32 = powers.iter().filter(|(v, _)| self.ke.contains(v)).map(|(_, p)| p).sum();
        xs + (mask & self.odd_normal).count_ones()
    }

    fn check_i2(&self, f: &SuperFunction) -> Result<()> {
        let mut bad = None;
        for_each_term(f, |mask, powers, _| {
            if bad.is_none() && self.normal_degree(mask, powers) < 2 {
                bad = Some(monomial(self.m, self.n, mask, powers, &Const::one()).to_string());
            }
        });
        match bad {
            Some(t) => Err(Error::NotCritical(format!("term {t} is not in the square of the ideal"))),
            None => Ok(()),
        }
    }

    /// Shifts `δ_β = −½ ε_β Σ_γ x^γ F_βγ` for terms of normal even degree ≥ 2.
    fn f_shift(&self, part: &SuperFunction) -> Result<Vec<SuperFunction>> {
        let (m, n) = (self.m, self.n);
        let k = self.ke.len();
        let mut fm = vec![vec![SuperFunction::zero(m, n); k]; k];
        let mut err = None;
        for_each_term(part, |mask, powers, c| {
            let mut rest: Vec<(usize, u32)> = powers.to_vec();
            let mut picked = Vec::new();
            for _ in 0..2 {
                if let Some(slot) = rest.iter_mut().find(|(v, p)| *p > 0 && self.ke.contains(v)) {
                    slot.1 -= 1;
                    picked.push(self.ke.iter().position(|v| *v == slot.0).unwrap());
                }
            }
            if picked.len() < 2 {
                err.get_or_insert_with(|| monomial(m, n, mask, powers, c).to_string());
                return;
            }
            rest.retain(|(_, p)| *p > 0);
            let (b, g) = (picked[0], picked[1]);
            if b == g {
                fm[b][b] = fm[b][b].add(&monomial(m, n, mask, &rest, c));
            } else {
                let half = monomial(m, n, mask, &rest, &c.mul(&Const::ratio(1, 2)));
                fm[b][g] = fm[b][g].add(&half);
                fm[g][b] = fm[g][b].add(&half);
            }
        });
        if let Some(t) = err {
            return Err(Error::NotCritical(format!("term {t} cannot be absorbed by an even shift")));
        }
        Ok((0..k)
            .map(|b| {
                let mut acc = SuperFunction::zero(m, n);
                for (g, f) in fm[b].iter().enumerate() {
                    acc = acc.add(&SuperFunction::even_coord(m, n, self.ke[g]).mul(f));
                }
                acc.scale(&Const::ratio(-(self.eps[b] as i64), 2))
            })
            .collect())
    }

    /// Splits `part` into `Σ G_i θ^i` (terms with a normal odd factor) and the rest.
    fn g_split(&self, part: &SuperFunction) -> (Vec<SuperFunction>, SuperFunction) {
        let (m, n) = (self.m, self.n);
        let mut g = vec![SuperFunction::zero(m, n); n];
        let mut rest = SuperFunction::zero(m, n);
        for_each_term(part, |mask, powers, c| {
            let hit = mask & self.odd_normal;
            if hit == 0 {
                rest = rest.add(&monomial(m, n, mask, powers, c));
                return;
            }
            let i = hit.trailing_zeros() as usize;
            let after = (mask >> (i + 1)).count_ones();
            let c = if after % 2 == 1 { c.neg() } else { c.clone() };
            g[i] = g[i].add(&monomial(m, n, mask & !(1 << i), powers, &c));
        });
        (g, rest)
    }

    /// `θ^a ← θ^a − G_b`, `θ^b ← θ^b + G_a` for every standard pair.
    fn g_images(&self, g: &[SuperFunction]) -> Vec<SuperFunction> {
        let mut odd = self.id_odd();
        for &(a, b) in &self.pairs {
            odd[a] = odd[a].sub(&g[b]);
            odd[b] = odd[b].add(&g[a]);
        }
        odd
    }

    fn f_images(&self, delta: &[SuperFunction]) -> Vec<SuperFunction> {
        let mut even = self.id_even();
        for (b, d) in delta.iter().enumerate() {
            even[self.ke[b]] = even[self.ke[b]].add(d);
        }
        even
    }

    fn step(&self, kind: StepKind, level: usize, even: Vec<SuperFunction>, odd: Vec<SuperFunction>) -> SubstitutionStep {
        SubstitutionStep {
            kind,
            level,
            even,
            odd,
            inverse: None,
        }
    }

    fn cap(&self) -> usize {
        self.order as usize + 4
    }

    fn classical(&mut self) -> Result<()> {
        let (m, n) = (self.m, self.n);
        let k = self.ke.len();
        let body = self.cur.body();
        let mut q = vec![vec![Const::zero(); k]; k];
        for (t, c) in body.terms() {
            if t.degree() != 2 {
                continue;
            }
            let vars: Vec<usize> = t
                .powers()
                .iter()
                .flat_map(|(v, p)| std::iter::repeat_n(*v, *p as usize))
                .collect();
            let (Some(i), Some(j)) = (
                self.ke.iter().position(|v| *v == vars[0]),
                self.ke.iter().position(|v| *v == vars[1]),
            ) else {
                continue;
            };
            if i == j {
                q[i][i] = q[i][i].add(c);
            } else {
                let h = c.mul(&Const::ratio(1, 2));
                q[i][j] = q[i][j].add(&h);
                q[j][i] = q[j][i].add(&h);
            }
        }
        let (mm, eps) = diagonalize(q)?;
        self.eps = eps;
        let is_identity = (0..k).all(|i| (0..k).all(|j| mm[i][j] == if i == j { Const::one() } else { Const::zero() }));
        if !is_identity {
            let (even, inv) = (linear_images(m, n, &self.ke, &mm, true), inverse_const(&mm)?);
            let step = SubstitutionStep {
                kind: StepKind::ClassicalLinear,
                level: 1,
                even,
                odd: self.id_odd(),
                inverse: Some((linear_images(m, n, &self.ke, &inv, true), self.id_odd())),
            };
            self.push(step)?;
        }
        for it in 0.. {
            let r = SuperFunction::scalar(m, n, self.residual().body());
            if r.is_zero() {
                break;
            }
            if it == self.cap() {
                return Err(Error::Invariant("even completion did not converge".into()));
            }
            let delta = self.f_shift(&r)?;
            let st = self.step(StepKind::ClassicalCompletion, 1, self.f_images(&delta), self.id_odd());
            self.push(st)?;
        }
        Ok(())
    }

    /// Matrix `S_ij` of the normal odd quadratic part: `Σ S_ij θ^i θ^j`.
    fn odd_block(&self) -> Vec<Vec<ScalarExpr>> {
        let l2 = self.ko.len();
        let part = self.cur.graded_part(2);
        let mut s = vec![vec![ScalarExpr::zero(); l2]; l2];
        for i in 0..l2 {
            for j in i + 1..l2 {
                let c = part.coeff((1 << self.ko[i]) | (1 << self.ko[j])).scale(&Const::ratio(1, 2));
                s[j][i] = c.neg();
                s[i][j] = c;
            }
        }
        s
    }

    fn symplectic(&mut self) -> Result<()> {
        let (m, n) = (self.m, self.n);
        let l2 = self.ko.len();
        if l2 == 0 {
            return Ok(());
        }
        let s0: Vec<Vec<Const>> = self
            .odd_block()
            .iter()
            .map(|r| r.iter().map(|e| e.constant_term().neg()).collect())
            .collect();
        let t = symplectic_normalize(&s0)?;
        let is_identity = (0..l2).all(|i| (0..l2).all(|j| t[i][j] == if i == j { Const::one() } else { Const::zero() }));
        if !is_identity {
            let inv = inverse_const(&t)?;
            let step = SubstitutionStep {
                kind: StepKind::SymplecticLinear,
                level: 1,
                even: self.id_even(),
                odd: linear_images(m, n, &self.ko, &t, false),
                inverse: Some((self.id_even(), linear_images(m, n, &self.ko, &inv, false))),
            };
            self.push(step)?;
        }
        // Std = ½ blockdiag((0 1; −1 0)), Std⁻¹ = 2 blockdiag((0 −1; 1 0))
        let std_inv = |i: usize, j: usize| -> i64 {
            if i / 2 != j / 2 || i == j {
                0
            } else if i % 2 == 0 {
                -2
            } else {
                2
            }
        };
        for it in 0.. {
            let mut delta = self.odd_block();
            let half = Const::ratio(1, 2);
            for p in (0..l2).step_by(2) {
                delta[p][p + 1] = delta[p][p + 1].sub(&ScalarExpr::constant(half.clone()));
                delta[p + 1][p] = delta[p + 1][p].add(&ScalarExpr::constant(half.clone()));
            }
            let delta: Vec<Vec<ScalarExpr>> = delta
                .iter()
                .map(|r| r.iter().map(|e| truncate(&SuperFunction::scalar(m, n, e.clone()), self.order).body()).collect())
                .collect();
            if delta.iter().flatten().all(|e| e.is_zero()) {
                break;
            }
            if it == self.cap() {
                return Err(Error::Invariant("symplectic refinement did not converge".into()));
            }
            let mut odd = self.id_odd();
            for i in 0..l2 {
                for j in 0..l2 {
                    let mut e = ScalarExpr::zero();
                    for (kk, row) in delta.iter().enumerate() {
                        let si = std_inv(i, kk);
                        if si != 0 {
                            e = e.add(&row[j].scale(&Const::ratio(-si, 2)));
                        }
                    }
                    if !e.is_zero() {
                        odd[self.ko[i]] = odd[self.ko[i]].add(&SuperFunction::monomial(m, n, 1 << self.ko[j], e));
                    }
                }
            }
            let st = self.step(StepKind::SymplecticRefinement, 1, self.id_even(), odd);
            self.push(st)?;
        }
        Ok(())
    }

    /// Clears the `J²` level: G-shifts for terms with a normal odd factor,
    /// then F-shifts for the rest.
    fn base_level(&mut self) -> Result<()> {
        for it in 0.. {
            let part = self.residual().graded_part(2);
            if part.is_zero() {
                return Ok(());
            }
            if it == self.cap() {
                return Err(Error::Invariant("base level did not converge".into()));
            }
            self.check_i2(&part)?;
            let (g, rest) = self.g_split(&part);
            let st = if g.iter().any(|f| !f.is_zero()) {
                self.step(StepKind::GSubstitution, 1, self.id_even(), self.g_images(&g))
            } else {
                let delta = self.f_shift(&rest)?;
                self.step(StepKind::FSubstitution, 1, self.f_images(&delta), self.id_odd())
            };
            self.push(st)?;
        }
        unreachable!()
    }

    /// Clears the `J^{2a}` level with simultaneous shifts.
    fn level(&mut self, a: usize) -> Result<()> {
        for it in 0.. {
            let part = self.residual().graded_part(2 * a);
            if part.is_zero() {
                return Ok(());
            }
            if it == self.cap() {
                return Err(Error::Invariant(format!("level {a} did not converge")));
            }
            self.check_i2(&part)?;
            let (g, rest) = self.g_split(&part);
            let delta = self.f_shift(&rest)?;
            let st = self.step(StepKind::Combined, a, self.f_images(&delta), self.g_images(&g));
            self.push(st)?;
        }
        unreachable!()
    }
}

/// `Mᵗ q M = diag(±1)` by symmetric elimination. Square roots of non-square
/// pivots make the result approximate.
fn diagonalize(mut q: Vec<Vec<Const>>) -> Result<(Vec<Vec<Const>>, Vec<i8>)> {
    let k = q.len();
    let mut mm: Vec<Vec<Const>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { Const::one() } else { Const::zero() }).collect())
        .collect();
    // column ops on M mirror congruence on q
    fn col_axpy(q: &mut [Vec<Const>], mm: &mut [Vec<Const>], dst: usize, src: usize, c: &Const) {
        let k = q.len();
        for r in 0..k {
            let v = q[r][src].mul(c);
            q[r][dst] = q[r][dst].add(&v);
            let v = mm[r][src].mul(c);
            mm[r][dst] = mm[r][dst].add(&v);
        }
        for col in 0..k {
            let v = q[src][col].mul(c);
            q[dst][col] = q[dst][col].add(&v);
        }
    }
    for i in 0..k {
        if q[i][i].is_zero() {
            if let Some(j) = (i + 1..k).find(|&j| !q[j][j].is_zero()) {
                col_axpy(&mut q, &mut mm, i, j, &Const::one());
            } else if let Some(j) = (i + 1..k).find(|&j| !q[i][j].is_zero()) {
                col_axpy(&mut q, &mut mm, i, j, &Const::one());
            } else {
                return Err(Error::Degenerate("even normal Hessian is singular".into()));
            }
        }
        let piv_inv = q[i][i].inv().ok_or_else(|| Error::Degenerate("even normal Hessian is singular".into()))?;
        for j in i + 1..k {
            if !q[i][j].is_zero() {
                let c = q[i][j].mul(&piv_inv).neg();
                col_axpy(&mut q, &mut mm, j, i, &c);
            }
        }
    }
    let mut eps = Vec::with_capacity(k);
    for i in 0..k {
        let s = q[i][i]
            .real_sign()
            .ok_or_else(|| Error::Degenerate("even normal Hessian has a non-real pivot".into()))?;
        let mag = if s > 0 { q[i][i].clone() } else { q[i][i].neg() };
        let scale = mag.sqrt_positive().and_then(|r| r.inv()).expect("positive pivot");
        for row in mm.iter_mut() {
            row[i] = row[i].mul(&scale);
        }
        eps.push(s as i8);
    }
    Ok((mm, eps))
}

fn inverse_const(a: &[Vec<Const>]) -> Result<Vec<Vec<Const>>> {
    let wrapped: Vec<Vec<SuperFunction>> = a
        .iter()
        .map(|r| r.iter().map(|c| SuperFunction::constant(0, 0, c.clone())).collect())
        .collect();
    let inv = mat_inverse(&wrapped, 0, 0)?;
    Ok(inv.iter().map(|r| r.iter().map(|f| f.body().constant_term()).collect()).collect())
}

/// `old^{axes[i]} = Σ_j M_ij new^{axes[j]}`.
fn linear_images(m: usize, n: usize, axes: &[usize], mm: &[Vec<Const>], even: bool) -> Vec<SuperFunction> {
    let coord = |i: usize| {
        if even {
            SuperFunction::even_coord(m, n, i)
        } else {
            SuperFunction::odd_coord(m, n, i)
        }
    };
    let mut out: Vec<SuperFunction> = (0..if even { m } else { n }).map(coord).collect();
    for (i, &ai) in axes.iter().enumerate() {
        let mut acc = SuperFunction::zero(m, n);
        for (j, &aj) in axes.iter().enumerate() {
            if !mm[i][j].is_zero() {
                acc = acc.add(&coord(aj).scale(&mm[i][j]));
            }
        }
        out[ai] = acc;
    }
    out
}

/// Normal form of `s` near the origin of the critical submanifold `nsub`.
pub fn normalize_jet(s: &SuperFunction, nsub: &CoordinateSubmanifold, opts: MorseOptions) -> Result<MorseResult> {
    let (m, n) = s.dims();
    if nsub.ambient() != (m, n) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}|{}", m, n),
            found: format!("{:?}", nsub.ambient()),
        });
    }
    if !s.is_polynomial() {
        return Err(Error::NonPolynomial(s.to_string()));
    }
    if !s.is_zero() && !s.is_even() {
        return Err(Error::NotEven);
    }
    let ko = nsub.normal_odd().to_vec();
    if ko.len() % 2 == 1 {
        return Err(Error::OddDimension(ko.len()));
    }
    let order = opts.jet_order.max(2);
    let s = truncate(s, order);
    let on_n = nsub.restrict(&s);
    let c0 = if on_n.is_zero() {
        Const::zero()
    } else {
        match (on_n.coeffs().count(), on_n.body().as_constant()) {
            (1, Some(c)) => c,
            _ => return Err(Error::NotCritical(format!("not constant along the submanifold: {on_n}"))),
        }
    };
    let mut w = Work {
        m,
        n,
        order,
        ke: nsub.normal_even().to_vec(),
        odd_normal: ko.iter().fold(0u64, |acc, a| acc | (1 << a)),
        pairs: ko.chunks(2).map(|p| (p[0], p[1])).collect(),
        ko,
        eps: Vec::new(),
        cur: s.sub(&SuperFunction::constant(m, n, c0.clone())),
        change: CoordinateChange::identity(m, n, order),
    };
    w.check_i2(&w.cur)?;
    w.classical()?;
    w.symplectic()?;
    w.base_level()?;
    let top = opts.a_max.unwrap_or(n / 2 + 1);
    for a in 2..top {
        if 2 * a > n {
            break;
        }
        w.level(a)?;
    }
    let res = w.residual();
    if let Some(j) = res.j_degree() {
        if j < 2 * top.max(2) {
            return Err(Error::Invariant(format!("residual {res} below the requested level")));
        }
    }
    let normal_form = JetFunction::new(w.cur.add(&SuperFunction::constant(m, n, c0.clone())), order)?;
    Ok(MorseResult {
        change: w.change,
        normal_form,
        critical_value: c0,
        normal_even: w.ke,
        signs: w.eps,
        pairs: w.pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{parse_superfunction, CoordNames};

    fn sf(src: &str, m: usize, n: usize) -> SuperFunction {
        parse_superfunction(src, &CoordNames::standard(m, n)).unwrap()
    }

    fn run(src: &str, m: usize, n: usize, nsub: &CoordinateSubmanifold) -> (SuperFunction, MorseResult) {
        let s = sf(src, m, n);
        let r = normalize_jet(&s, nsub, MorseOptions::default()).unwrap();
        // the recorded change reproduces the normal form
        assert_eq!(&r.change.apply(&s).unwrap(), r.normal_form.function());
        (s, r)
    }

    #[test]
    fn standard_input_is_untouched() {
        let o = CoordinateSubmanifold::origin(2, 2);
        let (_, r) = run("3 + x1^2 - x2^2 + th1*th2", 2, 2, &o);
        assert!(r.change.is_identity());
        assert_eq!(r.signs, vec![1, -1]);
        assert_eq!(r.critical_value, Const::int(3));
        assert!(r.residual().is_zero());
    }

    #[test]
    fn odd_scaling() {
        let (_, r) = run("x1^2 + 2*th1*th2", 1, 2, &CoordinateSubmanifold::origin(1, 2));
        assert_eq!(r.normal_form.function(), &sf("x1^2 + th1*th2", 1, 2));
        assert_eq!(r.change.kinds(), vec![StepKind::SymplecticLinear]);
    }

    #[test]
    fn mixed_term_removed() {
        let s_src = "x1^2 + th1*th2 + x1^2*th1*th2";
        let (s, r) = run(s_src, 1, 2, &CoordinateSubmanifold::origin(1, 2));
        assert!(r.residual().is_zero());
        assert!(r.normal_form.function().is_exact());
        // independent change: x_old = x − ½ x θ¹θ²
        let x_old = sf("x1 - 1/2*x1*th1*th2", 1, 2);
        let odd = vec![sf("th1", 1, 2), sf("th2", 1, 2)];
        assert_eq!(s.substitute(&[x_old], &odd).unwrap(), sf("x1^2 + th1*th2", 1, 2));
    }

    #[test]
    fn golden_action() {
        let (_, r) = run("x1^2 + x2^2 + 2*th1*th2", 2, 2, &CoordinateSubmanifold::origin(2, 2));
        assert_eq!(r.signs, vec![1, 1]);
        assert_eq!(r.pairs, vec![(0, 1)]);
        assert!(r.residual().is_zero());
    }

    #[test]
    fn indefinite_and_irrational() {
        let (_, r) = run("2*x1*x2 + 3*th1*th2 + x1^3", 2, 2, &CoordinateSubmanifold::origin(2, 2));
        let mut signs = r.signs.clone();
        signs.sort();
        assert_eq!(signs, vec![-1, 1]);
        assert!(r.residual().is_zero());
    }

    #[test]
    fn along_a_submanifold() {
        // N = {x1 = 0, θ1 = θ2 = 0} in R^{2|4}
        let nsub = CoordinateSubmanifold::new(2, 4, vec![0], vec![0, 1]).unwrap();
        let src = "x1^2*(1 + x2) + th1*th2*(1 + x2) + x1*th1*th3 + x1^2*th3*th4 + x1*th2*th3*th4*th1";
        let (_, r) = run(src, 2, 4, &nsub);
        assert!(r.residual().is_zero(), "{}", r.residual());
        assert!(r.change.kinds().contains(&StepKind::GSubstitution));
    }

    #[test]
    fn higher_level() {
        let o = CoordinateSubmanifold::origin(1, 4);
        let src = "x1^2 + th1*th2 + th3*th4 + x1^2*th1*th2*th3*th4 + th1*th2*th3*th4";
        let (_, r) = run(src, 1, 4, &o);
        assert!(r.residual().is_zero());
        let s = sf(src, 1, 4);
        let partial = normalize_jet(&s, &o, MorseOptions { jet_order: 6, a_max: Some(2) }).unwrap();
        assert!(partial.residual().j_degree().unwrap_or(usize::MAX) >= 4);
    }

    #[test]
    fn failures() {
        let o = CoordinateSubmanifold::origin(1, 2);
        let opts = MorseOptions::default();
        assert!(matches!(normalize_jet(&sf("x1 + x1^2 + th1*th2", 1, 2), &o, opts), Err(Error::NotCritical(_))));
        assert!(matches!(normalize_jet(&sf("x1^3 + th1*th2", 1, 2), &o, opts), Err(Error::Degenerate(_))));
        assert!(matches!(normalize_jet(&sf("x1^2 + x1*th1*th2", 1, 2), &o, opts), Err(Error::Degenerate(_))));
        assert!(matches!(normalize_jet(&sf("exp(x1)", 1, 2), &o, opts), Err(Error::NonPolynomial(_))));
        assert!(normalize_jet(&sf("th1", 1, 2), &o, opts).is_err());
    }

    #[test]
    fn steps_invert_to_next_order() {
        let nsub = CoordinateSubmanifold::new(2, 4, vec![0], vec![0, 1]).unwrap();
        let src = "x1^2*(1 + x2) + 2*th1*th2*(1 + x2) + x1*th1*th3 + x1^2*th3*th4";
        let (_, r) = run(src, 2, 4, &nsub);
        for st in r.change.steps() {
            let (ie, io) = st.truncated_inverse();
            let (m, n) = (2, 4);
            for (axis, img) in st.even.iter().zip(0..m).map(|(f, i)| (SuperFunction::even_coord(m, n, i), f)) {
                let back = truncate(&img.substitute(&ie, &io).unwrap(), 6);
                let delta = img.sub(&axis);
                let err = back.sub(&axis);
                check_smaller(&err, &delta, st.kind);
            }
            for (a, img) in st.odd.iter().enumerate() {
                let axis = SuperFunction::odd_coord(m, n, a);
                let back = truncate(&img.substitute(&ie, &io).unwrap(), 6);
                check_smaller(&back.sub(&axis), &img.sub(&axis), st.kind);
            }
        }
    }

    fn min_weight(f: &SuperFunction) -> Option<u32> {
        let mut w = None;
        for_each_term(f, |mask, powers, _| {
            let d = mask.count_ones() + powers.iter().map(|(_, p)| p).sum::<u32>();
            w = Some(w.map_or(d, |x: u32| x.min(d)));
        });
        w
    }

    fn check_smaller(err: &SuperFunction, delta: &SuperFunction, kind: StepKind) {
        if matches!(kind, StepKind::ClassicalLinear | StepKind::SymplecticLinear) {
            assert!(err.is_zero(), "linear steps invert exactly");
            return;
        }
        if let (Some(e), Some(d)) = (min_weight(err), min_weight(delta)) {
            assert!(e > d, "{kind:?}: error {err} not smaller than shift {delta}");
        }
    }
}
