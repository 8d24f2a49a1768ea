//! Coordinate subsupermanifolds `N = {x^i = 0, θ^α = 0 : i ∈ K, α ∈ L}`
//! through the origin, and the vanishing locus of an odd vector field.

use nalgebra::DMatrix;

use super::hessian::linearize_at;
use super::vector_field::SuperVectorField;
use crate::error::{Error, Result};
use crate::grassmann::{Axis, Parity, ScalarExpr, SuperFunction};
use crate::linalg::{berezinian_even, SuperMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateSubmanifold {
    m: usize,
    n: usize,
    normal_even: Vec<usize>,
    normal_odd: Vec<usize>,
}

impl CoordinateSubmanifold {
    pub fn new(m: usize, n: usize, mut normal_even: Vec<usize>, mut normal_odd: Vec<usize>) -> Result<Self> {
        normal_even.sort_unstable();
        normal_odd.sort_unstable();
        let dup = |v: &[usize]| v.windows(2).any(|w| w[0] == w[1]);
        if dup(&normal_even) || dup(&normal_odd) {
            return Err(Error::Submanifold("repeated normal coordinate".into()));
        }
        if normal_even.iter().any(|&i| i >= m) || normal_odd.iter().any(|&a| a >= n) {
            return Err(Error::Submanifold("normal coordinate out of range".into()));
        }
        Ok(CoordinateSubmanifold {
            m,
            n,
            normal_even,
            normal_odd,
        })
    }

    /// The origin of R^{m|n}.
    pub fn origin(m: usize, n: usize) -> Self {
        CoordinateSubmanifold::new(m, n, (0..m).collect(), (0..n).collect()).unwrap()
    }

    pub fn ambient(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn normal_even(&self) -> &[usize] {
        &self.normal_even
    }

    pub fn normal_odd(&self) -> &[usize] {
        &self.normal_odd
    }

    /// Codimension `k|l'`.
    pub fn codim(&self) -> (usize, usize) {
        (self.normal_even.len(), self.normal_odd.len())
    }

    pub fn tangent_even(&self) -> Vec<usize> {
        (0..self.m).filter(|i| !self.normal_even.contains(i)).collect()
    }

    pub fn tangent_odd(&self) -> Vec<usize> {
        (0..self.n).filter(|a| !self.normal_odd.contains(a)).collect()
    }

    /// Normal directions, even ones first.
    pub fn normal_axes(&self) -> Vec<Axis> {
        self.normal_even
            .iter()
            .map(|&i| Axis::Even(i))
            .chain(self.normal_odd.iter().map(|&a| Axis::Odd(a)))
            .collect()
    }

    pub fn normal_mask(&self) -> u64 {
        self.normal_odd.iter().fold(0, |acc, a| acc | (1 << a))
    }

    /// `f|_N`: normal coordinates set to zero, still written on R^{m|n}.
    pub fn restrict(&self, f: &SuperFunction) -> SuperFunction {
        let mask = self.normal_mask();
        let zero: Vec<bool> = (0..self.m).map(|i| self.normal_even.contains(&i)).collect();
        f.filter_masks(|k| k & mask == 0).map_coeffs(|_, c| {
            c.substitute(&|i| if zero[i] { ScalarExpr::zero() } else { ScalarExpr::var(i) })
        })
    }

    /// Membership in the ideal `⟨normal coordinates⟩`, i.e. `f|_N = 0`.
    pub fn in_ideal(&self, f: &SuperFunction) -> bool {
        self.restrict(f).is_zero()
    }

    /// Is every coefficient of `v` in the ideal of `N`?
    pub fn field_vanishes(&self, v: &SuperVectorField) -> bool {
        v.even_coeffs().iter().chain(v.odd_coeffs()).all(|f| self.in_ideal(f))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocusReport {
    pub codim: (usize, usize),
    /// Every generator `Q(x^i)`, `Q(θ^α)` vanishes on `N`.
    pub generators_vanish: bool,
    /// The generators reach every normal coordinate to first order.
    pub spans_normal: bool,
    /// `L` is an automorphism of the normal bundle.
    pub nondegenerate: bool,
    /// `l` with `codim = 2l|2l` when nondegenerate.
    pub l: Option<usize>,
}

fn first_order_rank(q: &SuperVectorField, n_sub: &CoordinateSubmanifold) -> Result<(usize, usize)> {
    let origin = vec![0.0; q.dims().0];
    let gens: Vec<&SuperFunction> = q.even_coeffs().iter().chain(q.odd_coeffs()).collect();
    // linear coefficient of each generator in each normal coordinate, at the origin
    let rank_for = |axes: &[Axis]| -> Result<usize> {
        if axes.is_empty() {
            return Ok(0);
        }
        let mut mat = DMatrix::<f64>::zeros(gens.len(), axes.len());
        for (r, g) in gens.iter().enumerate() {
            for (c, ax) in axes.iter().enumerate() {
                let d = g.partial(*ax)?;
                mat[(r, c)] = d.body().eval(&origin)?.re;
            }
        }
        Ok(mat.rank(1e-10))
    };
    let even: Vec<Axis> = n_sub.normal_even().iter().map(|&i| Axis::Even(i)).collect();
    let odd: Vec<Axis> = n_sub.normal_odd().iter().map(|&a| Axis::Odd(a)).collect();
    Ok((rank_for(&even)?, rank_for(&odd)?))
}

/// Check that `N` is the vanishing locus of `Q` and that `Q` is nondegenerate there.
pub fn vanishing_locus(q: &SuperVectorField, n_sub: &CoordinateSubmanifold) -> Result<LocusReport> {
    if q.dims() != n_sub.ambient() {
        return Err(Error::DimensionMismatch {
            expected: format!("{:?}", n_sub.ambient()),
            found: format!("{:?}", q.dims()),
        });
    }
    let generators_vanish = n_sub.field_vanishes(q);
    if !generators_vanish {
        return Err(Error::Submanifold(
            "the vector field does not vanish on the declared submanifold".into(),
        ));
    }
    let (k, l1) = n_sub.codim();
    let (re, ro) = first_order_rank(q, n_sub)?;
    let spans_normal = re == k && ro == l1;
    let mut nondegenerate = false;
    if k == l1 && q.parity() == Parity::Odd {
        let lin = linearize_at(q, n_sub)?;
        let (m, n) = q.dims();
        let li = lin.mul(&SuperMatrix::odd_identity(m, n, k))?;
        nondegenerate = match berezinian_even(&li) {
            Ok(b) => !n_sub.restrict(&b).body().is_zero(),
            Err(_) => false,
        };
    }
    let l = (nondegenerate && k % 2 == 0).then_some(k / 2);
    Ok(LocusReport {
        codim: (k, l1),
        generators_vanish,
        spans_normal,
        nondegenerate: nondegenerate && k % 2 == 0,
        l,
    })
}

/// Coordinate submanifold cut out by the first-order parts of `Q(x^i)`, `Q(θ^α)`
/// at the origin: a coordinate is normal when some generator is linear in it.
pub fn infer_coordinate_locus(q: &SuperVectorField) -> Result<CoordinateSubmanifold> {
    let (m, n) = q.dims();
    let origin = vec![0.0; m];
    let gens: Vec<&SuperFunction> = q.even_coeffs().iter().chain(q.odd_coeffs()).collect();
    let mut ne = Vec::new();
    let mut no = Vec::new();
    for i in 0..m {
        for g in &gens {
            if g.partial_even(i)?.body().eval(&origin)?.norm() > 0.0 {
                ne.push(i);
                break;
            }
        }
    }
    for a in 0..n {
        for g in &gens {
            let d = g.partial_odd(a)?;
            if d.body().eval(&origin)?.norm() > 0.0 {
                no.push(a);
                break;
            }
        }
    }
    let sub = CoordinateSubmanifold::new(m, n, ne, no)?;
    if !sub.field_vanishes(q) {
        return Err(Error::Submanifold(
            "vanishing locus is not a coordinate submanifold in this chart".into(),
        ));
    }
    Ok(sub)
}
