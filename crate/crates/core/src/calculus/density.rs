//! Chart densities `[dx¹…dx^m dθ¹…dθⁿ]·f` and Berezin integration.

use num_complex::Complex64;

use super::vector_field::SuperVectorField;
use crate::error::{Error, Result};
use crate::grassmann::{integrate_even, Parity, QuadratureConfig, SuperFunction};
use crate::linalg::{berezinian_even, SuperMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Density {
    pub coefficient: SuperFunction,
    /// Sign relative to the chart's standard orientation.
    pub orientation: i8,
}

impl Density {
    pub fn new(coefficient: SuperFunction) -> Self {
        Density {
            coefficient,
            orientation: 1,
        }
    }

    pub fn with_orientation(coefficient: SuperFunction, orientation: i8) -> Self {
        Density {
            coefficient,
            orientation: if orientation < 0 { -1 } else { 1 },
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.coefficient.dims()
    }

    /// `g·μ`, multiplying the coefficient on the left.
    pub fn times(&self, g: &SuperFunction) -> Density {
        Density {
            coefficient: g.mul(&self.coefficient),
            orientation: self.orientation,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.is_zero()
    }

    /// Pull back along the linear change `(x, θ) = G (y, η)`; `G` is an even
    /// matrix of constants. The result is a density in `(y, η)` with the
    /// same integral.
    pub fn pull_back_linear(&self, g: &SuperMatrix) -> Result<Density> {
        let (m, n) = self.dims();
        if g.rows() != (m, n) || !g.is_square() || g.parity() != Parity::Even {
            return Err(Error::DimensionMismatch {
                expected: format!("even {m}|{n} square matrix"),
                found: format!("{:?} -> {:?}", g.cols(), g.rows()),
            });
        }
        let coord = |k: usize| {
            if k < m {
                SuperFunction::even_coord(m, n, k)
            } else {
                SuperFunction::odd_coord(m, n, k - m)
            }
        };
        let image = |r: usize| {
            (0..m + n).fold(SuperFunction::zero(m, n), |acc, c| acc.add(&g.get(r, c).mul(&coord(c))))
        };
        let even: Vec<SuperFunction> = (0..m).map(image).collect();
        let odd: Vec<SuperFunction> = (m..m + n).map(image).collect();
        let f = self.coefficient.substitute(&even, &odd)?;
        let ber = berezinian_even(g)?;
        Ok(Density {
            coefficient: f.mul(&ber),
            orientation: self.orientation,
        })
    }
}

/// Lie derivative of a density: the superdivergence
/// `Σ_i ∂_{x^i}(a^i f) + ε Σ_α ∂_{θ^α}(b^α f)` with `ε = -1` for even `V`
/// and `ε = +1` for odd `V`.
pub fn lie_derivative_density(v: &SuperVectorField, mu: &Density) -> Result<Density> {
    if v.dims() != mu.dims() {
        return Err(Error::DimensionMismatch {
            expected: format!("{:?}", v.dims()),
            found: format!("{:?}", mu.dims()),
        });
    }
    let (m, n) = v.dims();
    let f = &mu.coefficient;
    let mut acc = SuperFunction::zero(m, n);
    for (i, a) in v.even_coeffs().iter().enumerate() {
        if !a.is_zero() {
            acc = acc.add(&a.mul(f).partial_even(i)?);
        }
    }
    let mut odd = SuperFunction::zero(m, n);
    for (k, b) in v.odd_coeffs().iter().enumerate() {
        if !b.is_zero() {
            odd = odd.add(&b.mul(f).partial_odd(k)?);
        }
    }
    let acc = match v.parity() {
        Parity::Even => acc.sub(&odd),
        Parity::Odd => acc.add(&odd),
    };
    Ok(Density {
        coefficient: acc,
        orientation: mu.orientation,
    })
}

/// `∫ μ = ± ∫_{R^m} f_{1…n}`.
pub fn berezin_integrate(mu: &Density, quad: &QuadratureConfig) -> Result<Complex64> {
    let top = mu.coefficient.top_coefficient();
    let v = integrate_even(&top, mu.coefficient.m(), quad)?;
    Ok(v * mu.orientation as f64)
}
