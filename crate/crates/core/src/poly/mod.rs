//! Univariate, piecewise and multivariate polynomials with exact definite
//! integration.
//!
//! Everything here is immutable after construction. Integrals are computed
//! from antiderivatives (one dimension) or monomial by monomial (boxes), so
//! results are exact up to floating-point rounding.

mod multivariate;
mod piecewise;
mod univariate;

pub use multivariate::{HyperCube, MultiPolynomial, MultivariatePP};
pub use piecewise::{complement_probability, Density, DensityCheck, PiecewisePolynomial};
pub use univariate::Polynomial;

use crate::error::Result;

/// Definite integral of `p` over `[a, b]`.
pub fn integrate_poly(p: &Polynomial, a: f64, b: f64) -> Result<f64> {
    p.integrate(a, b)
}

/// Integral of a piecewise polynomial over `[a, b]`, which may be unbounded.
pub fn integrate_piecewise(pp: &PiecewisePolynomial, a: f64, b: f64) -> Result<f64> {
    pp.integrate(a, b)
}

/// Integral of a multivariate piecewise polynomial over a box.
pub fn integrate_box(f: &MultivariatePP, cube: &HyperCube) -> Result<f64> {
    f.integrate_box(cube)
}
