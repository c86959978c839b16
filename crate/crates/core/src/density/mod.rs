//! Piecewise-polynomial densities learned from a univariate sample.
//!
//! A density is a convex mixture of normalized B-splines over a
//! discretization of the data range, so it is non-negative and integrates to
//! one by construction. [`build_pp_structure`] searches bin counts,
//! discretization methods and degrees for the best BIC.

mod fit;
mod search;
mod spline;

pub use fit::{bic_score, fit_coefficients, fit_model, DensityModel, EmOptions, MixtureFit};
pub use search::{
    build_pp_structure, fit_supervised, grid, prepare_sample, search_row, select_best, Candidate, Configuration,
    SearchOptions, SearchOutcome,
};
pub use spline::{build_basis, SplineBasis};

/// Highest polynomial degree accepted for the pieces.
pub const MAX_DEGREE: usize = 10;
