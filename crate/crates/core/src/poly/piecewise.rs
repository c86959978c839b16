use alloc::format;
use alloc::vec::Vec;

use super::univariate::{check_interval, Polynomial};
use crate::error::{Error, Result};

/// Polynomial pieces over consecutive cutpoint intervals, zero outside
/// `[cp_0, cp_l]`.
///
/// Piece `i` covers `[cp_i, cp_{i+1}]`. At an interior cutpoint the right-hand
/// piece is used for point evaluation; integrals do not care.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    cutpoints: Vec<f64>,
    pieces: Vec<Polynomial>,
}

/// Mass and sampled minimum of a piecewise polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityCheck {
    pub mass: f64,
    pub min_value: f64,
}

/// Points per piece for the non-negativity scan.
const SCAN_POINTS: usize = 65;

impl PiecewisePolynomial {
    pub fn new(cutpoints: Vec<f64>, pieces: Vec<Polynomial>) -> Result<Self> {
        if cutpoints.len() < 2 {
            return Err(Error::Contract("need at least two cutpoints".into()));
        }
        if pieces.len() + 1 != cutpoints.len() {
            return Err(Error::Contract(format!(
                "{} cutpoints cannot carry {} pieces",
                cutpoints.len(),
                pieces.len()
            )));
        }
        if cutpoints.iter().any(|c| !c.is_finite()) {
            return Err(Error::Contract("cutpoints must be finite".into()));
        }
        if cutpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract("cutpoints must be strictly increasing".into()));
        }
        Ok(PiecewisePolynomial { cutpoints, pieces })
    }

    /// One polynomial on `[lo, hi]`.
    pub fn single(lo: f64, hi: f64, piece: Polynomial) -> Result<Self> {
        Self::new(alloc::vec![lo, hi], alloc::vec![piece])
    }

    pub fn cutpoints(&self) -> &[f64] {
        &self.cutpoints
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.cutpoints[0], self.cutpoints[self.cutpoints.len() - 1])
    }

    /// Interval `[cp_i, cp_{i+1}]` of piece `i`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.cutpoints[i], self.cutpoints[i + 1])
    }

    /// Index of the piece that owns `x`, if `x` is inside the support.
    pub fn piece_index(&self, x: f64) -> Option<usize> {
        let (lo, hi) = self.support();
        if !(lo..=hi).contains(&x) {
            return None;
        }
        let idx = self.cutpoints.partition_point(|&c| c <= x);
        Some(idx.saturating_sub(1).min(self.pieces.len() - 1))
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self.piece_index(x) {
            Some(i) => self.pieces[i].evaluate(x),
            None => 0.0,
        }
    }

    /// Integral over `[a, b]`; infinite bounds are clamped to the support.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        check_interval(a, b)?;
        let (lo, hi) = self.support();
        let a = a.max(lo);
        let b = b.min(hi);
        if a >= b {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for (i, piece) in self.pieces.iter().enumerate() {
            let (pl, ph) = self.interval(i);
            let l = pl.max(a);
            let h = ph.min(b);
            if l < h {
                total += piece.integrate(l, h)?;
            }
        }
        Ok(total)
    }

    pub fn total_mass(&self) -> f64 {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (l, h) = self.interval(i);
                p.integrate(l, h).unwrap_or(f64::NAN)
            })
            .sum()
    }

    /// Mass of piece `i` over its own interval.
    pub fn piece_mass(&self, i: usize) -> f64 {
        let (l, h) = self.interval(i);
        self.pieces[i].integrate(l, h).unwrap_or(f64::NAN)
    }

    /// Total mass and the minimum over an evenly spaced scan of every piece.
    pub fn density_check(&self) -> DensityCheck {
        let mut min_value = f64::INFINITY;
        for (i, piece) in self.pieces.iter().enumerate() {
            let (l, h) = self.interval(i);
            for s in 0..SCAN_POINTS {
                let x = l + (h - l) * s as f64 / (SCAN_POINTS - 1) as f64;
                min_value = min_value.min(piece.evaluate(x));
            }
        }
        DensityCheck {
            mass: self.total_mass(),
            min_value,
        }
    }
}

/// A piecewise polynomial known to be non-negative with unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Density(PiecewisePolynomial);

impl Density {
    /// Tolerance for mass and negativity of densities produced by fitting.
    pub const TOLERANCE: f64 = 1e-9;

    pub fn new(pp: PiecewisePolynomial) -> Result<Self> {
        Self::with_tolerance(pp, Self::TOLERANCE)
    }

    /// Accepts `pp` when its mass is within `tol` of one and no scanned value
    /// is below `-tol`.
    pub fn with_tolerance(pp: PiecewisePolynomial, tol: f64) -> Result<Self> {
        let check = pp.density_check();
        if !((check.mass - 1.0).abs() <= tol) || check.min_value < -tol {
            return Err(Error::NotADensity {
                what: "piecewise polynomial".into(),
                mass: check.mass,
                min_value: check.min_value,
            });
        }
        Ok(Density(pp))
    }

    pub fn as_piecewise(&self) -> &PiecewisePolynomial {
        &self.0
    }

    pub fn into_piecewise(self) -> PiecewisePolynomial {
        self.0
    }

    pub fn probability(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.0.integrate(a, b)?.clamp(0.0, 1.0))
    }

    /// `P(x not in [a, b]) = 1 - P(x in [a, b])`.
    pub fn complement_probability(&self, a: f64, b: f64) -> Result<f64> {
        let inside = self.0.integrate(a, b)?;
        Ok(clamp_unit(1.0 - inside))
    }
}

/// Clamp to `[0, 1]` when the excursion is rounding noise.
fn clamp_unit(p: f64) -> f64 {
    if p < 0.0 && p > -1e-12 {
        0.0
    } else if p > 1.0 && p < 1.0 + 1e-12 {
        1.0
    } else {
        p
    }
}

impl core::ops::Deref for Density {
    type Target = PiecewisePolynomial;
    fn deref(&self) -> &PiecewisePolynomial {
        &self.0
    }
}

/// `1 - P(x in [a, b])` for a piecewise polynomial that must be a density.
pub fn complement_probability(pp: &PiecewisePolynomial, a: f64, b: f64) -> Result<f64> {
    Density::new(pp.clone())?.complement_probability(a, b)
}
