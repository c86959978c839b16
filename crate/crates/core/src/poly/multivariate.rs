use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use super::univariate::{check_interval, Polynomial};
use crate::error::{Error, Result};
use crate::math;

/// Axis-aligned box `a_j <= x_j <= b_j`. Bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube {
    bounds: Vec<(f64, f64)>,
}

impl HyperCube {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &bounds {
            check_interval(lo, hi)?;
        }
        Ok(HyperCube { bounds })
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        self.bounds.iter().zip(point).all(|(&(lo, hi), &x)| lo <= x && x <= hi)
    }

    /// Intersection, or `None` when it has no interior.
    pub fn intersect(&self, other: &HyperCube) -> Option<HyperCube> {
        let bounds: Vec<(f64, f64)> = self
            .bounds
            .iter()
            .zip(&other.bounds)
            .map(|(&(a, b), &(c, d))| (a.max(c), b.min(d)))
            .collect();
        if bounds.iter().any(|&(lo, hi)| lo >= hi) {
            None
        } else {
            Some(HyperCube { bounds })
        }
    }

    fn overlaps_interior(&self, other: &HyperCube) -> bool {
        self.intersect(other).is_some()
    }
}

/// Sparse multivariate polynomial: exponent tuple to coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPolynomial {
    dim: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl MultiPolynomial {
    pub fn zero(dim: usize) -> Self {
        MultiPolynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    /// The coordinate `x_axis`.
    pub fn variable(dim: usize, axis: usize) -> Self {
        let mut exps = vec![0; dim];
        exps[axis] = 1;
        let mut p = Self::zero(dim);
        p.add_term(exps, 1.0);
        p
    }

    /// Univariate polynomial in coordinate `axis`, expanded around zero.
    pub fn from_univariate(p: &Polynomial, dim: usize, axis: usize) -> Self {
        let p = p.reanchored(0.0);
        let mut out = Self::zero(dim);
        for (j, &c) in p.coefficients().iter().enumerate() {
            let mut exps = vec![0; dim];
            exps[axis] = j as u32;
            out.add_term(exps, c);
        }
        out
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut p = Self::zero(dim);
        for (exps, c) in terms {
            if exps.len() != dim {
                return Err(Error::Contract(format!(
                    "exponent tuple of length {} in a {dim}-variate polynomial",
                    exps.len()
                )));
            }
            p.add_term(exps, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Non-zero terms in exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant value when the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(k, _)| k.iter().all(|&e| e == 0))
                .map(|(_, &v)| v),
            _ => None,
        }
    }

    /// Axes with a positive exponent in some term.
    pub fn used_axes(&self) -> Vec<usize> {
        (0..self.dim).filter(|&a| self.terms.keys().any(|k| k[a] > 0)).collect()
    }

    /// Restriction to a single axis, if no other axis occurs.
    pub fn to_univariate(&self, axis: usize) -> Option<Polynomial> {
        let mut coeffs = Vec::new();
        for (k, &c) in &self.terms {
            if k.iter().enumerate().any(|(a, &e)| a != axis && e > 0) {
                return None;
            }
            let e = k[axis] as usize;
            if coeffs.len() <= e {
                coeffs.resize(e + 1, 0.0);
            }
            coeffs[e] += c;
        }
        Some(Polynomial::new(coeffs))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, &c) in &self.terms {
            out.add_term(k.clone(), c * factor);
        }
        out
    }

    pub fn powi(&self, exp: u32) -> Self {
        let mut acc = Self::constant(self.dim, 1.0);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, &c)| c * k.iter().zip(point).map(|(&e, &x)| math::powi(x, e)).product::<f64>())
            .sum()
    }

    /// Exact integral over a bounded box, monomial by monomial.
    pub fn integrate_box(&self, cube: &HyperCube) -> Result<f64> {
        if cube.dimension() != self.dim {
            return Err(dimension_mismatch(self.dim, cube.dimension()));
        }
        if cube.bounds.iter().any(|&(lo, hi)| lo == hi) {
            return Ok(0.0);
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        if cube.bounds.iter().any(|(lo, hi)| !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::Contract(
                "unbounded box integral of a non-zero polynomial".into(),
            ));
        }
        Ok(self
            .terms
            .iter()
            .map(|(k, &c)| {
                c * k
                    .iter()
                    .zip(&cube.bounds)
                    .map(|(&e, &(lo, hi))| (math::powi(hi, e + 1) - math::powi(lo, e + 1)) / (e + 1) as f64)
                    .product::<f64>()
            })
            .sum())
    }
}

fn dimension_mismatch(expected: usize, got: usize) -> Error {
    Error::Contract(format!("expected dimension {expected}, got {got}"))
}

impl Add for &MultiPolynomial {
    type Output = MultiPolynomial;
    fn add(self, rhs: &MultiPolynomial) -> MultiPolynomial {
        let mut out = self.clone();
        for (k, &c) in &rhs.terms {
            out.add_term(k.clone(), c);
        }
        out
    }
}

impl Sub for &MultiPolynomial {
    type Output = MultiPolynomial;
    fn sub(self, rhs: &MultiPolynomial) -> MultiPolynomial {
        let mut out = self.clone();
        for (k, &c) in &rhs.terms {
            out.add_term(k.clone(), -c);
        }
        out
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for &MultiPolynomial {
    type Output = MultiPolynomial;
    fn mul(self, rhs: &MultiPolynomial) -> MultiPolynomial {
        let mut out = MultiPolynomial::zero(self.dim);
        for (ka, &a) in &self.terms {
            for (kb, &b) in &rhs.terms {
                let k: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
                out.add_term(k, a * b);
            }
        }
        out
    }
}

/// Polynomial pieces on interior-disjoint boxes, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariatePP {
    dim: usize,
    pieces: Vec<(HyperCube, MultiPolynomial)>,
}

impl MultivariatePP {
    pub fn new(dim: usize, pieces: Vec<(HyperCube, MultiPolynomial)>) -> Result<Self> {
        for (cube, poly) in &pieces {
            if cube.dimension() != dim {
                return Err(dimension_mismatch(dim, cube.dimension()));
            }
            if poly.dimension() != dim {
                return Err(dimension_mismatch(dim, poly.dimension()));
            }
            if cube.bounds().iter().any(|(lo, hi)| !lo.is_finite() || !hi.is_finite()) {
                return Err(Error::Contract("piece boxes must be bounded".into()));
            }
        }
        for (i, (a, _)) in pieces.iter().enumerate() {
            for (b, _) in &pieces[i + 1..] {
                if a.overlaps_interior(b) {
                    return Err(Error::Contract("piece boxes overlap".into()));
                }
            }
        }
        Ok(MultivariatePP { dim, pieces })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[(HyperCube, MultiPolynomial)] {
        &self.pieces
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        self.pieces
            .iter()
            .find(|(cube, _)| cube.contains(point))
            .map_or(0.0, |(_, p)| p.evaluate(point))
    }

    /// Integral over `cube`: each piece contributes over its intersection.
    pub fn integrate_box(&self, cube: &HyperCube) -> Result<f64> {
        if cube.dimension() != self.dim {
            return Err(dimension_mismatch(self.dim, cube.dimension()));
        }
        let mut total = 0.0;
        for (piece_cube, poly) in &self.pieces {
            if let Some(overlap) = piece_cube.intersect(cube) {
                total += poly.integrate_box(&overlap)?;
            }
        }
        Ok(total)
    }

    pub fn total_mass(&self) -> f64 {
        self.pieces
            .iter()
            .map(|(c, p)| p.integrate_box(c).unwrap_or(f64::NAN))
            .sum()
    }

    /// Per-axis breakpoints: every piece bound on that axis, sorted and deduplicated.
    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|(c, _)| [c.bounds()[axis].0, c.bounds()[axis].1])
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn social() -> MultiPolynomial {
        let x = MultiPolynomial::from_univariate(&Polynomial::new(vec![4.44, -17.42, 19.66]), 2, 0);
        let y = MultiPolynomial::from_univariate(&Polynomial::new(vec![-0.12, 0.58, 0.52]), 2, 1);
        &x * &y
    }

    fn cube(b: &[(f64, f64)]) -> HyperCube {
        HyperCube::new(b.to_vec()).unwrap()
    }

    #[test]
    fn social_box_integral() {
        let f = MultivariatePP::new(2, vec![(cube(&[(0.0, 1.0), (0.0, 1.0)]), social())]).unwrap();
        let v = f.integrate_box(&cube(&[(0.4, 0.5), (0.42, 0.7)])).unwrap();
        // product of the two one-dimensional closed forms
        let gx = Polynomial::new(vec![4.44, -17.42, 19.66]).integrate(0.4, 0.5).unwrap();
        let hy = Polynomial::new(vec![-0.12, 0.58, 0.52]).integrate(0.42, 0.7).unwrap();
        assert!((v - gx * hy).abs() < 1e-12);
        assert!((v - 0.0062221).abs() < 1e-6);
    }

    #[test]
    fn unit_square_and_zero_width() {
        let f = MultivariatePP::new(
            2,
            vec![(cube(&[(0.0, 1.0), (0.0, 1.0)]), MultiPolynomial::constant(2, 1.0))],
        )
        .unwrap();
        assert_eq!(f.integrate_box(&cube(&[(0.0, 1.0), (0.0, 1.0)])).unwrap(), 1.0);
        assert_eq!(f.integrate_box(&cube(&[(0.3, 0.3), (0.0, 1.0)])).unwrap(), 0.0);
        // infinite query box is clamped by the piece
        let all = cube(&[(f64::NEG_INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY)]);
        assert_eq!(f.integrate_box(&all).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let f = MultivariatePP::new(
            2,
            vec![(cube(&[(0.0, 1.0), (0.0, 1.0)]), MultiPolynomial::constant(2, 1.0))],
        )
        .unwrap();
        assert!(f.integrate_box(&cube(&[(0.0, 1.0)])).is_err());
    }

    #[test]
    fn overlapping_pieces_rejected() {
        let one = MultiPolynomial::constant(2, 1.0);
        assert!(MultivariatePP::new(
            2,
            vec![
                (cube(&[(0.0, 1.0), (0.0, 1.0)]), one.clone()),
                (cube(&[(0.5, 1.5), (0.5, 1.5)]), one.clone()),
            ],
        )
        .is_err());
        // sharing a face is fine
        assert!(MultivariatePP::new(
            2,
            vec![
                (cube(&[(0.0, 1.0), (0.0, 1.0)]), one.clone()),
                (cube(&[(1.0, 2.0), (0.0, 1.0)]), one),
            ],
        )
        .is_ok());
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = MultiPolynomial::variable(2, 0);
        let zero = &x - &x;
        assert!(zero.is_zero());
        assert_eq!(zero.as_constant(), Some(0.0));
        let sq = x.powi(2);
        assert_eq!(sq.terms().collect::<Vec<_>>(), vec![(&[2u32, 0][..], 1.0)]);
    }
}
