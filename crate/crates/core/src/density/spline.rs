use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::poly::{PiecewisePolynomial, Polynomial};

/// Clamped B-spline basis of degree `k` over a cutpoint sequence.
///
/// With `l` spans there are `l + k` basis functions. Each is also available as
/// an exact [`PiecewisePolynomial`] whose pieces are anchored at the left
/// cutpoint of their span.
#[derive(Debug, Clone)]
pub struct SplineBasis {
    degree: usize,
    cutpoints: Vec<f64>,
    knots: Vec<f64>,
    functions: Vec<PiecewisePolynomial>,
    masses: Vec<f64>,
}

impl SplineBasis {
    pub fn new(cutpoints: &[f64], degree: usize) -> Result<Self> {
        if cutpoints.len() < 2 {
            return Err(Error::Contract("a spline basis needs at least one span".into()));
        }
        if cutpoints.iter().any(|c| !c.is_finite()) || cutpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract(
                "cutpoints must be finite and strictly increasing".into(),
            ));
        }
        let lo = cutpoints[0];
        let hi = cutpoints[cutpoints.len() - 1];
        let mut knots = vec![lo; degree];
        knots.extend_from_slice(cutpoints);
        knots.extend(core::iter::repeat_n(hi, degree));

        let spans = cutpoints.len() - 1;
        let count = spans + degree;
        let masses: Vec<f64> = (0..count)
            .map(|i| (knots[i + degree + 1] - knots[i]) / (degree + 1) as f64)
            .collect();

        let mut basis = SplineBasis {
            degree,
            cutpoints: cutpoints.to_vec(),
            knots,
            functions: Vec::new(),
            masses,
        };
        basis.functions = (0..count)
            .map(|i| {
                let pieces = (0..spans)
                    .map(|span| {
                        if i < span || i > span + degree {
                            Polynomial::zero()
                        } else {
                            basis.interpolate_span(span, |x| basis.eval_span(span, x)[i - span])
                        }
                    })
                    .collect();
                PiecewisePolynomial::new(cutpoints.to_vec(), pieces)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(basis)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn cutpoints(&self) -> &[f64] {
        &self.cutpoints
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn functions(&self) -> &[PiecewisePolynomial] {
        &self.functions
    }

    /// `M_i`, the integral of basis function `i`.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn spans(&self) -> usize {
        self.cutpoints.len() - 1
    }

    /// Span owning `x`; the right end belongs to the last span.
    pub fn span_of(&self, x: f64) -> Option<usize> {
        let lo = self.cutpoints[0];
        let hi = self.cutpoints[self.cutpoints.len() - 1];
        if !(lo..=hi).contains(&x) {
            return None;
        }
        let idx = self.cutpoints.partition_point(|&c| c <= x);
        Some(idx.saturating_sub(1).min(self.spans() - 1))
    }

    /// Values of the `k + 1` basis functions that are non-zero on `span`
    /// (indices `span..=span + k`), by the Cox-de Boor recursion.
    pub fn eval_span(&self, span: usize, x: f64) -> Vec<f64> {
        let p = self.degree;
        let i = span + p; // knot index of the span start
        let u = &self.knots;
        let mut n = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        n[0] = 1.0;
        for j in 1..=p {
            left[j] = x - u[i + 1 - j];
            right[j] = u[i + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        n
    }

    /// Values of all basis functions at `x` (zero outside the support).
    pub fn evaluate(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        if let Some(span) = self.span_of(x) {
            for (r, v) in self.eval_span(span, x).into_iter().enumerate() {
                out[span + r] = v;
            }
        }
        out
    }

    /// The spline `sum_i coeffs[i] * B_i` as a piecewise polynomial.
    pub fn combine(&self, coeffs: &[f64]) -> Result<PiecewisePolynomial> {
        if coeffs.len() != self.len() {
            return Err(Error::Contract("one coefficient per basis function".into()));
        }
        let pieces = (0..self.spans())
            .map(|span| {
                self.interpolate_span(span, |x| {
                    self.eval_span(span, x)
                        .iter()
                        .enumerate()
                        .map(|(r, v)| coeffs[span + r] * v)
                        .sum()
                })
            })
            .collect();
        PiecewisePolynomial::new(self.cutpoints.clone(), pieces)
    }

    /// Degree-`k` interpolant of `f` at `k + 1` Chebyshev nodes of `span`.
    /// Exact for functions that are polynomial of degree `k` on the span.
    fn interpolate_span(&self, span: usize, f: impl Fn(f64) -> f64) -> Polynomial {
        let a = self.cutpoints[span];
        let h = self.cutpoints[span + 1] - a;
        let m = self.degree + 1;
        let nodes: Vec<f64> = (0..m)
            .map(|r| {
                let theta = core::f64::consts::PI * (2 * r + 1) as f64 / (2 * m) as f64;
                0.5 * (1.0 - math::cos(theta))
            })
            .collect();
        let mut dd: Vec<f64> = nodes.iter().map(|&t| f(a + h * t)).collect();
        // Newton divided differences in the local variable t = (x - a) / h
        for level in 1..m {
            for r in (level..m).rev() {
                dd[r] = (dd[r] - dd[r - 1]) / (nodes[r] - nodes[r - level]);
            }
        }
        let mut mono = vec![dd[m - 1]];
        for r in (0..m - 1).rev() {
            // mono <- mono * (t - nodes[r]) + dd[r]
            let mut next = vec![0.0; mono.len() + 1];
            for (j, &c) in mono.iter().enumerate() {
                next[j + 1] += c;
                next[j] -= c * nodes[r];
            }
            next[0] += dd[r];
            mono = next;
        }
        let mut scale = 1.0;
        for c in mono.iter_mut() {
            *c *= scale;
            scale /= h;
        }
        Polynomial::anchored(mono, a)
    }
}

/// Basis of degree `k` on the cutpoints of a discretization.
pub fn build_basis(cutpoints: &[f64], degree: usize) -> Result<SplineBasis> {
    SplineBasis::new(cutpoints, degree)
}
