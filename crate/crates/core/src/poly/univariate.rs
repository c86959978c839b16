use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::math;

/// A univariate polynomial `b_0 + b_1 (x - o) + ... + b_k (x - o)^k`.
///
/// The anchor `o` is zero for polynomials written the usual way, which is how
/// programs state weights such as `-0.0247 + 0.000517*I`. Learned densities
/// anchor each piece at its left cutpoint: a degree-8 piece on `[90, 95]`
/// expanded around zero would need coefficients near `1e15` that cancel to
/// values near `1e-2`, far past what a double can hold.
///
/// Trailing zero coefficients are dropped, so `degree()` is the true degree
/// except for the zero polynomial, which keeps a single `0.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
    origin: f64,
}

impl Polynomial {
    /// Polynomial in powers of `x` (anchor zero). An empty slice is the zero polynomial.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        Self::anchored(coeffs, 0.0)
    }

    /// Polynomial in powers of `x - origin`.
    pub fn anchored(coeffs: impl Into<Vec<f64>>, origin: f64) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs, origin }
    }

    pub fn zero() -> Self {
        Self::new(vec![0.0])
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn identity() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let t = x - self.origin;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| c * j as f64)
            .collect();
        Polynomial::anchored(coeffs, self.origin)
    }

    /// Antiderivative with the same anchor, vanishing at the anchor.
    pub fn antiderivative(&self) -> Polynomial {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(self.coeffs.iter().enumerate().map(|(j, &c)| c / (j + 1) as f64));
        Polynomial::anchored(coeffs, self.origin)
    }

    /// Exact definite integral over `[a, b]`.
    ///
    /// `a == b` gives zero. Infinite bounds are only accepted for the zero
    /// polynomial; piecewise densities clamp half-lines to their support
    /// before reaching this point.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        check_interval(a, b)?;
        if a == b || self.is_zero() {
            return Ok(0.0);
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Contract("unbounded integral of a non-zero polynomial".into()));
        }
        let anti = self.antiderivative();
        Ok(anti.evaluate(b) - anti.evaluate(a))
    }

    /// Same polynomial expressed around a different anchor (Taylor shift).
    pub fn reanchored(&self, origin: f64) -> Polynomial {
        if origin == self.origin {
            return self.clone();
        }
        // (x - o) = (x - o') + d
        let d = origin - self.origin;
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        for (j, &b) in self.coeffs.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            let mut dpow = 1.0;
            for i in (0..=j).rev() {
                out[i] += b * math::binomial(j, i) * dpow;
                dpow *= d;
            }
        }
        Polynomial::anchored(out, origin)
    }

    /// `q(x) = p(scale * x + shift)`, returned with anchor `(origin - shift) / scale`.
    ///
    /// The coefficients only get multiplied by powers of `scale`; no expansion
    /// happens, so the conditioning of the representation is preserved.
    pub fn compose_affine(&self, scale: f64, shift: f64) -> Polynomial {
        let mut factor = 1.0;
        let coeffs: Vec<f64> = self
            .coeffs
            .iter()
            .map(|&c| {
                let v = c * factor;
                factor *= scale;
                v
            })
            .collect();
        Polynomial::anchored(coeffs, (self.origin - shift) / scale)
    }

    pub fn scaled(&self, factor: f64) -> Polynomial {
        Polynomial::anchored(self.coeffs.iter().map(|c| c * factor).collect::<Vec<_>>(), self.origin)
    }

    /// Distinct real roots in increasing order.
    ///
    /// Roots of the derivative split the line into monotone runs, each
    /// holding at most one root, which is found by bisection.
    pub fn real_roots(&self) -> Vec<f64> {
        local_roots(&self.coeffs).into_iter().map(|t| t + self.origin).collect()
    }

    fn zip_with(&self, rhs: &Polynomial, f: impl Fn(f64, f64) -> f64) -> Polynomial {
        let rhs = rhs.reanchored(self.origin);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs: Vec<f64> = (0..n)
            .map(|j| {
                f(
                    self.coeffs.get(j).copied().unwrap_or(0.0),
                    rhs.coeffs.get(j).copied().unwrap_or(0.0),
                )
            })
            .collect();
        Polynomial::anchored(coeffs, self.origin)
    }
}

pub(crate) fn check_interval(a: f64, b: f64) -> Result<()> {
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::InvalidInterval { lo: a, hi: b });
    }
    Ok(())
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn local_roots(coeffs: &[f64]) -> Vec<f64> {
    let n = match coeffs.iter().rposition(|&c| c != 0.0) {
        Some(n) if n > 0 => n,
        _ => return Vec::new(),
    };
    let coeffs = &coeffs[..=n];
    if n == 1 {
        return vec![-coeffs[0] / coeffs[1]];
    }
    let lead = coeffs[n];
    let bound = 1.0 + coeffs[..n].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let derivative: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(j, &c)| c * j as f64).collect();
    let mut marks = vec![-bound];
    marks.extend(local_roots(&derivative).into_iter().filter(|t| t.abs() < bound));
    marks.push(bound);
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|&l| r > l) {
            roots.push(r);
        }
    };
    for w in marks.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (horner(coeffs, a), horner(coeffs, b));
        if fa == 0.0 {
            push(a, &mut roots);
            continue;
        }
        if fb == 0.0 {
            push(b, &mut roots);
            continue;
        }
        if (fa < 0.0) == (fb < 0.0) {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = horner(coeffs, m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        push(0.5 * (a + b), &mut roots);
    }
    roots
}

impl Default for Polynomial {
    fn default() -> Self {
        Polynomial::zero()
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let rhs = rhs.reanchored(self.origin);
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::anchored(out, self.origin)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scaled(-1.0)
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}
