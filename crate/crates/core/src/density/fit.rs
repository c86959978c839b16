use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::spline::SplineBasis;
use crate::discretize::Discretization;
use crate::error::{Error, Result};
use crate::math;
use crate::poly::{Density, PiecewisePolynomial, Polynomial};

/// Stopping rule of the EM weight updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    pub max_iterations: usize,
    /// Stop once the log-likelihood gains less than this in one update.
    pub tolerance: f64,
    /// Keep the log-likelihood of every iterate.
    pub trace: bool,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iterations: 500,
            tolerance: 1e-9,
            trace: false,
        }
    }
}

/// Maximum-likelihood mixture of normalized basis functions `B_i / M_i`.
#[derive(Debug, Clone)]
pub struct MixtureFit {
    /// Mixture weights on the simplex.
    pub weights: Vec<f64>,
    /// Spline coefficients `c_i = w_i / M_i`.
    pub coefficients: Vec<f64>,
    /// `sum_i c_i B_i`, in the units of the basis.
    pub density: PiecewisePolynomial,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

/// Fits mixture weights to `data` by multiplicative EM updates
/// `w_i <- (1/n) sum_j w_i Bn_i(x_j) / f(x_j)` starting from the uniform density.
pub fn fit_coefficients(basis: &SplineBasis, data: &[f64], options: EmOptions) -> Result<MixtureFit> {
    if data.is_empty() {
        return Err(Error::Contract("cannot fit a density to no data".into()));
    }
    let k1 = basis.degree() + 1;
    let p = basis.len();
    let masses = basis.masses();

    // per point: first basis index and normalized values of the k+1 active functions
    let mut first = Vec::with_capacity(data.len());
    let mut values = Vec::with_capacity(data.len() * k1);
    for &x in data {
        let span = basis.span_of(x).ok_or_else(|| {
            Error::Contract(format!(
                "data point {x} outside [{}, {}]",
                basis.cutpoints()[0],
                basis.cutpoints()[basis.cutpoints().len() - 1]
            ))
        })?;
        first.push(span);
        for (r, v) in basis.eval_span(span, x).into_iter().enumerate() {
            values.push(v / masses[span + r]);
        }
    }

    let total_mass: f64 = masses.iter().sum();
    let mut weights: Vec<f64> = masses.iter().map(|m| m / total_mass).collect();
    let n = data.len() as f64;
    let mut acc = vec![0.0; p];

    // log-likelihood of `weights` and the next iterate in `acc`
    let step = |weights: &[f64], acc: &mut [f64]| -> f64 {
        acc.iter_mut().for_each(|a| *a = 0.0);
        let mut ll = 0.0;
        for (j, &s) in first.iter().enumerate() {
            let v = &values[j * k1..(j + 1) * k1];
            let w = &weights[s..s + k1];
            let f: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
            ll += math::ln(f);
            if f > 0.0 {
                for r in 0..k1 {
                    acc[s + r] += w[r] * v[r] / f;
                }
            }
        }
        acc.iter_mut().for_each(|a| *a /= n);
        ll
    };

    let mut trace = Vec::new();
    let mut ll = step(&weights, &mut acc);
    if options.trace {
        trace.push(ll);
    }
    let mut iterations = 0;
    while iterations < options.max_iterations {
        let candidate = acc.clone();
        let next_ll = step(&candidate, &mut acc);
        iterations += 1;
        let gain = next_ll - ll;
        if next_ll >= ll || !ll.is_finite() {
            weights = candidate;
            ll = next_ll;
            if options.trace {
                trace.push(ll);
            }
        }
        if !(gain >= options.tolerance) {
            break;
        }
    }

    let coefficients: Vec<f64> = weights.iter().zip(masses).map(|(w, m)| w / m).collect();
    let density = basis.combine(&coefficients)?;
    Ok(MixtureFit {
        weights,
        coefficients,
        density,
        log_likelihood: ll,
        iterations,
        trace,
    })
}

/// `logL - (p - 1)/2 * ln n`; larger is better.
pub fn bic_score(log_likelihood: f64, parameters: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Contract("BIC needs at least one observation".into()));
    }
    let free = parameters.saturating_sub(1) as f64;
    Ok(log_likelihood - 0.5 * free * math::ln(n as f64))
}

/// A fitted piecewise-polynomial density with its score.
#[derive(Debug, Clone)]
pub struct DensityModel {
    pub discretization: Discretization,
    /// Polynomial degree of the pieces.
    pub degree: usize,
    pub weights: Vec<f64>,
    /// Spline coefficients on the data range mapped to `[0, 1]`.
    pub coefficients: Vec<f64>,
    pub density: Density,
    pub log_likelihood: f64,
    pub bic: f64,
    pub n: usize,
    pub iterations: usize,
}

impl DensityModel {
    /// Number of basis functions (mixture components).
    pub fn parameters(&self) -> usize {
        self.weights.len()
    }

    pub fn bins(&self) -> usize {
        self.discretization.bins()
    }

    pub fn bic_score(&self) -> Result<f64> {
        bic_score(self.log_likelihood, self.parameters(), self.n)
    }
}

/// Fits a degree-`degree` spline density on the cutpoints of `disc`.
///
/// Cutpoints and data are mapped to `[0, 1]` for the fit; the returned density
/// and log-likelihood are in the original units.
pub fn fit_model(disc: &Discretization, degree: usize, data: &[f64], options: EmOptions) -> Result<DensityModel> {
    if degree > super::MAX_DEGREE {
        return Err(Error::Contract(format!(
            "degree {degree} above the supported maximum {}",
            super::MAX_DEGREE
        )));
    }
    let lo = disc.min();
    let scale = disc.max() - lo;
    let unit = |x: f64| (x - lo) / scale;
    let mut unit_cuts: Vec<f64> = disc.cutpoints.iter().map(|&c| unit(c)).collect();
    let last = unit_cuts.len() - 1;
    unit_cuts[0] = 0.0;
    unit_cuts[last] = 1.0;
    let unit_data: Vec<f64> = data.iter().map(|&x| unit(x).clamp(0.0, 1.0)).collect();
    if let Some(&x) = data.iter().find(|&&x| !(lo..=disc.max()).contains(&x)) {
        return Err(Error::Contract(format!(
            "data point {x} outside [{lo}, {}]",
            disc.max()
        )));
    }

    let basis = SplineBasis::new(&unit_cuts, degree)?;
    let fit = fit_coefficients(&basis, &unit_data, options)?;

    // f_x(x) = f_u((x - lo) / scale) / scale, piece by piece around each cutpoint
    let pieces: Vec<Polynomial> = fit
        .density
        .pieces()
        .iter()
        .zip(&disc.cutpoints)
        .map(|(piece, &cut)| {
            let mut factor = 1.0 / scale;
            let coeffs: Vec<f64> = piece
                .coefficients()
                .iter()
                .map(|&c| {
                    let v = c * factor;
                    factor /= scale;
                    v
                })
                .collect();
            Polynomial::anchored(coeffs, cut)
        })
        .collect();
    let pp = PiecewisePolynomial::new(disc.cutpoints.clone(), pieces)?;
    let density = Density::new(pp)?;
    let n = data.len();
    let log_likelihood = fit.log_likelihood - n as f64 * math::ln(scale);
    let bic = bic_score(log_likelihood, basis.len(), n)?;
    Ok(DensityModel {
        discretization: disc.clone(),
        degree,
        weights: fit.weights,
        coefficients: fit.coefficients,
        density,
        log_likelihood,
        bic,
        n,
        iterations: fit.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::spline::build_basis;
    use crate::discretize::equal_width;

    #[test]
    fn constant_basis_gives_uniform() {
        let basis = build_basis(&[2.0, 6.0], 0).unwrap();
        let data = [2.5, 3.0, 5.9, 4.4];
        let fit = fit_coefficients(&basis, &data, EmOptions::default()).unwrap();
        assert_eq!(fit.weights, vec![1.0]);
        let expected = -(data.len() as f64) * 4.0f64.ln();
        assert!((fit.log_likelihood - expected).abs() < 1e-12);
        assert!((fit.density.evaluate(3.3) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_point_between_hats() {
        let basis = build_basis(&[0.0, 1.0], 1).unwrap();
        let fit = fit_coefficients(&basis, &[0.5], EmOptions::default()).unwrap();
        assert!((fit.weights[0] - 0.5).abs() < 1e-15);
        assert!((fit.weights[1] - 0.5).abs() < 1e-15);
        // grid over the 1-simplex: the likelihood is flat in w at x = 0.5
        let ll = |w: f64| (w * 2.0 * 0.5 + (1.0 - w) * 2.0 * 0.5).ln();
        let best = (0..=100)
            .map(|i| ll(i as f64 / 100.0))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((fit.log_likelihood - best).abs() < 1e-12);
    }

    #[test]
    fn em_is_monotone() {
        let data: Vec<f64> = (0..300)
            .map(|i| {
                let u = (i as f64 * 0.618_033_988_75).fract();
                u * u
            })
            .collect();
        let basis = build_basis(&[0.0, 0.2, 0.5, 0.7, 1.0], 3).unwrap();
        let opts = EmOptions {
            trace: true,
            ..EmOptions::default()
        };
        let fit = fit_coefficients(&basis, &data, opts).unwrap();
        assert!(fit.trace.len() > 2);
        for w in fit.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs(), "{} then {}", w[0], w[1]);
        }
        let s: f64 = fit.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_support_is_a_contract_error() {
        let basis = build_basis(&[0.0, 1.0], 1).unwrap();
        assert!(matches!(
            fit_coefficients(&basis, &[1.5], EmOptions::default()),
            Err(Error::Contract(_))
        ));
        assert!(fit_coefficients(&basis, &[], EmOptions::default()).is_err());
    }

    #[test]
    fn bic_examples() {
        let v = bic_score(-1400.0, 6, 1000).unwrap();
        assert!((v - (-1417.2693881974553)).abs() < 1e-9);
        assert_eq!(bic_score(-12.5, 1, 40).unwrap(), -12.5);
        assert!(bic_score(-50.0, 3, 100).unwrap() > bic_score(-50.0, 5, 100).unwrap());
        assert!(bic_score(-1.0, 2, 0).is_err());
    }

    #[test]
    fn model_is_valid_in_original_units() {
        let data: Vec<f64> = (0..500)
            .map(|i| 80.0 + 40.0 * ((i as f64 * 0.754_877_666).fract()).powi(2))
            .collect();
        let disc = equal_width(&data, 6).unwrap();
        let model = fit_model(&disc, 5, &data, EmOptions::default()).unwrap();
        let check = model.density.density_check();
        assert!((check.mass - 1.0).abs() < 1e-9);
        assert!(check.min_value >= -1e-9);
        let c_dot_m: f64 = model.weights.iter().sum();
        assert!((c_dot_m - 1.0).abs() < 1e-12);
        // log-likelihood agrees with the returned density
        let direct: f64 = data.iter().map(|&x| model.density.evaluate(x).ln()).sum();
        assert!((direct - model.log_likelihood).abs() < 1e-6 * direct.abs());
    }
}
