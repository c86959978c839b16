use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::fit::{fit_model, DensityModel, EmOptions};
use super::MAX_DEGREE;
use crate::discretize::{entropy_distance, equal_frequency, equal_width, Discretization, Method};
use crate::error::{Error, Result};

/// One point of the search grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Configuration {
    /// Requested number of bins.
    pub bins: usize,
    pub method: Method,
    pub degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub max_size: usize,
    pub max_order: usize,
    pub em: EmOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_size: 40,
            max_order: 8,
            em: EmOptions::default(),
        }
    }
}

impl SearchOptions {
    fn validate(&self) -> Result<()> {
        if self.max_size < 2 {
            return Err(Error::Contract("max size must be at least 2".into()));
        }
        if self.max_order < 1 || self.max_order > MAX_DEGREE {
            return Err(Error::Contract(format!("max order must be between 1 and {MAX_DEGREE}")));
        }
        Ok(())
    }
}

/// A fitted grid configuration, or the reason it could not be fitted.
#[derive(Debug)]
pub struct Candidate {
    pub config: Configuration,
    pub model: Result<DensityModel>,
}

impl Candidate {
    /// BIC of a successful fit; `None` for failures and NaN scores.
    pub fn bic(&self) -> Option<f64> {
        self.model.as_ref().ok().map(|m| m.bic).filter(|b| !b.is_nan())
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub config: Configuration,
    pub model: DensityModel,
    /// BIC of every grid configuration in loop order.
    pub scores: Vec<(Configuration, Option<f64>)>,
    /// Fraction of `(bins, degree)` pairs where equal-frequency beat
    /// equal-width, over the pairs where both were fitted.
    pub pct_ef: f64,
    /// Configurations without a usable score.
    pub dropped: usize,
}

/// Sorted copy of `data`, rejecting non-finite values and constant samples.
pub fn prepare_sample(data: &[f64]) -> Result<Vec<f64>> {
    if let Some(x) = data.iter().find(|x| !x.is_finite()) {
        return Err(Error::DegenerateInput(format!("non-finite value {x}")));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.is_empty() || sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateInput("need at least two distinct values".into()));
    }
    Ok(sorted)
}

/// `(bins, method)` rows of the grid in loop order: bins outer, method inner.
pub fn grid(options: &SearchOptions) -> Vec<(usize, Method)> {
    (2..=options.max_size)
        .flat_map(|l| [(l, Method::EqualWidth), (l, Method::EqualFrequency)])
        .collect()
}

/// Fits every degree for one `(bins, method)` row on a sorted sample.
pub fn search_row(sorted: &[f64], bins: usize, method: Method, options: &SearchOptions) -> Vec<Candidate> {
    let disc = match method {
        Method::EqualWidth => equal_width(sorted, bins),
        Method::EqualFrequency => equal_frequency(sorted, bins),
        Method::EntropyDistance => Err(Error::Contract("supervised cutpoints need class labels".into())),
    };
    (1..=options.max_order)
        .map(|degree| Candidate {
            config: Configuration { bins, method, degree },
            model: match &disc {
                Ok(d) => fit_model(d, degree, sorted, options.em),
                Err(e) => Err(e.clone()),
            },
        })
        .collect()
}

/// Picks the highest BIC; the earliest candidate wins ties.
pub fn select_best(candidates: Vec<Candidate>) -> Result<SearchOutcome> {
    let scores: Vec<(Configuration, Option<f64>)> = candidates.iter().map(|c| (c.config, c.bic())).collect();
    let dropped = scores.iter().filter(|s| s.1.is_none()).count();

    let mut by_pair: BTreeMap<(usize, usize), [Option<f64>; 2]> = BTreeMap::new();
    for (c, bic) in &scores {
        let slot = match c.method {
            Method::EqualWidth => 0,
            Method::EqualFrequency => 1,
            Method::EntropyDistance => continue,
        };
        by_pair.entry((c.bins, c.degree)).or_default()[slot] = *bic;
    }
    let (mut compared, mut ef_wins) = (0usize, 0usize);
    for [ew, ef] in by_pair.values() {
        if let (Some(ew), Some(ef)) = (ew, ef) {
            compared += 1;
            if ef > ew {
                ef_wins += 1;
            }
        }
    }
    let pct_ef = if compared == 0 {
        0.0
    } else {
        ef_wins as f64 / compared as f64
    };

    let mut best: Option<(f64, Candidate)> = None;
    for cand in candidates {
        let Some(bic) = cand.bic() else { continue };
        if best.as_ref().is_none_or(|(b, _)| bic > *b) {
            best = Some((bic, cand));
        }
    }
    let (_, cand) = best.ok_or_else(|| Error::DegenerateInput("no configuration could be fitted".into()))?;
    let model = cand.model?;
    Ok(SearchOutcome {
        config: cand.config,
        model,
        scores,
        pct_ef,
        dropped,
    })
}

/// Searches bins in `2..=max_size`, equal-width and equal-frequency cutpoints,
/// and degrees in `1..=max_order`, keeping the model with the highest BIC.
pub fn build_pp_structure(data: &[f64], options: &SearchOptions) -> Result<SearchOutcome> {
    options.validate()?;
    let sorted = prepare_sample(data)?;
    let candidates = grid(options)
        .into_iter()
        .flat_map(|(l, m)| search_row(&sorted, l, m, options))
        .collect();
    select_best(candidates)
}

/// Density on supervised cutpoints; BIC only picks the degree.
///
/// When the labels give no boundary the result is a single uniform bin.
pub fn fit_supervised<L: Ord>(
    pairs: &[(f64, L)],
    bins: usize,
    max_order: usize,
    em: EmOptions,
) -> Result<DensityModel> {
    if !(1..=MAX_DEGREE).contains(&max_order) {
        return Err(Error::Contract(format!("max order must be between 1 and {MAX_DEGREE}")));
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[a].0.total_cmp(&pairs[b].0));
    let sorted: Vec<(f64, &L)> = order.iter().map(|&i| (pairs[i].0, &pairs[i].1)).collect();
    let disc: Discretization = entropy_distance(&sorted, bins)?;
    let values: Vec<f64> = sorted.iter().map(|p| p.0).collect();
    if disc.bins() == 1 {
        return fit_model(&disc, 0, &values, em);
    }
    let mut best: Option<DensityModel> = None;
    for degree in 1..=max_order {
        let model = fit_model(&disc, degree, &values, em)?;
        if best.as_ref().is_none_or(|b| model.bic > b.bic) {
            best = Some(model);
        }
    }
    best.ok_or_else(|| Error::DegenerateInput("no degree could be fitted".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn skewed(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let u = ((i as f64 + 0.5) * 0.618_033_988_749_895).fract();
                u.powi(3) * 10.0
            })
            .collect()
    }

    #[test]
    fn search_returns_grid_argmax() {
        let data = skewed(400);
        let opts = SearchOptions {
            max_size: 6,
            max_order: 3,
            ..SearchOptions::default()
        };
        let out = build_pp_structure(&data, &opts).unwrap();
        assert_eq!(out.scores.len(), 5 * 2 * 3);
        let max = out.scores.iter().filter_map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(out.model.bic, max);
        let first = out.scores.iter().find(|s| s.1 == Some(max)).unwrap().0;
        assert_eq!(first, out.config);
        assert!((0.0..=1.0).contains(&out.pct_ef));
    }

    #[test]
    fn tie_goes_to_the_first_configuration() {
        let model = |bic: f64| {
            let disc = equal_width(&[0.0, 1.0], 1).unwrap();
            let mut m = fit_model(&disc, 0, &[0.2, 0.7], EmOptions::default()).unwrap();
            m.bic = bic;
            m
        };
        let cfg = |bins| Configuration {
            bins,
            method: Method::EqualWidth,
            degree: 1,
        };
        let out = select_best(vec![
            Candidate {
                config: cfg(2),
                model: Ok(model(-3.0)),
            },
            Candidate {
                config: cfg(3),
                model: Ok(model(-1.0)),
            },
            Candidate {
                config: cfg(4),
                model: Ok(model(-1.0)),
            },
            Candidate {
                config: cfg(5),
                model: Ok(model(f64::NAN)),
            },
        ])
        .unwrap();
        assert_eq!(out.config.bins, 3);
        assert_eq!(out.dropped, 1);
    }

    #[test]
    fn degenerate_samples_are_rejected() {
        let opts = SearchOptions::default();
        assert!(matches!(
            build_pp_structure(&[3.0; 10], &opts),
            Err(Error::DegenerateInput(_))
        ));
        assert!(build_pp_structure(&[], &opts).is_err());
        assert!(build_pp_structure(&[1.0, f64::NAN], &opts).is_err());
    }

    #[test]
    fn supervised_single_class_is_uniform() {
        let pairs: Vec<(f64, u8)> = (0..20).map(|i| (i as f64, 0)).collect();
        let m = fit_supervised(&pairs, 4, 3, EmOptions::default()).unwrap();
        assert_eq!(m.bins(), 1);
        assert!((m.density.evaluate(7.0) - 1.0 / 19.0).abs() < 1e-12);
    }

    #[test]
    fn supervised_cut_at_class_boundary() {
        let pairs = [(4.0, 'b'), (1.0, 'a'), (3.0, 'b'), (2.0, 'a')];
        let m = fit_supervised(&pairs, 2, 2, EmOptions::default()).unwrap();
        assert_eq!(m.discretization.cutpoints, vec![1.0, 2.5, 4.0]);
    }
}
