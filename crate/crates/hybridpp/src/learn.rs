//! Density learning per column and the stats records written next to the
//! learned program.

use rayon::prelude::*;
use serde::Serialize;

use hybridpp_core::density::{
    fit_supervised, prepare_sample, search_row, select_best, Candidate, DensityModel, EmOptions, SearchOptions,
    SearchOutcome,
};
use hybridpp_core::discretize::Method;
use hybridpp_core::poly::PiecewisePolynomial;
use hybridpp_core::program::{density_fragment, print, FragmentOptions};
use hybridpp_core::rulelearn::Executor;
use hybridpp_core::Result;

/// Which cutpoints the search may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum MethodChoice {
    /// Both equal-width and equal-frequency; BIC picks.
    #[default]
    Auto,
    Ew,
    Ef,
    /// Supervised entropy-distance cutpoints; needs class labels.
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnConfig {
    pub max_size: usize,
    pub max_order: usize,
    /// Fixed bin count instead of searching `2..=max_size`.
    pub bins: Option<usize>,
    pub method: MethodChoice,
    pub em: EmOptions,
}

impl Default for LearnConfig {
    fn default() -> Self {
        let s = SearchOptions::default();
        LearnConfig {
            max_size: s.max_size,
            max_order: s.max_order,
            bins: None,
            method: MethodChoice::Auto,
            em: s.em,
        }
    }
}

impl LearnConfig {
    pub fn search_options(&self) -> SearchOptions {
        SearchOptions {
            max_size: self.max_size,
            max_order: self.max_order,
            em: self.em,
        }
    }
}

/// Grid search with the `(bins, method)` rows fitted in parallel. Candidates
/// keep grid order, so the selected model matches the sequential search.
pub fn search(data: &[f64], config: &LearnConfig) -> Result<SearchOutcome> {
    let options = config.search_options();
    let sorted = prepare_sample(data)?;
    let methods: &[Method] = match config.method {
        MethodChoice::Ew => &[Method::EqualWidth],
        MethodChoice::Ef => &[Method::EqualFrequency],
        _ => &[Method::EqualWidth, Method::EqualFrequency],
    };
    let bins: Vec<usize> = match config.bins {
        Some(l) => vec![l],
        None => (2..=config.max_size).collect(),
    };
    if config.bins.is_none() && config.max_size < 2 {
        return Err(hybridpp_core::Error::Contract("max size must be at least 2".into()));
    }
    let rows: Vec<(usize, Method)> = bins
        .iter()
        .flat_map(|&l| methods.iter().map(move |&m| (l, m)))
        .collect();
    let candidates: Vec<Candidate> = rows
        .par_iter()
        .map(|&(l, m)| search_row(&sorted, l, m, &options))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    select_best(candidates)
}

/// A fitted column.
#[derive(Debug, Clone)]
pub struct LearnedAttribute {
    pub name: String,
    pub model: DensityModel,
    pub method: Method,
    /// Share of grid cells where equal-frequency beat equal-width.
    pub pct_ef: Option<f64>,
    pub dropped: usize,
    pub missing: usize,
}

impl LearnedAttribute {
    pub fn density(&self) -> &PiecewisePolynomial {
        self.model.density.as_piecewise()
    }
}

/// Fits one column. `labels` are required for the supervised method.
pub fn learn_attribute(
    name: &str,
    data: &[f64],
    labels: Option<&[String]>,
    missing: usize,
    config: &LearnConfig,
) -> Result<LearnedAttribute> {
    if config.method == MethodChoice::Distance {
        let labels =
            labels.ok_or_else(|| hybridpp_core::Error::Contract("the distance method needs a target column".into()))?;
        let pairs: Vec<(f64, &str)> = data.iter().copied().zip(labels.iter().map(String::as_str)).collect();
        prepare_sample(data)?;
        let model = fit_supervised(
            &pairs,
            config.bins.unwrap_or(config.max_size),
            config.max_order,
            config.em,
        )?;
        return Ok(LearnedAttribute {
            name: name.to_string(),
            model,
            method: Method::EntropyDistance,
            pct_ef: None,
            dropped: 0,
            missing,
        });
    }
    let outcome = search(data, config)?;
    Ok(LearnedAttribute {
        name: name.to_string(),
        method: outcome.config.method,
        pct_ef: (config.method == MethodChoice::Auto).then_some(outcome.pct_ef),
        dropped: outcome.dropped,
        model: outcome.model,
        missing,
    })
}

/// Program text for a learned attribute.
pub fn fragment(attr: &LearnedAttribute, options: &FragmentOptions) -> Result<String> {
    Ok(print(&density_fragment(&attr.name, attr.density(), options)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct PieceRecord {
    pub predicate: String,
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttributeRecord {
    pub name: String,
    pub n: usize,
    pub missing: usize,
    pub method: String,
    pub bins: usize,
    pub degree: usize,
    pub log_likelihood: f64,
    pub bic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pct_ef: Option<f64>,
    pub dropped: usize,
    pub pieces: Vec<PieceRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LearnStats {
    /// Number of continuous attributes.
    #[serde(rename = "# Cont")]
    pub cont: usize,
    /// Mean bin count of the selected models.
    #[serde(rename = "# Bins")]
    pub bins: f64,
    /// Mean equal-frequency share over the attributes searched with both methods.
    #[serde(rename = "% EF", skip_serializing_if = "Option::is_none")]
    pub pct_ef: Option<f64>,
    pub seed: u64,
    pub attributes: Vec<AttributeRecord>,
}

impl LearnStats {
    pub fn new(attrs: &[LearnedAttribute], piece_names: &[Vec<String>], seed: u64) -> LearnStats {
        let records: Vec<AttributeRecord> = attrs
            .iter()
            .zip(piece_names)
            .map(|(a, names)| {
                let pp = a.density();
                AttributeRecord {
                    name: a.name.clone(),
                    n: a.model.n,
                    missing: a.missing,
                    method: a.method.short_name().to_string(),
                    bins: a.model.bins(),
                    degree: a.model.degree,
                    log_likelihood: a.model.log_likelihood,
                    bic: a.model.bic,
                    pct_ef: a.pct_ef,
                    dropped: a.dropped,
                    pieces: names
                        .iter()
                        .enumerate()
                        .map(|(i, n)| {
                            let (lo, hi) = pp.interval(i);
                            PieceRecord {
                                predicate: n.clone(),
                                lo,
                                hi,
                                mass: pp.piece_mass(i),
                            }
                        })
                        .collect(),
                }
            })
            .collect();
        let efs: Vec<f64> = attrs.iter().filter_map(|a| a.pct_ef).collect();
        LearnStats {
            cont: attrs.len(),
            bins: if attrs.is_empty() {
                0.0
            } else {
                attrs.iter().map(|a| a.model.bins() as f64).sum::<f64>() / attrs.len() as f64
            },
            pct_ef: (!efs.is_empty()).then(|| efs.iter().sum::<f64>() / efs.len() as f64),
            seed,
            attributes: records,
        }
    }
}

/// Candidate evaluation on the rayon pool, in index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Parallel;

impl Executor for Parallel {
    fn map(&self, n: usize, f: &(dyn Fn(usize) -> Vec<f64> + Sync)) -> Vec<Vec<f64>> {
        (0..n).into_par_iter().map(f).collect()
    }
}
