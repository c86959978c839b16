use hybridpp_core::density::*;
use hybridpp_core::discretize::{equal_frequency, equal_width, Method};
use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

fn mixture_pdf(x: f64) -> f64 {
    let n = |m: f64, s: f64| (-(x - m).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
    0.6 * n(90.0, 10.0) + 0.4 * n(110.0, 10.0)
}

fn mixture_sample(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let a = Normal::new(90.0, 10.0).unwrap();
    let b = Normal::new(110.0, 10.0).unwrap();
    (0..n)
        .map(|_| {
            if rng.random::<f64>() < 0.6 {
                a.sample(&mut rng)
            } else {
                b.sample(&mut rng)
            }
        })
        .collect()
}

/// Integrated squared error against the mixture by composite Simpson on [20, 180].
fn ise(model: &DensityModel) -> f64 {
    let (a, b, m) = (20.0, 180.0, 16_000);
    let h = (b - a) / m as f64;
    let g = |x: f64| (model.density.evaluate(x) - mixture_pdf(x)).powi(2);
    let mut s = g(a) + g(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(a + h * i as f64);
    }
    s * h / 3.0
}

fn assert_valid(model: &DensityModel) {
    let check = model.density.density_check();
    assert!((check.mass - 1.0).abs() <= 1e-9, "mass {}", check.mass);
    let (lo, hi) = (model.discretization.min(), model.discretization.max());
    for i in 0..=10_000 {
        let x = lo + (hi - lo) * i as f64 / 10_000.0;
        assert!(model.density.evaluate(x) >= -1e-9, "negative at {x}");
    }
}

#[test]
fn uniform_sample_gives_flat_density() {
    let mut rng = StdRng::seed_from_u64(7);
    let data: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
    let disc = equal_width(&data, 4).unwrap();
    let model = fit_model(&disc, 2, &data, EmOptions::default()).unwrap();
    for i in 0..100 {
        let x = (i as f64 + 0.5) / 100.0;
        assert!(
            (model.density.evaluate(x) - 1.0).abs() < 0.1,
            "f({x}) = {}",
            model.density.evaluate(x)
        );
    }
}

#[test]
fn normal_sample_search_stays_in_grid() {
    let mut rng = StdRng::seed_from_u64(11);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let data: Vec<f64> = (0..50).map(|_| normal.sample(&mut rng)).collect();
    let out = build_pp_structure(&data, &SearchOptions::default()).unwrap();
    assert!((2..=40).contains(&out.config.bins));
    assert!((1..=8).contains(&out.config.degree));
    assert!((out.model.density.total_mass() - 1.0).abs() <= 1e-9);
    assert_valid(&out.model);
}

#[test]
fn search_matches_exhaustive_reevaluation() {
    for seed in 0..3 {
        let data = mixture_sample(300, seed);
        let opts = SearchOptions {
            max_size: 6,
            max_order: 3,
            ..SearchOptions::default()
        };
        let out = build_pp_structure(&data, &opts).unwrap();
        let mut sorted = data.clone();
        sorted.sort_by(f64::total_cmp);
        let n = data.len() as f64;
        let mut best: Option<(f64, usize, Method, usize)> = None;
        for l in 2..=6 {
            for method in [Method::EqualWidth, Method::EqualFrequency] {
                let disc = match method {
                    Method::EqualWidth => equal_width(&sorted, l),
                    _ => equal_frequency(&sorted, l),
                };
                let Ok(disc) = disc else { continue };
                for k in 1..=3 {
                    let m = fit_model(&disc, k, &sorted, EmOptions::default()).unwrap();
                    // score recomputed from the density itself
                    let ll: f64 = data.iter().map(|&x| m.density.evaluate(x).ln()).sum();
                    let p = disc.bins() + k;
                    let bic = ll - 0.5 * (p - 1) as f64 * n.ln();
                    if best.is_none_or(|b| bic > b.0 + 1e-6 * b.0.abs()) {
                        best = Some((bic, l, method, k));
                    }
                }
            }
        }
        let (bic, l, method, k) = best.unwrap();
        assert!((out.model.bic - bic).abs() < 1e-6 * bic.abs());
        assert_eq!(
            (out.config.bins, out.config.method, out.config.degree),
            (l, method, k),
            "seed {seed}"
        );
    }
}

#[test]
fn mixture_search_beats_two_bins() {
    let data = mixture_sample(5000, 42);
    let out = build_pp_structure(&data, &SearchOptions::default()).unwrap();
    assert_valid(&out.model);
    let two = build_pp_structure(
        &data,
        &SearchOptions {
            max_size: 2,
            ..SearchOptions::default()
        },
    )
    .unwrap();
    assert!(
        ise(&out.model) < ise(&two.model),
        "{} vs {}",
        ise(&out.model),
        ise(&two.model)
    );
}

#[test]
fn error_shrinks_with_more_data() {
    let opts = SearchOptions {
        max_size: 10,
        max_order: 3,
        ..SearchOptions::default()
    };
    let median = |n: usize| {
        let mut v: Vec<f64> = (0..10)
            .map(|seed| ise(&build_pp_structure(&mixture_sample(n, 100 + seed), &opts).unwrap().model))
            .collect();
        v.sort_by(f64::total_cmp);
        (v[4] + v[5]) / 2.0
    };
    let (small, large) = (median(200), median(5000));
    assert!(large <= small, "{large} > {small}");
}

#[test]
fn supervised_never_beats_full_search_on_shared_cutpoints() {
    // cutpoints at the class boundary coincide with the 2-bin equal-width grid point
    let data: Vec<(f64, bool)> = (0..200).map(|i| (i as f64 / 199.0, i >= 100)).collect();
    let sup = fit_supervised(&data, 2, 3, EmOptions::default()).unwrap();
    let values: Vec<f64> = data.iter().map(|p| p.0).collect();
    let opts = SearchOptions {
        max_size: 2,
        max_order: 3,
        ..SearchOptions::default()
    };
    let out = build_pp_structure(&values, &opts).unwrap();
    assert_eq!(sup.discretization.cutpoints, equal_width(&values, 2).unwrap().cutpoints);
    assert!(out.model.bic >= sup.bic);
}

fn cutpoints() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..10.0, 1..8).prop_flat_map(|gaps| {
        (-50.0f64..50.0).prop_map(move |start| {
            let mut cps = vec![start];
            for g in &gaps {
                cps.push(cps[cps.len() - 1] + g);
            }
            cps
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partition_of_unity(cps in cutpoints(), degree in 0usize..=10, seed in any::<u64>()) {
        let basis = build_basis(&cps, degree).unwrap();
        prop_assert_eq!(basis.len(), cps.len() - 1 + degree);
        let (lo, hi) = (cps[0], cps[cps.len() - 1]);
        let mut rng = StdRng::seed_from_u64(seed);
        for _ in 0..1000 {
            let x = rng.random_range(lo..=hi);
            let v = basis.evaluate(x);
            prop_assert!((v.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            prop_assert!(v.iter().all(|&b| b >= -1e-12));
        }
    }

    #[test]
    fn fitted_models_are_densities(
        seed in any::<u64>(),
        n in 2usize..300,
        bins in 1usize..12,
        degree in 0usize..=8,
        spread in 0.1f64..1000.0,
    ) {
        let mut rng = StdRng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(2) * spread - spread / 3.0).collect();
        let Ok(disc) = equal_width(&data, bins) else { return Ok(()) };
        let model = fit_model(&disc, degree, &data, EmOptions::default()).unwrap();
        assert_valid(&model);
        prop_assert!(model.coefficients.iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn em_log_likelihood_never_decreases(seed in any::<u64>(), degree in 1usize..=6) {
        let mut rng = StdRng::seed_from_u64(seed);
        let data: Vec<f64> = (0..200).map(|_| rng.random::<f64>().sqrt()).collect();
        let basis = build_basis(&[0.0, 0.3, 0.45, 0.8, 1.0], degree).unwrap();
        let fit = fit_coefficients(&basis, &data, EmOptions { trace: true, ..EmOptions::default() }).unwrap();
        for w in fit.trace.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }
}
