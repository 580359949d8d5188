use shiftsim_core::distances::Metric;
use shiftsim_core::model::simulate;
use shiftsim_core::posterior::{
    as_distance, ball_mass_from, contraction_experiment, distances_to, gibbs_posterior, importance_posterior,
    ContractionConfig, GibbsOptions, PriorConfig, Sample, ShiftPrior,
};
use shiftsim_core::priors::{DirichletPriorConfig, SievePriorConfig, SmoothPriorConfig};
use shiftsim_core::rng::substream;
use shiftsim_core::shift::cosine_density;
use shiftsim_core::{Complex64, FourierSeries, ObservationSet, ShiftDistribution};

fn dp_prior(n: usize, l_max: usize) -> PriorConfig {
    PriorConfig {
        sieve: SievePriorConfig { l_max, ..SievePriorConfig::adaptive(n) },
        shift: ShiftPrior::Dirichlet(DirichletPriorConfig::default()),
    }
}

fn theta(pairs: &[(i64, f64)]) -> FourierSeries {
    FourierSeries::from_pairs(&pairs.iter().map(|&(k, v)| (k, Complex64::new(v, 0.0))).collect::<Vec<_>>())
}

#[test]
fn without_data_the_weights_are_uniform() {
    let obs = ObservationSet::empty(2, 1.0);
    let ens = importance_posterior(&obs, &dp_prior(10, 3), 50, &mut substream(1, 0)).unwrap();
    assert!(ens.samples.iter().all(|s| (s.weight - 1.0 / 50.0).abs() < 1e-15));
    assert!((ens.diagnostics.ess - 50.0).abs() < 1e-9);
}

#[test]
fn dc_only_posterior_matches_conjugate_mean() {
    let truth = theta(&[(0, 0.7), (1, 0.5)]);
    let obs = simulate(&truth, &ShiftDistribution::uniform(64), 30, 0, 1.0, 3).unwrap();
    let prior = dp_prior(30, 3);
    let ens = importance_posterior(&obs, &prior, 20_000, &mut substream(3, 1)).unwrap();
    // closed form: S_0 / (n + ξ^{−2})
    let s0: Complex64 = (0..obs.n()).map(|j| obs.coeff(j, 0)).sum();
    let expect = s0 / (obs.n() as f64 + 1.0 / prior.sieve.xi2());
    let (re, se_re) = ens.mean_se(|s| s.theta.get(0).re);
    let (im, se_im) = ens.mean_se(|s| s.theta.get(0).im);
    assert!((re - expect.re).abs() <= 3.0 * se_re, "{re} vs {}", expect.re);
    assert!((im - expect.im).abs() <= 3.0 * se_im, "{im} vs {}", expect.im);
}

#[test]
fn doubling_draws_shrinks_the_error_by_root_two() {
    let truth = theta(&[(0, 0.4)]);
    let obs = simulate(&truth, &ShiftDistribution::uniform(64), 10, 0, 1.0, 4).unwrap();
    let prior = dp_prior(10, 2);
    let a = importance_posterior(&obs, &prior, 10_000, &mut substream(4, 1)).unwrap();
    let b = importance_posterior(&obs, &prior, 20_000, &mut substream(4, 2)).unwrap();
    let ratio = a.mean_se(|s| s.theta.get(0).re).1 / b.mean_se(|s| s.theta.get(0).re).1;
    assert!((1.2..1.7).contains(&ratio), "ratio {ratio}");
}

#[test]
fn noiseless_single_atom_shifts_sit_on_the_atom() {
    let truth = theta(&[(1, 1.0), (2, 0.5)]);
    let obs = simulate(&truth, &ShiftDistribution::point(0.3), 50, 2, 0.0, 5).unwrap();
    let opts = GibbsOptions { steps: 150, burn_in: 50, record_shifts: true, ..GibbsOptions::default() };
    let ens = gibbs_posterior(&obs, &dp_prior(50, 3), &opts, &mut substream(5, 0)).unwrap();
    // the posterior is rotation invariant, so compare in the θ_1 ≥ 0 gauge
    let aligned: Vec<Sample> = ens.samples.iter().map(Sample::aligned).collect();
    for j in 0..obs.n() {
        let mut dev: Vec<f64> = aligned
            .iter()
            .map(|s| {
                let d = (s.shifts.as_ref().unwrap()[j] - 0.3).rem_euclid(1.0);
                d.min(1.0 - d)
            })
            .collect();
        dev.sort_by(f64::total_cmp);
        assert!(dev[dev.len() / 2] < 2.0 / 1024.0, "curve {j}: median deviation {}", dev[dev.len() / 2]);
    }
    assert_eq!(ens.diagnostics.sigma_used, Some(0.1));
}

#[test]
fn longer_runs_leave_the_posterior_mean_in_place() {
    let truth = theta(&[(1, 0.8)]);
    let obs = simulate(&truth, &cosine_density(256, 0.8).unwrap(), 15, 2, 1.0, 6).unwrap();
    let prior = dp_prior(15, 2);
    let short = GibbsOptions { steps: 4000, burn_in: 500, ..GibbsOptions::default() };
    let long = GibbsOptions { steps: 8000, burn_in: 500, ..GibbsOptions::default() };
    let m = |s: &Sample| s.theta.get(1).norm();
    let (a, sa) = gibbs_posterior(&obs, &prior, &short, &mut substream(6, 1)).unwrap().mean_se(m);
    let (b, sb) = gibbs_posterior(&obs, &prior, &long, &mut substream(6, 2)).unwrap().mean_se(m);
    assert!((a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt(), "{a} ± {sa} vs {b} ± {sb}");
}

#[test]
fn smooth_prior_chain_reports_pcn_acceptance() {
    let truth = theta(&[(1, 1.0)]);
    let obs = simulate(&truth, &cosine_density(256, 0.5).unwrap(), 20, 1, 1.0, 7).unwrap();
    let prior = PriorConfig {
        sieve: SievePriorConfig { l_max: 2, ..SievePriorConfig::adaptive(20) },
        shift: ShiftPrior::Smooth(SmoothPriorConfig::default()),
    };
    let opts = GibbsOptions { steps: 200, burn_in: 50, ..GibbsOptions::default() };
    let ens = gibbs_posterior(&obs, &prior, &opts, &mut substream(7, 0)).unwrap();
    let acc = ens.diagnostics.pcn_acceptance.unwrap();
    assert!(acc > 0.0 && acc < 1.0);
    assert_eq!(ens.diagnostics.pcn_beta, Some(0.1));
    assert!(ens.samples.iter().all(|s| matches!(s.g, ShiftDistribution::Grid { .. })));
    assert_eq!(ens.len(), 150);
}

#[test]
fn ball_mass_limits_and_monotonicity() {
    let truth = theta(&[(1, 1.0)]);
    let g0 = cosine_density(256, 0.5).unwrap();
    let obs = simulate(&truth, &g0, 10, 1, 1.0, 8).unwrap();
    let prior = PriorConfig {
        sieve: SievePriorConfig { l_max: 2, ..SievePriorConfig::adaptive(10) },
        shift: ShiftPrior::Smooth(SmoothPriorConfig { grid: 256, ..SmoothPriorConfig::default() }),
    };
    let ens = importance_posterior(&obs, &prior, 40, &mut substream(8, 0)).unwrap();
    let d: Vec<f64> = distances_to(&ens, &truth, &g0, Metric::H2, 1000, 9)
        .unwrap()
        .iter()
        .map(|e| as_distance(Metric::H2, e))
        .collect();
    let w = ens.weights();
    assert!((ball_mass_from(&w, &d, f64::INFINITY) - 1.0).abs() < 1e-12);
    assert_eq!(ball_mass_from(&w, &d, 0.0), 0.0);
    let mut last = 0.0;
    for i in 0..=40 {
        let m = ball_mass_from(&w, &d, i as f64 * 0.05);
        assert!(m >= last);
        last = m;
    }
}

#[test]
fn contraction_requires_increasing_sizes() {
    let truth = theta(&[(1, 1.0)]);
    let g0 = cosine_density(256, 1.0).unwrap();
    let cfg = ContractionConfig::default();
    assert!(contraction_experiment(&truth, &g0, &[200, 50], &cfg, 1).is_err());
}

#[test]
fn gibbs_rejects_bad_options() {
    let obs = simulate(&theta(&[(1, 1.0)]), &ShiftDistribution::uniform(64), 5, 1, 1.0, 1).unwrap();
    let prior = dp_prior(5, 2);
    let bad = GibbsOptions { steps: 10, burn_in: 10, ..GibbsOptions::default() };
    assert!(gibbs_posterior(&obs, &prior, &bad, &mut substream(1, 0)).is_err());
    let none = GibbsOptions { steps: 0, burn_in: 0, ..GibbsOptions::default() };
    assert!(gibbs_posterior(&obs, &prior, &none, &mut substream(1, 0)).is_err());
}
