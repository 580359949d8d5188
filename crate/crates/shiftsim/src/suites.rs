//! Verification suites behind `shiftsim verify`.
//!
//! Each row compares a value with a bound; Monte Carlo rows pass when the
//! value exceeds the bound by at most three standard errors.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use shiftsim_core::distances::{
    e1_bound, e3_bound, mc_distance_seeded, tv_bound_f, tv_bound_g, DistanceEstimate, Metric,
};
use shiftsim_core::rng::{derive_seed, substream};
use shiftsim_core::special::{a_n_quadrature, bessel_i, sample_complex_gaussian};
use shiftsim_core::{Complex64, FourierSeries, MixtureLaw, ShiftDistribution};

use crate::error::Result;
use crate::parallel::try_par_map;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub check: String,
    pub value: f64,
    pub bound: f64,
    pub std_error: f64,
    pub pass: bool,
}

impl Check {
    fn below(check: String, value: f64, bound: f64, std_error: f64) -> Self {
        Check { check, value, bound, std_error, pass: value - bound <= 3.0 * std_error }
    }

    fn estimate(check: String, e: &DistanceEstimate, bound: f64) -> Self {
        Self::below(check, e.value, bound, e.std_error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Distance sandwich, Pinsker and the perturbation bounds on random laws.
    Distances,
    /// Bessel series against trapezoid quadrature.
    Bessel,
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub instances: usize,
    pub samples: usize,
    pub seed: u64,
    pub threads: usize,
}

pub fn run(suite: Suite, opts: &SuiteOptions) -> Result<Vec<Check>> {
    match suite {
        Suite::Distances => distances(opts),
        Suite::Bessel => Ok(bessel()),
    }
}

fn random_theta(rng: &mut ChaCha8Rng, cutoff: usize, scale: f64) -> FourierSeries {
    let mut f = FourierSeries::zeros(cutoff);
    for k in -(cutoff as i64)..=cutoff as i64 {
        f.set(k, sample_complex_gaussian(rng) * (scale / (1.0 + k.abs() as f64)));
    }
    f
}

fn random_g(rng: &mut ChaCha8Rng) -> Result<ShiftDistribution> {
    Ok(match rng.random_range(0..3) {
        0 => {
            let m = rng.random_range(1..=4);
            let raw: Vec<(f64, f64)> = (0..m).map(|_| (rng.random::<f64>(), 0.1 + rng.random::<f64>())).collect();
            let t: f64 = raw.iter().map(|a| a.1).sum();
            ShiftDistribution::discrete(raw.into_iter().map(|(x, w)| (x, w / t)).collect())?
        }
        1 => {
            let (a, b) = (0.5 * rng.random::<f64>(), rng.random::<f64>());
            let (c, d) = (0.4 * rng.random::<f64>(), rng.random::<f64>());
            ShiftDistribution::grid_from_fn(256, |x| 1.0 + a * (TAU * (x - b)).cos() + c * (2.0 * TAU * (x - d)).cos())?
        }
        _ => {
            let k = 3usize;
            let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * k + 1];
            coeffs[k] = Complex64::new(1.0, 0.0);
            for r in 1..=k {
                let v = Complex64::from_polar(0.3 * rng.random::<f64>() / r as f64, TAU * rng.random::<f64>());
                coeffs[k + r] = v;
                coeffs[k - r] = v.conj();
            }
            ShiftDistribution::fourier(k, coeffs)?
        }
    })
}

fn distance_instance(i: usize, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut rng = substream(opts.seed, i as u64);
    let l = rng.random_range(1..=3usize);
    let f = random_theta(&mut rng, l, 0.8);
    let pert = random_theta(&mut rng, l, 0.25);
    let ft = FourierSeries::new(l, f.coeffs().iter().zip(pert.coeffs()).map(|(a, b)| a + b).collect())?;
    let g = random_g(&mut rng)?;
    let gt = random_g(&mut rng)?;
    let s = derive_seed(&mut rng);
    let law = |f: &FourierSeries, g: &ShiftDistribution| MixtureLaw::new(f.project(l), g.clone());
    let mc = |p: &MixtureLaw, q: &MixtureLaw, m: Metric, k: u64| mc_distance_seeded(p, q, m, opts.samples, s.wrapping_add(k));

    let p = law(&f, &g)?;
    let q = law(&ft, &gt)?;
    let tv = mc(&p, &q, Metric::Tv, 0)?;
    let h2 = mc(&p, &q, Metric::H2, 1)?;
    let kl = mc(&p, &q, Metric::Kl, 2)?;
    let tv2_se = 2.0 * tv.value * tv.std_error;
    let mut rows = vec![
        Check::below(
            format!("hellinger_lower#{i}"),
            0.5 * h2.value,
            tv.value,
            (0.25 * h2.std_error.powi(2) + tv.std_error.powi(2)).sqrt(),
        ),
        Check::below(format!("hellinger_upper#{i}"), tv.value.powi(2), h2.value, tv2_se.hypot(h2.std_error)),
        Check::below(format!("pinsker#{i}"), tv.value.powi(2), 0.5 * kl.value, tv2_se.hypot(0.5 * kl.std_error)),
    ];
    rows.push(Check::estimate(format!("tv_shape#{i}"), &mc(&p, &law(&ft, &g)?, Metric::Tv, 3)?, tv_bound_f(&f, &ft)));
    rows.push(Check::estimate(format!("tv_shift#{i}"), &mc(&p, &law(&f, &gt)?, Metric::Tv, 4)?, tv_bound_g(&f, &g, &gt)?));
    let f_l = f.project(l - 1);
    let e1 = e1_bound(&f, l - 1);
    let truncated = law(&f_l, &g)?;
    rows.push(Check::estimate(format!("truncation_h2#{i}"), &mc(&p, &truncated, Metric::H2, 5)?, e1 * e1));
    rows.push(Check::estimate(format!("truncation_kl#{i}"), &mc(&p, &truncated, Metric::Kl, 6)?, e1 * e1));
    let e3 = e3_bound(&ft, &f_l.project(l));
    rows.push(Check::estimate(format!("approximation_h2#{i}"), &mc(&truncated, &law(&ft, &g)?, Metric::H2, 7)?, e3 * e3));
    Ok(rows)
}

fn distances(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let per = try_par_map(opts.instances, opts.threads, |i| distance_instance(i, opts))?;
    Ok(per.into_iter().flatten().collect())
}

fn bessel() -> Vec<Check> {
    let mut rows = Vec::new();
    for n in 0..=20u32 {
        for i in 0..=20 {
            let a = 0.5 * i as f64;
            let d = (TAU * bessel_i(n, a) - a_n_quadrature(n as i64, a, 512)).abs();
            rows.push(Check { check: format!("quadrature n={n} a={a}"), value: d, bound: 1e-8, std_error: 0.0, pass: d < 1e-8 });
        }
    }
    rows
}
