//! Acceptance criteria, one verdict line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the verdict lines always
//! reach stdout; the process exits non-zero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use shiftsim_core::distances::{
    e1_bound, e3_bound, hellinger_sq_point_shift, mc_distance_seeded, sandwich_from, tv_bound_f, tv_bound_g,
    tv_gaussians, DistanceEstimate, Metric,
};
use shiftsim_core::mixture::{girsanov_log_ratio, MixtureLaw};
use shiftsim_core::model::simulate;
use shiftsim_core::nets::{
    bracketing_net, first_marginal, g_separation, identifiability_probe, FanoNet,
};
use shiftsim_core::posterior::{
    contraction_experiment, gibbs_posterior, importance_posterior, refresh_theta, ContractionConfig,
    GibbsOptions, PriorConfig, ShiftPrior,
};
use shiftsim_core::priors::{
    interval_mass, lambda_pmf, sample_dp, sample_f, sample_smooth, DirichletPriorConfig, SievePriorConfig,
    SmoothPriorConfig,
};
use shiftsim_core::rng::substream;
use shiftsim_core::shift::cosine_density;
use shiftsim_core::special::{a_n_quadrature, bessel_i, bessel_i_scaled, sample_complex_gaussian};
use shiftsim_core::{Complex64, FourierSeries, ShiftDistribution};

type Verdict = (bool, String);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_theta(rng: &mut ChaCha8Rng, cutoff: usize, scale: f64) -> FourierSeries {
    let mut f = FourierSeries::zeros(cutoff);
    for k in -(cutoff as i64)..=cutoff as i64 {
        f.set(k, sample_complex_gaussian(rng) * (scale / (1.0 + k.abs() as f64)));
    }
    f
}

fn random_g(rng: &mut ChaCha8Rng) -> ShiftDistribution {
    match rng.random_range(0..3) {
        0 => {
            let m = rng.random_range(1..=4);
            let raw: Vec<(f64, f64)> = (0..m).map(|_| (rng.random::<f64>(), 0.1 + rng.random::<f64>())).collect();
            let t: f64 = raw.iter().map(|a| a.1).sum();
            ShiftDistribution::discrete(raw.into_iter().map(|(x, w)| (x, w / t)).collect()).unwrap()
        }
        1 => {
            let (a, b, cc, d) = (0.5 * rng.random::<f64>(), rng.random::<f64>(), 0.4 * rng.random::<f64>(), rng.random::<f64>());
            ShiftDistribution::grid_from_fn(256, |x| 1.0 + a * (TAU * (x - b)).cos() + cc * (2.0 * TAU * (x - d)).cos())
                .unwrap()
        }
        _ => {
            let k = 3usize;
            let mut coeffs = vec![c(0.0, 0.0); 2 * k + 1];
            coeffs[k] = c(1.0, 0.0);
            for r in 1..=k {
                let v = Complex64::from_polar(0.3 * rng.random::<f64>() / r as f64, TAU * rng.random::<f64>());
                coeffs[k + r] = v;
                coeffs[k - r] = v.conj();
            }
            ShiftDistribution::fourier(k, coeffs).unwrap()
        }
    }
}

fn law(f: &FourierSeries, g: &ShiftDistribution, cutoff: usize) -> MixtureLaw {
    MixtureLaw::new(f.project(cutoff), g.clone()).unwrap()
}

/// `estimate ≤ bound` up to three standard errors.
fn below(e: &DistanceEstimate, bound: f64) -> bool {
    e.value - bound <= 3.0 * e.std_error
}

fn criterion_1() -> Verdict {
    let mut rng = substream(101, 0);
    let samples = 1_000_000;
    let (mut fails, mut worst) = (0, 0.0f64);
    for pair in 0..20 {
        let cutoff = if pair < 10 { 0 } else { 1 };
        let f = random_theta(&mut rng, cutoff, 1.0);
        let ft = random_theta(&mut rng, cutoff, 1.0);
        let (a, b) = (rng.random::<f64>(), rng.random::<f64>());
        let p = MixtureLaw::new(f.clone(), ShiftDistribution::point(a)).unwrap();
        let q = MixtureLaw::new(ft.clone(), ShiftDistribution::point(b)).unwrap();
        let tv_exact = tv_gaussians(f.rotate(a).coeffs(), ft.rotate(b).coeffs()).unwrap();
        let h2_exact = hellinger_sq_point_shift(&f.rotate(a), &ft.rotate(b));
        for (metric, exact) in [(Metric::Tv, tv_exact), (Metric::H2, h2_exact)] {
            let e = mc_distance_seeded(&p, &q, metric, samples, 1000 + pair as u64).unwrap();
            let z = (e.value - exact).abs() / e.std_error.max(1e-300);
            worst = worst.max(z);
            if !e.agrees_with(exact, 3.0) {
                fails += 1;
            }
        }
    }
    (fails == 0, format!("40 comparisons at 1e6 samples, {fails} outside 3 SE, max |z| = {worst:.2}"))
}

fn criterion_2() -> Verdict {
    let mut rng = substream(202, 0);
    let samples = 4096;
    let mut violations = Vec::new();
    let mut checks = 0;
    for i in 0..100u64 {
        let l = rng.random_range(1..=3usize);
        let f = random_theta(&mut rng, l, 0.8);
        let pert = random_theta(&mut rng, l, 0.25);
        let ft = FourierSeries::new(l, f.coeffs().iter().zip(pert.coeffs()).map(|(a, b)| a + b).collect()).unwrap();
        let g = random_g(&mut rng);
        let gt = random_g(&mut rng);
        let s = 10 * i;
        let p = law(&f, &g, l);
        let q = law(&ft, &gt, l);
        let rep = sandwich_from(
            mc_distance_seeded(&p, &q, Metric::Tv, samples, s).unwrap(),
            mc_distance_seeded(&p, &q, Metric::H2, samples, s + 1).unwrap(),
            mc_distance_seeded(&p, &q, Metric::Kl, samples, s + 2).unwrap(),
        );
        checks += 3;
        if !rep.all_ok() {
            violations.push(format!("sandwich#{i}"));
        }
        let tv_f = mc_distance_seeded(&p, &law(&ft, &g, l), Metric::Tv, samples, s + 3).unwrap();
        checks += 1;
        if !below(&tv_f, tv_bound_f(&f, &ft)) {
            violations.push(format!("tv_f#{i}"));
        }
        let tv_g = mc_distance_seeded(&p, &law(&f, &gt, l), Metric::Tv, samples, s + 4).unwrap();
        checks += 1;
        if !below(&tv_g, tv_bound_g(&f, &g, &gt).unwrap()) {
            violations.push(format!("tv_g#{i}"));
        }
        let lp = l - 1;
        let f_l = f.project(lp);
        let e1 = e1_bound(&f, lp);
        let h2_e1 = mc_distance_seeded(&p, &law(&f_l, &g, l), Metric::H2, samples, s + 5).unwrap();
        let kl_e1 = mc_distance_seeded(&p, &law(&f_l, &g, l), Metric::Kl, samples, s + 6).unwrap();
        checks += 2;
        if !below(&h2_e1, e1 * e1) || !below(&kl_e1, e1 * e1) {
            violations.push(format!("e1#{i}"));
        }
        let e3 = e3_bound(&ft, &f_l.project(l));
        let h2_e3 = mc_distance_seeded(&law(&f_l, &g, l), &law(&ft, &g, l), Metric::H2, samples, s + 7).unwrap();
        checks += 1;
        if !below(&h2_e3, e3 * e3) {
            violations.push(format!("e3#{i}"));
        }
    }
    (violations.is_empty(), format!("100 instances, {checks} bound checks, {} violations {:?}", violations.len(), violations))
}

fn criterion_3() -> Verdict {
    let mut worst_q = 0.0f64;
    for n in 0..=20i64 {
        for i in 0..=20 {
            let a = 0.5 * i as f64;
            let d = (TAU * bessel_i(n as u32, a) - a_n_quadrature(n, a, 512)).abs();
            worst_q = worst_q.max(d);
        }
    }
    let mut rng = substream(303, 0);
    let mut worst_g = 0.0f64;
    for _ in 0..100 {
        let a = 10.0 * rng.random::<f64>();
        let u = TAU * rng.random::<f64>();
        // scaled by e^{−a}: the unscaled sum cancels catastrophically when cos u < 0
        let mut s = bessel_i_scaled(0, a);
        for n in 1..=80u32 {
            s += 2.0 * bessel_i_scaled(n, a) * (n as f64 * u).cos();
        }
        worst_g = worst_g.max((s - (a * (u.cos() - 1.0)).exp()).abs());
    }
    let mut small_ok = true;
    for n in 1..=20u32 {
        for i in 1..=20 {
            let a = (n as f64).sqrt() * i as f64 / 20.0;
            let lead = (0.5 * a).powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
            let rel = (bessel_i(n, a) / lead - 1.0).abs();
            if rel >= 2.0 * a / n as f64 {
                small_ok = false;
            }
        }
    }
    let pass = worst_q < 1e-8 && worst_g < 1e-10 && small_ok;
    (
        pass,
        format!("max |2πI_n − A_n| = {worst_q:.2e}, generating-function err (scaled) = {worst_g:.2e}, small-a bound (n ≤ 20) ok = {small_ok}"),
    )
}

fn criterion_4() -> Verdict {
    let mut rng = substream(404, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (l1, l0) = (rng.random_range(1..=3usize), rng.random_range(1..=3usize));
        let big = l1.max(l0);
        let f = random_theta(&mut rng, l1, 0.8);
        let f0 = random_theta(&mut rng, l0, 0.8);
        let (g, g0) = (random_g(&mut rng), random_g(&mut rng));
        let y: Vec<Complex64> = (0..2 * big + 1).map(|_| sample_complex_gaussian(&mut rng) * 1.5).collect();
        let r = girsanov_log_ratio(&MixtureLaw::new(f.clone(), g.clone()).unwrap(), &MixtureLaw::new(f0.clone(), g0.clone()).unwrap(), &y)
            .unwrap();
        let direct = law(&f, &g, big).log_density(&y).unwrap() - law(&f0, &g0, big).log_density(&y).unwrap();
        worst = worst.max((r - direct).abs());
    }
    let f0 = FourierSeries::from_pairs(&[(1, c(1.0, 0.0)), (2, c(0.3, 0.2))]);
    let f = FourierSeries::from_pairs(&[(1, c(0.8, 0.1)), (2, c(0.4, 0.0))]);
    let g0 = cosine_density(256, 0.6).unwrap();
    let g = ShiftDistribution::uniform(256);
    let p0 = MixtureLaw::new(f0, g0).unwrap();
    let p = MixtureLaw::new(f, g).unwrap();
    let mut srng = substream(405, 0);
    let ratios: Vec<f64> = (0..100_000).map(|_| girsanov_log_ratio(&p, &p0, &p0.sample(&mut srng)).unwrap().exp()).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (ratios.len() - 1) as f64;
    let se = (var / ratios.len() as f64).sqrt();
    let pass = worst < 1e-10 && (mean - 1.0).abs() <= 3.0 * se;
    (pass, format!("max log-ratio discrepancy {worst:.2e}; E[ratio] = {mean:.4} ± {se:.4} at 1e5 curves"))
}

fn criterion_5() -> Verdict {
    let cfg = SievePriorConfig { l_max: 6, ..SievePriorConfig::adaptive(100) };
    let mut rng = substream(505, 0);
    let draws = 100_000;
    let v: f64 = (0..draws).map(|_| sample_f(&cfg, &mut rng).get(0).norm_sqr()).sum::<f64>() / draws as f64;
    let xi2 = 100f64.powf(-0.25) * 100f64.ln().powf(-1.5);
    let var_ok = (v / xi2 - 1.0).abs() < 0.02;
    let lam_ok = (lambda_pmf(&cfg).iter().sum::<f64>() - 1.0).abs() <= 1e-15;

    let dp = DirichletPriorConfig::default();
    let masses: Vec<f64> = (0..10_000).map(|_| interval_mass(&sample_dp(&dp, &mut rng).unwrap(), 0.0, 0.5)).collect();
    let n = masses.len() as f64;
    let mean = masses.iter().sum::<f64>() / n;
    let var = masses.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = masses.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    // Dirichlet moments of g([0,1/2)) ~ Beta(m/2, m/2) with m = 1
    let (mu_t, var_t) = (0.5, 0.25 / 2.0);
    let dp_ok = (mean - mu_t).abs() <= 3.0 * (var / n).sqrt() && (var - var_t).abs() <= 3.0 * ((m4 - var * var) / n).sqrt();

    let sc = SmoothPriorConfig::default();
    let mut smooth_ok = true;
    for _ in 0..20 {
        let d = sample_smooth(&sc, &mut rng).unwrap();
        let vals = d.density.to_grid(sc.grid).unwrap();
        let integral = vals.iter().sum::<f64>() / sc.grid as f64;
        smooth_ok &= (integral - 1.0).abs() <= 1e-9 && d.w[0] == d.w[sc.grid] && d.density.sobolev_radius(sc.nu) <= 2.0 * sc.radius;
    }
    (
        var_ok && lam_ok && dp_ok && smooth_ok,
        format!(
            "sieve var/ξ² = {:.4}; λ sum exact = {lam_ok}; DP mean {mean:.4} var {var:.4} (Beta: 0.5, 0.125) ok = {dp_ok}; smooth draws ok = {smooth_ok}",
            v / xi2
        ),
    )
}

fn criterion_6() -> Verdict {
    let truth = FourierSeries::from_pairs(&[(1, c(0.5, 0.0))]);
    let g0 = cosine_density(1024, 0.8).unwrap();
    let obs = simulate(&truth, &g0, 20, 2, 1.0, 606).unwrap();
    let prior = PriorConfig {
        sieve: SievePriorConfig { l_max: 2, ..SievePriorConfig::adaptive(20) },
        shift: ShiftPrior::Dirichlet(DirichletPriorConfig::default()),
    };
    let modulus = |s: &shiftsim_core::posterior::Sample| s.theta.get(1).norm();
    let is = importance_posterior(&obs, &prior, 300_000, &mut substream(606, 1)).unwrap();
    let (m_is, se_is) = is.mean_se(modulus);
    let opts = GibbsOptions { steps: 22_000, burn_in: 2_000, ..GibbsOptions::default() };
    let gb = gibbs_posterior(&obs, &prior, &opts, &mut substream(606, 2)).unwrap();
    let (m_g, se_g) = gb.mean_se(modulus);
    let combined = (se_is * se_is + se_g * se_g).sqrt();
    let agree = (m_is - m_g).abs() <= 3.0 * combined;

    // conjugate refresh against the closed form, shifts held at the truth
    let shifts = obs.true_shifts().unwrap().to_vec();
    let xi2 = prior.sieve.xi2();
    let n = obs.n() as f64;
    let k = 1i64;
    let s_k: Complex64 = (0..obs.n()).map(|j| obs.coeff(j, k) * Complex64::from_polar(1.0, TAU * k as f64 * shifts[j])).sum();
    let mean_t = s_k / (n + 1.0 / xi2);
    let var_t = 1.0 / (n + 1.0 / xi2);
    let mut rng = substream(607, 0);
    let draws: Vec<Complex64> = (0..10_000).map(|_| refresh_theta(&obs, &shifts, 2, xi2, 1.0, &mut rng).get(k)).collect();
    let m = draws.len() as f64;
    let mean: Complex64 = draws.iter().sum::<Complex64>() / m;
    let sq: Vec<f64> = draws.iter().map(|d| (d - mean_t).norm_sqr()).collect();
    let v = sq.iter().sum::<f64>() / m;
    let v_se = (sq.iter().map(|x| (x - v).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt();
    let comp_se = (var_t / 2.0 / m).sqrt();
    let conj_ok = (mean.re - mean_t.re).abs() <= 3.0 * comp_se
        && (mean.im - mean_t.im).abs() <= 3.0 * comp_se
        && (v - var_t).abs() <= 3.0 * v_se;
    (
        agree && conj_ok,
        format!(
            "E|θ_1|: importance {m_is:.4} ± {se_is:.4} (ESS {:.0}), Gibbs {m_g:.4} ± {se_g:.4}; conjugate refresh ok = {conj_ok}",
            is.diagnostics.ess
        ),
    )
}

fn criterion_7() -> Verdict {
    let truth = FourierSeries::from_pairs(&[(1, c(1.0, 0.0)), (2, c(0.5, 0.0))]);
    let g0 = cosine_density(1024, 1.0).unwrap();
    let cfg = ContractionConfig::default();
    let rows = contraction_experiment(&truth, &g0, &[50, 200, 800], &cfg, 707).unwrap();
    let med: Vec<f64> = rows.iter().map(|r| r.median_dh).collect();
    let decreasing = med.windows(2).all(|w| w[1] < w[0]);

    let obs = simulate(&truth, &g0, 200, cfg.obs_cutoff, 0.0, 708).unwrap();
    let prior = PriorConfig { sieve: cfg.sieve.at(200, cfg.l_max), shift: cfg.shift.clone() };
    let ens = gibbs_posterior(&obs, &prior, &cfg.gibbs, &mut substream(708, 1)).unwrap();
    let err0 = ens.mean_theta_aligned().project(3).distance(&truth.project(3));
    (
        decreasing && err0 < 0.05,
        format!(
            "median d_H over n = 50/200/800: {:.4} / {:.4} / {:.4}; ε_n = {:.3} / {:.3} / {:.3}; σ=0 aligned ‖f̂−f⁰‖ = {err0:.4}",
            med[0], med[1], med[2], rows[0].eps_n, rows[1].eps_n, rows[2].eps_n
        ),
    )
}

fn criterion_8() -> Verdict {
    let net = FanoNet::new(8, 1.0, 2.5, 1.5, 2.0).unwrap();
    let mut inv = net.fs.iter().all(|f| f.get(1) == c(1.0, 0.0));
    for g in &net.gs {
        inv &= g.to_grid(4096).unwrap().iter().all(|&v| v >= 0.0) && g.sobolev_radius(1.5) <= 2.0;
    }
    let sep = 2.0 / 8.0 * (PI / 8.0).sin();
    let min_dist = (1..8).map(|j| net.fs[j].distance(&net.fs[0])).fold(f64::INFINITY, f64::min);
    let cert = shiftsim_core::nets::fano_tv_certificate(&net, 1_000_000, 808).unwrap();
    let order = cert.ordering_holds();
    let max_matched = cert.max_matched();
    let holds = (1..8).filter(|&j| cert.matched[j].value < cert.mismatched[j].value).count();
    let min_gap = (1..8)
        .map(|j| {
            let (m, x) = (&cert.matched[j], &cert.mismatched[j]);
            (x.value - m.value) / m.std_error.hypot(x.std_error)
        })
        .fold(f64::INFINITY, f64::min);
    (
        inv && order && min_dist >= sep - 1e-15 && max_matched < 0.05,
        format!(
            "invariants ok = {inv}; min ‖f_j − f_1‖ = {min_dist:.4} (≥ {sep:.4}); matched < mismatched TV for {holds}/7 j (smallest gap {min_gap:.1} SE, max matched {max_matched:.2e}): {order}"
        ),
    )
}

fn criterion_9() -> Verdict {
    let mut rng = substream(909, 0);
    let mut theta = random_theta(&mut rng, 2, 1.0);
    let s = 2.0 / theta.h1_norm();
    theta = FourierSeries::new(2, theta.coeffs().iter().map(|v| v * s).collect()).unwrap();
    let eps = 0.1;
    let net = bracketing_net(&theta, eps).unwrap();
    let p = theta.dim() as f64;
    let mut contained = 0;
    for _ in 0..1000 {
        let phi = rng.random::<f64>();
        let i = net.cell_of(phi);
        let mean = theta.rotate(phi);
        let spread = 0.3 + 2.0 * rng.random::<f64>();
        let z: Vec<Complex64> = mean.coeffs().iter().map(|m| m + sample_complex_gaussian(&mut rng) * spread).collect();
        let d2: f64 = z.iter().zip(mean.coeffs()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let log_gamma = -p * PI.ln() - d2;
        if net.lower_log_density(i, &z) <= log_gamma && log_gamma <= net.upper_log_density(i, &z) {
            contained += 1;
        }
    }
    let width = net.hellinger_sq_bound().sqrt();
    let count_ok = net.len() <= net.count_bound();
    (
        contained == 1000 && width <= eps && count_ok,
        format!(
            "‖θ‖_H1 = {:.3}; containment {contained}/1000; d_H(l,u) = {width:.5} ≤ {eps}; K = {} ≤ {}",
            theta.h1_norm(),
            net.len(),
            net.count_bound()
        ),
    )
}

fn criterion_10() -> Verdict {
    let mut rng = substream(1010, 0);
    let theta1 = 1.0;
    let mut ok = 0;
    let mut nonneg = true;
    let mut zero_ok = true;
    for i in 0..20u64 {
        let g = random_g(&mut rng);
        let gt = random_g(&mut rng);
        let f = g_separation(theta1, &g, &gt, 24);
        nonneg &= f >= 0.0;
        zero_ok &= g_separation(theta1, &g, &g, 24) == 0.0;
        let tv = mc_distance_seeded(&first_marginal(theta1, &g).unwrap(), &first_marginal(theta1, &gt).unwrap(), Metric::Tv, 200_000, 1010 + i)
            .unwrap();
        if f <= tv.value + 3.0 * tv.std_error {
            ok += 1;
        }
    }
    let g0 = cosine_density(1024, 0.5).unwrap();
    let probe = identifiability_probe(theta1, &g0, &[0.0, 0.05, 0.1, 0.2], 1_000_000, 1011).unwrap();
    let zero = probe.tvs[0].value;
    let slope_ok = (1.0..=3.5).contains(&probe.slope);
    (
        nonneg && zero_ok && ok == 20 && slope_ok && zero == 0.0,
        format!(
            "functional ≥ 0: {nonneg}, zero at g = g̃: {zero_ok}, lower-bounds MC TV on {ok}/20 pairs; TV(η) = {:.4}/{:.4}/{:.4}, slope {:.3}",
            probe.tvs[1].value, probe.tvs[2].value, probe.tvs[3].value, probe.slope
        ),
    )
}

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("closed-form oracles", criterion_1),
        ("inequality suite", criterion_2),
        ("Bessel", criterion_3),
        ("Girsanov", criterion_4),
        ("priors", criterion_5),
        ("posterior oracles", criterion_6),
        ("contraction", criterion_7),
        ("Fano net", criterion_8),
        ("bracketing", criterion_9),
        ("identifiability probes", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = run();
        failed += !pass as usize;
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.1}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
