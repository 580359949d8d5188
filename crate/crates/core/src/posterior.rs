//! Posterior computation over `(f, g)`.
//!
//! Two independent samplers target the same posterior: self-normalised
//! importance sampling from the prior, and a data-augmented Gibbs sampler
//! that carries the latent shifts on a grid of `G` points so that the
//! coefficient update is conjugate.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::distances::{mc_distance_seeded, DistanceEstimate, Metric};
use crate::fourier::FourierSeries;
use crate::mixture::{log_likelihood, MixtureLaw};
use crate::model::{simulate, ObservationSet};
use crate::numeric::{mean_se, pairwise_sum, wrap01};
use crate::priors::{
    density_from_gp, sample_dp, sample_f, sample_gp, sample_smooth, DirichletPriorConfig,
    SievePriorConfig, SmoothPriorConfig,
};
use crate::rng::substream;
use crate::shift::ShiftDistribution;
use crate::special::sample_complex_gaussian;
use crate::{Error, Result};

/// Prior on the shift distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftPrior {
    Dirichlet(DirichletPriorConfig),
    Smooth(SmoothPriorConfig),
}

impl ShiftPrior {
    pub fn name(&self) -> &'static str {
        match self {
            ShiftPrior::Dirichlet(_) => "dirichlet",
            ShiftPrior::Smooth(_) => "smooth",
        }
    }
}

/// Joint prior `Π = sieve ⊗ shift prior`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorConfig {
    pub sieve: SievePriorConfig,
    pub shift: ShiftPrior,
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        self.sieve.validate()?;
        match &self.shift {
            ShiftPrior::Dirichlet(c) => c.validate(),
            ShiftPrior::Smooth(c) => c.validate(),
        }
    }
}

/// One weighted posterior draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub theta: FourierSeries,
    pub g: ShiftDistribution,
    pub weight: f64,
    /// Latent shifts of the Gibbs sampler, when recorded.
    pub shifts: Option<Vec<f64>>,
}

impl Sample {
    /// The draw in the gauge `θ_1 ≥ 0`, with shifts moved accordingly.
    pub fn aligned(&self) -> Sample {
        let (theta, a) = self.theta.aligned();
        Sample {
            theta,
            g: self.g.shifted(a),
            weight: self.weight,
            shifts: self.shifts.as_ref().map(|s| s.iter().map(|t| wrap01(t - a)).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    Importance,
    Mcmc,
}

/// Sampler diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Kish ESS for importance sampling; autocorrelation ESS of `|θ_1|` for
    /// MCMC.
    pub ess: f64,
    /// Set when `ess < 10`.
    pub low_ess: bool,
    pub level_acceptance: Option<f64>,
    pub pcn_acceptance: Option<f64>,
    pub pcn_beta: Option<f64>,
    /// Noise level the Gibbs sampler actually used.
    pub sigma_used: Option<f64>,
    pub steps: usize,
}

/// Posterior sample with weights summing to one.
#[derive(Debug, Clone)]
pub struct PosteriorEnsemble {
    pub kind: EnsembleKind,
    pub samples: Vec<Sample>,
    pub diagnostics: Diagnostics,
    pub prior: PriorConfig,
    pub gibbs: Option<GibbsOptions>,
}

impl PosteriorEnsemble {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.weight).collect()
    }

    /// Posterior mean of a functional with its Monte Carlo standard error
    /// (delta method for importance weights, 20 batch means for MCMC).
    pub fn mean_se(&self, h: impl Fn(&Sample) -> f64) -> (f64, f64) {
        let vals: Vec<f64> = self.samples.iter().map(&h).collect();
        match self.kind {
            EnsembleKind::Importance => {
                let terms: Vec<f64> = vals.iter().zip(&self.samples).map(|(v, s)| v * s.weight).collect();
                let mean = pairwise_sum(&terms);
                let sq: Vec<f64> =
                    vals.iter().zip(&self.samples).map(|(v, s)| (s.weight * (v - mean)).powi(2)).collect();
                (mean, pairwise_sum(&sq).sqrt())
            }
            EnsembleKind::Mcmc => batch_means(&vals, 20),
        }
    }

    /// Posterior mean of `θ` in the gauge `θ_1 ≥ 0`, padded to the largest
    /// cutoff in the ensemble.
    pub fn mean_theta_aligned(&self) -> FourierSeries {
        self.mean_theta_with(|s| s.theta.aligned().0)
    }

    /// Posterior mean of `θ` without alignment.
    pub fn mean_theta_raw(&self) -> FourierSeries {
        self.mean_theta_with(|s| s.theta.clone())
    }

    fn mean_theta_with(&self, f: impl Fn(&Sample) -> FourierSeries) -> FourierSeries {
        let cut = self.samples.iter().map(|s| s.theta.cutoff()).max().unwrap_or(0);
        let mut acc = vec![Complex64::new(0.0, 0.0); 2 * cut + 1];
        for s in &self.samples {
            let t = f(s).project(cut);
            for (a, c) in acc.iter_mut().zip(t.coeffs()) {
                *a += c * s.weight;
            }
        }
        FourierSeries::new(cut, acc).expect("finite posterior mean")
    }

    /// Posterior mean of the aligned shift distribution as bin densities.
    pub fn mean_g_aligned(&self, bins: usize) -> Vec<f64> {
        let mut acc = vec![0.0; bins];
        for s in &self.samples {
            let a = s.theta.alignment_shift();
            for (x, v) in acc.iter_mut().zip(bin_density(&s.g.shifted(a), bins)) {
                *x += s.weight * v;
            }
        }
        acc
    }
}

fn batch_means(vals: &[f64], batches: usize) -> (f64, f64) {
    let n = vals.len();
    let mean = pairwise_sum(vals) / n as f64;
    let b = batches.min(n);
    if b < 2 {
        return (mean, 0.0);
    }
    let size = n / b;
    let means: Vec<f64> = (0..b).map(|i| pairwise_sum(&vals[i * size..(i + 1) * size]) / size as f64).collect();
    (mean, mean_se(&means).1)
}

/// Bin densities (bin mass times `bins`) of a shift distribution.
pub fn bin_density(g: &ShiftDistribution, bins: usize) -> Vec<f64> {
    match g {
        ShiftDistribution::Discrete { atoms } => {
            let mut out = vec![0.0; bins];
            for &(x, w) in atoms {
                let b = ((wrap01(x) * bins as f64) as usize).min(bins - 1);
                out[b] += w * bins as f64;
            }
            out
        }
        _ => {
            let sub = 16;
            let v = g.to_grid(bins * sub).unwrap_or_else(|_| vec![1.0; bins * sub]);
            // sub-cell midpoints of the piecewise-linear interpolant
            (0..bins)
                .map(|b| {
                    (0..sub)
                        .map(|i| {
                            let c = b * sub + i;
                            0.5 * (v[c] + v[(c + 1) % v.len()])
                        })
                        .sum::<f64>()
                        / sub as f64
                })
                .collect()
        }
    }
}

/// Kish effective sample size `1/Σw²`.
pub fn kish_ess(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().map(|w| w * w).sum();
    if s > 0.0 {
        1.0 / s
    } else {
        0.0
    }
}

/// Autocorrelation ESS with Geyer's initial positive sequence.
pub fn autocorrelation_ess(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return n as f64;
    }
    let (mean, _) = mean_se(xs);
    let c0 = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return n as f64;
    }
    let rho = |lag: usize| -> f64 {
        (0..n - lag).map(|i| (xs[i] - mean) * (xs[i + lag] - mean)).sum::<f64>() / (n as f64 * c0)
    };
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    (n as f64 / tau.max(1.0)).min(n as f64)
}

// ------------------------------------------------------ importance sampling

/// Observations divided by `σ`, whose law under `(θ, g)` is `P_{θ/σ, g}`.
fn standardised(obs: &ObservationSet) -> Result<ObservationSet> {
    let s = obs.sigma();
    if !(s > 0.0) {
        return Err(Error::param("sigma", "importance sampling needs positive noise"));
    }
    let rows = obs.curves().map(|y| y.iter().map(|c| c / s).collect()).collect();
    ObservationSet::new(obs.cutoff(), 1.0, obs.seed(), rows, None)
}

fn draw_shift_prior<R: Rng + ?Sized>(prior: &ShiftPrior, rng: &mut R) -> Result<ShiftDistribution> {
    match prior {
        ShiftPrior::Dirichlet(c) => sample_dp(c, rng),
        ShiftPrior::Smooth(c) => Ok(sample_smooth(c, rng)?.density),
    }
}

/// Log-likelihood of `(θ, g)` for observations at noise level `σ`, up to a
/// term not depending on `(θ, g)`.
pub fn log_likelihood_scaled(theta: &FourierSeries, g: &ShiftDistribution, obs: &ObservationSet) -> Result<f64> {
    let std = standardised(obs)?;
    log_likelihood_standardised(theta, g, &std, obs.sigma())
}

fn log_likelihood_standardised(theta: &FourierSeries, g: &ShiftDistribution, std: &ObservationSet, sigma: f64) -> Result<f64> {
    // pad to the observed cutoff: frequencies a law omits are only
    // droppable when every compared law omits them too
    let t = theta.project(std.cutoff());
    let scaled = FourierSeries::new(t.cutoff(), t.coeffs().iter().map(|c| c / sigma).collect())?;
    log_likelihood(&MixtureLaw::new(scaled, g.clone())?, std)
}

/// Self-normalised importance sampling with the prior as proposal.
pub fn importance_posterior<R: Rng + ?Sized>(
    obs: &ObservationSet,
    prior: &PriorConfig,
    draws: usize,
    rng: &mut R,
) -> Result<PosteriorEnsemble> {
    if draws == 0 {
        return Err(Error::param("draws", "must be at least 1"));
    }
    prior.validate()?;
    let std = if obs.n() > 0 { Some(standardised(obs)?) } else { None };
    let mut samples = Vec::with_capacity(draws);
    let mut logs = Vec::with_capacity(draws);
    for _ in 0..draws {
        let theta = sample_f(&prior.sieve, rng);
        let g = draw_shift_prior(&prior.shift, rng)?;
        let ll = match &std {
            Some(s) => log_likelihood_standardised(&theta, &g, s, obs.sigma())?,
            None => 0.0,
        };
        logs.push(ll);
        samples.push(Sample { theta, g, weight: 0.0, shifts: None });
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total = pairwise_sum(&raw);
    for (s, r) in samples.iter_mut().zip(&raw) {
        s.weight = r / total;
    }
    let ess = kish_ess(&samples.iter().map(|s| s.weight).collect::<Vec<_>>());
    Ok(PosteriorEnsemble {
        kind: EnsembleKind::Importance,
        samples,
        diagnostics: Diagnostics { ess, low_ess: ess < 10.0, steps: draws, ..Default::default() },
        prior: prior.clone(),
        gibbs: None,
    })
}

// ------------------------------------------------------------------ Gibbs

/// Tuning of the Gibbs sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsOptions {
    pub steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Number of points of the shift grid.
    pub grid: usize,
    pub pcn_beta: f64,
    pub pcn_steps: usize,
    /// Lower bound on the noise level used by the sampler; makes the
    /// noiseless case well posed.
    pub noise_floor: f64,
    pub record_shifts: bool,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        GibbsOptions {
            steps: 2000,
            burn_in: 500,
            thin: 1,
            grid: 1024,
            pcn_beta: 0.1,
            pcn_steps: 5,
            noise_floor: 0.1,
            record_shifts: false,
        }
    }
}

/// Probability of proposing `to` from `from` in the level move.
pub fn level_proposal_prob(from: usize, to: usize, l_max: usize) -> f64 {
    if l_max <= 1 || from.abs_diff(to) != 1 || to < 1 || to > l_max {
        return 0.0;
    }
    if from == 1 || from == l_max {
        1.0
    } else {
        0.5
    }
}

/// Log acceptance ratio of the move `from → to` given the change
/// `delta_loglik` of the complete-data log-likelihood. Activated
/// coefficients are proposed from their prior, so their prior and proposal
/// densities cancel.
pub fn level_move_log_ratio(cfg: &SievePriorConfig, from: usize, to: usize, delta_loglik: f64) -> f64 {
    let q_fwd = level_proposal_prob(from, to, cfg.l_max);
    let q_rev = level_proposal_prob(to, from, cfg.l_max);
    if q_fwd == 0.0 || q_rev == 0.0 {
        return f64::NEG_INFINITY;
    }
    cfg.log_lambda_unnorm(to) - cfg.log_lambda_unnorm(from) + delta_loglik + q_rev.ln() - q_fwd.ln()
}

/// `S_k = Σ_j y_{k,j} e^{+i2πkτ_j}`.
pub fn shift_sums(obs: &ObservationSet, shifts: &[f64], k: i64) -> Complex64 {
    let terms: Vec<Complex64> =
        shifts.iter().enumerate().map(|(j, &t)| obs.coeff(j, k) * crate::numeric::cis_neg(-(k as f64) * t)).collect();
    let re: Vec<f64> = terms.iter().map(|c| c.re).collect();
    let im: Vec<f64> = terms.iter().map(|c| c.im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

/// Conditional law of `θ_k` given the shifts: complex Gaussian with the
/// returned mean and variance `1/(n/s² + ξ^{−2})` (`s` the noise level).
pub fn conjugate_moments(obs: &ObservationSet, shifts: &[f64], k: i64, xi2: f64, sigma: f64) -> (Complex64, f64) {
    let s2 = sigma * sigma;
    if k.unsigned_abs() as usize > obs.cutoff() {
        return (Complex64::new(0.0, 0.0), xi2);
    }
    let prec = obs.n() as f64 / s2 + 1.0 / xi2;
    (shift_sums(obs, shifts, k) / s2 / prec, 1.0 / prec)
}

/// Redraw `θ_k`, `|k| ≤ level`, from its conditional given the shifts.
pub fn refresh_theta<R: Rng + ?Sized>(
    obs: &ObservationSet,
    shifts: &[f64],
    level: usize,
    xi2: f64,
    sigma: f64,
    rng: &mut R,
) -> FourierSeries {
    let mut theta = FourierSeries::zeros(level);
    for k in -(level as i64)..=level as i64 {
        let (m, v) = conjugate_moments(obs, shifts, k, xi2, sigma);
        theta.set(k, m + sample_complex_gaussian(rng) * v.sqrt());
    }
    theta
}

fn sample_log_categorical<R: Rng + ?Sized>(logw: &[f64], rng: &mut R) -> usize {
    let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut cum = Vec::with_capacity(logw.len());
    let mut acc = 0.0;
    for &l in logw {
        acc += (l - top).exp();
        cum.push(acc);
    }
    let u = rng.random::<f64>() * acc;
    cum.partition_point(|&c| c <= u).min(logw.len() - 1)
}

fn draw_cum<R: Rng + ?Sized>(cum: &[f64], rng: &mut R) -> usize {
    let u = rng.random::<f64>() * cum[cum.len() - 1];
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

enum ShiftState {
    Dirichlet { atoms: Vec<usize>, weights: Vec<f64>, labels: Vec<usize>, log_base: Vec<f64>, base_cum: Vec<f64>, mass: f64 },
    Smooth { w: Vec<f64>, cfg: SmoothPriorConfig },
}

struct Chain<'a> {
    obs: &'a ObservationSet,
    sieve: &'a SievePriorConfig,
    grid: usize,
    sigma: f64,
    xi2: f64,
    /// `e^{+i2πt/G}` for `t = 0..G`.
    twiddle: Vec<Complex64>,
    level: usize,
    theta: Vec<Complex64>,
    shifts: Vec<usize>,
    loglik: Vec<f64>,
}

impl<'a> Chain<'a> {
    fn theta_at(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.level {
            return Complex64::new(0.0, 0.0);
        }
        self.theta[(k + self.sieve.l_max as i64) as usize]
    }

    fn set_theta(&mut self, k: i64, v: Complex64) {
        let i = (k + self.sieve.l_max as i64) as usize;
        self.theta[i] = v;
    }

    fn tw(&self, k: i64, i: usize) -> Complex64 {
        let g = self.grid as i64;
        self.twiddle[((k.rem_euclid(g) as usize) * i) % self.grid]
    }

    /// `L_j(i) = (2/s²) Re Σ_k conj(θ_k) e^{+i2πkφ_i} y_{k,j}`.
    fn fill_loglik(&mut self) {
        let g = self.grid;
        let top = self.level.min(self.obs.cutoff()) as i64;
        let scale = 2.0 / (self.sigma * self.sigma);
        for j in 0..self.obs.n() {
            let row = &mut self.loglik[j * g..(j + 1) * g];
            row.fill(0.0);
            for k in -top..=top {
                let th = if k.unsigned_abs() as usize > self.level {
                    Complex64::new(0.0, 0.0)
                } else {
                    self.theta[(k + self.sieve.l_max as i64) as usize]
                };
                let b = th.conj() * self.obs.coeff(j, k) * scale;
                let step = k.rem_euclid(g as i64) as usize;
                let mut t = 0;
                for r in row.iter_mut() {
                    let w = self.twiddle[t];
                    *r += b.re * w.re - b.im * w.im;
                    t += step;
                    if t >= g {
                        t -= g;
                    }
                }
            }
        }
    }

    fn shift_sum(&self, k: i64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &i) in self.shifts.iter().enumerate() {
            acc += self.obs.coeff(j, k) * self.tw(k, i);
        }
        acc
    }

    /// Complete-data log-likelihood gained by activating value `v` at `k`.
    fn activation_gain(&self, k: i64, v: Complex64) -> f64 {
        if k.unsigned_abs() as usize > self.obs.cutoff() {
            return 0.0;
        }
        let s = self.shift_sum(k);
        (2.0 * (v.conj() * s).re - self.obs.n() as f64 * v.norm_sqr()) / (self.sigma * self.sigma)
    }

    fn refresh_theta<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.obs.n() as f64;
        let s2 = self.sigma * self.sigma;
        let l = self.level as i64;
        for k in -l..=l {
            let v = if k.unsigned_abs() as usize <= self.obs.cutoff() {
                let prec = n / s2 + 1.0 / self.xi2;
                self.shift_sum(k) / s2 / prec + sample_complex_gaussian(rng) * (1.0 / prec).sqrt()
            } else {
                sample_complex_gaussian(rng) * self.xi2.sqrt()
            };
            self.set_theta(k, v);
        }
    }

    /// Returns whether a move was proposed and whether it was accepted.
    fn level_move<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<bool> {
        let lm = self.sieve.l_max;
        if lm <= 1 {
            return None;
        }
        let up = if self.level == 1 {
            true
        } else if self.level == lm {
            false
        } else {
            rng.random::<f64>() < 0.5
        };
        let (to, k) = if up { (self.level + 1, (self.level + 1) as i64) } else { (self.level - 1, self.level as i64) };
        let delta = if up {
            let a = sample_complex_gaussian(rng) * self.xi2.sqrt();
            let b = sample_complex_gaussian(rng) * self.xi2.sqrt();
            self.set_theta(k, a);
            self.set_theta(-k, b);
            self.activation_gain(k, a) + self.activation_gain(-k, b)
        } else {
            -(self.activation_gain(k, self.theta_at(k)) + self.activation_gain(-k, self.theta_at(-k)))
        };
        let r = level_move_log_ratio(self.sieve, self.level, to, delta);
        let accept = rng.random::<f64>().ln() < r;
        if accept {
            if !up {
                self.set_theta(k, Complex64::new(0.0, 0.0));
                self.set_theta(-k, Complex64::new(0.0, 0.0));
            }
            self.level = to;
        } else if up {
            self.set_theta(k, Complex64::new(0.0, 0.0));
            self.set_theta(-k, Complex64::new(0.0, 0.0));
        }
        Some(accept)
    }

    fn current_theta(&self) -> FourierSeries {
        let l = self.level as i64;
        let coeffs = (-l..=l).map(|k| self.theta_at(k)).collect();
        FourierSeries::new(self.level, coeffs).expect("finite coefficients")
    }
}

/// `ln Z(w) = ln((1/G) Σ_i e^{w_i})` over the open grid.
fn log_partition(w: &[f64], g: usize) -> f64 {
    crate::numeric::log_sum_exp(&w[..g]) - (g as f64).ln()
}

/// Data-augmented Gibbs sampler. Each sweep updates the shifts (or DP
/// labels), the coefficients, the truncation level and the shift
/// distribution, in that order.
pub fn gibbs_posterior<R: Rng + ?Sized>(
    obs: &ObservationSet,
    prior: &PriorConfig,
    opts: &GibbsOptions,
    rng: &mut R,
) -> Result<PosteriorEnsemble> {
    prior.validate()?;
    if opts.steps == 0 {
        return Err(Error::param("steps", "must be at least 1"));
    }
    if opts.burn_in >= opts.steps {
        return Err(Error::param("burn_in", "must be smaller than steps"));
    }
    if opts.thin == 0 || opts.grid < 8 {
        return Err(Error::param("thin", "thin must be positive and grid at least 8"));
    }
    if !(opts.pcn_beta > 0.0 && opts.pcn_beta <= 1.0) {
        return Err(Error::param("pcn_beta", "must lie in (0,1]"));
    }
    if obs.n() == 0 {
        return Err(Error::param("obs", "at least one curve is required"));
    }
    let g = opts.grid;
    let n = obs.n();
    let sigma = obs.sigma().max(opts.noise_floor);
    if !(sigma > 0.0) {
        return Err(Error::param("noise_floor", "must be positive for noiseless data"));
    }
    let twiddle = (0..g)
        .map(|t| {
            let a = TAU * t as f64 / g as f64;
            Complex64::new(a.cos(), a.sin())
        })
        .collect();
    let lm = prior.sieve.l_max;
    let mut chain = Chain {
        obs,
        sieve: &prior.sieve,
        grid: g,
        sigma,
        xi2: prior.sieve.xi2(),
        twiddle,
        level: 1,
        theta: vec![Complex64::new(0.0, 0.0); 2 * lm + 1],
        shifts: vec![0; n],
        loglik: vec![0.0; n * g],
    };
    if obs.cutoff() >= 1 {
        let m = (0..n).map(|j| obs.coeff(j, 1).norm()).sum::<f64>() / n as f64;
        chain.set_theta(1, Complex64::new(m, 0.0));
    }

    let mut state = match &prior.shift {
        ShiftPrior::Dirichlet(c) => {
            let base: Vec<f64> = (0..g)
                .map(|i| c.base_density.density_at(i as f64 / g as f64).unwrap_or(0.0))
                .map(|v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY })
                .collect();
            let mut acc = 0.0;
            let base_cum: Vec<f64> = base
                .iter()
                .map(|l| {
                    acc += l.exp();
                    acc
                })
                .collect();
            let k = c.truncation;
            let atoms = (0..k).map(|_| draw_cum(&base_cum, rng)).collect();
            let (weights, _) = crate::priors::stick_breaking(c.total_mass, k, rng);
            ShiftState::Dirichlet { atoms, weights, labels: vec![0; n], log_base: base, base_cum, mass: c.total_mass }
        }
        ShiftPrior::Smooth(c) => {
            if c.grid != g {
                return Err(Error::param("grid", "smooth prior grid must equal the sampler grid"));
            }
            ShiftState::Smooth { w: sample_smooth(c, rng)?.w, cfg: c.clone() }
        }
    };

    let mut samples = Vec::new();
    let (mut lvl_prop, mut lvl_acc, mut pcn_prop, mut pcn_acc) = (0usize, 0usize, 0usize, 0usize);
    let mut row = vec![0.0; g];
    for step in 0..opts.steps {
        chain.fill_loglik();
        // (a) shifts
        match &mut state {
            ShiftState::Dirichlet { atoms, weights, labels, .. } => {
                let lw: Vec<f64> = weights.iter().map(|w| if *w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect();
                let mut lp = vec![0.0; atoms.len()];
                for j in 0..n {
                    let lj = &chain.loglik[j * g..(j + 1) * g];
                    for (c, a) in atoms.iter().enumerate() {
                        lp[c] = lw[c] + lj[*a];
                    }
                    let c = sample_log_categorical(&lp, rng);
                    labels[j] = c;
                    chain.shifts[j] = atoms[c];
                }
            }
            ShiftState::Smooth { w, .. } => {
                for j in 0..n {
                    for i in 0..g {
                        row[i] = w[i] + chain.loglik[j * g + i];
                    }
                    chain.shifts[j] = sample_log_categorical(&row, rng);
                }
            }
        }
        // (b) coefficients
        chain.refresh_theta(rng);
        // (c) truncation level
        if let Some(acc) = chain.level_move(rng) {
            lvl_prop += 1;
            lvl_acc += acc as usize;
        }
        // (d) shift distribution
        match &mut state {
            ShiftState::Dirichlet { atoms, weights, labels, log_base, base_cum, mass } => {
                chain.fill_loglik();
                let k = atoms.len();
                let mut counts = vec![0usize; k];
                for &c in labels.iter() {
                    counts[c] += 1;
                }
                let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
                for (j, &c) in labels.iter().enumerate() {
                    members[c].push(j);
                }
                for c in 0..k {
                    if members[c].is_empty() {
                        atoms[c] = draw_cum(base_cum, rng);
                        continue;
                    }
                    row.copy_from_slice(log_base);
                    for &j in &members[c] {
                        for (r, l) in row.iter_mut().zip(&chain.loglik[j * g..(j + 1) * g]) {
                            *r += l;
                        }
                    }
                    atoms[c] = sample_log_categorical(&row, rng);
                }
                let mut after: usize = n;
                let mut rest = 1.0;
                for c in 0..k {
                    after -= counts[c];
                    if c + 1 == k {
                        weights[c] = rest;
                    } else {
                        let v: f64 = Beta::new(1.0 + counts[c] as f64, *mass + after as f64)
                            .expect("positive Beta parameters")
                            .sample(rng);
                        weights[c] = rest * v;
                        rest *= 1.0 - v;
                    }
                }
                for (j, &c) in labels.iter().enumerate() {
                    chain.shifts[j] = atoms[c];
                }
            }
            ShiftState::Smooth { w, cfg } => {
                let target = |w: &[f64], shifts: &[usize]| -> f64 {
                    shifts.iter().map(|&i| w[i]).sum::<f64>() - n as f64 * log_partition(w, g)
                };
                let mut cur = target(w, &chain.shifts);
                let root = (1.0 - opts.pcn_beta * opts.pcn_beta).sqrt();
                for _ in 0..opts.pcn_steps {
                    let xi = sample_gp(cfg, rng);
                    let prop: Vec<f64> = w.iter().zip(&xi).map(|(a, b)| root * a + opts.pcn_beta * b).collect();
                    pcn_prop += 1;
                    if density_from_gp(&prop).sobolev_radius(cfg.nu) > 2.0 * cfg.radius {
                        continue;
                    }
                    let t = target(&prop, &chain.shifts);
                    if rng.random::<f64>().ln() < t - cur {
                        *w = prop;
                        cur = t;
                        pcn_acc += 1;
                    }
                }
            }
        }
        if step >= opts.burn_in && (step - opts.burn_in).is_multiple_of(opts.thin) {
            let gdist = match &state {
                ShiftState::Dirichlet { atoms, weights, .. } => {
                    let mut merged: Vec<(f64, f64)> = Vec::new();
                    let mut order: Vec<usize> = (0..atoms.len()).collect();
                    order.sort_by_key(|&c| atoms[c]);
                    for c in order {
                        let x = atoms[c] as f64 / g as f64;
                        match merged.last_mut() {
                            Some(last) if last.0 == x => last.1 += weights[c],
                            _ => merged.push((x, weights[c])),
                        }
                    }
                    merged.retain(|a| a.1 > 0.0);
                    ShiftDistribution::Discrete { atoms: merged }
                }
                ShiftState::Smooth { w, .. } => density_from_gp(w),
            };
            let shifts = opts.record_shifts.then(|| chain.shifts.iter().map(|&i| i as f64 / g as f64).collect());
            samples.push(Sample { theta: chain.current_theta(), g: gdist, weight: 0.0, shifts });
        }
    }
    let m = samples.len() as f64;
    samples.iter_mut().for_each(|s| s.weight = 1.0 / m);
    let trace: Vec<f64> = samples.iter().map(|s| s.theta.get(1).norm()).collect();
    let ess = autocorrelation_ess(&trace);
    let diagnostics = Diagnostics {
        ess,
        low_ess: ess < 10.0,
        level_acceptance: (lvl_prop > 0).then(|| lvl_acc as f64 / lvl_prop as f64),
        pcn_acceptance: (pcn_prop > 0).then(|| pcn_acc as f64 / pcn_prop as f64),
        pcn_beta: matches!(prior.shift, ShiftPrior::Smooth(_)).then_some(opts.pcn_beta),
        sigma_used: Some(sigma),
        steps: opts.steps,
    };
    Ok(PosteriorEnsemble { kind: EnsembleKind::Mcmc, samples, diagnostics, prior: prior.clone(), gibbs: Some(opts.clone()) })
}

// ------------------------------------------------------ distances to truth

/// Laws of `θ` and `θ'` padded to a common cutoff.
fn common_laws(a: &FourierSeries, ga: &ShiftDistribution, b: &FourierSeries, gb: &ShiftDistribution) -> Result<(MixtureLaw, MixtureLaw)> {
    let cut = a.cutoff().max(b.cutoff());
    Ok((MixtureLaw::new(a.project(cut), ga.clone())?, MixtureLaw::new(b.project(cut), gb.clone())?))
}

/// Monte Carlo distance of each ensemble member to `P_{θ⁰,g⁰}`; member `i`
/// uses stream seed `seed + i`.
pub fn distances_to(
    ens: &PosteriorEnsemble,
    truth_theta: &FourierSeries,
    truth_g: &ShiftDistribution,
    metric: Metric,
    mc_samples: usize,
    seed: u64,
) -> Result<Vec<DistanceEstimate>> {
    ens.samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (p, q) = common_laws(&s.theta, &s.g, truth_theta, truth_g)?;
            mc_distance_seeded(&p, &q, metric, mc_samples, seed.wrapping_add(i as u64))
        })
        .collect()
}

/// The distance an estimate represents: `√H²` for the Hellinger metric,
/// the estimate itself otherwise.
pub fn as_distance(metric: Metric, e: &DistanceEstimate) -> f64 {
    match metric {
        Metric::H2 => e.value.sqrt(),
        _ => e.value,
    }
}

/// Posterior weight of members within `radius` of the truth, given their
/// estimated distances.
pub fn ball_mass_from(weights: &[f64], distances: &[f64], radius: f64) -> f64 {
    let terms: Vec<f64> = weights.iter().zip(distances).filter(|(_, d)| **d <= radius).map(|(w, _)| *w).collect();
    pairwise_sum(&terms).clamp(0.0, 1.0)
}

/// Posterior mass of the ball of `radius` around `P_{θ⁰,g⁰}` (Hellinger
/// radius for [`Metric::H2`]).
pub fn ball_mass(
    ens: &PosteriorEnsemble,
    truth_theta: &FourierSeries,
    truth_g: &ShiftDistribution,
    radius: f64,
    metric: Metric,
    mc_samples: usize,
    seed: u64,
) -> Result<f64> {
    let d: Vec<f64> = distances_to(ens, truth_theta, truth_g, metric, mc_samples, seed)?
        .iter()
        .map(|e| as_distance(metric, e))
        .collect();
    Ok(ball_mass_from(&ens.weights(), &d, radius))
}

/// Weighted median.
pub fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for &i in &idx {
        acc += weights[i];
        if acc >= 0.5 * total {
            return values[i];
        }
    }
    values[*idx.last().expect("nonempty input")]
}

// ------------------------------------------------------ contraction driver

/// Which sieve preset to instantiate for each `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SievePreset {
    Adaptive,
    NonAdaptive { s: f64 },
}

impl SievePreset {
    pub fn at(self, n: usize, l_max: usize) -> SievePriorConfig {
        let base = match self {
            SievePreset::Adaptive => SievePriorConfig::adaptive(n),
            SievePreset::NonAdaptive { s } => SievePriorConfig::non_adaptive(n, s),
        };
        SievePriorConfig { l_max, ..base }
    }
}

/// Settings of the contraction experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionConfig {
    pub sieve: SievePreset,
    pub l_max: usize,
    pub shift: ShiftPrior,
    pub gibbs: GibbsOptions,
    pub obs_cutoff: usize,
    pub sigma: f64,
    /// Smoothness entering `ε_n = n^{−s/(2s+2)} ln n`.
    pub s: f64,
    /// Posterior draws used for the distance median.
    pub distance_draws: usize,
    pub distance_samples: usize,
    pub bins: usize,
}

impl Default for ContractionConfig {
    fn default() -> Self {
        ContractionConfig {
            sieve: SievePreset::Adaptive,
            l_max: 8,
            shift: ShiftPrior::Dirichlet(DirichletPriorConfig::default()),
            gibbs: GibbsOptions { steps: 1200, burn_in: 400, ..GibbsOptions::default() },
            obs_cutoff: 3,
            sigma: 1.0,
            s: 1.0,
            distance_draws: 100,
            distance_samples: 2000,
            bins: 64,
        }
    }
}

/// One row of the contraction table.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionRow {
    pub n: usize,
    pub eps_n: f64,
    pub median_dh: f64,
    pub f_err_aligned: f64,
    pub f_err_raw: f64,
    pub g_err: f64,
    pub level_acceptance: f64,
}

/// `ε_n = n^{−s/(2s+2)} ln n`.
pub fn contraction_rate(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    nf.powf(-s / (2.0 * s + 2.0)) * nf.ln()
}

/// For each `n`: simulate from the truth (curves shared across `n`),
/// run the Gibbs sampler with the prior instantiated at `n`, and report
/// the posterior median Hellinger distance to the truth and the errors of
/// the aligned posterior means.
pub fn contraction_experiment(
    truth_theta: &FourierSeries,
    truth_g: &ShiftDistribution,
    n_list: &[usize],
    cfg: &ContractionConfig,
    seed: u64,
) -> Result<Vec<ContractionRow>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("n_list", "must be strictly increasing"));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    let truth_bins = bin_density(truth_g, cfg.bins);
    for &n in n_list {
        let obs = simulate(truth_theta, truth_g, n, cfg.obs_cutoff, cfg.sigma, seed)?;
        let prior = PriorConfig { sieve: cfg.sieve.at(n, cfg.l_max), shift: cfg.shift.clone() };
        let mut rng = substream(seed, 1_000_000 + n as u64);
        let ens = gibbs_posterior(&obs, &prior, &cfg.gibbs, &mut rng)?;

        let cut = truth_theta.cutoff().max(ens.samples.iter().map(|s| s.theta.cutoff()).max().unwrap_or(0));
        let t0 = truth_theta.project(cut);
        let f_err_aligned = ens.mean_theta_aligned().project(cut).distance(&t0);
        let f_err_raw = ens.mean_theta_raw().project(cut).distance(&t0);
        let gm = ens.mean_g_aligned(cfg.bins);
        let g_err = (gm.iter().zip(&truth_bins).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / cfg.bins as f64).sqrt();

        let stride = (ens.len() / cfg.distance_draws.max(1)).max(1);
        let mut d = Vec::new();
        let mut w = Vec::new();
        for (i, s) in ens.samples.iter().enumerate().step_by(stride) {
            let (p, q) = common_laws(&s.theta, &s.g, truth_theta, truth_g)?;
            let e = mc_distance_seeded(&p, &q, Metric::H2, cfg.distance_samples, seed.wrapping_add(7919 * i as u64))?;
            d.push(e.value.sqrt());
            w.push(s.weight);
        }
        rows.push(ContractionRow {
            n,
            eps_n: contraction_rate(n, cfg.s),
            median_dh: weighted_median(&d, &w),
            f_err_aligned,
            f_err_raw,
            g_err,
            level_acceptance: ens.diagnostics.level_acceptance.unwrap_or(0.0),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_move_reverses() {
        let cfg = SievePriorConfig { l_max: 5, ..SievePriorConfig::adaptive(100) };
        for (a, b, d) in [(1, 2, 3.1), (2, 3, -0.7), (4, 5, 12.0), (3, 4, 0.0)] {
            let fwd = level_move_log_ratio(&cfg, a, b, d);
            let rev = level_move_log_ratio(&cfg, b, a, -d);
            assert!((fwd + rev).abs() < 1e-12);
        }
        assert_eq!(level_move_log_ratio(&cfg, 1, 3, 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn proposal_probabilities_sum_to_one() {
        for l in 1..=6 {
            let s = level_proposal_prob(l, l + 1, 6) + level_proposal_prob(l, l.wrapping_sub(1), 6);
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ess_bounds() {
        assert!((kish_ess(&[0.25; 4]) - 4.0).abs() < 1e-12);
        assert!((kish_ess(&[1.0, 0.0]) - 1.0).abs() < 1e-12);
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        assert!(autocorrelation_ess(&xs) <= 100.0);
    }

    #[test]
    fn weighted_median_basic() {
        assert_eq!(weighted_median(&[3.0, 1.0, 2.0], &[1.0, 1.0, 1.0]), 2.0);
        assert_eq!(weighted_median(&[3.0, 1.0], &[0.9, 0.1]), 3.0);
    }

    #[test]
    fn rate_column() {
        let v: Vec<f64> = [50, 200, 800].iter().map(|&n| contraction_rate(n, 1.0)).collect();
        assert!((v[0] - 1.4710).abs() < 5e-4);
        assert!((v[1] - 1.4089).abs() < 5e-4);
        assert!((v[2] - 1.2569).abs() < 5e-4);
    }
}
