//! Prior samplers: the sieve Gaussian prior on Fourier coefficients, the
//! Dirichlet process on shift distributions, and the smooth log-Gaussian
//! density prior built from an integrated Brownian bridge.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::fourier::FourierSeries;
use crate::shift::{ShiftDistribution, DEFAULT_GRID};
use crate::special::sample_complex_gaussian;
use crate::{Error, Result};

/// Sieve prior: `ℓ ~ λ`, then `θ_k ~ N_C(0, ξ_n²)` for `|k| ≤ ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SievePriorConfig {
    /// Decay constant of `λ(ℓ) ∝ exp(−c ℓ² (ln ℓ)^ρ)`.
    pub c: f64,
    pub rho: f64,
    pub mu: f64,
    pub zeta: f64,
    /// Sample size entering `ξ_n² = n^{−μ} (ln n)^{−ζ}`.
    pub n: usize,
    pub l_max: usize,
}

impl SievePriorConfig {
    /// Adaptive preset `μ = 1/4`, `ζ = 3/2`.
    pub fn adaptive(n: usize) -> Self {
        SievePriorConfig { c: 1.0, rho: 1.5, mu: 0.25, zeta: 1.5, n, l_max: 64 }
    }

    /// Non-adaptive preset `μ = 2/(2s+2)`, `ζ = 0`.
    pub fn non_adaptive(n: usize, s: f64) -> Self {
        SievePriorConfig { c: 1.0, rho: 1.5, mu: 2.0 / (2.0 * s + 2.0), zeta: 0.0, n, l_max: 64 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 1.0 && self.rho < 2.0) {
            return Err(Error::param("rho", "must lie in (1,2)"));
        }
        if self.l_max < 1 {
            return Err(Error::param("l_max", "must be at least 1"));
        }
        if self.n < 2 {
            return Err(Error::param("n", "must be at least 2"));
        }
        if !(self.c > 0.0) {
            return Err(Error::param("c", "must be positive"));
        }
        Ok(())
    }

    /// `ξ_n²`.
    pub fn xi2(&self) -> f64 {
        let n = self.n as f64;
        n.powf(-self.mu) * n.ln().powf(-self.zeta)
    }

    /// Unnormalised `ln λ(ℓ)`.
    pub fn log_lambda_unnorm(&self, l: usize) -> f64 {
        if l <= 1 {
            return 0.0;
        }
        let lf = l as f64;
        -self.c * lf * lf * lf.ln().powf(self.rho)
    }
}

/// `λ(ℓ)` for `ℓ = 1..=l_max` (index `ℓ − 1`).
pub fn lambda_pmf(cfg: &SievePriorConfig) -> Vec<f64> {
    let logs: Vec<f64> = (1..=cfg.l_max).map(|l| cfg.log_lambda_unnorm(l)).collect();
    let z = crate::numeric::log_sum_exp(&logs);
    logs.into_iter().map(|x| (x - z).exp()).collect()
}

/// Draw from `λ`.
pub fn sample_level<R: Rng + ?Sized>(cfg: &SievePriorConfig, rng: &mut R) -> usize {
    let pmf = lambda_pmf(cfg);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return i + 1;
        }
    }
    cfg.l_max
}

/// One draw of `f` from the sieve prior (cutoff equals the drawn `ℓ`).
pub fn sample_f<R: Rng + ?Sized>(cfg: &SievePriorConfig, rng: &mut R) -> FourierSeries {
    let l = sample_level(cfg, rng);
    let sd = cfg.xi2().sqrt();
    let mut f = FourierSeries::zeros(l);
    for k in -(l as i64)..=l as i64 {
        f.set(k, sample_complex_gaussian(rng) * sd);
    }
    f
}

/// Dirichlet process `DP(m · base)` truncated at `K` sticks.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletPriorConfig {
    pub base_density: ShiftDistribution,
    pub total_mass: f64,
    pub truncation: usize,
}

impl Default for DirichletPriorConfig {
    fn default() -> Self {
        DirichletPriorConfig {
            base_density: ShiftDistribution::uniform(DEFAULT_GRID),
            total_mass: 1.0,
            truncation: 200,
        }
    }
}

impl DirichletPriorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.total_mass > 0.0) {
            return Err(Error::param("total_mass", "must be positive"));
        }
        if self.truncation < 1 {
            return Err(Error::param("truncation", "must be at least 1"));
        }
        if !matches!(self.base_density, ShiftDistribution::Grid { .. }) {
            return Err(Error::param("base_density", "must be a grid density"));
        }
        Ok(())
    }
}

/// Stick-breaking weights `w_i = V_i ∏_{j<i}(1−V_j)`, `V_i ~ Beta(1, m)`,
/// with the last stick taking the remaining mass. Also returns the mass
/// left before that final assignment.
pub fn stick_breaking<R: Rng + ?Sized>(m: f64, k: usize, rng: &mut R) -> (Vec<f64>, f64) {
    let beta = Beta::new(1.0, m).expect("positive Beta parameters");
    let mut w = Vec::with_capacity(k);
    let mut rest = 1.0;
    for _ in 0..k.saturating_sub(1) {
        let v: f64 = beta.sample(rng);
        w.push(rest * v);
        rest *= 1.0 - v;
    }
    let tail = rest;
    w.push(rest);
    (w, tail)
}

/// One draw from the truncated Dirichlet process.
pub fn sample_dp<R: Rng + ?Sized>(cfg: &DirichletPriorConfig, rng: &mut R) -> Result<ShiftDistribution> {
    Ok(sample_dp_with_tail(cfg, rng)?.0)
}

/// As [`sample_dp`], also reporting the residual stick mass.
pub fn sample_dp_with_tail<R: Rng + ?Sized>(
    cfg: &DirichletPriorConfig,
    rng: &mut R,
) -> Result<(ShiftDistribution, f64)> {
    cfg.validate()?;
    let sampler = cfg.base_density.sampler()?;
    let (w, tail) = stick_breaking(cfg.total_mass, cfg.truncation, rng);
    let atoms = w.into_iter().map(|wi| (sampler.draw(rng), wi)).collect();
    Ok((ShiftDistribution::Discrete { atoms }, tail))
}

/// Smooth prior `q_{ν,A}` on densities.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothPriorConfig {
    pub nu: f64,
    pub radius: f64,
    pub grid: usize,
    pub max_rejections: usize,
}

impl Default for SmoothPriorConfig {
    fn default() -> Self {
        SmoothPriorConfig { nu: 1.5, radius: 2.0, grid: DEFAULT_GRID, max_rejections: 1000 }
    }
}

impl SmoothPriorConfig {
    /// `k_ν = ⌊ν − 1/2⌋`.
    pub fn k_nu(&self) -> usize {
        (self.nu - 0.5).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.5) {
            return Err(Error::param("nu", "must be at least 1/2"));
        }
        if !(self.radius > 0.0) {
            return Err(Error::param("radius", "must be positive"));
        }
        if self.grid < 8 {
            return Err(Error::param("grid", "must have at least 8 points"));
        }
        Ok(())
    }
}

/// `J(f)(t) = ∫_0^t f − t ∫_0^1 f` on a closed uniform grid `t_i = i/m`,
/// `i = 0..=m`, by cumulative trapezoid. Both endpoints come out exactly 0.
pub fn j_operator(values: &[f64]) -> Vec<f64> {
    let m = values.len() - 1;
    let h = 1.0 / m as f64;
    let mut cum = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    cum.push(0.0);
    for i in 0..m {
        acc += 0.5 * h * (values[i] + values[i + 1]);
        cum.push(acc);
    }
    let total = acc;
    cum.iter()
        .enumerate()
        .map(|(i, c)| if i == m { c - total } else { c - (i as f64 / m as f64) * total })
        .collect()
}

/// `ψ_k(t) = sin(2πkt) + cos(2πkt)`.
pub fn psi(k: u32, t: f64) -> f64 {
    let a = TAU * k as f64 * crate::numeric::wrap01(t);
    a.sin() + a.cos()
}

/// Brownian bridge on the closed grid `i/m`, `i = 0..=m`.
pub fn brownian_bridge<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    let sd = (1.0 / m as f64).sqrt();
    let mut w = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    w.push(0.0);
    for _ in 0..m {
        let z: f64 = StandardNormal.sample(rng);
        acc += sd * z;
        w.push(acc);
    }
    let end = w[m];
    let mut b: Vec<f64> = w.iter().enumerate().map(|(i, x)| x - (i as f64 / m as f64) * end).collect();
    b[m] = 0.0;
    b
}

/// Gaussian process `w = J^{k_ν}(B) + Σ_{i=1}^{k_ν} Z_i ψ_i` on the closed
/// grid; `w[0] == w[m]` exactly.
pub fn sample_gp<R: Rng + ?Sized>(cfg: &SmoothPriorConfig, rng: &mut R) -> Vec<f64> {
    let m = cfg.grid;
    let mut w = brownian_bridge(m, rng);
    let k = cfg.k_nu();
    for _ in 0..k {
        w = j_operator(&w);
    }
    for i in 1..=k as u32 {
        let z: f64 = StandardNormal.sample(rng);
        // phase reduced exactly so ψ takes identical values at 0 and 1
        for (j, x) in w.iter_mut().enumerate() {
            let r = ((i as usize * j) % m) as f64 / m as f64;
            *x += z * psi(i, r);
        }
    }
    w
}

/// `p_w = e^w / ∫e^w` as an `m`-point grid density (drops the duplicate
/// endpoint of the closed grid).
pub fn density_from_gp(w: &[f64]) -> ShiftDistribution {
    let m = w.len() - 1;
    let top = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = w[..m].iter().map(|x| (x - top).exp()).collect();
    let total = raw.iter().sum::<f64>() / m as f64;
    ShiftDistribution::Grid { values: raw.into_iter().map(|v| v / total).collect() }
}

/// A smooth prior draw: the latent process and its density.
#[derive(Debug, Clone)]
pub struct SmoothDraw {
    pub w: Vec<f64>,
    pub density: ShiftDistribution,
    pub rejections: usize,
}

/// Draw from the smooth prior restricted to the Sobolev ball of radius `2A`.
pub fn sample_smooth<R: Rng + ?Sized>(cfg: &SmoothPriorConfig, rng: &mut R) -> Result<SmoothDraw> {
    cfg.validate()?;
    let mut rejections = 0;
    loop {
        let w = sample_gp(cfg, rng);
        let density = density_from_gp(&w);
        if density.sobolev_radius(cfg.nu) <= 2.0 * cfg.radius {
            return Ok(SmoothDraw { w, density, rejections });
        }
        rejections += 1;
        if rejections >= cfg.max_rejections {
            return Err(Error::RejectionsExhausted { rejections });
        }
    }
}

/// Mass `g([a, b))` of an interval for any representation (grid densities
/// integrate their piecewise-linear interpolant).
pub fn interval_mass(g: &ShiftDistribution, a: f64, b: f64) -> f64 {
    match g {
        ShiftDistribution::Discrete { atoms } => {
            atoms.iter().filter(|(x, _)| *x >= a && *x < b).map(|(_, w)| w).sum()
        }
        _ => {
            let m = 4096;
            let v = g.to_grid(m).unwrap_or_else(|_| vec![0.0; m]);
            let h = 1.0 / m as f64;
            let mut s = 0.0;
            for i in 0..m {
                let lo = i as f64 * h;
                let hi = lo + h;
                let l = lo.max(a);
                let r = hi.min(b);
                if r > l {
                    let f = |x: f64| v[i] + (v[(i + 1) % m] - v[i]) * (x - lo) / h;
                    s += 0.5 * (f(l) + f(r)) * (r - l);
                }
            }
            s
        }
    }
}

/// `θ_k ~ N_C(0, ξ²)` for a fixed cutoff (used when extending a series).
pub fn sample_coefficients<R: Rng + ?Sized>(xi2: f64, count: usize, rng: &mut R) -> Vec<Complex64> {
    let sd = xi2.sqrt();
    (0..count).map(|_| sample_complex_gaussian(rng) * sd).collect()
}
