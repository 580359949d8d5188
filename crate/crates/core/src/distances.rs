//! Distances between mixture laws: closed forms for point mixtures, Monte
//! Carlo estimators, sandwich checks and the analytic upper bounds.
//!
//! Conventions: `d_TV = ½∫|p−q|`, `d_H² = ∫(√p−√q)²` (no ½, so
//! `d_H² ∈ [0,2]`), `KL(p‖q) = ∫ ln(p/q) dP`, `V(p‖q) = ∫ ln²(p/q) dP`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::fourier::FourierSeries;
use crate::mixture::MixtureLaw;
use crate::numeric::pairwise_sum;
use crate::rng::substream;
use crate::shift::{wasserstein1, ShiftDistribution, DEFAULT_W1_POINTS};
use crate::special::normal_cdf;
use crate::{Error, Result};

/// Samples per Monte Carlo block; blocks are the unit of parallel work.
pub const MC_BLOCK: usize = 4096;
/// Density ratios below this are floored in KL and V.
pub const RATIO_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Tv,
    H2,
    Kl,
    V,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Tv => "tv",
            Metric::H2 => "h2",
            Metric::Kl => "kl",
            Metric::V => "v",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// A distance value with its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: Method,
    pub samples: usize,
    /// Samples whose density ratio was floored (KL and V only).
    pub floored: usize,
}

impl DistanceEstimate {
    pub fn closed_form(value: f64) -> Self {
        DistanceEstimate { value, std_error: 0.0, method: Method::ClosedForm, samples: 0, floored: 0 }
    }

    /// Whether `value` is within `k` standard errors of `target`.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

/// `d_TV(γ_{z1}, γ_{z2}) = 2Φ(‖z1−z2‖/√2) − 1` for `γ = π^{−p}e^{−‖·‖²}`.
pub fn tv_gaussians(z1: &[Complex64], z2: &[Complex64]) -> Result<f64> {
    Ok(2.0 * normal_cdf(point_distance(z1, z2)? / core::f64::consts::SQRT_2) - 1.0)
}

/// Linear upper bound `‖z1−z2‖/√π` on [`tv_gaussians`].
pub fn tv_gaussians_bound(z1: &[Complex64], z2: &[Complex64]) -> Result<f64> {
    Ok(point_distance(z1, z2)? / PI.sqrt())
}

fn point_distance(z1: &[Complex64], z2: &[Complex64]) -> Result<f64> {
    if z1.len() != z2.len() {
        return Err(Error::Dimension { expected: z1.len(), got: z2.len() });
    }
    Ok(z1.iter().zip(z2).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
}

/// `d_H²(P_{f,δ₀}, P_{f̃,δ₀}) = 2(1 − exp(−‖f−f̃‖²/4))`.
pub fn hellinger_sq_point_shift(f: &FourierSeries, f_tilde: &FourierSeries) -> f64 {
    let d2 = f.distance(f_tilde).powi(2);
    2.0 * (1.0 - (-0.25 * d2).exp())
}

/// `d_H(P_{f,δ₀}, P_{f̃,δ₀})`.
pub fn hellinger_point_shift(f: &FourierSeries, f_tilde: &FourierSeries) -> f64 {
    hellinger_sq_point_shift(f, f_tilde).sqrt()
}

/// Running sums of one Monte Carlo block.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BlockStats {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
    pub floored: usize,
}

/// Number of blocks for a sample budget.
pub fn block_count(samples: usize) -> usize {
    samples.div_ceil(MC_BLOCK)
}

/// Evaluate block `block` of a Monte Carlo run keyed by `seed`.
///
/// TV and H² sample from `½(p+q)` and average `|tanh(d/2)|` and
/// `2(1 − sech(d/2))` with `d = ln q − ln p`; KL and V sample from `p` and
/// average `ln(p/q)` and its square.
pub fn mc_block(
    p: &MixtureLaw,
    q: &MixtureLaw,
    metric: Metric,
    samples: usize,
    seed: u64,
    block: usize,
) -> Result<BlockStats> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension { expected: p.dim(), got: q.dim() });
    }
    let start = block * MC_BLOCK;
    let len = MC_BLOCK.min(samples.saturating_sub(start));
    let mut rng = substream(seed, block as u64);
    let mut z = alloc::vec![Complex64::new(0.0, 0.0); p.dim()];
    let mut vals = Vec::with_capacity(len);
    let mut floored = 0;
    let log_floor = RATIO_FLOOR.ln();
    for i in 0..len {
        let from_p = match metric {
            Metric::Tv | Metric::H2 => rng.random::<f64>() < 0.5,
            Metric::Kl | Metric::V => true,
        };
        if from_p {
            p.sample_into(&mut rng, &mut z);
        } else {
            q.sample_into(&mut rng, &mut z);
        }
        let d = q.log_density_unchecked(&z) - p.log_density_unchecked(&z);
        if d.is_nan() {
            return Err(Error::NonFinite { index: start + i });
        }
        let v = match metric {
            Metric::Tv => (0.5 * d).tanh().abs(),
            Metric::H2 => 2.0 * (1.0 - 1.0 / (0.5 * d).cosh()),
            Metric::Kl | Metric::V => {
                let d = if d < log_floor {
                    floored += 1;
                    log_floor
                } else {
                    d
                };
                if metric == Metric::Kl {
                    -d
                } else {
                    d * d
                }
            }
        };
        vals.push(v);
    }
    let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
    Ok(BlockStats { count: len, sum: pairwise_sum(&vals), sum_sq: pairwise_sum(&sq), floored })
}

/// Combine block results (in block order) into an estimate.
pub fn merge_blocks(metric: Metric, blocks: &[BlockStats]) -> DistanceEstimate {
    let n: usize = blocks.iter().map(|b| b.count).sum();
    let sums: Vec<f64> = blocks.iter().map(|b| b.sum).collect();
    let sqs: Vec<f64> = blocks.iter().map(|b| b.sum_sq).collect();
    let floored = blocks.iter().map(|b| b.floored).sum();
    if n == 0 {
        return DistanceEstimate { value: 0.0, std_error: 0.0, method: Method::MonteCarlo, samples: 0, floored };
    }
    let nf = n as f64;
    let mean = pairwise_sum(&sums) / nf;
    let var = if n > 1 { ((pairwise_sum(&sqs) - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    let value = match metric {
        Metric::Tv => mean.clamp(0.0, 1.0),
        Metric::H2 => mean.clamp(0.0, 2.0),
        Metric::Kl | Metric::V => mean.max(0.0),
    };
    DistanceEstimate { value, std_error: (var / nf).sqrt(), method: Method::MonteCarlo, samples: n, floored }
}

/// Monte Carlo estimate of a distance with the stream keyed by `seed`.
pub fn mc_distance_seeded(
    p: &MixtureLaw,
    q: &MixtureLaw,
    metric: Metric,
    samples: usize,
    seed: u64,
) -> Result<DistanceEstimate> {
    let blocks: Result<Vec<BlockStats>> =
        (0..block_count(samples)).map(|b| mc_block(p, q, metric, samples, seed, b)).collect();
    Ok(merge_blocks(metric, &blocks?))
}

/// Monte Carlo estimate of a distance; the stream seed is drawn from `rng`.
pub fn mc_distance<R: Rng + ?Sized>(
    p: &MixtureLaw,
    q: &MixtureLaw,
    metric: Metric,
    samples: usize,
    rng: &mut R,
) -> Result<DistanceEstimate> {
    let seed = rng.next_u64();
    mc_distance_seeded(p, q, metric, samples, seed)
}

/// Deterministic TV or H² between one-dimensional laws by a tensor
/// trapezoid rule on `[−R, R]²` (plus the law means).
pub fn quadrature_distance(p: &MixtureLaw, q: &MixtureLaw, metric: Metric, half_width: f64, points: usize) -> Result<DistanceEstimate> {
    if p.dim() != 1 || q.dim() != 1 {
        return Err(Error::param("law", "quadrature distances need one-dimensional laws"));
    }
    if !matches!(metric, Metric::Tv | Metric::H2) {
        return Err(Error::param("metric", "quadrature supports TV and H2"));
    }
    let h = 2.0 * half_width / (points - 1) as f64;
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let x = -half_width + i as f64 * h;
        let mut row = Vec::with_capacity(points);
        for j in 0..points {
            let y = -half_width + j as f64 * h;
            let z = [Complex64::new(x, y)];
            let a = p.log_density_unchecked(&z).exp();
            let b = q.log_density_unchecked(&z).exp();
            let w = if i == 0 || i == points - 1 { 0.5 } else { 1.0 } * if j == 0 || j == points - 1 { 0.5 } else { 1.0 };
            row.push(w * match metric {
                Metric::Tv => 0.5 * (a - b).abs(),
                _ => (a.sqrt() - b.sqrt()).powi(2),
            });
        }
        rows.push(pairwise_sum(&row));
    }
    let value = pairwise_sum(&rows) * h * h;
    Ok(DistanceEstimate { value, std_error: 0.0, method: Method::Quadrature, samples: points * points, floored: 0 })
}

/// Outcome of the sandwich and Pinsker checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub tv: DistanceEstimate,
    pub h2: DistanceEstimate,
    pub kl: DistanceEstimate,
    /// `½ d_H² ≤ d_TV`
    pub lower_ok: bool,
    /// `d_TV ≤ d_H`
    pub upper_ok: bool,
    /// `d_TV ≤ √(KL/2)`
    pub pinsker_ok: bool,
}

impl SandwichReport {
    pub fn all_ok(&self) -> bool {
        self.lower_ok && self.upper_ok && self.pinsker_ok
    }
}

/// Check `½d_H² ≤ d_TV ≤ d_H` and Pinsker from independent estimates, each
/// within three combined standard errors. The upper links are compared in
/// squared form (`d_TV² ≤ d_H²`, `d_TV² ≤ KL/2`) with delta-method errors.
pub fn check_sandwich<R: Rng + ?Sized>(
    p: &MixtureLaw,
    q: &MixtureLaw,
    samples: usize,
    rng: &mut R,
) -> Result<SandwichReport> {
    let tv = mc_distance(p, q, Metric::Tv, samples, rng)?;
    let h2 = mc_distance(p, q, Metric::H2, samples, rng)?;
    let kl = mc_distance(p, q, Metric::Kl, samples, rng)?;
    Ok(sandwich_from(tv, h2, kl))
}

/// Sandwich verdicts from given estimates.
pub fn sandwich_from(tv: DistanceEstimate, h2: DistanceEstimate, kl: DistanceEstimate) -> SandwichReport {
    let k = 3.0;
    let lower_ok = 0.5 * h2.value - tv.value <= k * (0.25 * h2.std_error.powi(2) + tv.std_error.powi(2)).sqrt();
    let tv2_se = 2.0 * tv.value * tv.std_error;
    let upper_ok = tv.value.powi(2) - h2.value <= k * (tv2_se.powi(2) + h2.std_error.powi(2)).sqrt();
    let pinsker_ok = tv.value.powi(2) - 0.5 * kl.value <= k * (tv2_se.powi(2) + 0.25 * kl.std_error.powi(2)).sqrt();
    SandwichReport { tv, h2, kl, lower_ok, upper_ok, pinsker_ok }
}

/// `d_TV(P_{f,g}, P_{f̃,g}) ≤ ‖f − f̃‖/√2`.
pub fn tv_bound_f(f: &FourierSeries, f_tilde: &FourierSeries) -> f64 {
    f.distance(f_tilde) / core::f64::consts::SQRT_2
}

/// `d_TV(P_{f,g}, P_{f,g̃}) ≤ √2 π ‖f‖_{H1} W₁(g, g̃)`.
pub fn tv_bound_g(f: &FourierSeries, g: &ShiftDistribution, g_tilde: &ShiftDistribution) -> Result<f64> {
    Ok(core::f64::consts::SQRT_2 * PI * f.h1_norm() * wasserstein1(g, g_tilde, DEFAULT_W1_POINTS)?)
}

/// Bound on `d_H(P_{f0,g}, P_{f0_ℓ,g})` and on `√KL` of the same pair:
/// `√2 ‖f0 − f0_ℓ‖` where `f0_ℓ` is the projection to cutoff `ℓ`.
pub fn e1_bound(f0: &FourierSeries, l: usize) -> f64 {
    core::f64::consts::SQRT_2 * f0.distance(&f0.project(l))
}

/// Bound on `d_H(P_{f0_ℓ,g}, P_{f,g})`: `2^{1/4} √‖f − f0_ℓ‖`.
pub fn e3_bound(f: &FourierSeries, f0_l: &FourierSeries) -> f64 {
    2f64.powf(0.25) * f.distance(f0_l).sqrt()
}

/// One-dimensional marginal of `law` on frequency `k`.
pub fn marginal(law: &MixtureLaw, k: i64) -> Result<MixtureLaw> {
    law.marginal(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gaussian_tv_reference_values() {
        let z = [c(0.2, -0.1), c(0.0, 1.0)];
        assert_eq!(tv_gaussians(&z, &z).unwrap(), 0.0);
        // ‖Δ‖ = √2 gives 2Φ(1) − 1
        let a = [c(1.0, 0.0), c(0.0, 0.0)];
        let b = [c(0.0, 0.0), c(0.0, 1.0)];
        assert!((tv_gaussians(&a, &b).unwrap() - 0.682_689_492_137_085_9).abs() < 1e-12);
        assert!(tv_gaussians(&a, &[c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn hellinger_reference_values() {
        let f = FourierSeries::from_pairs(&[(1, c(1.0, 0.0))]);
        assert_eq!(hellinger_point_shift(&f, &f), 0.0);
        let g = FourierSeries::from_pairs(&[(1, c(-1.0, 0.0))]);
        assert!((hellinger_sq_point_shift(&f, &g) - 1.264_241_117_657_115_4).abs() < 1e-13);
    }

    #[test]
    fn bounds_vanish_on_equal_arguments() {
        let f = FourierSeries::from_pairs(&[(1, c(1.0, 0.2)), (2, c(0.3, 0.0))]);
        let g = crate::shift::cosine_density(256, 0.5).unwrap();
        assert_eq!(tv_bound_f(&f, &f), 0.0);
        assert_eq!(tv_bound_g(&f, &g, &g).unwrap(), 0.0);
        let one = FourierSeries::from_pairs(&[(1, c(1.0, 0.0))]);
        assert!((e3_bound(&one, &FourierSeries::zeros(1)) - 2f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(e1_bound(&f, 2), 0.0);
    }

    #[test]
    fn identical_laws_have_zero_tv_estimate() {
        let f = FourierSeries::from_pairs(&[(1, c(1.0, 0.0))]);
        let law = MixtureLaw::new(f, crate::shift::cosine_density(256, 0.5).unwrap()).unwrap();
        let est = mc_distance_seeded(&law, &law, Metric::Tv, 5000, 1).unwrap();
        assert_eq!(est.value, 0.0);
        let kl = mc_distance_seeded(&law, &law, Metric::Kl, 5000, 1).unwrap();
        assert_eq!(kl.value, 0.0);
    }
}
