//! Forward simulation of shifted curves in their Fourier representation.
//!
//! Curve `j` is observed through `y_{k,j} = θ_k e^{−i2πkτ_j} + σ ξ_{k,j}`,
//! `|k| ≤ L`, with `τ_j ~ g` and `ξ` standard complex Gaussian. Frequencies
//! above `L` carry pure noise and are never materialised.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fourier::FourierSeries;
use crate::numeric::cis_neg;
use crate::rng::substream;
use crate::shift::ShiftDistribution;
use crate::special::sample_complex_gaussian;
use crate::{Error, Result};

/// `n` observed coefficient vectors of length `2L+1`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    cutoff: usize,
    sigma: f64,
    seed: Option<u64>,
    curves: Vec<Complex64>,
    true_shifts: Option<Vec<f64>>,
}

impl ObservationSet {
    /// Assemble and validate an observation set.
    pub fn new(
        cutoff: usize,
        sigma: f64,
        seed: Option<u64>,
        curves: Vec<Vec<Complex64>>,
        true_shifts: Option<Vec<f64>>,
    ) -> Result<Self> {
        let width = 2 * cutoff + 1;
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::param("sigma", "must be finite and nonnegative"));
        }
        let n = curves.len();
        let mut flat = Vec::with_capacity(n * width);
        for row in &curves {
            if row.len() != width {
                return Err(Error::Dimension { expected: width, got: row.len() });
            }
            if row.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::param("curves", "all values must be finite"));
            }
            flat.extend_from_slice(row);
        }
        if let Some(t) = &true_shifts {
            if t.len() != n {
                return Err(Error::Dimension { expected: n, got: t.len() });
            }
        }
        Ok(ObservationSet { cutoff, sigma, seed, curves: flat, true_shifts })
    }

    /// Empty set (no curves) at cutoff `L`.
    pub fn empty(cutoff: usize, sigma: f64) -> Self {
        ObservationSet { cutoff, sigma, seed: None, curves: Vec::new(), true_shifts: None }
    }

    pub fn n(&self) -> usize {
        self.curves.len() / self.width()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn width(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn true_shifts(&self) -> Option<&[f64]> {
        self.true_shifts.as_deref()
    }

    /// Row `j`, ordered `k = −L..=L`.
    pub fn curve(&self, j: usize) -> &[Complex64] {
        let w = self.width();
        &self.curves[j * w..(j + 1) * w]
    }

    /// `y_{k,j}`.
    pub fn coeff(&self, j: usize, k: i64) -> Complex64 {
        self.curve(j)[(k + self.cutoff as i64) as usize]
    }

    pub fn curves(&self) -> impl Iterator<Item = &[Complex64]> {
        self.curves.chunks_exact(self.width())
    }

    /// The first `n` curves.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.n());
        ObservationSet {
            cutoff: self.cutoff,
            sigma: self.sigma,
            seed: self.seed,
            curves: self.curves[..n * self.width()].to_vec(),
            true_shifts: self.true_shifts.as_ref().map(|t| t[..n].to_vec()),
        }
    }
}

/// Simulate `n` curves at observation cutoff `L`.
///
/// Curve `j` draws its shift and noise from substream `j` of `seed`, so the
/// result does not depend on how curves are scheduled.
pub fn simulate(
    theta0: &FourierSeries,
    g0: &ShiftDistribution,
    n: usize,
    cutoff: usize,
    sigma: f64,
    seed: u64,
) -> Result<ObservationSet> {
    if n == 0 {
        return Err(Error::param("n", "at least one curve is required"));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::param("sigma", "must be finite and nonnegative"));
    }
    let sampler = g0.sampler()?;
    let width = 2 * cutoff + 1;
    let l = cutoff as i64;
    let mut curves = Vec::with_capacity(n * width);
    let mut shifts = Vec::with_capacity(n);
    for j in 0..n {
        let mut rng = substream(seed, j as u64);
        let tau = sampler.draw(&mut rng);
        shifts.push(tau);
        for k in -l..=l {
            let mean = theta0.get(k) * cis_neg(k as f64 * tau);
            let noise = sample_complex_gaussian(&mut rng);
            curves.push(if sigma == 0.0 { mean } else { mean + noise * sigma });
        }
    }
    Ok(ObservationSet { cutoff, sigma, seed: Some(seed), curves, true_shifts: Some(shifts) })
}
