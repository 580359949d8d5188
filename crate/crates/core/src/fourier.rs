//! Truncated complex Fourier series of 1-periodic functions.
//!
//! Analysis uses `θ_k = ∫ e^{−i2πkt} h(t) dt`, synthesis `Σ θ_k e^{+i2πkx}`.
//! A time shift by `φ` acts as the rotation `θ_k ↦ θ_k e^{−i2πkφ}`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::numeric::{cis_neg, wrap01};
use crate::{Error, Result};

/// Absolute tolerance on `Im θ_1` for membership of the normalised class.
pub const FS_IMAG_TOL: f64 = 1e-12;

/// Coefficients `θ_k` for `k = −ℓ..=ℓ`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    cutoff: usize,
    coeffs: Vec<Complex64>,
}

impl FourierSeries {
    /// Build from coefficients ordered `k = −ℓ..=ℓ`.
    pub fn new(cutoff: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * cutoff + 1 {
            return Err(Error::Dimension { expected: 2 * cutoff + 1, got: coeffs.len() });
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::param("coeffs", "all coefficients must be finite"));
        }
        Ok(FourierSeries { cutoff, coeffs })
    }

    pub fn zeros(cutoff: usize) -> Self {
        FourierSeries { cutoff, coeffs: vec![Complex64::new(0.0, 0.0); 2 * cutoff + 1] }
    }

    /// Series with the given `(k, θ_k)` entries and zeros elsewhere; the
    /// cutoff is the largest `|k|` supplied.
    pub fn from_pairs(pairs: &[(i64, Complex64)]) -> Self {
        let cutoff = pairs.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut s = Self::zeros(cutoff);
        for &(k, c) in pairs {
            s.set(k, c);
        }
        s
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Number of stored coefficients, `2ℓ+1`.
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficients ordered `k = −ℓ..=ℓ`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `θ_k`, zero beyond the cutoff.
    pub fn get(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.cutoff as i64) as usize]
        }
    }

    /// Set `θ_k`.
    ///
    /// # Panics
    /// If `|k|` exceeds the cutoff.
    pub fn set(&mut self, k: i64, value: Complex64) {
        assert!(k.unsigned_abs() as usize <= self.cutoff, "frequency {k} beyond cutoff");
        let i = (k + self.cutoff as i64) as usize;
        self.coeffs[i] = value;
    }

    /// Iterator over `(k, θ_k)`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let l = self.cutoff as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - l, c))
    }

    /// `θ•φ`: every coefficient multiplied by `e^{−i2πkφ}`.
    pub fn rotate(&self, phi: f64) -> Self {
        let coeffs = self.iter().map(|(k, c)| c * cis_neg(k as f64 * phi)).collect();
        FourierSeries { cutoff: self.cutoff, coeffs }
    }

    /// `‖θ‖ = √(Σ|θ_k|²)`.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖θ‖_{H1} = √(Σ k²|θ_k|²)`.
    pub fn h1_norm(&self) -> f64 {
        self.iter().map(|(k, c)| (k * k) as f64 * c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `√(Σ (1 + |k|^{2s}) |θ_k|²)`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.iter()
            .map(|(k, c)| (1.0 + (k.unsigned_abs() as f64).powf(2.0 * s)) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Truncate or zero-pad to a new cutoff.
    pub fn project(&self, new_cutoff: usize) -> Self {
        let mut out = Self::zeros(new_cutoff);
        let m = self.cutoff.min(new_cutoff) as i64;
        for k in -m..=m {
            out.set(k, self.get(k));
        }
        out
    }

    /// `Σ θ_k e^{+i2πkx}`.
    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.iter().map(|(k, c)| c * cis_neg(-(k as f64) * x)).sum()
    }

    /// Coefficient-wise `self − other` at the larger of the two cutoffs.
    pub fn sub(&self, other: &Self) -> Self {
        let l = self.cutoff.max(other.cutoff);
        let mut out = Self::zeros(l);
        for k in -(l as i64)..=l as i64 {
            out.set(k, self.get(k) - other.get(k));
        }
        out
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).l2_norm()
    }

    /// Whether `θ_1` is real (to [`FS_IMAG_TOL`]) and strictly positive.
    pub fn is_normalised(&self) -> bool {
        let t = self.get(1);
        t.re > 0.0 && t.im.abs() <= FS_IMAG_TOL
    }

    /// Shift `α ∈ [0,1)` such that `self.rotate(α)` has `θ_1` real and
    /// nonnegative; `0` when `θ_1 = 0`.
    pub fn alignment_shift(&self) -> f64 {
        let t = self.get(1);
        if t.norm_sqr() == 0.0 {
            return 0.0;
        }
        wrap01(t.arg() / core::f64::consts::TAU)
    }

    /// Rotated copy with `θ_1` real and nonnegative, plus the shift used.
    pub fn aligned(&self) -> (Self, f64) {
        let a = self.alignment_shift();
        let mut out = self.rotate(a);
        if self.cutoff >= 1 {
            let t = out.get(1);
            out.set(1, Complex64::new(t.norm(), 0.0));
        }
        (out, a)
    }
}
