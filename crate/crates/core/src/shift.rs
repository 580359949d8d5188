//! Shift distributions `g` on the circle `[0,1)`.
//!
//! Three representations are supported: finitely many atoms, density values
//! on a uniform periodic grid `x_i = i/m` (read as the piecewise-linear
//! interpolant, so trapezoid sums are exact integrals), and a finite
//! Fourier expansion `g(x) = Σ c_k e^{+i2πkx}` with `c_k = ∫ e^{−i2πkx} dg`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::numeric::{cis_neg, wrap01};
use crate::{Error, Result};

/// Default number of grid points for densities.
pub const DEFAULT_GRID: usize = 1024;
/// Default number of quantile levels used by [`wasserstein1`].
pub const DEFAULT_W1_POINTS: usize = 4096;
/// Tolerated negativity of a reconstructed Fourier density.
pub const NEGATIVITY_TOL: f64 = 1e-9;

/// A probability measure on `[0,1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftDistribution {
    /// `(position, weight)` pairs.
    Discrete { atoms: Vec<(f64, f64)> },
    /// Density values at `i/m`, `i = 0..m`.
    Grid { values: Vec<f64> },
    /// `c_k` for `k = −K..=K`.
    Fourier { cutoff: usize, coeffs: Vec<Complex64> },
}

impl ShiftDistribution {
    /// Atoms with nonnegative weights summing to 1 (within 1e−12) at
    /// positions in `[0,1)`.
    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::param("atoms", "at least one atom is required"));
        }
        let mut total = 0.0;
        for &(x, w) in &atoms {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::param("atoms", "positions must lie in [0,1)"));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::param("atoms", "weights must be finite and nonnegative"));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param("atoms", "weights must sum to 1"));
        }
        Ok(ShiftDistribution::Discrete { atoms })
    }

    /// Point mass at `a`.
    pub fn point(a: f64) -> Self {
        ShiftDistribution::Discrete { atoms: vec![(wrap01(a), 1.0)] }
    }

    /// Grid density; values nonnegative with unit trapezoid integral
    /// (within 1e−9).
    pub fn grid(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::param("values", "a grid needs at least two points"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::param("values", "grid values must be finite and nonnegative"));
        }
        let integral = values.iter().sum::<f64>() / values.len() as f64;
        if (integral - 1.0).abs() > 1e-9 {
            return Err(Error::param("values", "grid density must integrate to 1"));
        }
        Ok(ShiftDistribution::Grid { values })
    }

    /// Grid density proportional to a nonnegative function.
    pub fn grid_from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = (0..m).map(|i| f(i as f64 / m as f64)).collect();
        let total = values.iter().sum::<f64>() / m as f64;
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::param("values", "function has no positive mass"));
        }
        values.iter_mut().for_each(|v| *v /= total);
        Self::grid(values)
    }

    /// Uniform density on an `m`-point grid.
    pub fn uniform(m: usize) -> Self {
        ShiftDistribution::Grid { values: vec![1.0; m] }
    }

    /// Fourier density from `c_k`, `k = −K..=K`; checks `c_0 = 1`, Hermitian
    /// symmetry and nonnegativity of the reconstruction.
    pub fn fourier(cutoff: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * cutoff + 1 {
            return Err(Error::Dimension { expected: 2 * cutoff + 1, got: coeffs.len() });
        }
        let c0 = coeffs[cutoff];
        if (c0.re - 1.0).abs() > 1e-12 || c0.im.abs() > 1e-12 {
            return Err(Error::param("coeffs", "c_0 must equal 1"));
        }
        for k in 1..=cutoff {
            if (coeffs[cutoff + k] - coeffs[cutoff - k].conj()).norm() > 1e-12 {
                return Err(Error::param("coeffs", "c_{-k} must be the conjugate of c_k"));
            }
        }
        let g = ShiftDistribution::Fourier { cutoff, coeffs };
        g.continuous_grid()?;
        Ok(g)
    }

    /// Short name of the representation.
    pub fn kind(&self) -> &'static str {
        match self {
            ShiftDistribution::Discrete { .. } => "discrete",
            ShiftDistribution::Grid { .. } => "grid",
            ShiftDistribution::Fourier { .. } => "fourier",
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, ShiftDistribution::Discrete { .. })
    }

    /// `c_k(g) = ∫ e^{−i2πkφ} dg(φ)`.
    pub fn fourier_coeff(&self, k: i64) -> Complex64 {
        match self {
            ShiftDistribution::Discrete { atoms } => {
                atoms.iter().map(|&(x, w)| cis_neg(k as f64 * x) * w).sum()
            }
            ShiftDistribution::Grid { values } => grid_coeff(values, k),
            ShiftDistribution::Fourier { cutoff, coeffs } => {
                if k.unsigned_abs() as usize > *cutoff {
                    Complex64::new(0.0, 0.0)
                } else {
                    coeffs[(k + *cutoff as i64) as usize]
                }
            }
        }
    }

    /// Density at `x`; `None` for discrete measures.
    pub fn density_at(&self, x: f64) -> Option<f64> {
        match self {
            ShiftDistribution::Discrete { .. } => None,
            ShiftDistribution::Grid { values } => Some(interp_periodic(values, x)),
            ShiftDistribution::Fourier { cutoff, coeffs } => {
                let l = *cutoff as i64;
                let v: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (c * cis_neg(-((i as i64 - l) as f64) * x)).re)
                    .sum();
                Some(v)
            }
        }
    }

    /// Density values on an `m`-point grid.
    ///
    /// Discrete measures become histograms (mass × m in the nearest cell);
    /// Fourier densities are synthesised and rejected when they dip below
    /// `−1e−9`, small negative rounding being clamped to zero.
    pub fn to_grid(&self, m: usize) -> Result<Vec<f64>> {
        match self {
            ShiftDistribution::Discrete { atoms } => {
                let mut v = vec![0.0; m];
                for &(x, w) in atoms {
                    let i = ((x * m as f64).round() as usize) % m;
                    v[i] += w * m as f64;
                }
                Ok(v)
            }
            ShiftDistribution::Grid { values } => {
                if values.len() == m {
                    Ok(values.clone())
                } else {
                    Ok((0..m).map(|i| interp_periodic(values, i as f64 / m as f64)).collect())
                }
            }
            ShiftDistribution::Fourier { .. } => {
                let mut v: Vec<f64> =
                    (0..m).map(|i| self.density_at(i as f64 / m as f64).unwrap()).collect();
                let min = v.iter().copied().fold(f64::INFINITY, f64::min);
                if min < -NEGATIVITY_TOL {
                    return Err(Error::NegativeDensity { min });
                }
                v.iter_mut().for_each(|x| *x = x.max(0.0));
                Ok(v)
            }
        }
    }

    /// Grid size used when a continuous representation is needed.
    fn natural_grid(&self) -> usize {
        match self {
            ShiftDistribution::Discrete { .. } => DEFAULT_GRID,
            ShiftDistribution::Grid { values } => values.len(),
            ShiftDistribution::Fourier { cutoff, .. } => DEFAULT_GRID.max(16 * cutoff),
        }
    }

    fn continuous_grid(&self) -> Result<Vec<f64>> {
        self.to_grid(self.natural_grid())
    }

    /// Prepared inverse-CDF sampler.
    pub fn sampler(&self) -> Result<Sampler> {
        Ok(Sampler { q: Quantile::new(self)? })
    }

    /// `count` i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        let s = self.sampler()?;
        Ok((0..count).map(|_| s.draw(rng)).collect())
    }

    /// Right-continuous quantile `G^{−1}(u) = inf{t : g((0,t]) > u}`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        Ok(Quantile::new(self)?.at(u))
    }

    /// Equal-mass atoms at the quantiles `(2i−1)/(2J)`, duplicates merged.
    pub fn discretize(&self, atom_count: usize) -> Result<Self> {
        if atom_count == 0 {
            return Err(Error::param("atom_count", "must be at least 1"));
        }
        let q = Quantile::new(self)?;
        let w = 1.0 / atom_count as f64;
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(atom_count);
        for i in 1..=atom_count {
            let x = wrap01(q.at((2 * i - 1) as f64 / (2 * atom_count) as f64));
            match atoms.iter_mut().find(|a| a.0 == x) {
                Some(a) => a.1 += w,
                None => atoms.push((x, w)),
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        atoms.iter_mut().for_each(|a| a.1 /= total);
        Ok(ShiftDistribution::Discrete { atoms })
    }

    /// Law of `τ − α (mod 1)` when `τ ~ g`.
    pub fn shifted(&self, alpha: f64) -> Self {
        match self {
            ShiftDistribution::Discrete { atoms } => ShiftDistribution::Discrete {
                atoms: atoms.iter().map(|&(x, w)| (wrap01(x - alpha), w)).collect(),
            },
            ShiftDistribution::Grid { values } => {
                let m = values.len();
                let raw: Vec<f64> =
                    (0..m).map(|i| interp_periodic(values, i as f64 / m as f64 + alpha)).collect();
                let total = raw.iter().sum::<f64>() / m as f64;
                ShiftDistribution::Grid { values: raw.into_iter().map(|v| v / total).collect() }
            }
            ShiftDistribution::Fourier { cutoff, coeffs } => {
                let l = *cutoff as i64;
                let coeffs = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * cis_neg(-((i as i64 - l) as f64) * alpha))
                    .collect();
                ShiftDistribution::Fourier { cutoff: *cutoff, coeffs }
            }
        }
    }

    /// `√(Σ_{k≠0} |k|^{2ν} |c_k|²)` over the available coefficients
    /// (`|k| ≤ m/2` for an `m`-point grid, infinite for atoms).
    pub fn sobolev_radius(&self, nu: f64) -> f64 {
        match self {
            ShiftDistribution::Discrete { .. } => f64::INFINITY,
            ShiftDistribution::Grid { values } => grid_sobolev_radius(values, nu),
            ShiftDistribution::Fourier { cutoff, coeffs } => {
                let l = *cutoff as i64;
                coeffs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i as i64 != l)
                    .map(|(i, c)| ((i as i64 - l).unsigned_abs() as f64).powf(2.0 * nu) * c.norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }

    /// Membership of the Sobolev ball of radius `a`.
    pub fn in_class(&self, nu: f64, a: f64) -> bool {
        self.sobolev_radius(nu) <= a
    }
}

/// Trapezoid `c_k` of a periodic grid density.
fn grid_coeff(values: &[f64], k: i64) -> Complex64 {
    let m = values.len();
    let step = k.rem_euclid(m as i64) as usize;
    let mut idx = 0usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for &v in values {
        acc += cis_neg(idx as f64 / m as f64) * v;
        idx = (idx + step) % m;
    }
    acc / m as f64
}

fn grid_sobolev_radius(values: &[f64], nu: f64) -> f64 {
    let m = values.len();
    let table: Vec<Complex64> = (0..m).map(|j| cis_neg(j as f64 / m as f64)).collect();
    let mut total = 0.0;
    for k in 1..=m / 2 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut idx = 0usize;
        for &v in values {
            acc += table[idx] * v;
            idx += k;
            if idx >= m {
                idx -= m;
            }
        }
        let c = acc / m as f64;
        total += 2.0 * (k as f64).powf(2.0 * nu) * c.norm_sqr();
    }
    total.sqrt()
}

/// Periodic linear interpolation of grid values at `x`.
pub(crate) fn interp_periodic(values: &[f64], x: f64) -> f64 {
    let m = values.len();
    let t = wrap01(x) * m as f64;
    let i = (t.floor() as usize).min(m - 1);
    let s = t - i as f64;
    values[i] * (1.0 - s) + values[(i + 1) % m] * s
}

/// Inverse CDF of a shift distribution.
#[derive(Debug, Clone)]
enum Quantile {
    Atoms { pos: Vec<f64>, cum: Vec<f64> },
    Cells { values: Vec<f64>, cum: Vec<f64> },
}

impl Quantile {
    fn new(g: &ShiftDistribution) -> Result<Self> {
        match g {
            ShiftDistribution::Discrete { atoms } => {
                let mut sorted: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                let total: f64 = sorted.iter().map(|a| a.1).sum();
                let mut acc = 0.0;
                let mut cum = Vec::with_capacity(sorted.len());
                for a in &sorted {
                    acc += a.1 / total;
                    cum.push(acc);
                }
                if let Some(last) = cum.last_mut() {
                    *last = 1.0;
                }
                Ok(Quantile::Atoms { pos: sorted.into_iter().map(|a| a.0).collect(), cum })
            }
            _ => {
                let values = g.continuous_grid()?;
                let m = values.len();
                let mut acc = 0.0;
                let mut cum = Vec::with_capacity(m);
                for i in 0..m {
                    acc += 0.5 * (values[i] + values[(i + 1) % m]) / m as f64;
                    cum.push(acc);
                }
                let total = acc;
                cum.iter_mut().for_each(|c| *c /= total);
                let values = values.into_iter().map(|v| v / total).collect();
                Ok(Quantile::Cells { values, cum })
            }
        }
    }

    fn at(&self, u: f64) -> f64 {
        match self {
            Quantile::Atoms { pos, cum } => {
                let i = cum.partition_point(|&c| c <= u).min(pos.len() - 1);
                pos[i]
            }
            Quantile::Cells { values, cum } => {
                let m = values.len();
                let i = cum.partition_point(|&c| c <= u).min(m - 1);
                let before = if i == 0 { 0.0 } else { cum[i - 1] };
                let h = 1.0 / m as f64;
                // mass in [x_i, x_i + s·h] is h(b s + a s²) with a = (v1 − v0)/2
                let b = values[i];
                let a = 0.5 * (values[(i + 1) % m] - b);
                let c = ((u - before) / h).max(0.0);
                let disc = (b * b + 4.0 * a * c).max(0.0);
                let denom = b + disc.sqrt();
                let s = if denom > 0.0 { 2.0 * c / denom } else { 0.5 };
                (i as f64 + s.clamp(0.0, 1.0)) * h
            }
        }
    }
}

/// Prepared sampler returned by [`ShiftDistribution::sampler`].
#[derive(Debug, Clone)]
pub struct Sampler {
    q: Quantile,
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        wrap01(self.q.at(rng.random::<f64>()))
    }
}

/// `W₁(g, h) = ∫_0^1 |G^{−1}(u) − H^{−1}(u)| du`, midpoint rule over
/// `points` quantile levels.
pub fn wasserstein1(g: &ShiftDistribution, h: &ShiftDistribution, points: usize) -> Result<f64> {
    let qg = Quantile::new(g)?;
    let qh = Quantile::new(h)?;
    let n = points.max(1);
    let s: f64 = (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            (qg.at(u) - qh.at(u)).abs()
        })
        .sum();
    Ok(s / n as f64)
}

/// Total variation `½∫|g − h|`: exact between atom sets, 1 between an atom
/// set and a density, trapezoid on a common grid between densities.
pub fn tv_density(g: &ShiftDistribution, h: &ShiftDistribution) -> Result<f64> {
    use ShiftDistribution::Discrete;
    match (g, h) {
        (Discrete { atoms: a }, Discrete { atoms: b }) => {
            let mut all: Vec<(f64, f64)> = a.to_vec();
            all.extend(b.iter().map(|&(x, w)| (x, -w)));
            all.sort_by(|p, q| p.0.total_cmp(&q.0));
            let mut tv = 0.0;
            let mut i = 0;
            while i < all.len() {
                let x = all[i].0;
                let mut net = 0.0;
                while i < all.len() && all[i].0 == x {
                    net += all[i].1;
                    i += 1;
                }
                tv += net.abs();
            }
            Ok((0.5 * tv).min(1.0))
        }
        (Discrete { .. }, _) | (_, Discrete { .. }) => Ok(1.0),
        _ => {
            let m = g.natural_grid().max(h.natural_grid());
            let vg = g.to_grid(m)?;
            let vh = h.to_grid(m)?;
            let s: f64 = vg.iter().zip(&vh).map(|(a, b)| (a - b).abs()).sum();
            Ok((0.5 * s / m as f64).min(1.0))
        }
    }
}

/// `‖g − h‖_{L²}` on a common grid; densities only.
pub fn l2_distance(g: &ShiftDistribution, h: &ShiftDistribution) -> Result<f64> {
    if g.is_discrete() || h.is_discrete() {
        return Err(Error::param("g", "L² distance needs densities"));
    }
    let m = g.natural_grid().max(h.natural_grid());
    let vg = g.to_grid(m)?;
    let vh = h.to_grid(m)?;
    let s: f64 = vg.iter().zip(&vh).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((s / m as f64).sqrt())
}

/// `1 + cos(2πx)` style densities used throughout the tests and examples.
pub fn cosine_density(m: usize, amplitude: f64) -> Result<ShiftDistribution> {
    ShiftDistribution::grid_from_fn(m, |x| 1.0 + amplitude * (TAU * x).cos())
}
