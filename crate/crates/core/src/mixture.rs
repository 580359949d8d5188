//! Mixture laws `P_{θ,g} = ∫ γ_{θ•φ} dg(φ)` on a finite set of frequencies.
//!
//! `γ(z) = π^{−p} e^{−‖z‖²}` is the standard complex Gaussian in `ℂ^p`. The
//! mixing integral is an exact sum for atoms and a trapezoid rule on
//! `quadrature_points` equispaced nodes for densities; in both cases the law
//! is represented by a finite set of weighted nodes, so sampling and density
//! evaluation refer to exactly the same measure.

use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::fourier::FourierSeries;
use crate::model::ObservationSet;
use crate::numeric::{cis_neg, pairwise_sum};
use crate::shift::ShiftDistribution;
use crate::special::{log_gamma_norm, sample_complex_gaussian};
use crate::{Error, Result};

/// Minimum node count for densities.
pub const MIN_QUADRATURE: usize = 64;

/// Default trapezoid node count: `max(512, 64⌈‖θ‖_{H1}⌉)`.
pub fn default_quadrature(theta: &FourierSeries) -> usize {
    512.max(64 * theta.h1_norm().ceil() as usize)
}

/// `P_{θ,g}` restricted to a list of frequencies.
#[derive(Debug, Clone)]
pub struct MixtureLaw {
    theta: FourierSeries,
    g: ShiftDistribution,
    quadrature_points: usize,
    freqs: Vec<i64>,
    coeffs: Vec<Complex64>,
    node_phi: Vec<f64>,
    node_logw: Vec<f64>,
    node_cum: Vec<f64>,
    means: Vec<Complex64>,
    theta_sq: f64,
}

impl MixtureLaw {
    /// Law of the full coefficient vector `k = −ℓ..=ℓ` with the default
    /// quadrature rule.
    pub fn new(theta: FourierSeries, g: ShiftDistribution) -> Result<Self> {
        let q = default_quadrature(&theta);
        Self::with_quadrature(theta, g, q)
    }

    /// As [`MixtureLaw::new`] with an explicit node count for densities.
    pub fn with_quadrature(theta: FourierSeries, g: ShiftDistribution, quadrature_points: usize) -> Result<Self> {
        let l = theta.cutoff() as i64;
        let freqs: Vec<i64> = (-l..=l).collect();
        Self::build(theta, g, quadrature_points, freqs)
    }

    fn build(theta: FourierSeries, g: ShiftDistribution, quadrature_points: usize, freqs: Vec<i64>) -> Result<Self> {
        if !g.is_discrete() && quadrature_points < MIN_QUADRATURE {
            return Err(Error::param("quadrature_points", "must be at least 64 for densities"));
        }
        let (phi, w) = nodes(&g, quadrature_points)?;
        let total: f64 = w.iter().sum();
        let mut node_phi = Vec::with_capacity(phi.len());
        let mut node_logw = Vec::with_capacity(phi.len());
        let mut node_cum = Vec::with_capacity(phi.len());
        let mut acc = 0.0;
        for (x, wi) in phi.into_iter().zip(w) {
            if wi > 0.0 {
                node_phi.push(x);
                node_logw.push((wi / total).ln());
                acc += wi / total;
                node_cum.push(acc);
            }
        }
        if let Some(last) = node_cum.last_mut() {
            *last = 1.0;
        }
        let coeffs: Vec<Complex64> = freqs.iter().map(|&k| theta.get(k)).collect();
        let mut means = Vec::with_capacity(node_phi.len() * freqs.len());
        for &x in &node_phi {
            for (&k, &c) in freqs.iter().zip(&coeffs) {
                means.push(c * cis_neg(k as f64 * x));
            }
        }
        let theta_sq = coeffs.iter().map(|c| c.norm_sqr()).sum();
        Ok(MixtureLaw { theta, g, quadrature_points, freqs, coeffs, node_phi, node_logw, node_cum, means, theta_sq })
    }

    /// The law of the coordinates at `freqs` only (the marginal of the
    /// mixture is the mixture of the marginals).
    pub fn restricted(&self, freqs: &[i64]) -> Result<Self> {
        for &k in freqs {
            if k.unsigned_abs() as usize > self.theta.cutoff() {
                return Err(Error::param("freqs", "frequency beyond the cutoff"));
            }
        }
        Self::build(self.theta.clone(), self.g.clone(), self.quadrature_points, freqs.to_vec())
    }

    /// One-dimensional marginal on frequency `k`.
    pub fn marginal(&self, k: i64) -> Result<Self> {
        self.restricted(&[k])
    }

    pub fn theta(&self) -> &FourierSeries {
        &self.theta
    }

    pub fn g(&self) -> &ShiftDistribution {
        &self.g
    }

    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points
    }

    /// Frequencies carried, in coordinate order.
    pub fn freqs(&self) -> &[i64] {
        &self.freqs
    }

    /// Complex dimension `p`.
    pub fn dim(&self) -> usize {
        self.freqs.len()
    }

    /// Number of mixing nodes.
    pub fn node_count(&self) -> usize {
        self.node_phi.len()
    }

    /// Whether `freqs` is the full range `−ℓ..=ℓ`.
    pub fn is_full(&self) -> bool {
        let l = self.theta.cutoff() as i64;
        self.freqs.len() == (2 * l + 1) as usize && self.freqs.iter().copied().eq(-l..=l)
    }

    fn check_dim(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: z.len() });
        }
        Ok(())
    }

    /// `ln p_{θ,g}(z)`, log-sum-exp over nodes of `ln w_i − ‖z − θ•φ_i‖²`.
    pub fn log_density(&self, z: &[Complex64]) -> Result<f64> {
        self.check_dim(z)?;
        Ok(self.log_density_unchecked(z))
    }

    pub(crate) fn log_density_unchecked(&self, z: &[Complex64]) -> f64 {
        let p = self.dim();
        let mut m = f64::NEG_INFINITY;
        let mut s = 0.0;
        for (i, lw) in self.node_logw.iter().enumerate() {
            let mu = &self.means[i * p..(i + 1) * p];
            let d2: f64 = z.iter().zip(mu).map(|(a, b)| (a - b).norm_sqr()).sum();
            let e = lw - d2;
            if e > m {
                s = s * (m - e).exp() + 1.0;
                m = e;
            } else {
                s += (e - m).exp();
            }
        }
        log_gamma_norm(p) + m + s.ln()
    }

    /// `p_{θ,g}(z)`.
    pub fn density(&self, z: &[Complex64]) -> Result<f64> {
        Ok(self.log_density(z)?.exp())
    }

    /// `ln ∫ exp(2Re⟨θ•φ, y⟩ − ‖θ‖²) dg(φ)` with `⟨u,v⟩ = Σ conj(u_k) v_k`.
    ///
    /// `y` may be longer than the law's dimension: for a full law it is read
    /// as a vector over `−L..=L` with `L ≥ ℓ`, coordinates beyond `ℓ` being
    /// irrelevant because `θ` vanishes there.
    pub fn log_girsanov_integral(&self, y: &[Complex64]) -> Result<f64> {
        let p = self.dim();
        let z: Vec<Complex64> = if y.len() == p {
            y.to_vec()
        } else {
            if !self.is_full() || y.len().is_multiple_of(2) || y.len() < p {
                return Err(Error::Dimension { expected: p, got: y.len() });
            }
            let big = (y.len() / 2) as i64;
            self.freqs.iter().map(|&k| y[(k + big) as usize]).collect()
        };
        let mut m = f64::NEG_INFINITY;
        let mut s = 0.0;
        for (i, lw) in self.node_logw.iter().enumerate() {
            let mu = &self.means[i * p..(i + 1) * p];
            let ip: f64 = mu.iter().zip(&z).map(|(a, b)| (a.conj() * b).re).sum();
            let e = lw + 2.0 * ip;
            if e > m {
                s = s * (m - e).exp() + 1.0;
                m = e;
            } else {
                s += (e - m).exp();
            }
        }
        Ok(m + s.ln() - self.theta_sq)
    }

    /// Draw one observation vector.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); self.dim()];
        self.sample_into(rng, &mut out);
        out
    }

    /// Draw one observation vector into `out` (length `dim()`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64]) {
        let p = self.dim();
        let u: f64 = rng.random();
        let i = self.node_cum.partition_point(|&c| c <= u).min(self.node_cum.len() - 1);
        let mu = &self.means[i * p..(i + 1) * p];
        for (o, m) in out.iter_mut().zip(mu) {
            *o = m + sample_complex_gaussian(rng);
        }
    }

    /// Nodes `(φ_i, w_i)` of the mixing measure.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.node_phi.iter().zip(&self.node_logw).map(|(&x, &lw)| (x, lw.exp()))
    }

    pub(crate) fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
}

/// Mixing nodes and (unnormalised) weights for a shift distribution.
fn nodes(g: &ShiftDistribution, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    match g {
        ShiftDistribution::Discrete { atoms } => Ok(atoms.iter().copied().unzip()),
        ShiftDistribution::Grid { .. } => {
            let phi: Vec<f64> = (0..m).map(|i| i as f64 / m as f64).collect();
            let w = phi.iter().map(|&x| g.density_at(x).unwrap().max(0.0)).collect();
            Ok((phi, w))
        }
        ShiftDistribution::Fourier { .. } => {
            let w = g.to_grid(m)?;
            Ok(((0..m).map(|i| i as f64 / m as f64).collect(), w))
        }
    }
}

/// `γ_μ(z) = π^{−p} e^{−‖z−μ‖²}`.
pub fn gaussian_density(z: &[Complex64], mu: &[Complex64]) -> Result<f64> {
    if z.len() != mu.len() {
        return Err(Error::Dimension { expected: mu.len(), got: z.len() });
    }
    let d2: f64 = z.iter().zip(mu).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok((log_gamma_norm(z.len()) - d2).exp())
}

/// Gather the coordinates of `y` (over `−L..=L`) at the law's frequencies.
fn gather(law: &MixtureLaw, y: &[Complex64], big: i64, out: &mut [Complex64]) {
    for (o, &k) in out.iter_mut().zip(law.freqs()) {
        *o = y[(k + big) as usize];
    }
}

fn check_cover(law: &MixtureLaw, obs: &ObservationSet) -> Result<()> {
    if law.freqs().iter().any(|k| k.unsigned_abs() as usize > obs.cutoff()) {
        return Err(Error::param("law", "law frequencies exceed the observation cutoff"));
    }
    Ok(())
}

/// `Σ_j ln p_{θ,g}(y_j)` with each `y_j` restricted to the law's
/// frequencies. Frequencies the law does not carry are dropped, so values
/// are comparable only between laws on the same frequency set.
pub fn log_likelihood(law: &MixtureLaw, obs: &ObservationSet) -> Result<f64> {
    check_cover(law, obs)?;
    let big = obs.cutoff() as i64;
    let mut z = alloc::vec![Complex64::new(0.0, 0.0); law.dim()];
    let terms: Vec<f64> = obs
        .curves()
        .map(|y| {
            gather(law, y, big, &mut z);
            law.log_density_unchecked(&z)
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Gradient of [`log_likelihood`] in `θ` for a full law: entry `k` holds
/// `∂/∂Re θ_k + i ∂/∂Im θ_k`.
pub fn log_likelihood_gradient(law: &MixtureLaw, obs: &ObservationSet) -> Result<Vec<Complex64>> {
    if !law.is_full() {
        return Err(Error::param("law", "gradient needs the full frequency range"));
    }
    check_cover(law, obs)?;
    let big = obs.cutoff() as i64;
    let p = law.dim();
    let mut z = alloc::vec![Complex64::new(0.0, 0.0); p];
    let mut grad = alloc::vec![Complex64::new(0.0, 0.0); p];
    let mut e = Vec::with_capacity(law.node_count());
    for y in obs.curves() {
        gather(law, y, big, &mut z);
        e.clear();
        for (i, lw) in law.node_logw.iter().enumerate() {
            let mu = &law.means[i * p..(i + 1) * p];
            let ip: f64 = mu.iter().zip(&z).map(|(a, b)| (a.conj() * b).re).sum();
            e.push(lw + 2.0 * ip);
        }
        let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let norm: f64 = e.iter().map(|x| (x - top).exp()).sum();
        for (i, x) in e.iter().enumerate() {
            let pi = (x - top).exp() / norm;
            let phi = law.node_phi[i];
            for (c, (&k, zk)) in law.freqs().iter().zip(&z).enumerate() {
                grad[c] += cis_neg(-(k as f64) * phi) * zk * (2.0 * pi);
            }
        }
        for (gk, th) in grad.iter_mut().zip(law.coeffs()) {
            *gk -= th * 2.0;
        }
    }
    Ok(grad)
}

/// `ln` of the likelihood ratio of `f` against `f0` at `y`, computed through
/// the Girsanov integrals; `y` lives on `−L..=L` with `L` the larger cutoff.
pub fn girsanov_log_ratio(f: &MixtureLaw, f0: &MixtureLaw, y: &[Complex64]) -> Result<f64> {
    Ok(f.log_girsanov_integral(y)? - f0.log_girsanov_integral(y)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gaussian_reference_values() {
        assert!((gaussian_density(&[c(0.3, 0.1)], &[c(0.3, 0.1)]).unwrap() - 1.0 / PI).abs() < 1e-15);
        let v = gaussian_density(&[c(1.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
        assert!((v - (-1.0f64).exp() / PI).abs() < 1e-15);
        assert!(gaussian_density(&[c(0.0, 0.0)], &[]).is_err());
    }

    #[test]
    fn point_mass_mixture_is_gaussian() {
        let theta = FourierSeries::from_pairs(&[(1, c(0.7, -0.2)), (0, c(0.1, 0.0))]);
        let law = MixtureLaw::new(theta.clone(), ShiftDistribution::point(0.0)).unwrap();
        let z = [c(0.2, 0.1), c(-0.3, 0.4), c(1.0, 0.0)];
        let direct = gaussian_density(&z, theta.coeffs()).unwrap();
        assert!((law.density(&z).unwrap() / direct - 1.0).abs() < 1e-13);
    }

    #[test]
    fn zero_theta_ignores_g() {
        let law = MixtureLaw::new(FourierSeries::zeros(1), crate::shift::cosine_density(256, 0.8).unwrap()).unwrap();
        let z = [c(0.2, 0.1), c(-0.3, 0.4), c(1.0, 0.0)];
        let direct = gaussian_density(&z, &[c(0.0, 0.0); 3]).unwrap();
        assert!((law.density(&z).unwrap() / direct - 1.0).abs() < 1e-13);
    }

    #[test]
    fn two_atom_mixture_hand_expanded() {
        let theta = FourierSeries::from_pairs(&[(1, c(1.0, 0.0)), (-1, c(0.2, 0.3))]);
        let g = ShiftDistribution::discrete(alloc::vec![(0.2, 0.3), (0.7, 0.7)]).unwrap();
        let law = MixtureLaw::new(theta.clone(), g).unwrap();
        let z = [c(0.1, -0.4), c(0.0, 0.2), c(0.9, 0.3)];
        let expect = 0.3 * gaussian_density(&z, theta.rotate(0.2).coeffs()).unwrap()
            + 0.7 * gaussian_density(&z, theta.rotate(0.7).coeffs()).unwrap();
        assert!((law.density(&z).unwrap() / expect - 1.0).abs() < 1e-13);
    }

    #[test]
    fn single_curve_point_mass_loglik() {
        let theta = FourierSeries::from_pairs(&[(1, c(0.8, 0.1))]);
        let law = MixtureLaw::new(theta.clone(), ShiftDistribution::point(0.0)).unwrap();
        let y = alloc::vec![c(0.3, 0.3), c(-0.1, 0.0), c(1.1, -0.2)];
        let obs = ObservationSet::new(1, 1.0, None, alloc::vec![y.clone()], None).unwrap();
        let d2: f64 = y.iter().zip(theta.coeffs()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let expect = -3.0 * PI.ln() - d2;
        assert!((log_likelihood(&law, &obs).unwrap() - expect).abs() < 1e-13);
        let empty = ObservationSet::empty(1, 1.0);
        assert_eq!(log_likelihood(&law, &empty).unwrap(), 0.0);
    }

    #[test]
    fn restricted_law_matches_marginal_coefficient() {
        let theta = FourierSeries::from_pairs(&[(1, c(0.8, 0.1)), (2, c(0.0, 0.4))]);
        let law = MixtureLaw::new(theta.clone(), ShiftDistribution::point(0.0)).unwrap();
        let m = law.marginal(1).unwrap();
        assert_eq!(m.dim(), 1);
        let z = [c(0.5, 0.5)];
        let expect = gaussian_density(&z, &[theta.get(1)]).unwrap();
        assert!((m.density(&z).unwrap() / expect - 1.0).abs() < 1e-13);
        assert!(law.marginal(3).is_err());
    }
}
