//! Constructive objects behind the identifiability and lower-bound theory:
//! the Fano net, the bracketing net of the Gaussian location family, finite
//! mixtures matching trigonometric moments, and identifiability probes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::distances::{mc_distance_seeded, DistanceEstimate, Metric};
use crate::fourier::FourierSeries;
use crate::mixture::MixtureLaw;
use crate::numeric::{cis_neg, wrap01};
use crate::shift::ShiftDistribution;
use crate::special::{bessel_i_scaled, log_gamma_norm, zeta};
use crate::{Error, Result};

// ---------------------------------------------------------------- Fano net

/// The `p` curves `f_j = e^{i2πx} + p^{−s} e^{i2π(j−1)/p} e^{i2πpx}`.
pub fn fano_f_net(p: usize, s: f64) -> Result<Vec<FourierSeries>> {
    if p < 2 {
        return Err(Error::param("p", "net size must be at least 2"));
    }
    let amp = (p as f64).powf(-s);
    Ok((0..p)
        .map(|j| {
            let mut f = FourierSeries::zeros(p);
            f.set(1, Complex64::new(1.0, 0.0));
            f.set(p as i64, Complex64::from_polar(amp, TAU * j as f64 / p as f64));
            f
        })
        .collect())
}

/// Amplitude `a` of `c_k(g_1) = a|k|^{−β}`: the largest value keeping the
/// Sobolev radius at most `A` and `Σ_{k≠0}|c_k| ≤ 1`.
pub fn fano_amplitude(beta: f64, nu: f64, radius: f64) -> f64 {
    let sobolev = radius / (2.0 * zeta(2.0 * beta - 2.0 * nu)).sqrt();
    let positivity = 1.0 / (2.0 * zeta(beta));
    sobolev.min(positivity)
}

/// The `p` shift densities (as Fourier densities truncated at `K`).
///
/// `g_1` has `c_k = a|k|^{−β}`. For `g_j`, each frequency `r = m + ℓp` with
/// `ℓ = round(r/p)` and `|m| ≤ p/4` receives the phase `e^{−i2πℓ(j−1)/p}`,
/// which cancels the phase carried by `θ_p` of `f_j` in every mixed moment
/// of order `|m| ≤ p/4`; other frequencies are copied.
pub fn fano_g_net(p: usize, beta: f64, nu: f64, radius: f64, cutoff: usize) -> Result<Vec<ShiftDistribution>> {
    if p < 2 {
        return Err(Error::param("p", "net size must be at least 2"));
    }
    if !(beta > nu + 0.5) {
        return Err(Error::param("beta", "must exceed nu + 1/2"));
    }
    if !(radius > 0.0) {
        return Err(Error::param("radius", "must be positive"));
    }
    let a = fano_amplitude(beta, nu, radius);
    let d = (p / 4) as i64;
    let pi = p as i64;
    (0..p)
        .map(|j| {
            let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * cutoff + 1];
            coeffs[cutoff] = Complex64::new(1.0, 0.0);
            for r in 1..=cutoff as i64 {
                let base = a * (r as f64).powf(-beta);
                let l = (r as f64 / p as f64).round() as i64;
                let m = r - l * pi;
                let c = if m.abs() <= d {
                    Complex64::new(base, 0.0) * cis_neg((l * j as i64) as f64 / p as f64)
                } else {
                    Complex64::new(base, 0.0)
                };
                coeffs[cutoff + r as usize] = c;
                coeffs[cutoff - r as usize] = c.conj();
            }
            ShiftDistribution::fourier(cutoff, coeffs)
        })
        .collect()
}

/// A complete Fano net.
#[derive(Debug, Clone)]
pub struct FanoNet {
    pub p: usize,
    pub s: f64,
    pub beta: f64,
    pub nu: f64,
    pub radius: f64,
    pub amplitude: f64,
    pub fs: Vec<FourierSeries>,
    pub gs: Vec<ShiftDistribution>,
}

/// Default Fourier truncation of the net densities.
pub fn default_net_cutoff(p: usize) -> usize {
    8 * p
}

impl FanoNet {
    pub fn new(p: usize, s: f64, beta: f64, nu: f64, radius: f64) -> Result<Self> {
        Self::with_cutoff(p, s, beta, nu, radius, default_net_cutoff(p))
    }

    pub fn with_cutoff(p: usize, s: f64, beta: f64, nu: f64, radius: f64, cutoff: usize) -> Result<Self> {
        Ok(FanoNet {
            p,
            s,
            beta,
            nu,
            radius,
            amplitude: fano_amplitude(beta, nu, radius),
            fs: fano_f_net(p, s)?,
            gs: fano_g_net(p, beta, nu, radius, cutoff)?,
        })
    }

    /// Joint law of frequencies `{1, p}` under `(f_i, g_j)` (0-based).
    pub fn joint_law(&self, i: usize, j: usize) -> Result<MixtureLaw> {
        MixtureLaw::new(self.fs[i].clone(), self.gs[j].clone())?.restricted(&[1, self.p as i64])
    }
}

/// Matched (`P_{f_j,g_j}` vs `P_{f_1,g_1}`) and mismatched (`P_{f_j,g_1}`
/// vs `P_{f_1,g_1}`) total variations, indexed by `j − 1`.
#[derive(Debug, Clone)]
pub struct FanoCertificate {
    pub matched: Vec<DistanceEstimate>,
    pub mismatched: Vec<DistanceEstimate>,
}

impl FanoCertificate {
    /// Whether every matched TV is strictly below its mismatched TV.
    pub fn ordering_holds(&self) -> bool {
        self.matched.iter().zip(&self.mismatched).skip(1).all(|(m, x)| m.value < x.value)
    }

    pub fn max_matched(&self) -> f64 {
        self.matched.iter().map(|e| e.value).fold(0.0, f64::max)
    }
}

/// Monte Carlo TV certificate of a Fano net on the joint law of
/// frequencies `{1, p}`; pair `j` uses streams keyed by `seed + j`.
pub fn fano_tv_certificate(net: &FanoNet, samples: usize, seed: u64) -> Result<FanoCertificate> {
    let mut matched = vec![DistanceEstimate::closed_form(0.0)];
    let mut mismatched = vec![DistanceEstimate::closed_form(0.0)];
    for j in 1..net.p {
        let (m, x) = fano_tv_pair(net, j, samples, seed)?;
        matched.push(m);
        mismatched.push(x);
    }
    Ok(FanoCertificate { matched, mismatched })
}

/// Entry `j` of [`fano_tv_certificate`]: the matched and mismatched TVs.
pub fn fano_tv_pair(net: &FanoNet, j: usize, samples: usize, seed: u64) -> Result<(DistanceEstimate, DistanceEstimate)> {
    if j == 0 {
        return Ok((DistanceEstimate::closed_form(0.0), DistanceEstimate::closed_form(0.0)));
    }
    if j >= net.p {
        return Err(Error::param("j", "must be below p"));
    }
    let reference = net.joint_law(0, 0)?;
    let s = seed.wrapping_add(2 * j as u64);
    let matched = mc_distance_seeded(&net.joint_law(j, j)?, &reference, Metric::Tv, samples, s)?;
    let mismatched = mc_distance_seeded(&net.joint_law(j, 0)?, &reference, Metric::Tv, samples, s.wrapping_add(1))?;
    Ok((matched, mismatched))
}

/// Full matrix of matched-pair TVs `d_TV(P_{f_i,g_i}, P_{f_j,g_j})`.
pub fn fano_tv_matrix(net: &FanoNet, samples: usize, seed: u64) -> Result<Vec<Vec<DistanceEstimate>>> {
    let laws: Result<Vec<MixtureLaw>> = (0..net.p).map(|j| net.joint_law(j, j)).collect();
    let laws = laws?;
    let mut out = vec![vec![DistanceEstimate::closed_form(0.0); net.p]; net.p];
    for i in 0..net.p {
        for j in (i + 1)..net.p {
            let e = mc_distance_seeded(&laws[i], &laws[j], Metric::Tv, samples, seed.wrapping_add((i * net.p + j) as u64))?;
            out[i][j] = e;
            out[j][i] = e;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------- bracketing net

/// One bracket `[l_i, u_i]` centred at `θ•φ_-^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    pub phi_minus: f64,
    pub center: Vec<Complex64>,
}

/// Brackets `l_i = (1+δ)^{−1} γ_{θ•φ_-^i, (1+δ)^{−α}I}` and
/// `u_i = (1+δ) γ_{θ•φ_-^i, (1+δ)^{α}I}` covering `{γ_{θ•φ} : φ ∈ [0,1)}`.
#[derive(Debug, Clone)]
pub struct BracketingNet {
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: f64,
    pub dim: usize,
    pub h1: f64,
    pub delta_phi: f64,
    pub brackets: Vec<Bracket>,
}

/// Build the bracketing net at Hellinger width `ε`.
pub fn bracketing_net(theta: &FourierSeries, epsilon: f64) -> Result<BracketingNet> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::param("epsilon", "must lie in (0, 0.5]"));
    }
    let p = theta.dim();
    let h1 = theta.h1_norm();
    let delta = epsilon / core::f64::consts::SQRT_2;
    let alpha = 1.0 / (2.0 * p as f64);
    let (delta_phi, count) = if h1 == 0.0 {
        (1.0, 1)
    } else {
        let dp = 0.9 * epsilon / (32f64.sqrt() * PI * (p as f64).sqrt() * h1);
        (dp, (1.0 / dp).ceil() as usize)
    };
    let brackets = (0..count)
        .map(|i| {
            let phi = i as f64 * delta_phi;
            Bracket { phi_minus: phi, center: theta.rotate(phi).coeffs().to_vec() }
        })
        .collect();
    Ok(BracketingNet { epsilon, delta, alpha, dim: p, h1, delta_phi, brackets })
}

impl BracketingNet {
    pub fn len(&self) -> usize {
        self.brackets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.brackets.is_empty()
    }

    /// Index of the bracket whose cell `[φ_-^i, φ_-^i + Δφ)` contains `φ`.
    pub fn cell_of(&self, phi: f64) -> usize {
        ((wrap01(phi) / self.delta_phi).floor() as usize).min(self.len() - 1)
    }

    fn log_scaled_gaussian(&self, i: usize, z: &[Complex64], log_mass: f64, var: f64) -> f64 {
        let d2: f64 = z.iter().zip(&self.brackets[i].center).map(|(a, b)| (a - b).norm_sqr()).sum();
        log_mass + log_gamma_norm(self.dim) - self.dim as f64 * var.ln() - d2 / var
    }

    /// `ln l_i(z)`.
    pub fn lower_log_density(&self, i: usize, z: &[Complex64]) -> f64 {
        let l1d = (1.0 + self.delta).ln();
        self.log_scaled_gaussian(i, z, -l1d, (-self.alpha * l1d).exp())
    }

    /// `ln u_i(z)`.
    pub fn upper_log_density(&self, i: usize, z: &[Complex64]) -> f64 {
        let l1d = (1.0 + self.delta).ln();
        self.log_scaled_gaussian(i, z, l1d, (self.alpha * l1d).exp())
    }

    /// Total mass of `l_i`, `(1+δ)^{−1}`.
    pub fn lower_mass(&self) -> f64 {
        1.0 / (1.0 + self.delta)
    }

    /// Total mass of `u_i`, `1+δ`.
    pub fn upper_mass(&self) -> f64 {
        1.0 + self.delta
    }

    /// Bhattacharyya factor `2^p √(1+δ) / (1+(1+δ)^{1/p})^p` of the
    /// normalised bracket ends.
    fn affinity(&self) -> f64 {
        let p = self.dim as f64;
        let t = (1.0 + self.delta).powf(1.0 / p);
        (p * 2f64.ln() + 0.5 * (1.0 + self.delta).ln() - p * (1.0 + t).ln()).exp()
    }

    /// The bracket width bound `δ² + 2(1 − affinity)`.
    pub fn hellinger_sq_bound(&self) -> f64 {
        self.delta * self.delta + 2.0 * (1.0 - self.affinity())
    }

    /// Exact `d_H²(l_i, u_i) = δ²/(1+δ) + 2(1 − affinity)`.
    pub fn hellinger_sq_exact(&self) -> f64 {
        self.delta * self.delta / (1.0 + self.delta) + 2.0 * (1.0 - self.affinity())
    }

    /// Count bound `⌈4π√(2p)‖θ‖_{H1}/(0.9ε)⌉ + 1`.
    pub fn count_bound(&self) -> usize {
        (4.0 * PI * (2.0 * self.dim as f64).sqrt() * self.h1 / (0.9 * self.epsilon)).ceil() as usize + 1
    }

    /// Sufficient analytic condition for `l_i ≤ γ_{θ•φ} ≤ u_i` over each
    /// cell: the cell radius `r = 2π‖θ‖_{H1}Δφ` must satisfy
    /// `r² ≤ ½ ln(1+δ) (1 − (1+δ)^{−α})` (the lower end binds). Holds for
    /// the default slack when `ε` is below about 0.25.
    pub fn containment_guaranteed(&self) -> bool {
        let r = TAU * self.h1 * self.delta_phi;
        let l1d = (1.0 + self.delta).ln();
        r * r <= 0.5 * l1d * (1.0 - (-self.alpha * l1d).exp())
    }
}

// ------------------------------------------------- finite mixture matching

/// Discrete distribution on at most `2R+1` atoms with `c_r` equal to those of
/// `g` for `|r| ≤ R`, by nonnegative least squares over a candidate grid;
/// atoms closer than `eta` are then merged.
pub fn finite_mixture_match(g: &ShiftDistribution, order: usize, eta: f64) -> Result<ShiftDistribution> {
    if order < 1 {
        return Err(Error::param("order", "must be at least 1"));
    }
    let n = 512.max(64 * order);
    let rows = 2 * order + 1;
    let target: Vec<Complex64> = (0..=order as i64).map(|r| g.fourier_coeff(r)).collect();
    let mut b = Vec::with_capacity(rows);
    b.push(target[0].re);
    for t in &target[1..] {
        b.push(t.re);
        b.push(t.im);
    }
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            let mut col = Vec::with_capacity(rows);
            col.push(1.0);
            for r in 1..=order {
                let e = cis_neg(r as f64 * x);
                col.push(e.re);
                col.push(e.im);
            }
            col
        })
        .collect();
    let w = nnls(&cols, &b, rows);
    let mut atoms: Vec<(f64, f64)> =
        w.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(i, &v)| (i as f64 / n as f64, v)).collect();
    atoms = merge_atoms(atoms, eta);
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    atoms.iter_mut().for_each(|a| a.1 /= total);
    let out = ShiftDistribution::Discrete { atoms };
    let err = (0..=order as i64)
        .map(|r| (out.fourier_coeff(r) - target[r as usize]).norm())
        .fold(0.0, f64::max);
    if err > 1e-8 {
        return Err(Error::MomentMismatch { achieved: err, tolerance: 1e-8 });
    }
    Ok(out)
}

fn merge_atoms(mut atoms: Vec<(f64, f64)>, eta: f64) -> Vec<(f64, f64)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (x, w) in atoms {
        match out.last_mut() {
            Some(last) if x - last.0 < eta => {
                let tw = last.1 + w;
                last.0 = (last.0 * last.1 + x * w) / tw;
                last.1 = tw;
            }
            _ => out.push((x, w)),
        }
    }
    out
}

/// Lawson–Hanson nonnegative least squares `min ‖Ax − b‖, x ≥ 0` with `A`
/// given by columns.
fn nnls(cols: &[Vec<f64>], b: &[f64], rows: usize) -> Vec<f64> {
    let n = cols.len();
    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    let residual = |x: &[f64]| -> Vec<f64> {
        let mut r = b.to_vec();
        for (j, col) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                for i in 0..rows {
                    r[i] -= col[i] * x[j];
                }
            }
        }
        r
    };
    let tol = 1e-14;
    for _outer in 0..3 * n {
        let r = residual(&x);
        if r.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-15 {
            break;
        }
        let (mut best, mut best_w) = (usize::MAX, tol);
        for j in 0..n {
            if !passive[j] {
                let w: f64 = cols[j].iter().zip(&r).map(|(a, b)| a * b).sum();
                if w > best_w {
                    best = j;
                    best_w = w;
                }
            }
        }
        if best == usize::MAX {
            break;
        }
        passive[best] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub: Vec<&Vec<f64>> = idx.iter().map(|&j| &cols[j]).collect();
            let z = lstsq(&sub, b, rows);
            if z.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z[k];
                }
                break;
            }
            let mut step = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let s = x[j] / (x[j] - z[k]);
                    if s < step {
                        step = s;
                    }
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += step * (z[k] - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if idx.iter().all(|&j| !passive[j]) {
                break;
            }
        }
    }
    x
}

/// Least squares by Householder QR; columns may be nearly dependent, in
/// which case tiny pivots are dropped.
fn lstsq(cols: &[&Vec<f64>], b: &[f64], rows: usize) -> Vec<f64> {
    let k = cols.len();
    let mut a: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();
    let mut rhs = b.to_vec();
    let steps = k.min(rows);
    for j in 0..steps {
        let norm = (j..rows).map(|i| a[j][i] * a[j][i]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..rows).map(|i| a[j][i]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|x| x * x).sum::<f64>();
        if vn == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(j) {
            let dot: f64 = (j..rows).map(|i| v[i - j] * col[i]).sum();
            let f = 2.0 * dot / vn;
            for i in j..rows {
                col[i] -= f * v[i - j];
            }
        }
        let dot: f64 = (j..rows).map(|i| v[i - j] * rhs[i]).sum();
        let f = 2.0 * dot / vn;
        for i in j..rows {
            rhs[i] -= f * v[i - j];
        }
    }
    let mut z = vec![0.0; k];
    let scale = (0..steps).map(|j| a[j][j].abs()).fold(0.0, f64::max);
    for j in (0..steps).rev() {
        let mut s = rhs[j];
        for l in (j + 1)..steps {
            s -= a[l][j] * z[l];
        }
        z[j] = if a[j][j].abs() > 1e-13 * scale { s / a[j][j] } else { 0.0 };
    }
    z
}

// ---------------------------------------------------- identifiability probes

/// Marginal law of the first coefficient, `θ_1 e^{−i2πφ} + ξ`, `φ ~ g`.
pub fn first_marginal(theta1: f64, g: &ShiftDistribution) -> Result<MixtureLaw> {
    let f = FourierSeries::from_pairs(&[(1, Complex64::new(theta1, 0.0))]);
    MixtureLaw::new(f, g.clone())?.marginal(1)
}

/// Result of the `θ_1` perturbation probe.
#[derive(Debug, Clone)]
pub struct ProbeResult {
    pub etas: Vec<f64>,
    pub tvs: Vec<DistanceEstimate>,
    /// Least-squares slope of `ln TV` against `ln η` over `η > 0`.
    pub slope: f64,
}

/// Marginal-1 TV between `θ_1` and `θ_1 + η` under the same `g0`, for each
/// `η`, with a log-log slope fit. All `η` share one random stream.
pub fn identifiability_probe(theta1: f64, g0: &ShiftDistribution, etas: &[f64], samples: usize, seed: u64) -> Result<ProbeResult> {
    if !(theta1 > 0.0) {
        return Err(Error::param("theta1", "must be positive"));
    }
    let base = first_marginal(theta1, g0)?;
    let mut tvs = Vec::with_capacity(etas.len());
    for &eta in etas {
        let e = if eta == 0.0 {
            DistanceEstimate::closed_form(0.0)
        } else {
            mc_distance_seeded(&base, &first_marginal(theta1 + eta, g0)?, Metric::Tv, samples, seed)?
        };
        tvs.push(e);
    }
    let pts: Vec<(f64, f64)> = etas
        .iter()
        .zip(&tvs)
        .filter(|(&e, t)| e > 0.0 && t.value > 0.0)
        .map(|(&e, t)| (e.ln(), t.value.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    Ok(ProbeResult { etas: etas.to_vec(), tvs, slope })
}

/// `∫_0^∞ ρ e^{−(ρ+θ)²} A_n(2ρθ)² dρ`, evaluated with the scaled Bessel
/// function as `4π² ∫ ρ (e^{−x}I_n(x))² e^{−(ρ−θ)²} dρ`, `x = 2ρθ`, by
/// composite Simpson on `[0, θ + 12]`.
pub fn radial_weight(n: i64, theta1: f64) -> f64 {
    let upper = theta1 + 12.0;
    let steps = 4000;
    let h = upper / steps as f64;
    let f = |rho: f64| {
        let s = bessel_i_scaled(n.unsigned_abs() as u32, 2.0 * rho * theta1);
        rho * s * s * (-(rho - theta1) * (rho - theta1)).exp()
    };
    let mut acc = f(0.0) + f(upper);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    4.0 * PI * PI * acc * h / 3.0
}

/// `(1/8π²) Σ_{0<|n|≤N} |c_n(g − g̃)|² ∫ρ e^{−(ρ+θ_1)²} A_n(2ρθ_1)² dρ`, a
/// lower bound on the marginal-1 TV between `P_{θ,g}` and `P_{θ,g̃}`.
pub fn g_separation(theta1: f64, g: &ShiftDistribution, g_tilde: &ShiftDistribution, max_freq: usize) -> f64 {
    let mut total = 0.0;
    for n in 1..=max_freq as i64 {
        let d2 = (g.fourier_coeff(n) - g_tilde.fourier_coeff(n)).norm_sqr()
            + (g.fourier_coeff(-n) - g_tilde.fourier_coeff(-n)).norm_sqr();
        if d2 > 0.0 {
            total += d2 * radial_weight(n, theta1);
        }
    }
    total / (8.0 * PI * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_net_first_coefficients_and_separation() {
        let fs = fano_f_net(8, 1.0).unwrap();
        for f in &fs {
            assert_eq!(f.get(1), Complex64::new(1.0, 0.0));
        }
        for i in 0..8 {
            for j in 0..8 {
                let d2 = fs[i].distance(&fs[j]).powi(2);
                let expect = 2.0 / 64.0 * (1.0 - (TAU * (i as f64 - j as f64) / 8.0).cos());
                assert!((d2 - expect).abs() < 1e-15);
                if i != j {
                    assert!(d2 >= 4.0 / 64.0 * (PI / 8.0).sin().powi(2) - 1e-15);
                }
            }
        }
    }

    #[test]
    fn g_net_invariants() {
        let gs = fano_g_net(8, 2.5, 1.5, 2.0, 64).unwrap();
        for g in &gs {
            let v = g.to_grid(4096).unwrap();
            assert!(v.iter().all(|&x| x >= 0.0));
            assert!(g.sobolev_radius(1.5) <= 2.0);
            if let ShiftDistribution::Fourier { coeffs, cutoff } = g {
                let s: f64 = coeffs.iter().enumerate().filter(|(i, _)| i != cutoff).map(|(_, c)| c.norm()).sum();
                assert!(s <= 1.0);
            }
            for r in -64..=64 {
                assert!((g.fourier_coeff(r).norm() - gs[0].fourier_coeff(r).norm()).abs() < 1e-15);
            }
        }
        assert!(fano_g_net(8, 1.5, 1.5, 2.0, 64).is_err());
    }

    #[test]
    fn matched_moments_cancel_net_phase() {
        // θ_p^ℓ c_{m+ℓp}(g_j) must agree with the j = 1 value for |m| ≤ p/4
        let p = 8usize;
        let fs = fano_f_net(p, 1.0).unwrap();
        let gs = fano_g_net(p, 2.5, 1.5, 2.0, 64).unwrap();
        for j in 0..p {
            for l in -2i64..=2 {
                for m in -2i64..=2 {
                    let r = m + l * p as i64;
                    let tp = fs[j].get(p as i64);
                    let tp0 = fs[0].get(p as i64);
                    let lhs = gs[j].fourier_coeff(r) * (tp / tp.norm()).powi(l as i32);
                    let rhs = gs[0].fourier_coeff(r) * (tp0 / tp0.norm()).powi(l as i32);
                    assert!((lhs - rhs).norm() < 1e-14, "j={j} l={l} m={m}");
                }
            }
        }
    }

    #[test]
    fn bracket_width_and_masses() {
        let theta = FourierSeries::from_pairs(&[(1, Complex64::new(1.0, 0.0)), (2, Complex64::new(0.5, 0.3))]);
        let net = bracketing_net(&theta, 0.1).unwrap();
        assert!(net.hellinger_sq_bound() <= 0.01);
        assert!(net.hellinger_sq_exact() <= net.hellinger_sq_bound());
        assert!(net.lower_mass() <= 1.0 && net.upper_mass() >= 1.0);
        assert!(net.len() <= net.count_bound());
        assert!(net.containment_guaranteed());
        let flat = bracketing_net(&FourierSeries::from_pairs(&[(0, Complex64::new(2.0, 0.0))]), 0.1).unwrap();
        assert_eq!(flat.len(), 1);
    }

    #[test]
    fn nnls_matches_cosine_moments() {
        let g = crate::shift::cosine_density(1024, 1.0).unwrap();
        let m = finite_mixture_match(&g, 3, 1e-9).unwrap();
        assert!((m.fourier_coeff(1) - Complex64::new(0.5, 0.0)).norm() < 1e-8);
        if let ShiftDistribution::Discrete { atoms } = &m {
            assert!(atoms.len() <= 7);
        }
        let u = ShiftDistribution::uniform(1024);
        let mu = finite_mixture_match(&u, 4, 0.0).unwrap();
        for r in 1..=4 {
            assert!(mu.fourier_coeff(r).norm() < 1e-8);
        }
    }

    #[test]
    fn separation_functional_is_zero_on_equal_inputs() {
        let g = crate::shift::cosine_density(256, 0.4).unwrap();
        assert_eq!(g_separation(1.0, &g, &g, 16), 0.0);
        let u = ShiftDistribution::uniform(256);
        assert!(g_separation(1.0, &g, &u, 16) > 0.0);
    }

    #[test]
    fn radial_weight_matches_direct_quadrature() {
        // direct evaluation with the unscaled series for a small case
        let (n, t) = (2i64, 0.8);
        let steps = 20000;
        let upper = 14.0;
        let h = upper / steps as f64;
        let mut acc = 0.0;
        for i in 0..=steps {
            let r = i as f64 * h;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            let an = crate::special::a_n(n, 2.0 * r * t);
            acc += w * r * (-(r + t) * (r + t)).exp() * an * an;
        }
        acc *= h;
        assert!((radial_weight(n, t) / acc - 1.0).abs() < 1e-8);
    }
}
