//! Special functions: modified Bessel `I_n`, the integral `A_n`, the normal
//! CDF and the standard complex Gaussian sampler.

use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Beyond this argument the plain series is replaced by the scaled one.
const SERIES_LIMIT: f64 = 30.0;

/// Modified Bessel function of the first kind, `I_n(a)`, for `a ≥ 0`.
///
/// Uses `Σ_k (a/2)^{2k+n} / (k!(k+n)!)` directly for `a ≤ 30` and
/// `e^a · bessel_i_scaled(n, a)` above (which overflows to `+inf` once
/// `a` is beyond roughly 700).
pub fn bessel_i(n: u32, a: f64) -> f64 {
    if a <= SERIES_LIMIT {
        bessel_i_series(n, a)
    } else {
        bessel_i_scaled(n, a) * a.exp()
    }
}

fn bessel_i_series(n: u32, a: f64) -> f64 {
    if a == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * a;
    // leading term (a/2)^n / n!, built in log space to survive large n
    let mut term = (n as f64 * half.ln() - libm::lgamma(n as f64 + 1.0)).exp();
    let q = half * half;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + n as f64));
        sum += term;
        if term < 1e-18 * sum || term == 0.0 {
            break;
        }
    }
    sum
}

/// Exponentially scaled Bessel function `e^{−a} I_n(a)`.
///
/// Each series term is formed in log space with the `e^{−a}` factor folded
/// in, so nothing overflows for any finite `a`.
pub fn bessel_i_scaled(n: u32, a: f64) -> f64 {
    if a <= SERIES_LIMIT {
        return bessel_i_series(n, a) * (-a).exp();
    }
    let ln_half = (0.5 * a).ln();
    let nf = n as f64;
    let log_term = |k: f64| {
        (2.0 * k + nf) * ln_half - libm::lgamma(k + 1.0) - libm::lgamma(k + nf + 1.0) - a
    };
    // terms peak near k ≈ a/2; walk outwards from the peak in both directions
    let peak = (0.5 * (-nf + (nf * nf + a * a).sqrt())).floor().max(0.0);
    let mut sum = 0.0;
    let mut k = peak;
    loop {
        let t = log_term(k).exp();
        sum += t;
        if t < 1e-18 * sum {
            break;
        }
        k += 1.0;
    }
    let mut k = peak - 1.0;
    while k >= 0.0 {
        let t = log_term(k).exp();
        sum += t;
        if t < 1e-18 * sum {
            break;
        }
        k -= 1.0;
    }
    sum
}

/// `A_n(a) = ∫_0^{2π} e^{a cos u} cos(n u) du = 2π I_{|n|}(a)`.
pub fn a_n(n: i64, a: f64) -> f64 {
    TAU * bessel_i(n.unsigned_abs() as u32, a)
}

/// Independent evaluation of `A_n(a)` by the composite trapezoid rule on
/// `points` equispaced nodes (spectrally accurate for this periodic
/// integrand).
pub fn a_n_quadrature(n: i64, a: f64, points: usize) -> f64 {
    let h = TAU / points as f64;
    let nf = n as f64;
    let s: f64 = (0..points)
        .map(|i| {
            let u = i as f64 * h;
            (a * u.cos()).exp() * (nf * u).cos()
        })
        .sum();
    s * h
}

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Standard complex Gaussian: independent real and imaginary parts, each
/// `N(0, 1/2)`, so that `E|z|² = 1`.
pub fn sample_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// Riemann zeta `ζ(s)` for `s > 1`, by a partial sum with an Euler–Maclaurin
/// tail.
pub fn zeta(s: f64) -> f64 {
    const N: usize = 1000;
    let nf = N as f64;
    let head: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    head + nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s * nf.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * nf.powf(-s - 3.0) / 720.0
}

/// `π^{−p}` as a log, the normalising constant of `γ` in dimension `p`.
pub(crate) fn log_gamma_norm(p: usize) -> f64 {
    -(p as f64) * PI.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_special_values() {
        assert_eq!(bessel_i(0, 0.0), 1.0);
        for n in 1..6 {
            assert_eq!(bessel_i(n, 0.0), 0.0);
        }
        // I_0(1), I_1(1), I_0(10) reference values
        assert!((bessel_i(0, 1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((bessel_i(1, 1.0) - 0.565_159_103_992_485_0).abs() < 1e-15);
        assert!((bessel_i(0, 10.0) / 2815.716_628_466_254 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scaled_path_is_continuous_at_switch() {
        for n in [0u32, 1, 5, 20] {
            let lo = bessel_i_series(n, SERIES_LIMIT) * (-SERIES_LIMIT).exp();
            let hi = bessel_i_scaled(n, SERIES_LIMIT + 1e-9);
            assert!((lo / hi - 1.0).abs() < 1e-9, "n={n}: {lo} vs {hi}");
        }
    }

    #[test]
    fn scaled_large_argument_matches_asymptotic() {
        // e^{-a} I_0(a) ≈ (1 + 1/(8a) + 9/(128a²)) / √(2πa)
        let a = 500.0;
        let asym = (1.0 + 1.0 / (8.0 * a) + 9.0 / (128.0 * a * a)) / (TAU * a).sqrt();
        assert!((bessel_i_scaled(0, a) / asym - 1.0).abs() < 1e-8);
    }

    #[test]
    fn a_n_matches_quadrature_on_a_few_points() {
        for n in [0, 3, -3, 12] {
            for a in [0.0, 0.7, 6.5] {
                let d = (a_n(n, a) - a_n_quadrature(n, a, 4096)).abs();
                assert!(d < 1e-10, "n={n} a={a} diff={d}");
            }
        }
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        for x in [0.3, 1.7, 4.2, 9.0] {
            assert!((normal_cdf(-x) - (1.0 - normal_cdf(x))).abs() < 1e-15);
        }
    }

    #[test]
    fn zeta_reference_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-13);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-13);
        assert!((zeta(2.5) - 1.341_487_257_250_917_2).abs() < 1e-12);
    }
}
