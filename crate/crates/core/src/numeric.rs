//! Small numerical helpers shared across modules.

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Pairwise (cascade) summation; the reduction order depends only on the
/// slice length, so results are reproducible across worker counts.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `log Σ exp(x_i)`, returning `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Reduce a position onto the circle `[0, 1)`.
pub fn wrap01(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// `e^{−i2πt}` with `t` reduced modulo 1 first, which keeps large `k·φ`
/// products accurate.
pub fn cis_neg(t: f64) -> num_complex::Complex64 {
    let a = -core::f64::consts::TAU * wrap01(t);
    num_complex::Complex64::new(a.cos(), a.sin())
}

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let mut dev = alloc::vec::Vec::with_capacity(n);
    dev.extend(xs.iter().map(|x| (x - mean) * (x - mean)));
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: alloc::vec::Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }

    #[test]
    fn lse_handles_large_offsets() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn wrap_stays_in_unit_interval() {
        for x in [-1e-18, -0.25, 0.0, 1.0, 3.75, -2.0] {
            let y = wrap01(x);
            assert!((0.0..1.0).contains(&y), "{x} -> {y}");
        }
    }
}
