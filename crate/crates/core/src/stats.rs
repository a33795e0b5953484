//! Small statistical helpers for Monte-Carlo summaries.

use crate::error::Result;
use crate::specfun::{gamma_q, ln_gamma};

/// Two-sided 99% standard normal quantile, Φ⁻¹(0.995).
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Wilson score interval half-width at 99% for k successes out of n.
pub fn wilson_halfwidth(k: usize, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = Z_99 * Z_99;
    Z_99 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / (1.0 + z2 / nf)
}

fn ln_binom_pmf(k: usize, n: usize, p: f64) -> f64 {
    let (kf, nf) = (k as f64, n as f64);
    let ln_choose = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
    let a = if k == 0 { 0.0 } else { kf * p.ln() };
    let b = if k == n { 0.0 } else { (nf - kf) * (-p).ln_1p() };
    ln_choose + a + b
}

/// P(X ≤ k) and P(X ≥ k) for X ~ Binomial(n, p).
pub fn binomial_tails(k: usize, n: usize, p: f64) -> (f64, f64) {
    if p <= 0.0 {
        return (1.0, if k == 0 { 1.0 } else { 0.0 });
    }
    if p >= 1.0 {
        return (if k == n { 1.0 } else { 0.0 }, 1.0);
    }
    let lower: f64 = (0..=k).map(|j| ln_binom_pmf(j, n, p).exp()).sum();
    let upper: f64 = (k..=n).map(|j| ln_binom_pmf(j, n, p).exp()).sum();
    (lower.min(1.0), upper.min(1.0))
}

/// Whether p lies in the exact (Clopper-Pearson) two-sided interval at the
/// given level for k successes out of n.
pub fn binomial_ci_contains(k: usize, n: usize, p: f64, level: f64) -> bool {
    let alpha = 1.0 - level;
    let (lower, upper) = binomial_tails(k, n, p);
    lower > 0.5 * alpha && upper > 0.5 * alpha
}

/// Upper tail of χ² with `dof` degrees of freedom.
pub fn chi_square_sf(stat: f64, dof: usize) -> Result<f64> {
    if stat <= 0.0 {
        return Ok(1.0);
    }
    gamma_q(0.5 * dof as f64, 0.5 * stat)
}

/// Sample mean and its 99% normal half-width.
pub fn mean_ci(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, Z_99 * (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_tails_sum() {
        let (lo, hi) = binomial_tails(7, 20, 0.3);
        let pmf = ln_binom_pmf(7, 20, 0.3).exp();
        assert!((lo + hi - 1.0 - pmf).abs() < 1e-12);
    }

    #[test]
    fn clopper_pearson_membership() {
        assert!(binomial_ci_contains(50, 100, 0.5, 0.99));
        assert!(!binomial_ci_contains(50, 100, 0.2, 0.99));
        assert!(binomial_ci_contains(0, 100, 0.01, 0.99));
        assert!(!binomial_ci_contains(0, 100, 0.1, 0.99));
    }

    #[test]
    fn chi_square_reference() {
        // 99th percentile of χ²₅ is 15.086.
        assert!((chi_square_sf(15.086_27, 5).unwrap() - 0.01).abs() < 1e-5);
    }

    #[test]
    fn mean_ci_constant() {
        let (m, h) = mean_ci(&[2.0; 10]);
        assert_eq!((m, h), (2.0, 0.0));
    }
}
