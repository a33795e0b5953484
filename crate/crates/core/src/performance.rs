//! Ranging success, spatial success and duty-cycle optimization.
//!
//! In the interference-limited α = 2 regime everything reduces to one
//! coefficient C = √(πT/4γ₂) R²: p_s = erfc(C ξλ), β = λξ erfc(C ξλ), and
//! β peaks where erfc(z) = 2z e^{-z²}/√π.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interference::{interference_cdf, DistributionCurve};
use crate::model::{DerivedConstants, Lane, MediumAccess, Scenario};
use crate::numeric::{brent, integrate_breaks, integrate_to_inf, Tolerance};
use crate::specfun::{erfc, gamma_p, gamma_q, ln_gamma};

/// Anything usable as an interference CDF F_I.
pub trait InterferenceCdf {
    fn cdf(&self, x: f64) -> f64;
}

impl InterferenceCdf for DistributionCurve {
    fn cdf(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

impl<F: Fn(f64) -> f64> InterferenceCdf for F {
    fn cdf(&self, x: f64) -> f64 {
        self(x)
    }
}

/// S / (I + N).
pub fn sinr(signal: f64, interference: f64, noise: f64) -> Result<f64> {
    if interference < 0.0 || noise < 0.0 {
        return Err(Error::domain("sinr", "interference and noise must be nonnegative"));
    }
    let d = interference + noise;
    if d == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok(signal / d)
}

/// S = γ₁γ₂P₀ R^{-2α}: transmit, reflect, return.
pub fn ranging_signal(consts: &DerivedConstants, range_r: f64) -> Result<f64> {
    if !(range_r > 0.0) {
        return Err(Error::domain("ranging_signal", format!("range {range_r} m must be positive")));
    }
    let incident = consts.gamma1_p0() * range_r.powf(-consts.pathloss_exp);
    Ok(incident * consts.gamma2 * range_r.powf(-consts.pathloss_exp))
}

fn check_range(op: &'static str, range_r: f64) -> Result<()> {
    if range_r >= 0.0 && range_r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("range {range_r} m must be finite and nonnegative")))
    }
}

/// p_s = F_I(S/T - N), zero when the argument is not positive.
pub fn p_success<C: InterferenceCdf + ?Sized>(
    cdf: &C,
    consts: &DerivedConstants,
    range_r: f64,
    noise: f64,
) -> Result<f64> {
    check_range("p_success", range_r)?;
    if range_r == 0.0 {
        return Ok(1.0);
    }
    let x = ranging_signal(consts, range_r)? / consts.sinr_threshold - noise;
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(cdf.cdf(x).clamp(0.0, 1.0))
}

/// p_s at every range for the whole scenario, and the absolute accuracy of
/// those values. F_I is inverted once, exactly at each S/T - N > 0, rather
/// than interpolated. Values below the accuracy cannot be told from zero.
pub fn p_success_ranges(scenario: &Scenario, ranges: &[f64]) -> Result<(Vec<f64>, f64)> {
    let consts = scenario.derive(0)?;
    let noise = scenario.radar.noise_power;
    let mut xs = Vec::with_capacity(ranges.len());
    for &r in ranges {
        check_range("p_success_ranges", r)?;
        if r > 0.0 {
            xs.push(ranging_signal(&consts, r)? / consts.sinr_threshold - noise);
        }
    }
    xs.retain(|x| *x > 0.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.is_empty() {
        return Ok((ranges.iter().map(|&r| if r == 0.0 { 1.0 } else { 0.0 }).collect(), 0.0));
    }
    let curve = interference_cdf(scenario, &xs)?;
    let lookup = |x: f64| curve.cdf[curve.grid.partition_point(|g| *g < x).min(curve.grid.len() - 1)];
    let p = ranges.iter().map(|&r| p_success(&lookup, &consts, r, noise)).collect::<Result<_>>()?;
    Ok((p, curve.tolerance))
}

/// Worst-case (Lévy) success probability with noise, F_wc(S/T - N).
/// Noise shrinks the interference budget, so the result is zero once
/// N ≥ S/T.
pub fn p_success_wc(
    consts: &DerivedConstants,
    range_r: f64,
    access: &MediumAccess,
    lane: &Lane,
    noise: f64,
) -> Result<f64> {
    check_range("p_success_wc", range_r)?;
    if range_r == 0.0 {
        return Ok(1.0);
    }
    let li = access.duty_cycle * lane.density;
    let s_over_t = consts.gamma1_p0() * consts.gamma2 * range_r.powf(-4.0) / consts.sinr_threshold;
    let denom = s_over_t - noise;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok(erfc((PI / 4.0 * li * li * consts.gamma1_p0() / denom).sqrt()))
}

/// Interference-limited α = 2 success probability erfc(C ξλ).
pub fn p_success_il(consts: &DerivedConstants, range_r: f64, access: &MediumAccess, lane: &Lane) -> Result<f64> {
    check_range("p_success_il", range_r)?;
    Ok(erfc(consts.big_c(range_r) * access.duty_cycle * lane.density))
}

/// β = λ_I erfc(C λ_I) [1/m].
pub fn spatial_success(lane: &Lane, access: &MediumAccess, consts: &DerivedConstants, range_r: f64) -> Result<f64> {
    let li = access.duty_cycle * lane.density;
    Ok(li * p_success_il(consts, range_r, access, lane)?)
}

/// β as a function of λ_I alone.
pub fn beta_of_lambda(consts: &DerivedConstants, range_r: f64, lambda_i: f64) -> f64 {
    lambda_i * erfc(consts.big_c(range_r) * lambda_i)
}

/// Root of erfc(z) = 2z e^{-z²}/√π on [0.1, 1].
pub fn solve_z0(tol: f64) -> Result<f64> {
    if !(tol >= 1e-12) {
        return Err(Error::domain("solve_z0", format!("tolerance {tol} below 1e-12")));
    }
    let g = |z: f64| erfc(z) - FRAC_2_SQRT_PI * z * (-z * z).exp();
    brent(g, 0.1, 1.0, tol, 200)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    /// λ_I* [1/m]
    pub lambda_i_star: f64,
    pub xi_star: f64,
    /// β* [1/m]
    pub beta_star: f64,
    /// ξ* hit 1, so λ_I* is just λ.
    pub clamped: bool,
}

/// ξ* = min(z₀/(λC), 1) and the resulting β*.
pub fn optimal_duty_cycle(lane: &Lane, consts: &DerivedConstants, range_r: f64) -> Result<OptimizationResult> {
    if !(lane.density > 0.0) {
        return Err(Error::domain("optimal_duty_cycle", "density must be positive"));
    }
    if !(range_r > 0.0) {
        return Err(Error::domain("optimal_duty_cycle", format!("range {range_r} m must be positive")));
    }
    let c = consts.big_c(range_r);
    let ratio = consts.z_o / (lane.density * c);
    let clamped = ratio >= 1.0;
    let xi_star = ratio.min(1.0);
    let lambda_i_star = lane.density * xi_star;
    Ok(OptimizationResult { lambda_i_star, xi_star, beta_star: lambda_i_star * erfc(c * lambda_i_star), clamped })
}

fn check_n(op: &'static str, n: u32) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Error::domain(op, "n must be at least 1"))
    }
}

/// Density of the distance to the n-th nearest vehicle, e^{-λr}(λr)ⁿ/(rΓ(n)).
pub fn nn_distance_pdf(lane: &Lane, n: u32, r: f64) -> Result<f64> {
    check_n("nn_distance_pdf", n)?;
    if !(r > 0.0) {
        return Err(Error::domain("nn_distance_pdf", format!("r = {r} must be positive")));
    }
    let lr = lane.density * r;
    let nf = n as f64;
    Ok((nf * lr.ln() - lr - ln_gamma(nf)).exp() / r)
}

/// E[ξ*] when the ranging target is the n-th nearest vehicle: closed form
/// for n ≥ 3, quadrature below.
pub fn expected_optimal_duty_cycle(lane: &Lane, consts: &DerivedConstants, n: u32) -> Result<f64> {
    check_n("expected_optimal_duty_cycle", n)?;
    if n >= 3 {
        expected_optimal_duty_cycle_closed(lane, consts, n)
    } else {
        expected_optimal_duty_cycle_quadrature(lane, consts, n)
    }
}

/// [λK Γ(n-2, x) - Γ(n, x) + Γ(n)]/Γ(n) with x = √(Kλ), written with the
/// regularized functions as λK Q(n-2, x)/((n-1)(n-2)) + P(n, x).
pub fn expected_optimal_duty_cycle_closed(lane: &Lane, consts: &DerivedConstants, n: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::domain(
            "expected_optimal_duty_cycle_closed",
            format!("n = {n}: the closed form needs Gamma(n - 2, x) with n - 2 >= 1"),
        ));
    }
    let nf = n as f64;
    let lk = lane.density * consts.big_k;
    let x = lk.sqrt();
    Ok(lk * gamma_q(nf - 2.0, x)? / ((nf - 1.0) * (nf - 2.0)) + gamma_p(nf, x)?)
}

/// ∫ min(K/(λr²), 1) f_{R_n}(r) dr by adaptive quadrature.
pub fn expected_optimal_duty_cycle_quadrature(lane: &Lane, consts: &DerivedConstants, n: u32) -> Result<f64> {
    check_n("expected_optimal_duty_cycle_quadrature", n)?;
    let lambda = lane.density;
    let knee = (consts.big_k / lambda).sqrt();
    let integrand = |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        let xi = (consts.big_k / (lambda * r * r)).min(1.0);
        xi * nn_distance_pdf(lane, n, r).unwrap_or(0.0)
    };
    let mode = (n as f64 - 1.0).max(0.5) / lambda;
    let mut pts = vec![0.0, knee, mode, 2.0 * mode + knee];
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let tol = Tolerance::new(1e-13, 1e-11).with_max_intervals(4000);
    let end = *pts.last().unwrap_or(&knee);
    let body = integrate_breaks(integrand, &pts, tol)?;
    let tail = integrate_to_inf(integrand, end, tol)?;
    Ok(body.value + tail.value)
}

/// λK/n², the large-n behaviour of E[ξ*].
pub fn duty_cycle_asymptote(lane: &Lane, consts: &DerivedConstants, n: u32) -> Result<f64> {
    check_n("duty_cycle_asymptote", n)?;
    Ok(lane.density * consts.big_k / (n as f64 * n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    PsVsRange,
    BetaVsDensity,
    XiStarVsN,
}

/// A performance metric sampled on an increasing abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceCurve {
    /// R [m], λ_I [1/m] or n depending on `kind`
    pub abscissa: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: CurveKind,
    /// 99% half-widths, for Monte-Carlo curves.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci_halfwidth: Option<Vec<f64>>,
}

impl PerformanceCurve {
    pub fn new(abscissa: Vec<f64>, values: Vec<f64>, kind: CurveKind) -> Result<Self> {
        let c = PerformanceCurve { abscissa, values, kind, ci_halfwidth: None };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.abscissa.len() != self.values.len() {
            return Err(Error::invalid("values", "length differs from abscissa"));
        }
        if self.abscissa.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("abscissa", "not strictly increasing"));
        }
        if self.kind != CurveKind::BetaVsDensity && self.values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("values", "probability outside [0, 1]"));
        }
        if let Some(ci) = &self.ci_halfwidth {
            if ci.len() != self.values.len() || ci.iter().any(|h| !(*h >= 0.0)) {
                return Err(Error::invalid("ci_halfwidth", "wrong length or negative"));
            }
        }
        Ok(())
    }
}

/// p_success_il on a range grid.
pub fn ps_curve_il(
    consts: &DerivedConstants,
    access: &MediumAccess,
    lane: &Lane,
    ranges: &[f64],
) -> Result<PerformanceCurve> {
    let values = ranges.iter().map(|&r| p_success_il(consts, r, access, lane)).collect::<Result<_>>()?;
    PerformanceCurve::new(ranges.to_vec(), values, CurveKind::PsVsRange)
}

/// β over a λ_I grid at fixed range.
pub fn beta_curve(consts: &DerivedConstants, range_r: f64, lambda_grid: &[f64]) -> Result<PerformanceCurve> {
    let values = lambda_grid.iter().map(|&l| beta_of_lambda(consts, range_r, l)).collect();
    PerformanceCurve::new(lambda_grid.to_vec(), values, CurveKind::BetaVsDensity)
}

/// E[ξ*] for n = 1..=n_max.
pub fn duty_cycle_curve(lane: &Lane, consts: &DerivedConstants, n_max: u32) -> Result<PerformanceCurve> {
    let ns: Vec<u32> = (1..=n_max).collect();
    let values = ns.iter().map(|&n| expected_optimal_duty_cycle(lane, consts, n)).collect::<Result<_>>()?;
    PerformanceCurve::new(ns.iter().map(|&n| n as f64).collect(), values, CurveKind::XiStarVsN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Scenario;

    fn consts() -> DerivedConstants {
        Scenario::reference().derive(0).unwrap()
    }

    #[test]
    fn sinr_cases() {
        assert_eq!(sinr(1.0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(sinr(1.0, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(sinr(1.0, 0.0, 0.0), Err(Error::DivisionByZero));
    }

    #[test]
    fn signal_law() {
        let mut d = consts();
        d.gamma1 = 97.3;
        d.gamma2 = 79.58;
        let s = ranging_signal(&d, 100.0).unwrap();
        assert!((s - 97.3 * 79.58 * 0.01 * 1e-8).abs() < 1e-20);
        let s2 = ranging_signal(&d, 200.0).unwrap();
        assert!((s2 / s - 1.0 / 16.0).abs() < 1e-14);
        assert!(ranging_signal(&d, 0.0).is_err());
    }

    #[test]
    fn z0_root() {
        let z = solve_z0(1e-12).unwrap();
        assert!((z - 0.531_597).abs() < 1e-5);
        assert!((erfc(z) - FRAC_2_SQRT_PI * z * (-z * z).exp()).abs() < 1e-12);
        assert!(solve_z0(1e-13).is_err());
    }

    #[test]
    fn il_reference_and_power_invariance() {
        let d = consts();
        let lane = Lane::new(10.0, 1e-3);
        let acc = MediumAccess { duty_cycle: 0.1 };
        let p = p_success_il(&d, 100.0, &acc, &lane).unwrap();
        assert!((p - erfc(PI / 10.0)).abs() < 1e-12);
        assert!((p - 0.657).abs() < 1e-3);
        let mut d2 = d;
        d2.tx_power *= 100.0;
        assert_eq!(p_success_il(&d2, 100.0, &acc, &lane).unwrap(), p);
        assert_eq!(p_success_il(&d, 0.0, &acc, &lane).unwrap(), 1.0);
    }

    #[test]
    fn wc_reduces_to_il() {
        let d = consts();
        let lane = Lane::new(0.0, 0.02);
        let acc = MediumAccess { duty_cycle: 0.1 };
        for r in [10.0, 80.0, 240.0] {
            let a = p_success_wc(&d, r, &acc, &lane, 0.0).unwrap();
            let b = p_success_il(&d, r, &acc, &lane).unwrap();
            assert!((a - b).abs() < 1e-12);
            let noisy = ranging_signal(&d, r).unwrap() / d.sinr_threshold;
            let w = p_success_wc(&d, r, &acc, &lane, noisy).unwrap();
            assert!(w < b || (b == 0.0 && w == 0.0), "r={r} w={w} b={b}");
        }
        assert!(p_success_wc(&d, 100.0, &acc, &lane, 1e30).unwrap() < 1e-10);
    }

    #[test]
    fn p_success_generic_cdf() {
        let d = consts();
        assert_eq!(p_success(&|_x: f64| 0.3, &d, 50.0, 1.0).unwrap(), 0.0);
        assert_eq!(p_success(&|_x: f64| 0.3, &d, 50.0, 0.0).unwrap(), 0.3);
        assert_eq!(p_success(&|_x: f64| 0.3, &d, 0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn optimum_reference() {
        let d = consts();
        let lane = Lane::new(10.0, 0.01);
        let o = optimal_duty_cycle(&lane, &d, 100.0).unwrap();
        assert!((d.big_c(100.0) - 1000.0 * PI).abs() < 1e-6);
        assert!((o.xi_star - 0.01692).abs() < 1e-5, "{o:?}");
        assert!(!o.clamped);
        for k in 1..=1000 {
            let xi = k as f64 / 1000.0;
            let acc = MediumAccess { duty_cycle: xi };
            assert!(spatial_success(&lane, &acc, &d, 100.0).unwrap() <= o.beta_star + 1e-15);
        }
        let tiny = optimal_duty_cycle(&Lane::new(10.0, 1e-6), &d, 100.0).unwrap();
        assert!(tiny.clamped && tiny.xi_star == 1.0);
    }

    #[test]
    fn beta_derivative_vanishes_at_optimum() {
        let d = consts();
        let l = d.z_o / d.big_c(100.0);
        let h = 1e-7 * l;
        let deriv = (beta_of_lambda(&d, 100.0, l + h) - beta_of_lambda(&d, 100.0, l - h)) / (2.0 * h);
        assert!(deriv.abs() < 1e-7);
    }

    #[test]
    fn nn_pdf_properties() {
        let lane = Lane::new(0.0, 0.02);
        assert!((nn_distance_pdf(&lane, 1, 30.0).unwrap() - 0.02 * (-0.6f64).exp()).abs() < 1e-15);
        for n in [1, 2, 5, 20] {
            let q = integrate_to_inf(
                |r: f64| if r > 0.0 { nn_distance_pdf(&lane, n, r).unwrap() } else { 0.0 },
                0.0,
                Tolerance::default(),
            )
            .unwrap();
            assert!((q.value - 1.0).abs() < 1e-8, "n={n}");
        }
        let f = |r: f64| nn_distance_pdf(&lane, 2, r).unwrap();
        assert!(f(50.0) > f(49.0) && f(50.0) > f(51.0));
        assert!(nn_distance_pdf(&lane, 0, 1.0).is_err());
        assert!(nn_distance_pdf(&lane, 1, 0.0).is_err());
    }

    #[test]
    fn duty_cycle_closed_vs_quadrature() {
        let d = consts();
        for lambda in [1.0 / 25.0, 1.0 / 50.0, 1.0 / 100.0] {
            let lane = Lane::new(10.0, lambda);
            for n in 3..=30 {
                let a = expected_optimal_duty_cycle_closed(&lane, &d, n).unwrap();
                let b = expected_optimal_duty_cycle_quadrature(&lane, &d, n).unwrap();
                assert!((a - b).abs() < 1e-8, "n={n} {a} {b}");
            }
            assert!(expected_optimal_duty_cycle_closed(&lane, &d, 2).is_err());
            let q1 = expected_optimal_duty_cycle(&lane, &d, 1).unwrap();
            assert!(q1 > 0.0 && q1 <= 1.0);
        }
    }

    #[test]
    fn asymptote_ratio() {
        let d = consts();
        let lane = Lane::new(10.0, 0.02);
        let e = expected_optimal_duty_cycle(&lane, &d, 100).unwrap();
        let a = duty_cycle_asymptote(&lane, &d, 100).unwrap();
        assert!((e / a - 1.0).abs() < 0.05);
        assert!((duty_cycle_asymptote(&lane, &d, 200).unwrap() * 4.0 - a).abs() < 1e-15);
    }

    #[test]
    fn curve_validation() {
        assert!(PerformanceCurve::new(vec![1.0, 1.0], vec![0.5, 0.5], CurveKind::PsVsRange).is_err());
        assert!(PerformanceCurve::new(vec![1.0, 2.0], vec![0.5, 1.5], CurveKind::PsVsRange).is_err());
        assert!(PerformanceCurve::new(vec![1.0, 2.0], vec![0.5, 1.5], CurveKind::BetaVsDensity).is_ok());
    }
}
