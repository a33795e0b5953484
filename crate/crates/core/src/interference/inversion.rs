//! CDF recovery from characteristic functions (Gil-Pelaez) and from Laplace
//! transforms (fixed Talbot and Euler contours).

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interference::curve::{check_grid, DistributionCurve, DistributionMethod};
use crate::numeric::{integrate, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GilPelaezOptions {
    /// Target absolute error of each F(x).
    pub tolerance: f64,
    /// Stop once |φ(Ω)| falls below this.
    pub cutoff_modulus: f64,
    /// Or once Ωx > 50 and |φ(Ω)|/(Ωx) falls below this; that ratio bounds
    /// the oscillatory remainder.
    pub tail_ratio: f64,
    /// Number of ω-doublings allowed past 1/x.
    pub max_doublings: usize,
}

impl Default for GilPelaezOptions {
    fn default() -> Self {
        GilPelaezOptions { tolerance: 1e-5, cutoff_modulus: 1e-8, tail_ratio: 1e-7, max_doublings: 120 }
    }
}

/// F(x) = 1/2 - (1/π) ∫_0^∞ Im[φ(ω) e^{-jωx}]/ω dω on each grid point.
///
/// The head [0, 1/x] is integrated with ω = v²/x, which absorbs the ω^{-1/2}
/// behaviour of heavy-tailed laws at the origin. Beyond that the range is
/// covered by doubling panels cut into pieces no longer than π/x.
pub fn cdf_gil_pelaez<F>(cf: F, grid: &[f64], opts: &GilPelaezOptions) -> Result<DistributionCurve>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    check_grid(grid)?;
    if let Some(&x) = grid.iter().find(|&&x| x <= 0.0) {
        return Err(Error::domain("cdf_gil_pelaez", format!("grid point {x} must be positive")));
    }
    let phi0 = cf(0.0)?;
    if (phi0 - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::invalid("cf", format!("phi(0) = {phi0}, expected 1")));
    }
    let values: Vec<f64> = grid.par_iter().map(|&x| gil_pelaez_point(&cf, x, opts)).collect::<Result<_>>()?;
    DistributionCurve::from_raw(grid.to_vec(), values, DistributionMethod::GilPelaez, opts.tolerance)
}

fn gil_pelaez_point<F>(cf: &F, x: f64, opts: &GilPelaezOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |w: f64| -> f64 {
        if w == 0.0 {
            return 0.0;
        }
        match cf(w) {
            Ok(phi) => (phi * Complex64::new(0.0, -w * x).exp()).im / w,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let piece_tol = Tolerance::new(1e-3 * opts.tolerance, 1e-10).with_max_intervals(200);
    let w0 = 1.0 / x;
    let mut total = integrate_split(&|v: f64| integrand(w0 * v * v) * 2.0 * w0 * v, 0.0, 1.0, piece_tol, 0)?;

    let period = PI / x;
    let mut a = w0;
    let mut truncated = false;
    let mut last_mod = f64::NAN;
    for _ in 0..opts.max_doublings {
        let b = 2.0 * a;
        let pieces = ((b - a) / period).ceil().max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        for i in 0..pieces {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == pieces { b } else { lo + h };
            total += integrate_split(&integrand, lo, hi, piece_tol, 0)?;
        }
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let modulus = cf(b)?.norm();
        last_mod = modulus;
        a = b;
        if modulus < opts.cutoff_modulus || (b * x > 50.0 && modulus / (b * x) < opts.tail_ratio) {
            truncated = true;
            break;
        }
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !truncated {
        return Err(Error::Truncation { x, omega: a, modulus: last_mod });
    }
    Ok(0.5 - total / PI)
}

/// Adaptive quadrature that bisects the interval when it runs out of
/// subintervals. The CF itself can oscillate much faster than e^{-jωx}
/// when x is far below the scale of the nearest interferer.
fn integrate_split<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: Tolerance, depth: u32) -> Result<f64> {
    match integrate(f, a, b, tol) {
        Ok(q) => Ok(q.value),
        Err(Error::NonConvergence { .. }) if depth < 24 => {
            let m = 0.5 * (a + b);
            Ok(integrate_split(f, a, m, tol, depth + 1)? + integrate_split(f, m, b, tol, depth + 1)?)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplaceContour {
    /// Fixed Talbot contour; needs a transform that is analytic and bounded
    /// to the left of the origin.
    Talbot,
    /// Vertical Bromwich line at Re s > 0 with Euler summation.
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceOptions {
    /// `None` lets the caller pick; [`invert_laplace_cdf`] then uses Talbot.
    pub contour: Option<LaplaceContour>,
    pub talbot_nodes: usize,
    pub euler_nodes: usize,
    /// Gauss-Legendre nodes for averaging over the lattice translation.
    pub u_nodes: usize,
}

impl Default for LaplaceOptions {
    fn default() -> Self {
        // 24 Talbot nodes is where double precision bottoms out; beyond ~40
        // cancellation in the contour sum dominates.
        LaplaceOptions { contour: None, talbot_nodes: 24, euler_nodes: 15, u_nodes: 33 }
    }
}

impl LaplaceOptions {
    fn claimed_tolerance(&self) -> f64 {
        1e-6
    }
}

/// Inverts L(s)/s, given `ln_transform(s) = ln L(s)`, on every grid point.
/// Working with the logarithm lets e^{st} and L(s) cancel before
/// exponentiation.
pub fn invert_laplace_cdf<G>(ln_transform: G, grid: &[f64], opts: &LaplaceOptions) -> Result<DistributionCurve>
where
    G: Fn(Complex64) -> Result<Complex64> + Sync,
{
    check_grid(grid)?;
    if let Some(&x) = grid.iter().find(|&&x| x <= 0.0) {
        return Err(Error::domain("invert_laplace_cdf", format!("grid point {x} must be positive")));
    }
    let contour = opts.contour.unwrap_or(LaplaceContour::Talbot);
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&t| match contour {
            LaplaceContour::Talbot => talbot_point(&ln_transform, t, opts.talbot_nodes),
            LaplaceContour::Euler => euler_point(&ln_transform, t, opts.euler_nodes),
        })
        .collect::<Result<_>>()?;
    let (method, tolerance) = match contour {
        LaplaceContour::Talbot => (DistributionMethod::Talbot, opts.claimed_tolerance()),
        LaplaceContour::Euler => {
            // The Euler line rings near kinks of the density (the upper end of
            // a bounded law, say) and more nodes do not help there, so the
            // spread against a second node count is reported instead.
            let check: Vec<f64> =
                grid.par_iter().map(|&t| euler_point(&ln_transform, t, opts.euler_nodes + 5)).collect::<Result<_>>()?;
            let spread = values.iter().zip(&check).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (DistributionMethod::Euler, spread.max(opts.claimed_tolerance()))
        }
    };
    DistributionCurve::from_raw(grid.to_vec(), values, method, tolerance)
}

fn node_value<G>(g: &G, s: Complex64, t: f64, shift: f64, x: f64, node: usize) -> Result<Complex64>
where
    G: Fn(Complex64) -> Result<Complex64>,
{
    let ln = g(s).map_err(|e| Error::Contour { x, node, detail: e.to_string() })?;
    let v = (s * t + ln + shift).exp() / s;
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Contour { x, node, detail: format!("non-finite integrand at s = {s}") });
    }
    Ok(v)
}

fn talbot_point<G>(g: &G, t: f64, m: usize) -> Result<f64>
where
    G: Fn(Complex64) -> Result<Complex64>,
{
    let mf = m as f64;
    let r = 2.0 * mf / (5.0 * t);
    let mut sum = 0.5 * node_value(g, Complex64::new(r, 0.0), t, 0.0, t, 0)?.re;
    for k in 1..m {
        let theta = k as f64 * PI / mf;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        sum += (node_value(g, s, t, 0.0, t, k)? * Complex64::new(1.0, sigma)).re;
    }
    let f = r / mf * sum;
    if !f.is_finite() {
        return Err(Error::Contour { x: t, node: m, detail: "non-finite sum".into() });
    }
    Ok(f)
}

/// Euler weights η_k, k = 0..=2M.
fn euler_weights(m: usize) -> Vec<f64> {
    let mut xi = vec![0.0; 2 * m + 1];
    xi[0] = 0.5;
    for v in xi.iter_mut().take(m + 1).skip(1) {
        *v = 1.0;
    }
    let scale = 0.5f64.powi(m as i32);
    xi[2 * m] = scale;
    let mut binom = 1.0;
    for k in 1..m {
        binom *= (m - k + 1) as f64 / k as f64;
        xi[2 * m - k] = xi[2 * m - k + 1] + binom * scale;
    }
    xi.iter().enumerate().map(|(k, v)| if k % 2 == 0 { *v } else { -v }).collect()
}

fn euler_point<G>(g: &G, t: f64, m: usize) -> Result<f64>
where
    G: Fn(Complex64) -> Result<Complex64>,
{
    let a = m as f64 * std::f64::consts::LN_10 / 3.0;
    let eta = euler_weights(m);
    let mut sum = 0.0;
    for (k, e) in eta.iter().enumerate() {
        let s = Complex64::new(a, PI * k as f64) / t;
        // F(s) = L(s)/s, so e^{st} is not wanted here; fold 10^{M/3} = e^a in.
        sum += e * node_value(g, s, 0.0, a, t, k)?.re;
    }
    let f = sum / t;
    if !f.is_finite() {
        return Err(Error::Contour { x: t, node: 2 * m, detail: "non-finite sum".into() });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_weights_sum() {
        // Σ η_k with the alternating signs leaves the k = 0 half-weight plus
        // a vanishing remainder; check the binomial tail directly instead.
        let eta = euler_weights(4);
        assert_eq!(eta.len(), 9);
        assert_eq!(eta[0], 0.5);
        assert_eq!(eta[8], 1.0 / 16.0);
        assert!((eta[7] + (1.0 / 16.0 + 4.0 / 16.0)).abs() < 1e-15);
    }

    #[test]
    fn exponential_talbot_and_euler() {
        let grid: Vec<f64> = (1..=60).map(|i| i as f64 * 0.2).collect();
        let ln = |s: Complex64| Ok(-(s + 1.0).ln());
        for contour in [LaplaceContour::Talbot, LaplaceContour::Euler] {
            let opts = LaplaceOptions { contour: Some(contour), ..Default::default() };
            let c = invert_laplace_cdf(ln, &grid, &opts).unwrap();
            for (x, f) in c.grid.iter().zip(&c.cdf) {
                assert!((f - (1.0 - (-x).exp())).abs() < 1e-6, "{contour:?} x={x}");
            }
        }
    }

    #[test]
    fn unit_mass_at_zero() {
        let grid = [0.1, 1.0, 10.0];
        let c = invert_laplace_cdf(|_| Ok(Complex64::new(0.0, 0.0)), &grid, &LaplaceOptions::default()).unwrap();
        assert!(c.cdf.iter().all(|f| (f - 1.0).abs() < 1e-9));
    }

    #[test]
    fn gil_pelaez_exponential() {
        let grid: Vec<f64> = (1..=40).map(|i| i as f64 * 0.25).collect();
        let c = cdf_gil_pelaez(|w| Ok(Complex64::new(1.0, 0.0) / Complex64::new(1.0, -w)), &grid, &Default::default())
            .unwrap();
        for (x, f) in c.grid.iter().zip(&c.cdf) {
            assert!((f - (1.0 - (-x).exp())).abs() < 1e-4, "x={x} f={f}");
        }
    }

    #[test]
    fn gil_pelaez_needs_normalized_cf() {
        assert!(cdf_gil_pelaez(|_| Ok(Complex64::new(0.5, 0.0)), &[1.0], &Default::default()).is_err());
        let r = cdf_gil_pelaez(
            |_| Ok(Complex64::new(1.0, 0.0)),
            &[1.0],
            &GilPelaezOptions { max_doublings: 5, ..Default::default() },
        );
        assert!(matches!(r, Err(Error::Truncation { .. })));
    }
}
