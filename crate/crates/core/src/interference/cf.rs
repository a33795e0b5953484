//! Characteristic functions of the Poisson-lane interference.
//!
//! For one lane with interferer intensity λ_I, points on (δ₀, ∞) and received
//! power y(r) = γ₁P₀ (L² + r²)^{-α/2},
//!
//! ln φ(ω) = -λ_I ∫_0^{y₀} (1 - Φ_g(ωy)) q / (α y u) dy,
//! q = (γ₁P₀/y)^{2/α}, u = √(q - L²), y₀ = y(δ₀),
//!
//! where Φ_g is the fading CF. The integrand oscillates along the real axis,
//! so for ω > 0 the segment [0, y₀] is replaced by the two vertical rays
//! 0 → j∞ and y₀ → y₀ + j∞, on which Φ_g decays instead.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interference::curve::{check_grid, DistributionCurve, DistributionMethod};
use crate::interference::laplace::expm1_c;
use crate::interference::{CfSpec, LaneTerm};
use crate::model::FadingModel;
use crate::numeric::{integrate, integrate_breaks, integrate_to_inf, Tolerance};
use crate::specfun::{erfc, expint_gen, gamma};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Geometry of one lane in the received-power plane.
#[derive(Debug, Clone, Copy)]
struct LaneRays {
    scale: f64,
    alpha: f64,
    l2: f64,
    /// y(δ₀); infinite when L = δ₀ = 0.
    y0: f64,
    lambda_i: f64,
    breaks: [f64; 4],
}

impl LaneRays {
    fn new(lane: &LaneTerm, scale: f64, alpha: f64) -> Self {
        let l2 = lane.offset * lane.offset;
        let r2 = l2 + lane.delta_o * lane.delta_o;
        let y0 = if r2 > 0.0 { scale * r2.powf(-0.5 * alpha) } else { f64::INFINITY };
        // Branch point of u; infinite when L = 0.
        let y_l = if l2 > 0.0 { scale * l2.powf(-0.5 * alpha) } else { f64::INFINITY };
        // Scale on which u changes near y₀ when δ₀ ≪ L.
        let t_u = if y0.is_finite() { 0.5 * alpha * y0 * lane.delta_o * lane.delta_o / r2 } else { f64::NAN };
        LaneRays { scale, alpha, l2, y0, lambda_i: lane.lambda_i(), breaks: [y0, y_l, y_l - y0, t_u] }
    }

    /// q / (α y u), the Jacobian dr/dy up to sign.
    fn jacobian(&self, y: Complex64) -> Complex64 {
        let q = (Complex64::new(self.scale, 0.0) / y).powf(2.0 / self.alpha);
        let u = (q - self.l2).sqrt();
        q / (y * u * self.alpha)
    }

    fn has_second_ray(&self) -> bool {
        self.y0.is_finite()
    }

    fn breakpoints(&self, omega: Option<f64>) -> Vec<f64> {
        let mut b: Vec<f64> = self.breaks.to_vec();
        if let Some(w) = omega {
            b.push(1.0 / w);
        }
        b.retain(|x| x.is_finite() && *x > 0.0);
        if b.is_empty() {
            b.push(1.0);
        }
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| *a < 1.01 * *b);
        b
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance::new(1e-12 / self.lambda_i.max(1e-300), 1e-11).with_max_intervals(4000).with_rounding_floor(1e-8)
    }

    /// With non-unit fading the two rays cancel at large t and the sum
    /// carries rounding noise of about 1e-11 absolute.
    fn fading_tolerance(&self) -> Tolerance {
        Tolerance::new(1e-10 / self.lambda_i.max(1e-300), 1e-9).with_max_intervals(1000).with_rounding_floor(1e-8)
    }
}

/// ∫_0^∞ f(t) dt for integrands with a t^{-1/α}-type endpoint at 0 and a
/// t^{-1-1/α} tail, split at `breaks`.
fn ray_integral<F>(f: F, breaks: &[f64], alpha: f64, tol: Tolerance) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let first = breaks[0];
    let last = breaks[breaks.len() - 1];
    // Head: t = first·v^k absorbs the endpoint behaviour.
    let k = (alpha / (alpha - 1.0)).ceil().max(2.0) as i32;
    let head = integrate(
        |v: f64| {
            if v == 0.0 {
                return ZERO;
            }
            f(first * v.powi(k)) * (k as f64 * first * v.powi(k - 1))
        },
        0.0,
        1.0,
        tol,
    );
    let mut total = head?.value;
    if breaks.len() > 1 {
        let logs: Vec<f64> = breaks.iter().map(|b| b.ln()).collect();
        let mid = integrate_breaks(
            |s: f64| {
                let t = s.exp();
                f(t) * t
            },
            &logs,
            tol,
        );
        total += mid?.value;
    }
    // Tail: t = last·v^{-k2}.
    let k2 = alpha.ceil() as i32 + 1;
    let tail = integrate(
        |v: f64| {
            if v == 0.0 {
                return ZERO;
            }
            f(last * v.powi(-k2)) * (k2 as f64 * last * v.powi(-k2 - 1))
        },
        0.0,
        1.0,
        tol,
    );
    Ok(total + tail?.value)
}

/// -λ_I ∫ ... for one lane, any fading, ω > 0.
fn lane_exponent(lane: &LaneTerm, scale: f64, alpha: f64, fading: &FadingModel, omega: f64) -> Result<Complex64> {
    if lane.lambda_i() == 0.0 {
        return Ok(ZERO);
    }
    let rays = LaneRays::new(lane, scale, alpha);
    let h = |y: Complex64| -expm1_c(fading.ln_laplace(-J * omega * y)) * rays.jacobian(y);
    let diff = |t: f64| {
        let mut v = h(Complex64::new(0.0, t));
        if rays.has_second_ray() {
            v -= h(Complex64::new(rays.y0, t));
        }
        v
    };
    let tol = if matches!(fading, FadingModel::Unit) { rays.tolerance() } else { rays.fading_tolerance() };
    let total = ray_integral(diff, &rays.breakpoints(Some(omega)), alpha, tol)?;
    Ok(-J * total * rays.lambda_i)
}

/// Unit fading only: the exponent of one lane as a(ω) + e^{jωy₀} b(ω), with
/// a and b free of oscillation. `w_total` is ∫ of the Jacobian along the
/// second ray, which does not depend on ω.
fn unit_lane_parts(rays: &LaneRays, w_total: Complex64, omega: f64) -> Result<(Complex64, Complex64)> {
    let tol = rays.tolerance();
    let breaks = rays.breakpoints(Some(omega));
    let first = ray_integral(
        |t: f64| -expm1_c(Complex64::new(-omega * t, 0.0)) * rays.jacobian(Complex64::new(0.0, t)),
        &breaks,
        rays.alpha,
        tol,
    )?;
    if !rays.has_second_ray() {
        return Ok((-J * first * rays.lambda_i, ZERO));
    }
    let damped = ray_integral(
        |t: f64| rays.jacobian(Complex64::new(rays.y0, t)) * (-omega * t).exp(),
        &breaks,
        rays.alpha,
        tol,
    )?;
    Ok((-J * (first - w_total) * rays.lambda_i, -J * damped * rays.lambda_i))
}

fn second_ray_total(rays: &LaneRays) -> Result<Complex64> {
    if !rays.has_second_ray() {
        return Ok(ZERO);
    }
    ray_integral(
        |t: f64| rays.jacobian(Complex64::new(rays.y0, t)),
        &rays.breakpoints(None),
        rays.alpha,
        rays.tolerance(),
    )
}

fn check_omega(op: &'static str, omega: f64) -> Result<()> {
    if omega.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("omega = {omega} must be finite")))
    }
}

fn check_alpha(op: &'static str, alpha: f64) -> Result<()> {
    if alpha > 1.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("alpha = {alpha} must exceed 1")))
    }
}

/// ln φ(ω) for Poisson placement on every lane of `spec` (the lane
/// processes are independent, so exponents add). The spec's geometry field
/// is not consulted.
///
/// Each ray integral is adaptive with relative tolerance 1e-11 and absolute
/// tolerance 1e-12/λ_I, so the exponent is accurate to about 1e-11.
pub fn cf_ppp_exponent(spec: &CfSpec, omega: f64) -> Result<Complex64> {
    check_omega("cf_ppp", omega)?;
    check_alpha("cf_ppp", spec.alpha)?;
    if omega == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w = omega.abs();
    let mut total = Complex64::new(0.0, 0.0);
    for lane in &spec.lanes {
        total += lane_exponent(lane, spec.gamma1_p0, spec.alpha, &spec.fading, w)?;
    }
    Ok(if omega < 0.0 { total.conj() } else { total })
}

/// φ(ω) = E[e^{jωI}] for Poisson placement.
pub fn cf_ppp(spec: &CfSpec, omega: f64) -> Result<Complex64> {
    Ok(cf_ppp_exponent(spec, omega)?.exp())
}

/// ∫ f(g) dF_g(g), or f(1) for unit fading.
fn average_over_fading<F>(fading: &FadingModel, f: F) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if fading.is_unit() {
        return f(1.0);
    }
    let mut failure = None;
    let tol = Tolerance::new(1e-13, 1e-11).with_max_intervals(4000);
    let q = integrate_to_inf(
        |g: f64| {
            let d = fading.density(g).unwrap_or(0.0);
            if d == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            match f(g) {
                Ok(v) => v * d,
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        0.0,
        tol,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(q.value),
    }
}

/// φ(ω) for lanes with zero offset, through the generalized exponential
/// integral:
///
/// ln φ = Σ λ_I E_g[δ₀ - (δ₀/α) E_{1+1/α}(jωcgδ₀^{-α}) - Γ(1-1/α)(-jωcg)^{1/α}],
///
/// with c = γ₁P₀ and E_n as in [`expint_gen`]. The fading average sits inside
/// the exponent, as the Poisson functional requires.
pub fn cf_ppp_ln0(spec: &CfSpec, omega: f64) -> Result<Complex64> {
    check_omega("cf_ppp_ln0", omega)?;
    let alpha = spec.alpha;
    check_alpha("cf_ppp_ln0", alpha)?;
    if let Some(l) = spec.lanes.iter().find(|l| l.offset != 0.0) {
        return Err(Error::Regime { op: "cf_ppp_ln0", detail: format!("lane offset {} m is not zero", l.offset) });
    }
    if omega == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let w = omega.abs();
    let c = spec.gamma1_p0;
    let g_stable = gamma(1.0 - 1.0 / alpha);
    let mut total = Complex64::new(0.0, 0.0);
    for lane in &spec.lanes {
        let lambda_i = lane.lambda_i();
        if lambda_i == 0.0 {
            continue;
        }
        let d0 = lane.delta_o;
        let per_g = |g: f64| -> Result<Complex64> {
            let stable = (-J * (w * c * g)).powf(1.0 / alpha) * g_stable;
            if d0 == 0.0 {
                return Ok(-stable);
            }
            let z = J * (w * c * g * d0.powf(-alpha));
            let e = expint_gen(1.0 + 1.0 / alpha, z)?;
            Ok(Complex64::new(d0, 0.0) - e * (d0 / alpha) - stable)
        };
        total += average_over_fading(&spec.fading, per_g)? * lambda_i;
    }
    let total = if omega < 0.0 { total.conj() } else { total };
    Ok(total.exp())
}

/// exp(-λ_I √(-jπγ₁P₀ω)), the worst-case (Lévy) CF.
pub fn cf_levy(spec: &CfSpec, omega: f64) -> Result<Complex64> {
    spec.require_worst_case("cf_levy")?;
    check_omega("cf_levy", omega)?;
    let root = (Complex64::new(0.0, -PI * spec.gamma1_p0 * omega)).sqrt();
    Ok((-root * spec.lambda_i()).exp())
}

/// Lévy scale a = πλ_I²γ₁P₀/2 (location 0).
pub fn levy_scale(spec: &CfSpec) -> Result<f64> {
    spec.require_worst_case("levy_scale")?;
    let l = spec.lambda_i();
    Ok(PI * l * l * spec.gamma1_p0 / 2.0)
}

/// F(x) = erfc(√(a / 2x)).
pub fn cdf_levy_closed(spec: &CfSpec, grid: &[f64]) -> Result<DistributionCurve> {
    let a = levy_scale(spec)?;
    check_grid(grid)?;
    if let Some(&x) = grid.iter().find(|&&x| x <= 0.0) {
        return Err(Error::domain("cdf_levy_closed", format!("grid point {x} must be positive")));
    }
    let cdf = grid.iter().map(|x| erfc((a / (2.0 * x)).sqrt())).collect();
    DistributionCurve::from_raw(grid.to_vec(), cdf, DistributionMethod::LevyClosedForm, 1e-15)
}

const CHEB_NODES: usize = 24;
const MAX_SPLIT_DEPTH: u32 = 14;

type Components<'a> = Box<dyn Fn(f64) -> Result<Vec<Complex64>> + Sync + Send + 'a>;

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    /// Chebyshev coefficients, one set per component.
    coeffs: Vec<[Complex64; CHEB_NODES]>,
}

fn clenshaw(c: &[Complex64; CHEB_NODES], x: f64) -> Complex64 {
    let mut b1 = ZERO;
    let mut b2 = ZERO;
    for c in c.iter().skip(1).rev() {
        let t = b1 * (2.0 * x) - b2 + c;
        b2 = b1;
        b1 = t;
    }
    b1 * x - b2 + c[0]
}

/// Piecewise Chebyshev interpolant of a CF exponent on [lo, hi], for
/// callers that evaluate the same CF many times (Gil-Pelaez on a grid).
///
/// The exponent is represented as Σ_k e^{jωf_k} c_k(ω) with fixed
/// frequencies f_k (f_0 = 0) and slowly varying components c_k, which are
/// interpolated on doubling panels. A panel whose interpolant misses the
/// exact value at a probe point by more than 1e-10 is split in half.
/// Outside [lo, hi] the components are evaluated directly; negative ω use
/// conjugate symmetry.
pub struct CfTable<'a> {
    components: Components<'a>,
    freqs: Vec<f64>,
    lo: f64,
    hi: f64,
    panels: Vec<Panel>,
    fit_error: f64,
}

impl std::fmt::Debug for CfTable<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CfTable")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("freqs", &self.freqs)
            .field("panels", &self.panels.len())
            .field("fit_error", &self.fit_error)
            .finish()
    }
}

impl<'a> CfTable<'a> {
    /// `components(ω)` must return one value per entry of `freqs`.
    pub fn new<F>(components: F, freqs: Vec<f64>, lo: f64, hi: f64) -> Result<Self>
    where
        F: Fn(f64) -> Result<Vec<Complex64>> + Sync + Send + 'a,
    {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::invalid("cf table", format!("need 0 < lo < hi < inf, got {lo}, {hi}")));
        }
        if freqs.is_empty() {
            return Err(Error::invalid("cf table", "no components"));
        }
        let mut edges = vec![lo];
        while *edges.last().unwrap_or(&hi) < hi {
            let a = edges[edges.len() - 1];
            edges.push((2.0 * a).min(hi));
        }
        let mut table = CfTable { components: Box::new(components), freqs, lo, hi, panels: Vec::new(), fit_error: 0.0 };
        let fitted: Vec<Vec<(Panel, f64)>> =
            edges.par_windows(2).map(|e| table.fit(e[0], e[1], 0)).collect::<Result<_>>()?;
        let fitted: Vec<(Panel, f64)> = fitted.into_iter().flatten().collect();
        table.fit_error = fitted.iter().map(|p| p.1).fold(0.0, f64::max);
        table.panels = fitted.into_iter().map(|p| p.0).collect();
        Ok(table)
    }

    /// Table of a plain exponent with no known oscillating parts.
    pub fn from_exponent<F>(exponent: F, lo: f64, hi: f64) -> Result<Self>
    where
        F: Fn(f64) -> Result<Complex64> + Sync + Send + 'a,
    {
        CfTable::new(move |w| Ok(vec![exponent(w)?]), vec![0.0], lo, hi)
    }

    /// Table for [`cf_ppp_exponent`], covering ω up to where |φ| < 1e-14.
    ///
    /// With unit fading each lane with a guard distance contributes a term
    /// e^{jωy₀}(...), y₀ being the power received from the nearest
    /// admissible interferer; those are split off as separate components.
    pub fn for_spec(spec: &'a CfSpec) -> Result<Self> {
        check_alpha("cf_ppp", spec.alpha)?;
        let floor = (1e-14f64).ln();
        let mut hi = 1.0 / spec.gamma1_p0.max(1e-300);
        let mut tries = 0;
        while cf_ppp_exponent(spec, hi)?.re < floor && tries < 400 {
            hi *= 0.5;
            tries += 1;
        }
        while cf_ppp_exponent(spec, hi)?.re >= floor {
            hi *= 2.0;
            tries += 1;
            if tries > 400 {
                return Err(Error::invalid("cf table", "characteristic function does not decay"));
            }
        }
        let lo = hi * 0.5f64.powi(48);
        if !spec.fading.is_unit() {
            return CfTable::from_exponent(move |w| cf_ppp_exponent(spec, w), lo, hi);
        }
        let rays: Vec<LaneRays> = spec
            .lanes
            .iter()
            .filter(|l| l.lambda_i() > 0.0)
            .map(|l| LaneRays::new(l, spec.gamma1_p0, spec.alpha))
            .collect();
        let totals: Vec<Complex64> = rays.iter().map(second_ray_total).collect::<Result<_>>()?;
        let mut freqs = vec![0.0];
        freqs.extend(rays.iter().map(|r| if r.has_second_ray() { r.y0 } else { 0.0 }));
        let components = move |w: f64| -> Result<Vec<Complex64>> {
            let mut out = vec![ZERO; rays.len() + 1];
            for (i, (r, t)) in rays.iter().zip(&totals).enumerate() {
                let (a, b) = unit_lane_parts(r, *t, w)?;
                out[0] += a;
                out[i + 1] = b;
            }
            Ok(out)
        };
        CfTable::new(components, freqs, lo, hi)
    }

    fn combine(&self, w: f64, parts: &[Complex64]) -> Complex64 {
        parts
            .iter()
            .zip(&self.freqs)
            .map(|(c, f)| if *f == 0.0 { *c } else { c * Complex64::new(0.0, w * f).exp() })
            .sum()
    }

    fn fit(&self, a: f64, b: f64, depth: u32) -> Result<Vec<(Panel, f64)>> {
        let n = CHEB_NODES as f64;
        let mut values = Vec::with_capacity(CHEB_NODES);
        for k in 0..CHEB_NODES {
            let x = (PI * (k as f64 + 0.5) / n).cos();
            values.push((self.components)(0.5 * (a + b) + 0.5 * (b - a) * x)?);
        }
        let mut coeffs = vec![[ZERO; CHEB_NODES]; self.freqs.len()];
        for (c, set) in coeffs.iter_mut().enumerate() {
            for (j, cj) in set.iter_mut().enumerate() {
                let s: Complex64 =
                    values.iter().enumerate().map(|(k, v)| v[c] * (PI * j as f64 * (k as f64 + 0.5) / n).cos()).sum();
                *cj = s * (2.0 / n);
            }
            set[0] *= 0.5;
        }
        let panel = Panel { a, b, coeffs };
        let probe = a + 0.37 * (b - a);
        let exact = self.combine(probe, &(self.components)(probe)?);
        let err = (self.panel_exponent(&panel, probe) - exact).norm();
        if err > 1e-10 * exact.norm().max(1.0) && depth < MAX_SPLIT_DEPTH {
            let m = 0.5 * (a + b);
            let mut left = self.fit(a, m, depth + 1)?;
            left.extend(self.fit(m, b, depth + 1)?);
            return Ok(left);
        }
        Ok(vec![(panel, err)])
    }

    fn panel_exponent(&self, p: &Panel, w: f64) -> Complex64 {
        let x = (2.0 * w - p.a - p.b) / (p.b - p.a);
        let parts: Vec<Complex64> = p.coeffs.iter().map(|c| clenshaw(c, x)).collect();
        self.combine(w, &parts)
    }

    /// Largest |interpolant - exponent| seen at the per-panel probe points.
    pub fn fit_error(&self) -> f64 {
        self.fit_error
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    pub fn exponent(&self, omega: f64) -> Result<Complex64> {
        if omega == 0.0 {
            return Ok(ZERO);
        }
        let w = omega.abs();
        let v = if w < self.lo || w > self.hi || !w.is_finite() {
            self.combine(w, &(self.components)(w)?)
        } else {
            let i = self.panels.partition_point(|p| p.b < w).min(self.panels.len() - 1);
            self.panel_exponent(&self.panels[i], w)
        };
        Ok(if omega < 0.0 { v.conj() } else { v })
    }

    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        Ok(self.exponent(omega)?.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GeometryKind, Scenario};

    fn spec(offset: f64, delta_o: f64, density: f64, fading: FadingModel) -> CfSpec {
        CfSpec {
            geometry: GeometryKind::Ppp,
            lanes: vec![LaneTerm { offset, delta_o, density, duty_cycle: 0.1 }],
            gamma1_p0: 0.973,
            alpha: 2.0,
            fading,
        }
    }

    #[test]
    fn normalization_and_empty() {
        let s = spec(10.0, 76.0, 0.1, FadingModel::Unit);
        assert_eq!(cf_ppp(&s, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        let mut empty = s.clone();
        empty.lanes[0].duty_cycle = 0.0;
        assert_eq!(cf_ppp(&empty, 123.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn conjugate_symmetry() {
        let s = spec(10.0, 76.0, 0.1, FadingModel::Gamma { shape: 1.0 });
        for w in [1.0, 300.0, 5e4] {
            let a = cf_ppp(&s, w).unwrap();
            let b = cf_ppp(&s, -w).unwrap();
            assert!((a - b.conj()).norm() < 1e-14);
            assert!(a.norm() <= 1.0);
        }
    }

    /// Direct quadrature along the real r axis; slow but obviously right
    /// while ω y₀ stays small.
    fn direct_exponent(s: &CfSpec, w: f64) -> Complex64 {
        let l = &s.lanes[0];
        let f = |r: f64| {
            let y = s.gamma1_p0 * (l.offset * l.offset + r * r).powf(-0.5 * s.alpha);
            Complex64::new(0.0, w * y).exp() - 1.0
        };
        let tol = Tolerance::new(1e-14, 1e-12).with_max_intervals(20000);
        integrate_to_inf(f, l.delta_o, tol).unwrap().value * l.lambda_i()
    }

    #[test]
    fn matches_real_axis_quadrature() {
        for (offset, d0) in [(10.0, 76.0), (10.0, 0.0), (0.0, 20.0), (3.0, 1.0)] {
            let s = spec(offset, d0, 0.1, FadingModel::Unit);
            for w in [0.3, 10.0, 200.0] {
                let a = cf_ppp_exponent(&s, w).unwrap();
                let b = direct_exponent(&s, w);
                assert!((a - b).norm() < 1e-8 * (1.0 + b.norm()), "L={offset} d0={d0} w={w}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn levy_against_ppp_and_ln0() {
        let wc = spec(0.0, 0.0, 0.1, FadingModel::Unit);
        for w in [1e-3, 1.0, 1e3, 1e6] {
            let a = cf_levy(&wc, w).unwrap();
            let b = cf_ppp(&wc, w).unwrap();
            let c = cf_ppp_ln0(&wc, w).unwrap();
            assert!((a - b).norm() < 1e-9, "w={w}");
            assert!((a - c).norm() < 1e-12, "w={w}");
            let modulus = (-0.01 * (PI * 0.973 * w / 2.0).sqrt()).exp();
            assert!((a.norm() - modulus).abs() < 1e-14);
        }
        assert!(cf_levy(&spec(10.0, 76.0, 0.1, FadingModel::Unit), 1.0).is_err());
    }

    #[test]
    fn ln0_agrees_with_small_offset() {
        for fading in [FadingModel::Unit, FadingModel::Gamma { shape: 2.0 }] {
            let s0 = spec(0.0, 76.0, 0.1, fading.clone());
            let s1 = spec(1e-6, 76.0, 0.1, fading);
            for w in [0.5, 100.0, 1e4] {
                let a = cf_ppp_ln0(&s0, w).unwrap();
                let b = cf_ppp(&s1, w).unwrap();
                assert!((a - b).norm() < 1e-4 * b.norm().max(1e-12), "w={w}: {a} {b}");
            }
        }
        assert!(cf_ppp_ln0(&spec(10.0, 76.0, 0.1, FadingModel::Unit), 1.0).is_err());
    }

    #[test]
    fn levy_closed_form_points() {
        let wc = spec(0.0, 0.0, 0.1, FadingModel::Unit);
        let a = levy_scale(&wc).unwrap();
        let x = PI * 1e-4 * 0.973 / 4.0;
        let c = cdf_levy_closed(&wc, &[x, 1e9]).unwrap();
        assert!((c.cdf[0] - 0.157_299_207_050_285).abs() < 1e-12);
        assert!(c.cdf[1] > 0.999);
        assert!((a - 2.0 * x).abs() < 1e-14 * a);
    }

    #[test]
    fn table_matches_direct() {
        let s = CfSpec::from_scenario(&Scenario::reference()).unwrap();
        let t = CfTable::for_spec(&s).unwrap();
        assert!(t.fit_error() < 1e-9, "{t:?}");
        let (lo, hi) = t.range();
        let mut w = lo * 3.3;
        while w < hi {
            let a = t.exponent(w).unwrap();
            let b = cf_ppp_exponent(&s, w).unwrap();
            assert!((a - b).norm() < 1e-9, "w={w}");
            assert_eq!(t.exponent(-w).unwrap(), a.conj());
            w *= 7.1;
        }
    }

    #[test]
    fn unit_split_reassembles() {
        for (offset, d0) in [(10.0, 76.0), (0.0, 76.0), (3.0, 1.0), (10.0, 0.0)] {
            let s = spec(offset, d0, 0.1, FadingModel::Unit);
            let rays = LaneRays::new(&s.lanes[0], s.gamma1_p0, s.alpha);
            let total = second_ray_total(&rays).unwrap();
            for w in [0.7, 300.0, 2e5] {
                let (a, b) = unit_lane_parts(&rays, total, w).unwrap();
                let y0 = if rays.has_second_ray() { rays.y0 } else { 0.0 };
                let split = a + b * Complex64::new(0.0, w * y0).exp();
                let full = cf_ppp_exponent(&s, w).unwrap();
                assert!((split - full).norm() < 1e-9 * full.norm().max(1.0), "L={offset} d0={d0} w={w}");
            }
        }
    }

    #[test]
    fn table_sparse_lane() {
        // Thin lane with a small y₀: the CF decays slowly against e^{jωy₀}.
        let mut sc = Scenario::reference();
        sc.lanes[0].density = 0.04;
        sc.access.duty_cycle = 0.01;
        let s = CfSpec::from_scenario(&sc).unwrap();
        let t = CfTable::for_spec(&s).unwrap();
        assert!(t.panel_count() < 5000, "{t:?}");
        let (lo, hi) = t.range();
        let mut w = lo * 5.3;
        while w < hi {
            let a = t.exponent(w).unwrap();
            let b = cf_ppp_exponent(&s, w).unwrap();
            assert!((a - b).norm() < 1e-9 * b.norm().max(1.0), "w={w}");
            w *= 3.7;
        }
    }
}
