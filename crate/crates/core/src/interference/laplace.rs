//! Laplace transform of the Bernoulli-lattice interference and its CDF.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interference::curve::DistributionCurve;
use crate::interference::inversion::{invert_laplace_cdf, LaplaceContour, LaplaceOptions};
use crate::interference::{CfSpec, LaneTerm};
use crate::model::FadingModel;
use crate::numeric::gauss_legendre_unit;
use crate::specfun::hurwitz_zeta;

const MAX_FACTORS: usize = 1_000_000;
const TAIL_ORDER: usize = 6;
const MAX_U_PANELS: usize = 256;

/// One lane of the translated lattice: points at δ₀ + (m + U)δ.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LatticeLane {
    pub scale: f64,
    pub alpha: f64,
    pub offset: f64,
    pub delta_o: f64,
    pub spacing: f64,
    pub xi: f64,
}

impl LatticeLane {
    fn from_term(t: &LaneTerm, scale: f64, alpha: f64) -> Self {
        LatticeLane { scale, alpha, offset: t.offset, delta_o: t.delta_o, spacing: 1.0 / t.density, xi: t.duty_cycle }
    }

    pub fn radius(&self, m: usize, u: f64) -> f64 {
        self.delta_o + (m as f64 + u) * self.spacing
    }

    /// Received power from lattice point m before fading.
    pub fn power(&self, m: usize, u: f64) -> f64 {
        let r = self.radius(m, u);
        let d2 = self.offset * self.offset + r * r;
        if self.alpha == 2.0 {
            self.scale / d2
        } else {
            self.scale * d2.powf(-0.5 * self.alpha)
        }
    }

    /// Smallest m whose radius is at least `r_min` for every U ∈ [0, 1].
    pub fn first_index_beyond(&self, r_min: f64) -> usize {
        let m = ((r_min - self.delta_o) / self.spacing).ceil();
        if m <= 0.0 {
            0
        } else if m >= usize::MAX as f64 {
            usize::MAX
        } else {
            m as usize
        }
    }

    /// Σ_{m ≥ first} power(m, u)^n, expanding (L² + r²)^{-nα/2} binomially
    /// in L²/r² and summing each power of r with the Hurwitz zeta function.
    /// Assumes r_first ≥ 10 L so the expansion converges quickly.
    pub fn tail_power_sum(&self, first: usize, u: f64, n: u32) -> Result<f64> {
        let nf = n as f64;
        let beta = 0.5 * nf * self.alpha;
        let a = first as f64 + u + self.delta_o / self.spacing;
        let l2 = self.offset * self.offset;
        let mut coef = 1.0;
        let mut sum = 0.0;
        for j in 0..64 {
            let p = nf * self.alpha + 2.0 * j as f64;
            let term = coef * l2.powi(j) * self.spacing.powf(-p) * hurwitz_zeta(p, a)?;
            sum += term;
            if l2 == 0.0 || term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            let jf = j as f64;
            coef *= -(beta + jf) / (jf + 1.0);
        }
        Ok(self.scale.powi(n as i32) * sum)
    }
}

pub(crate) fn expm1_c(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = z;
        let mut sum = z;
        for k in 2..30 {
            term = term * z / k as f64;
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        z.exp() - 1.0
    }
}

fn ln1p_c(a: Complex64) -> Complex64 {
    if a.norm() < 1e-3 {
        let mut term = a;
        let mut sum = a;
        for k in 2..8 {
            term = -term * a;
            sum += term / k as f64;
        }
        sum
    } else {
        (a + 1.0).ln()
    }
}

/// ln(1 - ξ + ξ e^{l}) without overflow for large Re l.
fn ln_thinned(xi: f64, l: Complex64) -> Complex64 {
    if xi >= 1.0 {
        return l;
    }
    if l.re > 0.0 {
        Complex64::new(xi.ln(), 0.0) + l + ln1p_c((-l).exp() * ((1.0 - xi) / xi))
    } else {
        ln1p_c(expm1_c(l) * xi)
    }
}

/// Power-series coefficients c_1..c_N of ln(1 + ξ(E[e^{-wg}] - 1)) in w.
fn tail_coefficients(xi: f64, fading: &FadingModel) -> [f64; TAIL_ORDER + 1] {
    let mut b = [0.0; TAIL_ORDER + 1];
    let mut fact = 1.0;
    for (n, bn) in b.iter_mut().enumerate().skip(1) {
        fact *= n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        *bn = xi * sign * fading.moment(n as u32) / fact;
    }
    let mut out = [0.0; TAIL_ORDER + 1];
    let mut power = b;
    for k in 1..=TAIL_ORDER {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        for n in 0..=TAIL_ORDER {
            out[n] += sign * power[n] / k as f64;
        }
        let mut next = [0.0; TAIL_ORDER + 1];
        for i in 1..=TAIL_ORDER {
            for j in 1..=TAIL_ORDER - i {
                next[i + j] += power[i] * b[j];
            }
        }
        power = next;
    }
    out
}

fn series_radius(fading: &FadingModel) -> f64 {
    match fading {
        FadingModel::Gamma { shape } => 0.05 * shape.min(1.0),
        _ => 0.05,
    }
}

/// Σ_{m < first} ln(1 - ξ + ξ e^{-sP(m,u)}) for unit fading, up to a
/// multiple of 2πi. The factors are multiplied and one logarithm is taken per
/// block; callers only ever exponentiate the result.
fn ln_product_unit(lane: &LatticeLane, s: Complex64, u: f64, first: usize) -> Complex64 {
    let keep = 1.0 - lane.xi;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut prod = Complex64::new(1.0, 0.0);
    for m in 0..first {
        prod *= (-s * lane.power(m, u)).exp() * lane.xi + keep;
        let n = prod.norm_sqr();
        if !(1e-200..=1e200).contains(&n) {
            if n == 0.0 {
                return Complex64::new(f64::NEG_INFINITY, 0.0);
            }
            acc += prod.ln();
            prod = Complex64::new(1.0, 0.0);
        }
    }
    acc + prod.ln()
}

/// Gauss-Legendre panels needed to average over the translation u.
///
/// As u runs over [0, 1], factor m winds through ω_m = |s| (P(m,0) - P(m,1))
/// radians with an amplitude near A_m = ξ|L(sP(m,1))|/(1-ξ). Strong factors
/// compound their phases; weak ones only need their own resolved. One panel
/// per 30 rad.
fn u_panels(lane: &LatticeLane, fading: &FadingModel, s: Complex64, first: usize) -> usize {
    let mut strong = 0.0;
    let mut weak: f64 = 0.0;
    let odds = lane.xi / (1.0 - lane.xi).max(1e-300);
    for m in 0..first {
        let (p0, p1) = (lane.power(m, 0.0), lane.power(m, 1.0));
        let omega = s.norm() * (p0 - p1);
        let amp = odds * fading.ln_laplace(s * p1).re.exp();
        strong += omega * amp.min(1.0);
        if amp > 1e-13 {
            weak = weak.max(omega);
        }
    }
    // The series tail telescopes to |s| P(first, 0).
    strong += s.norm() * lane.power(first, 0.0) * odds.min(1.0);
    (((strong + weak) / 30.0).ceil() as usize).clamp(1, MAX_U_PANELS)
}

fn ln_laplace_lane(
    lane: &LatticeLane,
    fading: &FadingModel,
    s: Complex64,
    u_nodes: &(Vec<f64>, Vec<f64>),
) -> Result<Complex64> {
    if lane.xi == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let radius = series_radius(fading);
    let r_series = (lane.scale * s.norm() / radius).powf(1.0 / lane.alpha);
    let first = lane.first_index_beyond(r_series.max(10.0 * lane.offset));
    if first > MAX_FACTORS {
        return Err(Error::ProductTruncation { limit: MAX_FACTORS, s: s.to_string() });
    }
    let coeffs = tail_coefficients(lane.xi, fading);
    let (base_u, base_w) = u_nodes;
    let panels = u_panels(lane, fading, s, first);
    let width = 1.0 / panels as f64;
    let u: Vec<f64> = (0..panels).flat_map(|p| base_u.iter().map(move |x| (p as f64 + x) * width)).collect();
    let w: Vec<f64> = (0..panels).flat_map(|_| base_w.iter().map(|v| v * width)).collect();
    let mut logs = Vec::with_capacity(u.len());
    for &u in &u {
        // With ξ = 1 single factors underflow; the log form keeps them.
        let mut acc = if matches!(fading, FadingModel::Unit) && lane.xi < 1.0 {
            ln_product_unit(lane, s, u, first)
        } else {
            (0..first).map(|m| ln_thinned(lane.xi, fading.ln_laplace(s * lane.power(m, u)))).sum()
        };
        let mut sn = Complex64::new(1.0, 0.0);
        for (n, c) in coeffs.iter().enumerate().skip(1) {
            sn *= s;
            acc += sn * (c * lane.tail_power_sum(first, u, n as u32)?);
        }
        logs.push(acc);
    }
    // log Σ w_i e^{logs_i}, shifted by the largest real part.
    let top = logs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let sum: Complex64 = logs.iter().zip(&w).map(|(z, w)| (z - top).exp() * w).sum();
    Ok(sum.ln() + top)
}

pub(crate) fn ln_laplace_bl_with(spec: &CfSpec, s: Complex64, u_nodes: &(Vec<f64>, Vec<f64>)) -> Result<Complex64> {
    if s.re < 0.0 && !spec.fading.has_left_continuation() {
        return Err(Error::domain(
            "laplace_bl",
            format!("Re s = {} < 0 needs a fading law with an analytic continuation", s.re),
        ));
    }
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::domain("laplace_bl", "non-finite s"));
    }
    let mut total = Complex64::new(0.0, 0.0);
    if s == Complex64::new(0.0, 0.0) {
        return Ok(total);
    }
    for lane in &spec.lanes {
        let ll = LatticeLane::from_term(lane, spec.gamma1_p0, spec.alpha);
        total += ln_laplace_lane(&ll, &spec.fading, s, u_nodes)?;
    }
    Ok(total)
}

/// ln E[e^{-sI}] for lattice placement on every lane of `spec`, averaged
/// over the lattice translation with composite 33-point Gauss-Legendre.
///
/// `Re s < 0` is accepted only for fading laws with an analytic
/// continuation (see [`FadingModel::has_left_continuation`]).
pub fn ln_laplace_bl(spec: &CfSpec, s: Complex64) -> Result<Complex64> {
    ln_laplace_bl_with(spec, s, &gauss_legendre_unit(33))
}

/// E[e^{-sI}] for lattice placement. Factors of the lattice product whose
/// argument is small are summed in closed form through a cumulant series,
/// so the product is exact up to that series' truncation.
pub fn laplace_bl(spec: &CfSpec, s: Complex64) -> Result<Complex64> {
    Ok(ln_laplace_bl(spec, s)?.exp())
}

/// CDF of the lattice interference by numerical Laplace inversion of
/// L(s)/s.
///
/// When no contour is forced, fixed Talbot is used for fading laws whose
/// transform continues into the left half-plane and the Euler (Bromwich
/// line) variant otherwise. With unit fading the lattice interference is
/// bounded, its transform grows like e^{|Re s| I_max} for Re s < 0, and the
/// Talbot contour integral does not converge.
pub fn cdf_bl_talbot(spec: &CfSpec, grid: &[f64], opts: &LaplaceOptions) -> Result<DistributionCurve> {
    let contour = opts.contour.unwrap_or(if spec.fading.has_left_continuation() {
        LaplaceContour::Talbot
    } else {
        LaplaceContour::Euler
    });
    let nodes = gauss_legendre_unit(opts.u_nodes);
    let opts = LaplaceOptions { contour: Some(contour), ..*opts };
    invert_laplace_cdf(|s| ln_laplace_bl_with(spec, s, &nodes), grid, &opts)
}
