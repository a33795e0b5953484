//! Special functions used by the interference and performance formulas.
//!
//! Conventions worth knowing before calling anything here:
//!
//! * [`expint_gen`] uses the *growing-exponent* convention
//!   `E_n(z) = ∫_1^∞ e^{z t} t^{-n} dt`. The textbook function is
//!   `∫_1^∞ e^{-z t} t^{-n} dt`, so `expint_gen(n, z) == E_n^{std}(-z)`.
//! * [`gamma_upper`] is the non-regularized `Γ(a, x)`. For integer `a = n`
//!   it satisfies `Γ(n, x) = (n-1)! e^{-x} Σ_{k=0}^{n-1} x^k / k!`; note the
//!   partial sum stops at `n - 1`, not `n`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{integrate_breaks, integrate_to_inf, Tolerance};

/// Absolute/relative accuracy pair for the special functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyTarget {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for AccuracyTarget {
    fn default() -> Self {
        AccuracyTarget { abs_tol: 1e-10, rel_tol: 1e-10 }
    }
}

impl AccuracyTarget {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        for (name, v) in [("abs_tol", abs_tol), ("rel_tol", rel_tol)] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(Error::invalid(name, format!("{v} not in (0, 1e-2]")));
            }
        }
        Ok(AccuracyTarget { abs_tol, rel_tol })
    }

    pub fn accepts(&self, value: f64, reference: f64) -> bool {
        (value - reference).abs() <= self.abs_tol.max(self.rel_tol * reference.abs())
    }
}

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x == 0.0 {
        return 1.0;
    }
    if x < 2.5 {
        // erf x = 2/√π e^{-x²} Σ 2^n x^{2n+1} / (2n+1)!!
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= 2.0 * x2 / (2.0 * n + 1.0);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        1.0 - FRAC_2_SQRT_PI * (-x2).exp() * sum
    } else {
        // Continued fraction x + (1/2)/(x + 1/(x + (3/2)/(x + ...))), modified Lentz.
        let tiny = 1e-300;
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for n in 1..500 {
            let an = 0.5 * n as f64;
            d = x + an * d;
            d = if d.abs() < tiny { tiny } else { d };
            c = x + an / c;
            c = if c.abs() < tiny { tiny } else { c };
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / (f * PI.sqrt())
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln|Γ(x)| for real x not a nonpositive integer.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

pub fn gamma(x: f64) -> f64 {
    if x.fract() == 0.0 && (1.0..=30.0).contains(&x) {
        return (1..x as u32).map(f64::from).product();
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    ln_gamma(x).exp()
}

fn check_gamma_args(op: &'static str, a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(op, format!("a = {a} must be positive")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(op, format!("x = {x} must be nonnegative")));
    }
    Ok(())
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..10_000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    check_gamma_args("gamma_p", a, x)?;
    Ok(if x == 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_fraction(a, x)
    })
}

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x)/Γ(a).
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    check_gamma_args("gamma_q", a, x)?;
    Ok(if x == 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    })
}

/// Upper incomplete gamma Γ(a, x) = ∫_x^∞ t^{a-1} e^{-t} dt.
pub fn gamma_upper(a: f64, x: f64) -> Result<f64> {
    check_gamma_args("gamma_upper", a, x)?;
    if x == 0.0 {
        return Ok(gamma(a));
    }
    if x < a + 1.0 {
        Ok(gamma(a) * (1.0 - gamma_p_series(a, x)))
    } else {
        // Avoid Γ(a) * Q when Γ(a) alone would overflow.
        Ok(gamma_q_fraction(a, x) * gamma(a))
    }
}

// B_2 .. B_30
const BERNOULLI: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// Hurwitz zeta ζ(s, a) = Σ_{m≥0} (m + a)^{-s}.
///
/// Sums directly until `a + N ≥ 25 + s`, then applies the Euler-Maclaurin
/// tail with Bernoulli terms through B_30.
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::domain("hurwitz_zeta", format!("s = {s} must exceed 1")));
    }
    if !(a > 0.0) {
        return Err(Error::domain("hurwitz_zeta", format!("a = {a} must be positive")));
    }
    let start = 25.0 + s;
    let mut sum = 0.0;
    let mut q = a;
    while q < start {
        sum += q.powf(-s);
        q += 1.0;
    }
    let qs = q.powf(-s);
    sum += q * qs / (s - 1.0) + 0.5 * qs;
    // term_j = B_2j/(2j)! * s(s+1)...(s+2j-2) * q^{-s-2j+1}
    let mut poch = s;
    let mut fact = 2.0;
    let mut qpow = qs / q;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let term = b / fact * poch * qpow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let k = 2.0 * (j as f64 + 1.0);
        poch *= (s + k - 1.0) * (s + k);
        fact *= (k + 1.0) * (k + 2.0);
        qpow /= q * q;
    }
    Ok(sum)
}

/// `∫_x^∞ (1+t²)^{-b} dt` for x ≥ 1, b > 1/2, via the incomplete beta
/// function in `v = 1/(1+x²)`.
fn unit_offset_tail(b: f64, x: f64) -> f64 {
    let p = b - 0.5;
    let v = 1.0 / (1.0 + x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        term *= (p + k) * (0.5 + k) / ((p + 1.0 + k) * (k + 1.0)) * v;
        sum += term;
        k += 1.0;
        if term.abs() < 1e-17 * sum || k > 5000.0 {
            break;
        }
    }
    v.powf(p) / (2.0 * p) * sum
}

/// `∫_0^∞ (1+t²)^{-b} dt = √π Γ(b - 1/2) / (2 Γ(b))`.
fn unit_offset_full(b: f64) -> f64 {
    0.5 * (0.5 * PI.ln() + ln_gamma(b - 0.5) - ln_gamma(b)).exp()
}

/// Pfaff-transformed series for `x ₂F₁(1/2, b; 3/2; -x²) = ∫_0^x (1+t²)^{-b} dt`.
fn unit_offset_head(b: f64, x: f64) -> Result<f64> {
    let u = x * x / (1.0 + x * x);
    let c = 1.5 - b;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    while k < 1e6 {
        term *= (0.5 + k) * (c + k) / ((1.5 + k) * (k + 1.0)) * u;
        sum += term;
        k += 1.0;
        if term.abs() < 1e-17 * sum.abs() {
            return Ok(u.sqrt() * sum);
        }
    }
    Err(Error::NonConvergence { what: "hyp2f1 series", estimate: sum, error: term.abs(), evaluations: k as usize })
}

/// ₂F₁(1/2, b; 3/2; z) for z ≤ 0, where `b = α/2`.
pub fn hyp2f1_neg(b_half_alpha: f64, z: f64) -> Result<f64> {
    let b = b_half_alpha;
    if !(z <= 0.0) {
        return Err(Error::domain("hyp2f1_neg", format!("z = {z} must be nonpositive")));
    }
    if !b.is_finite() {
        return Err(Error::domain("hyp2f1_neg", format!("b = {b} must be finite")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let x = (-z).sqrt();
    if b > 0.5 && x > 1.0 {
        Ok((unit_offset_full(b) - unit_offset_tail(b, x)) / x)
    } else {
        Ok(unit_offset_head(b, x)? / x)
    }
}

/// `∫_{r0}^∞ (l² + r²)^{-α/2} dr` for α > 1, evaluated without the
/// cancellation the head-minus-full form suffers when `r0 ≫ l`.
pub fn offset_power_tail(l: f64, alpha: f64, r0: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::domain("offset_power_tail", format!("alpha = {alpha} must exceed 1")));
    }
    if l == 0.0 {
        if r0 <= 0.0 {
            return Err(Error::Divergence("power-law integral from the origin with no lane offset".into()));
        }
        return Ok(r0.powf(1.0 - alpha) / (alpha - 1.0));
    }
    let b = 0.5 * alpha;
    let x = r0 / l;
    let unit = if x > 1.0 { unit_offset_tail(b, x) } else { unit_offset_full(b) - unit_offset_head(b, x)? };
    Ok(l.powf(1.0 - alpha) * unit)
}

/// `E_n(z) = ∫_1^∞ e^{z t} t^{-n} dt` (growing-exponent convention; see the
/// module docs).
///
/// The ray `t = 1 + d s` with `d = -z̄/|z|` turns `e^{z t}` into a pure decay,
/// so the integral is done by quadrature in `s`. Converges for `Re z < 0`;
/// on the imaginary axis it needs `n > 0`, and at `z = 0` it needs `n > 1`.
pub fn expint_gen(n_order: f64, z: Complex64) -> Result<Complex64> {
    let n = n_order;
    let r = z.norm();
    if !n.is_finite() || !r.is_finite() {
        return Err(Error::domain("expint_gen", "non-finite argument"));
    }
    if r == 0.0 {
        return if n > 1.0 {
            Ok(Complex64::new(1.0 / (n - 1.0), 0.0))
        } else {
            Err(Error::Divergence(format!("E_{n}(0) needs n > 1")))
        };
    }
    if z.re > 0.0 {
        return Err(Error::Divergence(format!("E_{n}({z}) with positive real part")));
    }
    if z.re == 0.0 && n <= 0.0 {
        return Err(Error::Divergence(format!("E_{n}({z}) on the imaginary axis needs n > 0")));
    }
    let d = -z.conj() / r;
    let tol = Tolerance::new(1e-15, 1e-13).with_max_intervals(4000);
    let g = |sigma: f64| (-sigma).exp() * (Complex64::new(1.0, 0.0) + d * (sigma / r)).powf(-n);
    let knee = r.min(1.0);
    let head = integrate_breaks(g, &[0.0, 0.5 * knee, knee], tol)?;
    let tail = integrate_to_inf(g, knee, tol)?;
    Ok(z.exp() * d / r * (head.value + tail.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_reference_points() {
        assert_eq!(erfc(0.0), 1.0);
        assert!((erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-15);
        assert!((erfc(3.0) - 2.209_049_699_858_544e-5).abs() < 1e-18);
        assert!((erfc(-1.0) - 1.842_700_792_949_715).abs() < 1e-15);
    }

    #[test]
    fn ln_gamma_integers() {
        let mut f = 1.0f64;
        for n in 1..25 {
            assert!((ln_gamma(n as f64) - f.ln()).abs() < 1e-12 * f.ln().abs().max(1.0), "n={n}");
            f *= n as f64;
        }
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn gamma_upper_integer_identity() {
        // Γ(n,x) = (n-1)! e^{-x} Σ_{k<n} x^k/k!
        for n in 1..12 {
            for &x in &[0.1, 1.0, 2.5, 7.0, 20.0] {
                let mut s = 0.0;
                let mut t = 1.0;
                for k in 0..n {
                    if k > 0 {
                        t *= x / k as f64;
                    }
                    s += t;
                }
                let want = gamma(n as f64) * (-x).exp() * s;
                let got = gamma_upper(n as f64, x).unwrap();
                assert!((got - want).abs() < 1e-12 * want.max(1e-300) + 1e-300, "n={n} x={x}");
            }
        }
        assert_eq!(gamma_upper(1.0, 0.0).unwrap(), 1.0);
        assert!(gamma_upper(0.0, 1.0).is_err());
    }

    #[test]
    fn zeta_two() {
        assert!((hurwitz_zeta(2.0, 1.0).unwrap() - PI * PI / 6.0).abs() < 1e-14);
        assert!(hurwitz_zeta(1.0, 1.0).is_err());
        assert!(hurwitz_zeta(2.0, 0.0).is_err());
    }

    #[test]
    fn hyp2f1_arctan() {
        for &w in &[0.1, 0.9, 1.0, 1.1, 3.0, 7.6, 100.0] {
            let got = hyp2f1_neg(1.0, -w * w).unwrap();
            assert!((got - w.atan() / w).abs() < 1e-14, "w={w}");
        }
        assert_eq!(hyp2f1_neg(1.3, 0.0).unwrap(), 1.0);
        assert!(hyp2f1_neg(1.0, 0.1).is_err());
    }

    #[test]
    fn expint_zero_and_divergence() {
        assert!((expint_gen(2.0, Complex64::new(0.0, 0.0)).unwrap().re - 1.0).abs() < 1e-15);
        assert!(expint_gen(1.0, Complex64::new(0.0, 0.0)).is_err());
        assert!(expint_gen(1.5, Complex64::new(0.1, 0.0)).is_err());
    }
}
