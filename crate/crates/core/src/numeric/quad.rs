//! Adaptive Gauss-Kronrod quadrature over real and complex integrands,
//! plus fixed Gauss-Legendre rules.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae/weights and the embedded 7-point Gauss weights
// (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Values that can be integrated: closed under addition and real scaling,
/// with a norm for error control.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
    /// When the interval budget runs out, still accept a result whose error
    /// is below this relative level. Integrands with rounding noise stall
    /// short of a tight `rel`.
    pub rounding_floor: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-10, max_intervals: 2000, rounding_floor: 0.0 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel, ..Default::default() }
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    pub fn with_rounding_floor(mut self, rel: f64) -> Self {
        self.rounding_floor = rel;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub abs_err: f64,
    pub evaluations: usize,
}

/// One 15-point Kronrod panel; returns (estimate, |K15 - G7|).
pub fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).magnitude())
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

/// Globally adaptive integration over `[a, b]` with optional interior
/// breakpoints. The worst panel is bisected until the summed error estimate
/// meets `max(abs, rel * |I|)`.
pub fn integrate_breaks<T, F>(mut f: F, points: &[f64], tol: Tolerance) -> Result<Quadrature<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let mut panels: Vec<Panel<T>> = Vec::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk15(&mut f, w[0], w[1]);
            panels.push(Panel { a: w[0], b: w[1], value, err });
        }
    }
    let mut evaluations = 15 * panels.len();
    loop {
        let total = panels.iter().fold(T::zero(), |acc, p| acc + p.value);
        let err: f64 = panels.iter().map(|p| p.err).sum();
        if !err.is_finite() || !total.magnitude().is_finite() {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                estimate: total.magnitude(),
                error: err,
                evaluations,
            });
        }
        if err <= tol.abs.max(tol.rel * total.magnitude()) {
            return Ok(Quadrature { value: total, abs_err: err, evaluations });
        }
        if panels.len() >= tol.max_intervals {
            if err <= tol.rounding_floor * total.magnitude() {
                return Ok(Quadrature { value: total, abs_err: err, evaluations });
            }
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                estimate: total.magnitude(),
                error: err,
                evaluations,
            });
        }
        let worst = panels.iter().enumerate().max_by(|x, y| x.1.err.total_cmp(&y.1.err)).map(|(i, _)| i).unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel can no longer be split in floating point; accept it.
            panels.push(Panel { err: 0.0, ..p });
            continue;
        }
        let (v1, e1) = gk15(&mut f, p.a, mid);
        let (v2, e2) = gk15(&mut f, mid, p.b);
        evaluations += 30;
        panels.push(Panel { a: p.a, b: mid, value: v1, err: e1 });
        panels.push(Panel { a: mid, b: p.b, value: v2, err: e2 });
    }
}

pub fn integrate<T, F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Quadrature<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    integrate_breaks(f, &[a, b], tol)
}

/// `∫_a^∞ f`, through `x = a + t/(1-t)`.
pub fn integrate_to_inf<T, F>(mut f: F, a: f64, tol: Tolerance) -> Result<Quadrature<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    integrate(
        |t: f64| {
            let s = 1.0 - t;
            f(a + t / s) * (1.0 / (s * s))
        },
        0.0,
        1.0,
        tol,
    )
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                let jf = j as f64;
                p0 = ((2.0 * jf + 1.0) * z * p1 - jf * p2) / (jf + 1.0);
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss-Legendre rule mapped onto [0, 1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (x.iter().map(|v| 0.5 * (v + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
}
