//! Scenario description and the constants derived from it. Everything here
//! is SI-linear; decibel inputs are converted at the CLI boundary.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::RngCore;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::numeric::{integrate_to_inf, Tolerance};

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(p: f64) -> f64 {
    10.0 * p.log10() + 30.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarParams {
    /// P₀ [W]
    pub tx_power: f64,
    /// G_t, linear
    pub antenna_gain: f64,
    /// θ [rad]
    pub beamwidth: f64,
    /// f [Hz]
    pub frequency: f64,
    /// σ_c [m²]
    pub rcs: f64,
    /// T, linear
    pub sinr_threshold: f64,
    /// α
    pub pathloss_exp: f64,
    /// N [W]
    pub noise_power: f64,
}

impl RadarParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tx_power", self.tx_power),
            ("antenna_gain", self.antenna_gain),
            ("frequency", self.frequency),
            ("rcs", self.rcs),
            ("sinr_threshold", self.sinr_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("{v} must be positive and finite")));
            }
        }
        if !(self.beamwidth > 0.0 && self.beamwidth <= PI) {
            return Err(Error::invalid("beamwidth", format!("{} rad not in (0, pi]", self.beamwidth)));
        }
        if !(self.pathloss_exp > 1.0 && self.pathloss_exp.is_finite()) {
            return Err(Error::invalid("pathloss_exp", format!("{} must exceed 1", self.pathloss_exp)));
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(Error::invalid("noise_power", format!("{} must be nonnegative", self.noise_power)));
        }
        Ok(())
    }
}

/// One opposing lane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lane {
    /// L_n [m]
    pub offset: f64,
    /// λ [vehicles/m]
    pub density: f64,
    /// Overrides the beamwidth-derived δ₀ [m] when set.
    pub guard_distance: Option<f64>,
}

impl Lane {
    pub fn new(offset: f64, density: f64) -> Self {
        Lane { offset, density, guard_distance: None }
    }

    pub fn with_guard_distance(mut self, delta_o: f64) -> Self {
        self.guard_distance = Some(delta_o);
        self
    }

    /// Lattice spacing δ = 1/λ.
    pub fn spacing(&self) -> f64 {
        1.0 / self.density
    }

    /// δ₀ for this lane. θ = π means the cone covers the whole half-plane.
    pub fn delta_o(&self, beamwidth: f64) -> f64 {
        if let Some(d) = self.guard_distance {
            return d;
        }
        if self.offset == 0.0 || beamwidth >= PI {
            0.0
        } else {
            self.offset / (0.5 * beamwidth).tan()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(Error::invalid("density", format!("{} must be positive", self.density)));
        }
        if !(self.offset >= 0.0 && self.offset.is_finite()) {
            return Err(Error::invalid("offset", format!("{} must be nonnegative", self.offset)));
        }
        if let Some(d) = self.guard_distance {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::invalid("guard_distance", format!("{d} must be nonnegative")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumAccess {
    /// ξ
    pub duty_cycle: f64,
}

impl MediumAccess {
    pub fn new(duty_cycle: f64) -> Result<Self> {
        let m = MediumAccess { duty_cycle };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.duty_cycle) {
            return Err(Error::invalid("duty_cycle", format!("{} not in [0, 1]", self.duty_cycle)));
        }
        Ok(())
    }
}

/// A user-supplied fading law with unit mean. Only `sample` and `density`
/// are required; the rest default to quadrature over the density.
pub trait FadingDistribution: Send + Sync + fmt::Debug {
    fn sample(&self, rng: &mut dyn RngCore) -> f64;

    fn density(&self, g: f64) -> f64;

    fn moment(&self, n: u32) -> f64 {
        integrate_to_inf(|g: f64| g.powi(n as i32) * self.density(g), 0.0, Tolerance::new(1e-13, 1e-11))
            .map(|q| q.value)
            .unwrap_or(f64::NAN)
    }

    fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// E[e^{-w g}] for Re w ≥ 0.
    fn laplace(&self, w: Complex64) -> Complex64 {
        let tol = Tolerance::new(1e-13, 1e-11).with_max_intervals(4000);
        integrate_to_inf(|g: f64| (-w * g).exp() * self.density(g), 0.0, tol)
            .map(|q| q.value)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }
}

#[derive(Debug, Clone, Default)]
pub enum FadingModel {
    /// g ≡ 1.
    #[default]
    Unit,
    /// Gamma with shape m and unit mean; m = 1 is Rayleigh power fading.
    Gamma {
        shape: f64,
    },
    Custom(Arc<dyn FadingDistribution>),
}

impl PartialEq for FadingModel {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (FadingModel::Unit, FadingModel::Unit) => true,
            (FadingModel::Gamma { shape: a }, FadingModel::Gamma { shape: b }) => a == b,
            (FadingModel::Custom(a), FadingModel::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            FadingModel::Unit => Ok(()),
            FadingModel::Gamma { shape } => {
                if *shape > 0.0 && shape.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("fading.shape", format!("{shape} must be positive")))
                }
            }
            FadingModel::Custom(d) => {
                let m = d.mean();
                if (m - 1.0).abs() < 1e-6 {
                    Ok(())
                } else {
                    Err(Error::invalid("fading", format!("custom fading mean {m} is not 1")))
                }
            }
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, FadingModel::Unit)
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            FadingModel::Unit => 1.0,
            FadingModel::Gamma { shape } => {
                rand_distr::Gamma::new(*shape, 1.0 / shape).map(|d| d.sample(rng)).unwrap_or(f64::NAN)
            }
            FadingModel::Custom(d) => d.sample(rng),
        }
    }

    /// E[g^n].
    pub fn moment(&self, n: u32) -> f64 {
        match self {
            FadingModel::Unit => 1.0,
            FadingModel::Gamma { shape } => (0..n).map(|k| (shape + k as f64) / shape).product(),
            FadingModel::Custom(d) => d.moment(n),
        }
    }

    /// Density of g; `None` for the degenerate g ≡ 1.
    pub fn density(&self, g: f64) -> Option<f64> {
        match self {
            FadingModel::Unit => None,
            FadingModel::Gamma { shape: m } => Some(if g <= 0.0 {
                0.0
            } else {
                (m * m.ln() + (m - 1.0) * g.ln() - m * g - crate::specfun::ln_gamma(*m)).exp()
            }),
            FadingModel::Custom(d) => Some(d.density(g)),
        }
    }

    /// ln E[e^{-w g}].
    ///
    /// For `Unit` and `Gamma` this is the analytic expression and is valid
    /// on the whole plane (minus the Gamma poles at w = -m). `Custom` laws
    /// are integrated numerically and need Re w ≥ 0.
    pub fn ln_laplace(&self, w: Complex64) -> Complex64 {
        match self {
            FadingModel::Unit => -w,
            FadingModel::Gamma { shape } => -(Complex64::new(1.0, 0.0) + w / shape).ln() * shape,
            FadingModel::Custom(d) => d.laplace(w).ln(),
        }
    }

    /// Whether the transform of a finite interference sum stays bounded as
    /// Re s → -∞ away from the negative real axis. Bounded fading (including
    /// g ≡ 1) gives an entire transform of exponential growth instead, which
    /// rules out contour deformation into the left half-plane.
    pub fn has_left_continuation(&self) -> bool {
        matches!(self, FadingModel::Gamma { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeometryKind {
    #[default]
    Ppp,
    BernoulliLattice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub radar: RadarParams,
    pub lanes: Vec<Lane>,
    pub access: MediumAccess,
    pub fading: FadingModel,
    pub geometry: GeometryKind,
}

impl Scenario {
    /// The parameter set of the reference study: 10 dBm, 45 dBi, 15°,
    /// 76.5 GHz, 30 dBsm, 10 dB threshold, α = 2, one lane at 10 m,
    /// λ = 0.1/m and ξ = 0.1 (so 1/λ_I = 100 m).
    pub fn reference() -> Self {
        Scenario {
            radar: RadarParams {
                tx_power: dbm_to_watts(10.0),
                antenna_gain: db_to_linear(45.0),
                beamwidth: 15f64.to_radians(),
                frequency: 76.5e9,
                rcs: db_to_linear(30.0),
                sinr_threshold: db_to_linear(10.0),
                pathloss_exp: 2.0,
                noise_power: 0.0,
            },
            lanes: vec![Lane::new(10.0, 0.1)],
            access: MediumAccess { duty_cycle: 0.1 },
            fading: FadingModel::Unit,
            geometry: GeometryKind::Ppp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.radar.validate()?;
        if self.lanes.is_empty() {
            return Err(Error::invalid("lanes", "at least one lane is required"));
        }
        for (i, lane) in self.lanes.iter().enumerate() {
            lane.validate().map_err(|e| match e {
                Error::Invalid { field, detail } => Error::invalid(format!("lanes[{i}].{field}"), detail),
                other => other,
            })?;
        }
        self.access.validate()?;
        self.fading.validate()
    }

    /// Total interferer intensity Σ ξλ_n.
    pub fn lambda_i(&self) -> f64 {
        self.access.duty_cycle * self.lanes.iter().map(|l| l.density).sum::<f64>()
    }

    pub fn derive(&self, lane_index: usize) -> Result<DerivedConstants> {
        derive(self, lane_index)
    }
}

/// Model constants computed from a scenario for one lane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// γ₁ = G_t² (c / 4πf)² [m²]
    pub gamma1: f64,
    /// γ₂ = σ_c / 4π [m²]
    pub gamma2: f64,
    /// δ₀ [m]
    pub delta_o: f64,
    /// √(πT / 4γ₂) [1/m], so that C = c_coeff · R²
    pub c_coeff: f64,
    /// K = z₀ √(4γ₂ / πT) [m], so that ξ* = min(K / (λR²), 1)
    pub big_k: f64,
    pub z_o: f64,
    pub tx_power: f64,
    pub pathloss_exp: f64,
    pub sinr_threshold: f64,
    pub noise_power: f64,
    pub lane_offset: f64,
}

impl DerivedConstants {
    /// C = √(πT/4γ₂) R² [m] for ranging distance R.
    pub fn big_c(&self, range_r: f64) -> f64 {
        self.c_coeff * range_r * range_r
    }

    /// γ₁P₀, the received power at unit distance before fading.
    pub fn gamma1_p0(&self) -> f64 {
        self.gamma1 * self.tx_power
    }
}

pub fn gamma1(antenna_gain: f64, frequency: f64) -> f64 {
    let k = SPEED_OF_LIGHT / (4.0 * PI * frequency);
    antenna_gain * antenna_gain * k * k
}

pub fn gamma2(rcs: f64) -> f64 {
    rcs / (4.0 * PI)
}

/// z₀ at the library's default tolerance, computed once.
pub fn z_o() -> f64 {
    static Z0: OnceLock<f64> = OnceLock::new();
    *Z0.get_or_init(|| crate::performance::solve_z0(1e-12).unwrap_or(0.531_597))
}

pub fn derive(scenario: &Scenario, lane_index: usize) -> Result<DerivedConstants> {
    scenario.validate()?;
    let lane = scenario.lanes.get(lane_index).ok_or_else(|| {
        Error::invalid("lane_index", format!("{lane_index} out of range ({} lanes)", scenario.lanes.len()))
    })?;
    let r = &scenario.radar;
    let g2 = gamma2(r.rcs);
    let c_coeff = (PI * r.sinr_threshold / (4.0 * g2)).sqrt();
    let z0 = z_o();
    Ok(DerivedConstants {
        gamma1: gamma1(r.antenna_gain, r.frequency),
        gamma2: g2,
        delta_o: lane.delta_o(r.beamwidth),
        c_coeff,
        big_k: z0 / c_coeff,
        z_o: z0,
        tx_power: r.tx_power,
        pathloss_exp: r.pathloss_exp,
        sinr_threshold: r.sinr_threshold,
        noise_power: r.noise_power,
        lane_offset: lane.offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((dbm_to_watts(10.0) - 0.01).abs() < 1e-17);
        assert!((db_to_linear(45.0) - 31_622.776_601_683_792).abs() < 1e-9);
    }

    #[test]
    fn reference_constants() {
        let s = Scenario::reference();
        let d = s.derive(0).unwrap();
        assert!((d.delta_o - 75.957).abs() < 1e-3);
        assert!((d.gamma1 - 97.26).abs() < 0.01);
        assert!((d.gamma2 - 1000.0 / (4.0 * PI)).abs() < 1e-12);
        assert!((d.c_coeff - PI / 10.0).abs() < 1e-14);
    }

    #[test]
    fn wide_beam_has_no_guard() {
        let lane = Lane::new(10.0, 0.1);
        assert_eq!(lane.delta_o(PI), 0.0);
        assert_eq!(Lane::new(0.0, 0.1).delta_o(0.2), 0.0);
        assert_eq!(lane.with_guard_distance(76.0).delta_o(0.2), 76.0);
    }

    #[test]
    fn validation_names_fields() {
        let mut s = Scenario::reference();
        s.access.duty_cycle = 1.5;
        assert!(matches!(s.validate(), Err(Error::Invalid { field, .. }) if field == "duty_cycle"));
        let mut s = Scenario::reference();
        s.lanes.clear();
        assert!(s.validate().is_err());
        let mut s = Scenario::reference();
        s.lanes[0].density = -1.0;
        assert!(matches!(s.validate(), Err(Error::Invalid { field, .. }) if field == "lanes[0].density"));
    }

    #[test]
    fn gamma_fading_moments() {
        let f = FadingModel::Gamma { shape: 2.0 };
        assert!((f.moment(1) - 1.0).abs() < 1e-15);
        assert!((f.moment(2) - 1.5).abs() < 1e-15);
    }
}
