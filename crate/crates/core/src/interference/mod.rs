//! Interference statistics at the typical vehicle: means, characteristic
//! functions, Laplace transforms and CDFs.
//!
//! Lanes are independent processes. Means add across lanes and transforms
//! multiply.

mod cf;
mod curve;
mod inversion;
mod laplace;
mod mean;

pub use cf::{cdf_levy_closed, cf_levy, cf_ppp, cf_ppp_exponent, cf_ppp_ln0, levy_scale, CfTable};
pub use curve::{ks_critical_99, DistributionCurve, DistributionMethod};
pub use inversion::{cdf_gil_pelaez, invert_laplace_cdf, GilPelaezOptions, LaplaceContour, LaplaceOptions};
pub use laplace::{cdf_bl_talbot, laplace_bl, ln_laplace_bl};
pub use mean::{mean_bl, mean_bl_zeta, mean_interference, mean_ppp, mean_ppp_exact, mean_simplified};

use crate::error::{Error, Result};
use crate::geometry::PointPattern;
use crate::model::{DerivedConstants, FadingModel, GeometryKind, Scenario};

/// One lane's contribution to a transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneTerm {
    /// L_n [m]
    pub offset: f64,
    /// δ₀ [m]
    pub delta_o: f64,
    /// λ [1/m]
    pub density: f64,
    /// ξ
    pub duty_cycle: f64,
}

impl LaneTerm {
    pub fn lambda_i(&self) -> f64 {
        self.density * self.duty_cycle
    }
}

/// Everything a transform of the aggregate interference depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct CfSpec {
    pub geometry: GeometryKind,
    pub lanes: Vec<LaneTerm>,
    /// γ₁P₀ [W·m^α]
    pub gamma1_p0: f64,
    pub alpha: f64,
    pub fading: FadingModel,
}

impl CfSpec {
    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let mut lanes = Vec::with_capacity(scenario.lanes.len());
        let mut gamma1_p0 = 0.0;
        for (i, lane) in scenario.lanes.iter().enumerate() {
            let d = scenario.derive(i)?;
            gamma1_p0 = d.gamma1_p0();
            lanes.push(LaneTerm {
                offset: lane.offset,
                delta_o: d.delta_o,
                density: lane.density,
                duty_cycle: scenario.access.duty_cycle,
            });
        }
        Ok(CfSpec {
            geometry: scenario.geometry,
            lanes,
            gamma1_p0,
            alpha: scenario.radar.pathloss_exp,
            fading: scenario.fading.clone(),
        })
    }

    /// The bounding regime of the scenario: every interferer on the radar's
    /// own line (L = 0), no guard distance, α = 2, no fading, Poisson
    /// placement with the scenario's total interferer intensity.
    pub fn worst_case(scenario: &Scenario) -> Result<Self> {
        let base = CfSpec::from_scenario(scenario)?;
        let density: f64 = scenario.lanes.iter().map(|l| l.density).sum();
        Ok(CfSpec {
            geometry: GeometryKind::Ppp,
            lanes: vec![LaneTerm { offset: 0.0, delta_o: 0.0, density, duty_cycle: scenario.access.duty_cycle }],
            gamma1_p0: base.gamma1_p0,
            alpha: 2.0,
            fading: FadingModel::Unit,
        })
    }

    pub fn lambda_i(&self) -> f64 {
        self.lanes.iter().map(LaneTerm::lambda_i).sum()
    }

    pub fn is_worst_case(&self) -> bool {
        self.geometry == GeometryKind::Ppp
            && self.alpha == 2.0
            && self.fading.is_unit()
            && self.lanes.iter().all(|l| l.offset == 0.0 && l.delta_o == 0.0)
    }

    pub(crate) fn require_worst_case(&self, op: &'static str) -> Result<()> {
        if self.is_worst_case() {
            return Ok(());
        }
        Err(Error::Regime {
            op,
            detail: "needs Poisson placement, alpha = 2, unit fading and zero offset/guard on every lane".into(),
        })
    }
}

/// CDF of the aggregate interference on `grid` by the best method for the
/// scenario: the closed Lévy form in the worst-case regime, Gil-Pelaez on a
/// tabulated CF for other Poisson scenarios, and Laplace inversion for
/// lattices.
pub fn interference_cdf(scenario: &Scenario, grid: &[f64]) -> Result<DistributionCurve> {
    let spec = CfSpec::from_scenario(scenario)?;
    match spec.geometry {
        GeometryKind::BernoulliLattice => cdf_bl_talbot(&spec, grid, &LaplaceOptions::default()),
        GeometryKind::Ppp if spec.is_worst_case() => cdf_levy_closed(&spec, grid),
        GeometryKind::Ppp => {
            let table = CfTable::for_spec(&spec)?;
            cdf_gil_pelaez(|w| table.eval(w), grid, &GilPelaezOptions::default())
        }
    }
}

/// Σ γ₁P₀ g_x ‖x‖^{-α} over one lane's pattern.
pub fn aggregate_interference(pattern: &PointPattern, consts: &DerivedConstants, fading_draws: &[f64]) -> Result<f64> {
    if fading_draws.len() != pattern.len() {
        return Err(Error::invalid(
            "fading_draws",
            format!("{} draws for {} points", fading_draws.len(), pattern.len()),
        ));
    }
    let l2 = consts.lane_offset * consts.lane_offset;
    let half = -0.5 * consts.pathloss_exp;
    let p = consts.gamma1_p0();
    Ok(pattern.positions.iter().zip(fading_draws).map(|(x, g)| p * g * (x * x + l2).powf(half)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> DerivedConstants {
        let mut d = Scenario::reference().derive(0).unwrap();
        d.lane_offset = 0.0;
        d.gamma1 = 97.3;
        d
    }

    #[test]
    fn single_point() {
        let p = PointPattern { positions: vec![100.0], lane_index: 0, window: 1e4 };
        let i = aggregate_interference(&p, &consts(), &[1.0]).unwrap();
        assert!((i - 9.73e-5).abs() < 1e-18);
    }

    #[test]
    fn empty_and_linear() {
        let empty = PointPattern { positions: vec![], lane_index: 0, window: 1e4 };
        assert_eq!(aggregate_interference(&empty, &consts(), &[]).unwrap(), 0.0);
        let two = PointPattern { positions: vec![100.0, 100.0], lane_index: 0, window: 1e4 };
        let one = PointPattern { positions: vec![100.0], lane_index: 0, window: 1e4 };
        let a = aggregate_interference(&two, &consts(), &[1.0, 1.0]).unwrap();
        let b = aggregate_interference(&one, &consts(), &[1.0]).unwrap();
        assert_eq!(a, 2.0 * b);
        assert!(aggregate_interference(&one, &consts(), &[]).is_err());
    }

    #[test]
    fn worst_case_spec() {
        let s = Scenario::reference();
        assert!(!CfSpec::from_scenario(&s).unwrap().is_worst_case());
        let wc = CfSpec::worst_case(&s).unwrap();
        assert!(wc.is_worst_case());
        assert!((wc.lambda_i() - 0.01).abs() < 1e-15);
    }
}
