use crate::error::{Error, Result};
use crate::interference::laplace::LatticeLane;
use crate::model::{DerivedConstants, GeometryKind, Lane, MediumAccess, Scenario};
use crate::numeric::gauss_legendre_unit;
use crate::specfun::{hurwitz_zeta, offset_power_tail};

fn check_alpha(op: &'static str, alpha: f64) -> Result<()> {
    if alpha > 1.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("mean is infinite for alpha = {alpha} <= 1")))
    }
}

/// Campbell mean ξλγ₁P₀ ∫_{δ₀}^∞ (L² + r²)^{-α/2} dr for a lane with L > 0.
///
/// The closed form is L^{-α}[√π L Γ((α-1)/2)/(2Γ(α/2)) - δ₀ ₂F₁(1/2, α/2; 3/2; -δ₀²/L²)];
/// it is evaluated in the tail form so that δ₀ ≫ L does not cancel.
pub fn mean_ppp_exact(consts: &DerivedConstants, lane: &Lane, access: &MediumAccess) -> Result<f64> {
    let alpha = consts.pathloss_exp;
    check_alpha("mean_ppp_exact", alpha)?;
    if lane.offset <= 0.0 {
        return Err(Error::domain("mean_ppp_exact", "lane offset is zero; use mean_simplified"));
    }
    let integral = offset_power_tail(lane.offset, alpha, consts.delta_o)?;
    Ok(access.duty_cycle * lane.density * consts.gamma1_p0() * integral)
}

/// ξλγ₁P₀ / ((α-1) δ₀^{α-1}), the mean with the lane offset neglected.
pub fn mean_simplified(consts: &DerivedConstants, lane: &Lane, access: &MediumAccess) -> Result<f64> {
    let alpha = consts.pathloss_exp;
    check_alpha("mean_simplified", alpha)?;
    if !(consts.delta_o > 0.0) {
        return Err(Error::domain("mean_simplified", "mean is infinite without a guard distance"));
    }
    Ok(access.duty_cycle * lane.density * consts.gamma1_p0() / ((alpha - 1.0) * consts.delta_o.powf(alpha - 1.0)))
}

/// Poisson-lane mean: exact form when L > 0, simplified form otherwise.
pub fn mean_ppp(consts: &DerivedConstants, lane: &Lane, access: &MediumAccess) -> Result<f64> {
    if lane.offset > 0.0 {
        mean_ppp_exact(consts, lane, access)
    } else {
        mean_simplified(consts, lane, access)
    }
}

/// Bernoulli-lattice mean.
///
/// With L = 0 the translation average telescopes to
/// ξγ₁P₀ δ^{-α} A^{1-α}/(α-1), A = δ₀/δ. With L > 0 the lattice sum is
/// averaged over the translation numerically.
pub fn mean_bl(consts: &DerivedConstants, lane: &Lane, access: &MediumAccess) -> Result<f64> {
    let alpha = consts.pathloss_exp;
    check_alpha("mean_bl", alpha)?;
    let xi = access.duty_cycle;
    if xi == 0.0 {
        return Ok(0.0);
    }
    let delta = lane.spacing();
    if lane.offset == 0.0 {
        if !(consts.delta_o > 0.0) {
            return Err(Error::domain("mean_bl", "mean is infinite without a guard distance"));
        }
        let a = consts.delta_o / delta;
        return Ok(xi * consts.gamma1_p0() * delta.powf(-alpha) * a.powf(1.0 - alpha) / (alpha - 1.0));
    }
    let ll = LatticeLane {
        scale: consts.gamma1_p0(),
        alpha,
        offset: lane.offset,
        delta_o: consts.delta_o,
        spacing: delta,
        xi,
    };
    let m = ll.first_index_beyond(10.0 * lane.offset).max(8);
    let (u, w) = gauss_legendre_unit(33);
    let mut total = 0.0;
    for (u, w) in u.iter().zip(&w) {
        let head: f64 = (0..m).map(|k| ll.power(k, *u)).sum();
        total += w * (head + ll.tail_power_sum(m, *u, 1)?);
    }
    Ok(xi * total)
}

/// Lattice mean through the Hurwitz-zeta difference
/// ξγ₁P₀ δ^{-α} [ζ(α-1, A) - ζ(α-1, A+1)]/(α-1), for L = 0. Needs α > 2 so
/// that ζ(α-1, ·) converges.
pub fn mean_bl_zeta(consts: &DerivedConstants, lane: &Lane, access: &MediumAccess) -> Result<f64> {
    let alpha = consts.pathloss_exp;
    if !(alpha > 2.0) {
        return Err(Error::domain("mean_bl_zeta", format!("zeta(alpha - 1, .) diverges for alpha = {alpha}")));
    }
    if lane.offset != 0.0 {
        return Err(Error::domain("mean_bl_zeta", "only defined for zero lane offset"));
    }
    let delta = lane.spacing();
    let a = consts.delta_o / delta;
    let diff = hurwitz_zeta(alpha - 1.0, a)? - hurwitz_zeta(alpha - 1.0, a + 1.0)?;
    Ok(access.duty_cycle * consts.gamma1_p0() * delta.powf(-alpha) * diff / (alpha - 1.0))
}

/// Mean aggregate interference of a scenario, summed over lanes.
pub fn mean_interference(scenario: &Scenario) -> Result<f64> {
    let mut total = 0.0;
    for (i, lane) in scenario.lanes.iter().enumerate() {
        let d = scenario.derive(i)?;
        total += match scenario.geometry {
            GeometryKind::Ppp => mean_ppp(&d, lane, &scenario.access)?,
            GeometryKind::BernoulliLattice => mean_bl(&d, lane, &scenario.access)?,
        };
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(offset: f64, delta_o: f64, density: f64) -> (DerivedConstants, Lane, MediumAccess) {
        let s = crate::model::Scenario::reference();
        let mut d = s.derive(0).unwrap();
        d.delta_o = delta_o;
        d.lane_offset = offset;
        (d, Lane::new(offset, density), MediumAccess { duty_cycle: 0.1 })
    }

    #[test]
    fn simplified_reference_value() {
        let (mut d, lane, acc) = setup(0.0, 76.0, 0.1);
        d.gamma1 = 97.3;
        let m = mean_simplified(&d, &lane, &acc).unwrap();
        assert!((m - 0.01 * 0.973 / 76.0).abs() < 1e-18);
    }

    #[test]
    fn exact_needs_offset() {
        let (d, lane, acc) = setup(0.0, 76.0, 0.1);
        assert!(mean_ppp_exact(&d, &lane, &acc).is_err());
    }

    #[test]
    fn bl_equals_ppp_with_offset() {
        let (d, lane, acc) = setup(10.0, 75.96, 0.1);
        let a = mean_ppp_exact(&d, &lane, &acc).unwrap();
        let b = mean_bl(&d, &lane, &acc).unwrap();
        assert!((a - b).abs() < 1e-10 * a, "{a} {b}");
    }
}
