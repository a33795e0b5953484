//! Interferer samplers for the two road models, and counting helpers.
//!
//! Both samplers emit the thinned, marked interferer set on the one-sided
//! window (δ₀, W]: points at or before δ₀ are outside the antenna cone.

use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson};

use crate::error::{Error, Result};
use crate::model::{Lane, MediumAccess};

#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    /// Longitudinal positions [m], sorted ascending, all in (δ₀, window].
    pub positions: Vec<f64>,
    pub lane_index: usize,
    pub window: f64,
}

impl PointPattern {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn check_window(delta_o: f64, window: f64) -> Result<()> {
    if !(window > delta_o) {
        return Err(Error::invalid("window", format!("{window} m must exceed delta_o = {delta_o} m")));
    }
    Ok(())
}

/// Appends a thinned Poisson sample on (δ₀, W] to `out`, sorted.
pub(crate) fn fill_ppp<R: Rng + ?Sized>(out: &mut Vec<f64>, lambda_i: f64, delta_o: f64, window: f64, rng: &mut R) {
    let span = window - delta_o;
    let mean = lambda_i * span;
    if mean <= 0.0 {
        return;
    }
    let n = Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0);
    let start = out.len();
    out.extend((0..n).map(|_| delta_o + span * (1.0 - rng.random::<f64>())));
    out[start..].sort_unstable_by(f64::total_cmp);
}

/// Appends a thinned, translated lattice on (δ₀, W] to `out`. The
/// translation U is the first draw taken from `rng`.
pub(crate) fn fill_lattice<R: Rng + ?Sized>(
    out: &mut Vec<f64>,
    spacing: f64,
    xi: f64,
    delta_o: f64,
    window: f64,
    rng: &mut R,
) {
    let u: f64 = rng.random();
    if xi <= 0.0 {
        return;
    }
    let skip = Geometric::new(xi).ok();
    let next_skip = |rng: &mut R| -> u64 {
        match &skip {
            Some(g) if xi < 1.0 => g.sample(rng),
            _ => 0,
        }
    };
    let mut m = next_skip(rng);
    loop {
        let x = delta_o + (m as f64 + u) * spacing;
        if x > window {
            break;
        }
        if x > delta_o {
            out.push(x);
        }
        m = m.saturating_add(1 + next_skip(rng));
    }
}

/// Homogeneous PPP of intensity ξλ on (δ₀, W].
pub fn sample_ppp<R: Rng + ?Sized>(
    lane: &Lane,
    access: &MediumAccess,
    delta_o: f64,
    window: f64,
    rng: &mut R,
) -> Result<PointPattern> {
    check_window(delta_o, window)?;
    let mut positions = Vec::new();
    fill_ppp(&mut positions, access.duty_cycle * lane.density, delta_o, window, rng);
    Ok(PointPattern { positions, lane_index: 0, window })
}

/// Lattice δ₀ + (m + U)δ with δ = 1/λ, one shared U, each point kept with
/// probability ξ.
pub fn sample_lattice<R: Rng + ?Sized>(
    lane: &Lane,
    access: &MediumAccess,
    delta_o: f64,
    window: f64,
    rng: &mut R,
) -> Result<PointPattern> {
    check_window(delta_o, window)?;
    let mut positions = Vec::new();
    fill_lattice(&mut positions, lane.spacing(), access.duty_cycle, delta_o, window, rng);
    Ok(PointPattern { positions, lane_index: 0, window })
}

/// √(x² + L²) per point.
pub fn euclidean_distances(pattern: &PointPattern, lane_offset: f64) -> Vec<f64> {
    pattern.positions.iter().map(|x| x.hypot(lane_offset)).collect()
}

/// Counts of points in each half-open interval (lo, hi].
pub fn count_in_intervals(pattern: &PointPattern, intervals: &[(f64, f64)]) -> Result<Vec<usize>> {
    check_intervals(intervals)?;
    let p = &pattern.positions;
    let upto = |v: f64| p.partition_point(|&x| x <= v);
    Ok(intervals.iter().map(|&(lo, hi)| upto(hi) - upto(lo)).collect())
}

pub(crate) fn check_intervals(intervals: &[(f64, f64)]) -> Result<()> {
    for &(lo, hi) in intervals {
        if !(lo < hi) {
            return Err(Error::invalid("intervals", format!("({lo}, {hi}] is empty")));
        }
    }
    let mut sorted = intervals.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in sorted.windows(2) {
        if w[0].1 > w[1].0 {
            return Err(Error::Overlap { a_lo: w[0].0, a_hi: w[0].1, b_lo: w[1].0, b_hi: w[1].1 });
        }
    }
    Ok(())
}
