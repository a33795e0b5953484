//! Replicated simulation of the interference at the typical radar.
//!
//! Replicate i draws everything from its own stream (see [`crate::rng`]),
//! and results are collected in replicate order, so output depends only on
//! the master seed.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_intervals, fill_lattice, fill_ppp};
use crate::interference::DistributionCurve;
use crate::model::{GeometryKind, Scenario};
use crate::performance::{ranging_signal, CurveKind, PerformanceCurve};
use crate::rng::replicate_rng;
use crate::stats::{chi_square_sf, mean_ci, wilson_halfwidth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Parallelism {
    /// rayon's default thread count.
    #[default]
    Auto,
    Threads(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub replicates: usize,
    /// W [m]; interferers are placed on (δ₀, W].
    pub window: f64,
    pub master_seed: u64,
    pub parallelism: Parallelism,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { replicates: 5000, window: 1e4, master_seed: 0, parallelism: Parallelism::Auto }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 100 {
            return Err(Error::invalid("replicates", format!("{} is below the minimum of 100", self.replicates)));
        }
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(Error::invalid("window", format!("{} must be positive", self.window)));
        }
        if self.parallelism == Parallelism::Threads(0) {
            return Err(Error::invalid("parallelism", "zero threads"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    /// 99% half-width, same units as `value`.
    pub ci_halfwidth: f64,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceRun {
    /// One aggregate interference sample [W] per replicate.
    pub samples: Vec<f64>,
    pub empirical_cdf: DistributionCurve,
    /// `None` when the mean is infinite (a lane with no offset and no guard
    /// distance, or α ≤ 1).
    pub mean: Option<McEstimate>,
}

impl InterferenceRun {
    pub fn mean_suppressed(&self) -> bool {
        self.mean.is_none()
    }
}

/// Runs `f` on every replicate index, in parallel, keeping index order.
pub(crate) fn run_replicates<T, F>(mc: &McConfig, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let threads = match mc.parallelism {
        Parallelism::Auto => 0,
        Parallelism::Threads(n) => n,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid("parallelism", e.to_string()))?;
    pool.install(|| (0..count as u64).into_par_iter().map(&f).collect())
}

struct LaneSetup {
    delta_o: f64,
    offset2: f64,
    lambda_i: f64,
    spacing: f64,
}

fn lane_setups(scenario: &Scenario, window: f64) -> Result<Vec<LaneSetup>> {
    scenario
        .lanes
        .iter()
        .enumerate()
        .map(|(i, lane)| {
            let d = scenario.derive(i)?;
            if !(window > d.delta_o) {
                return Err(Error::invalid(
                    "window",
                    format!("{window} m must exceed delta_o = {} m of lane {i}", d.delta_o),
                ));
            }
            Ok(LaneSetup {
                delta_o: d.delta_o,
                offset2: lane.offset * lane.offset,
                lambda_i: scenario.access.duty_cycle * lane.density,
                spacing: lane.spacing(),
            })
        })
        .collect()
}

fn mean_is_finite(scenario: &Scenario, setups: &[LaneSetup]) -> bool {
    scenario.radar.pathloss_exp > 1.0 && setups.iter().all(|s| s.offset2 > 0.0 || s.delta_o > 0.0)
}

/// Aggregate interference samples, one per replicate.
pub fn interference_samples(scenario: &Scenario, mc: &McConfig) -> Result<Vec<f64>> {
    scenario.validate()?;
    mc.validate()?;
    let setups = lane_setups(scenario, mc.window)?;
    let p = scenario.radar.tx_power * crate::model::gamma1(scenario.radar.antenna_gain, scenario.radar.frequency);
    let half = -0.5 * scenario.radar.pathloss_exp;
    let xi = scenario.access.duty_cycle;
    run_replicates(mc, mc.replicates, |i| {
        let mut rng = replicate_rng(mc.master_seed, i);
        let mut pos = Vec::new();
        let mut total = 0.0;
        for s in &setups {
            pos.clear();
            match scenario.geometry {
                GeometryKind::Ppp => fill_ppp(&mut pos, s.lambda_i, s.delta_o, mc.window, &mut rng),
                GeometryKind::BernoulliLattice => fill_lattice(&mut pos, s.spacing, xi, s.delta_o, mc.window, &mut rng),
            }
            for x in &pos {
                let g = scenario.fading.sample(&mut rng);
                total += p * g * (x * x + s.offset2).powf(half);
            }
        }
        Ok(total)
    })
}

/// Samples, their empirical CDF and the mean with a 99% interval.
pub fn mc_interference(scenario: &Scenario, mc: &McConfig) -> Result<InterferenceRun> {
    let samples = interference_samples(scenario, mc)?;
    let setups = lane_setups(scenario, mc.window)?;
    let mean = if mean_is_finite(scenario, &setups) {
        let (value, ci_halfwidth) = mean_ci(&samples);
        Some(McEstimate { value, ci_halfwidth, replicates: samples.len(), seed: mc.master_seed })
    } else {
        None
    };
    let empirical_cdf = DistributionCurve::empirical(&samples);
    Ok(InterferenceRun { samples, empirical_cdf, mean })
}

/// Fraction of replicates with SINR ≥ T at each range. One interference
/// sample per replicate is shared by the whole grid, since the signal is a
/// deterministic function of R.
pub fn mc_ranging_success(scenario: &Scenario, range_grid: &[f64], mc: &McConfig) -> Result<PerformanceCurve> {
    if range_grid.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::invalid("range_grid", "ranges must be positive"));
    }
    let samples = interference_samples(scenario, mc)?;
    let consts = scenario.derive(0)?;
    let noise = scenario.radar.noise_power;
    let t = scenario.radar.sinr_threshold;
    let mut values = Vec::with_capacity(range_grid.len());
    let mut ci = Vec::with_capacity(range_grid.len());
    for &r in range_grid {
        let s = ranging_signal(&consts, r)?;
        let k = samples.iter().filter(|&&i| s >= t * (i + noise)).count();
        values.push(k as f64 / samples.len() as f64);
        ci.push(wilson_halfwidth(k, samples.len()));
    }
    let mut curve = PerformanceCurve::new(range_grid.to_vec(), values, CurveKind::PsVsRange)?;
    curve.ci_halfwidth = Some(ci);
    Ok(curve)
}

/// Number of replicates with SINR ≥ T at each range.
pub fn mc_success_counts(scenario: &Scenario, range_grid: &[f64], mc: &McConfig) -> Result<Vec<usize>> {
    let curve = mc_ranging_success(scenario, range_grid, mc)?;
    Ok(curve.values.iter().map(|p| (p * mc.replicates as f64).round() as usize).collect())
}

/// Goodness of fit of lattice interval counts against Poisson, for one δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    /// δ [m]
    pub delta: f64,
    /// ξ = δλ_I
    pub xi: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    /// ½ Σ_k |p̂_k - p_k| over the pooled count distribution.
    pub tv_distance: f64,
    /// Number of (replicate, interval) counts.
    pub observations: usize,
}

fn poisson_pmf(k: usize, mu: f64) -> f64 {
    if mu == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (kf * mu.ln() - mu - crate::specfun::ln_gamma(kf + 1.0)).exp()
}

/// Interval counts of thinned lattices with λ_I fixed and spacing δ taken
/// from `delta_list` (ξ = δλ_I), tested against the Poisson counts the
/// lattice converges to as δ → 0.
///
/// Counts from every interval and replicate are pooled; the reference law is
/// the matching mixture of Poisson(λ_I |interval|). χ² cells are merged from
/// both ends until each expects at least 5 observations.
pub fn mc_convergence_bl_to_ppp(
    lambda_i: f64,
    delta_list: &[f64],
    intervals: &[(f64, f64)],
    mc: &McConfig,
) -> Result<Vec<ConvergenceRow>> {
    mc.validate()?;
    if !(lambda_i > 0.0) {
        return Err(Error::invalid("lambda_i", format!("{lambda_i} must be positive")));
    }
    if intervals.is_empty() {
        return Err(Error::invalid("intervals", "empty"));
    }
    check_intervals(intervals)?;
    if intervals.iter().any(|iv| iv.0 < 0.0) {
        return Err(Error::invalid("intervals", "must lie on the positive half-line"));
    }
    let window = intervals.iter().map(|iv| iv.1).fold(0.0, f64::max);
    let mut rows = Vec::with_capacity(delta_list.len());
    for (j, &delta) in delta_list.iter().enumerate() {
        let xi = delta * lambda_i;
        if !(delta > 0.0 && xi <= 1.0 + 1e-12) {
            return Err(Error::invalid("delta_list", format!("delta = {delta} gives duty cycle {xi} outside (0, 1]")));
        }
        let xi = xi.min(1.0);
        let key = mc.master_seed.wrapping_add((j as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let counts: Vec<Vec<usize>> = run_replicates(mc, mc.replicates, |i| {
            let mut rng = replicate_rng(key, i);
            let mut pos = Vec::new();
            fill_lattice(&mut pos, delta, xi, 0.0, window, &mut rng);
            let upto = |v: f64| pos.partition_point(|&x| x <= v);
            Ok(intervals.iter().map(|&(lo, hi)| upto(hi) - upto(lo)).collect())
        })?;
        rows.push(gof_row(delta, xi, lambda_i, intervals, &counts)?);
    }
    Ok(rows)
}

fn gof_row(
    delta: f64,
    xi: f64,
    lambda_i: f64,
    intervals: &[(f64, f64)],
    counts: &[Vec<usize>],
) -> Result<ConvergenceRow> {
    let n_obs = counts.len() * intervals.len();
    let kmax = counts.iter().flatten().copied().max().unwrap_or(0);
    let mus: Vec<f64> = intervals.iter().map(|(lo, hi)| lambda_i * (hi - lo)).collect();
    // Extend the support until the reference tail is negligible.
    let mut top = kmax + 1;
    while mus.iter().map(|&m| 1.0 - (0..top).map(|k| poisson_pmf(k, m)).sum::<f64>()).sum::<f64>() > 1e-12
        && top < 100_000
    {
        top += 1;
    }
    let mut observed = vec![0.0; top + 1];
    for c in counts.iter().flatten() {
        observed[*c] += 1.0;
    }
    let reps = counts.len() as f64;
    let mut expected: Vec<f64> =
        (0..=top).map(|k| reps * mus.iter().map(|&m| poisson_pmf(k, m)).sum::<f64>()).collect();
    let tail: f64 = n_obs as f64 - expected.iter().sum::<f64>();
    expected[top] += tail.max(0.0);

    let tv = 0.5 * observed.iter().zip(&expected).map(|(o, e)| (o - e).abs()).sum::<f64>() / n_obs as f64;

    // Merge cells: the head into the first cell with enough mass, then
    // the tail into the last.
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (o, e) in observed.iter().zip(&expected) {
        acc.0 += o;
        acc.1 += e;
        if acc.1 >= 5.0 {
            cells.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => cells.push(acc),
        }
    }
    let chi_square: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len().saturating_sub(1).max(1);
    Ok(ConvergenceRow {
        delta,
        xi,
        chi_square,
        dof,
        p_value: chi_square_sf(chi_square, dof)?,
        tv_distance: tv,
        observations: n_obs,
    })
}

/// `count` contiguous intervals of equal length starting at `start`.
pub fn contiguous_intervals(start: f64, length: f64, count: usize) -> Vec<(f64, f64)> {
    (0..count).map(|k| (start + k as f64 * length, start + (k + 1) as f64 * length)).collect()
}

/// Raw samples as little-endian f64.
pub fn write_samples_le(path: &Path, samples: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(8 * samples.len());
    for s in samples {
        buf.extend_from_slice(&s.to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_samples_le(path: &Path) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Io(format!("{}: length {} is not a multiple of 8", path.display(), bytes.len())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap_or([0; 8]))).collect())
}
