use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionMethod {
    GilPelaez,
    Talbot,
    /// Bromwich line with Euler summation; used for lattice transforms that
    /// cannot be continued into the left half-plane.
    Euler,
    LevyClosedForm,
    Empirical,
}

impl DistributionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DistributionMethod::GilPelaez => "gil_pelaez",
            DistributionMethod::Talbot => "talbot",
            DistributionMethod::Euler => "euler",
            DistributionMethod::LevyClosedForm => "levy_closed_form",
            DistributionMethod::Empirical => "empirical",
        }
    }
}

/// Tabulated CDF of interference power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionCurve {
    /// x [W], strictly increasing
    pub grid: Vec<f64>,
    pub cdf: Vec<f64>,
    pub method: DistributionMethod,
    /// Absolute accuracy claimed for each value.
    pub tolerance: f64,
}

impl DistributionCurve {
    /// Builds a curve from raw values: clips decreases up to `10 * tolerance`,
    /// rejects larger ones, and clamps into [0, 1].
    pub fn from_raw(grid: Vec<f64>, mut cdf: Vec<f64>, method: DistributionMethod, tolerance: f64) -> Result<Self> {
        check_grid(&grid)?;
        let clip = 10.0 * tolerance;
        for i in 0..cdf.len() {
            if !cdf[i].is_finite() {
                return Err(Error::NonConvergence {
                    what: "CDF value",
                    estimate: cdf[i],
                    error: f64::NAN,
                    evaluations: i,
                });
            }
            if cdf[i] < -clip || cdf[i] > 1.0 + clip {
                return Err(Error::NonMonotone { x: grid[i], drop: cdf[i].min(1.0 - cdf[i]).abs(), tol: clip });
            }
            if i > 0 && cdf[i] < cdf[i - 1] {
                let drop = cdf[i - 1] - cdf[i];
                if drop > clip {
                    return Err(Error::NonMonotone { x: grid[i], drop, tol: clip });
                }
                cdf[i] = cdf[i - 1];
            }
        }
        for v in &mut cdf {
            *v = v.clamp(0.0, 1.0);
        }
        Ok(DistributionCurve { grid, cdf, method, tolerance })
    }

    /// Right-continuous empirical CDF of `samples`.
    pub fn empirical(samples: &[f64]) -> Self {
        let mut s = samples.to_vec();
        s.sort_unstable_by(f64::total_cmp);
        let n = s.len() as f64;
        let mut grid = Vec::new();
        let mut cdf = Vec::new();
        for (i, &x) in s.iter().enumerate() {
            if grid.last() == Some(&x) {
                *cdf.last_mut().unwrap() = (i + 1) as f64 / n;
            } else {
                grid.push(x);
                cdf.push((i + 1) as f64 / n);
            }
        }
        DistributionCurve { grid, cdf, method: DistributionMethod::Empirical, tolerance: 0.0 }
    }

    /// F(x). Empirical curves are step functions; analytic ones are linearly
    /// interpolated and held flat outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        if self.grid.is_empty() {
            return f64::NAN;
        }
        let i = self.grid.partition_point(|&g| g <= x);
        if self.method == DistributionMethod::Empirical {
            return if i == 0 { 0.0 } else { self.cdf[i - 1] };
        }
        if i == 0 {
            return self.cdf[0];
        }
        if i == self.grid.len() {
            return self.cdf[i - 1];
        }
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let t = (x - x0) / (x1 - x0);
        self.cdf[i - 1] + t * (self.cdf[i] - self.cdf[i - 1])
    }

    /// Smallest grid abscissa with F ≥ p, refined by bisection on `eval`.
    pub fn quantile(&self, p: f64) -> Option<f64> {
        let i = self.cdf.iter().position(|&v| v >= p)?;
        if i == 0 || self.method == DistributionMethod::Empirical {
            return Some(self.grid[i]);
        }
        Some(crate::numeric::bisect_increasing(|x| self.eval(x), p, self.grid[i - 1], self.grid[i], 60))
    }

    /// sup_x |F(x) - G(x)| over this curve's grid.
    pub fn sup_distance(&self, other: &DistributionCurve) -> f64 {
        self.grid.iter().zip(&self.cdf).map(|(&x, &f)| (f - other.eval(x)).abs()).fold(0.0, f64::max)
    }

    /// Kolmogorov-Smirnov statistic between this empirical curve and a CDF.
    /// Both one-sided gaps at each jump are checked.
    pub fn ks_statistic<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let mut d: f64 = 0.0;
        let mut prev = 0.0;
        for (&x, &f) in self.grid.iter().zip(&self.cdf) {
            let g = cdf(x);
            d = d.max((f - g).abs()).max((g - prev).abs());
            prev = f;
        }
        d
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("grid", "non-finite value"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "not strictly increasing"));
    }
    Ok(())
}

/// 1.628/√n: the asymptotic 99% Kolmogorov-Smirnov critical value.
pub fn ks_critical_99(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}
