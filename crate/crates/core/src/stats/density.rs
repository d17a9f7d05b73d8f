//! Histogram density estimates, interpolated between bin centres.

use serde::{Deserialize, Serialize};

use super::StatsError;

/// Minimum ensemble size for a density estimate.
pub const MIN_SAMPLES: usize = 100;
/// Minimum mean count per occupied bin.
pub const MIN_PER_BIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self, StatsError> {
        if !(hi > lo) || bins == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(StatsError::InvalidInput(format!("bad grid [{lo}, {hi}] with {bins} bins")));
        }
        Ok(Self { lo, hi, bins })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|i| self.lo + i as f64 * self.width()).collect()
    }

    /// Evenly spaced evaluation points, `per_bin` per bin, spanning the edges.
    pub fn fine_points(&self, per_bin: usize) -> Vec<f64> {
        let n = self.bins * per_bin.max(1);
        let h = (self.hi - self.lo) / n as f64;
        (0..=n).map(|i| self.lo + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Linear,
    MonotoneCubic,
}

/// Normalized density on a uniform grid, values stored at bin centres.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    grid: GridSpec,
    values: Vec<f64>,
    slopes: Vec<f64>,
    interpolation: Interpolation,
    outside: usize,
}

/// Fritsch–Carlson slopes for a monotone piecewise cubic on uniform nodes.
fn pchip_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        d[i] = if a * b <= 0.0 { 0.0 } else { 2.0 * a * b / (a + b) };
    }
    // one-sided three-point ends, limited to keep monotonicity
    let end = |d0: f64, d1: f64| {
        let s = (3.0 * d0 - d1) / 2.0;
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
    } else {
        d[0] = end(delta[0], delta[1]);
        d[n - 1] = end(delta[n - 2], delta[n - 3]);
    }
    d
}

impl DensityEstimate {
    /// Bins the positions, interpolates, and renormalizes to unit integral over
    /// the grid. Positions outside the grid are counted but not binned.
    pub fn from_positions(positions: &[f64], grid: GridSpec, interpolation: Interpolation) -> Result<Self, StatsError> {
        if positions.len() < MIN_SAMPLES {
            return Err(StatsError::TooFewSamples { got: positions.len(), need: MIN_SAMPLES });
        }
        let w = grid.width();
        let mut counts = vec![0u64; grid.bins];
        let mut outside = 0usize;
        for &x in positions {
            let u = (x - grid.lo) / w;
            if u >= 0.0 && x <= grid.hi {
                counts[(u as usize).min(grid.bins - 1)] += 1;
            } else {
                outside += 1;
            }
        }
        let inside = positions.len() - outside;
        let occupied = counts.iter().filter(|&&c| c > 0).count();
        if inside == 0 || (inside as f64) < MIN_PER_BIN * occupied as f64 {
            return Err(StatsError::TooFewSamples { got: inside, need: (MIN_PER_BIN * occupied.max(1) as f64) as usize });
        }
        let values: Vec<f64> = counts.iter().map(|&c| c as f64 / (inside as f64 * w)).collect();
        Self::from_bin_values(grid, values, interpolation, outside)
    }

    fn from_bin_values(grid: GridSpec, mut values: Vec<f64>, interpolation: Interpolation, outside: usize) -> Result<Self, StatsError> {
        let h = grid.width();
        let mut slopes = match interpolation {
            Interpolation::Linear => vec![0.0; values.len()],
            Interpolation::MonotoneCubic => pchip_slopes(&values, h),
        };
        let mut est = Self { grid, values: values.clone(), slopes: slopes.clone(), interpolation, outside };
        let total = est.integral();
        if !(total > 0.0) {
            return Err(StatsError::InvalidInput("density has zero mass".into()));
        }
        values.iter_mut().for_each(|v| *v /= total);
        slopes.iter_mut().for_each(|d| *d /= total);
        est.values = values;
        est.slopes = slopes;
        Ok(est)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn edges(&self) -> Vec<f64> {
        self.grid.edges()
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.grid.width();
        (0..self.grid.bins).map(|i| self.grid.lo + (i as f64 + 0.5) * w).collect()
    }

    /// Values at the bin centres.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Number of positions that fell outside the grid.
    pub fn outside(&self) -> usize {
        self.outside
    }

    /// Exact integral of the interpolant over the grid.
    pub fn integral(&self) -> f64 {
        let h = self.grid.width();
        let v = &self.values;
        let n = v.len();
        let mut total = 0.5 * h * (v[0] + v[n - 1]);
        for i in 0..n - 1 {
            total += 0.5 * h * (v[i] + v[i + 1]);
            if self.interpolation == Interpolation::MonotoneCubic {
                total += h * h * (self.slopes[i] - self.slopes[i + 1]) / 12.0;
            }
        }
        total
    }

    /// Interpolated density; flat over the outer half-bins, zero off the grid.
    pub fn eval(&self, x: f64) -> f64 {
        if !(x >= self.grid.lo && x <= self.grid.hi) {
            return 0.0;
        }
        let h = self.grid.width();
        let u = (x - self.grid.lo) / h - 0.5;
        let n = self.values.len();
        if u <= 0.0 {
            return self.values[0];
        }
        if u >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = u.floor() as usize;
        let s = u - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let y = match self.interpolation {
            Interpolation::Linear => y0 + s * (y1 - y0),
            Interpolation::MonotoneCubic => {
                let (d0, d1) = (self.slopes[i], self.slopes[i + 1]);
                let s2 = s * s;
                let s3 = s2 * s;
                y0 * (2.0 * s3 - 3.0 * s2 + 1.0) + h * d0 * (s3 - 2.0 * s2 + s) + y1 * (3.0 * s2 - 2.0 * s3) + h * d1 * (s3 - s2)
            }
        };
        y.max(0.0)
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

/// Convenience wrapper with the default monotone-cubic interpolation.
pub fn estimate_density(positions: &[f64], grid: GridSpec) -> Result<DensityEstimate, StatsError> {
    DensityEstimate::from_positions(positions, grid, Interpolation::MonotoneCubic)
}
