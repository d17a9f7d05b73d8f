//! Per-observation comparison of the ensemble histogram with the Born density.

use std::collections::BTreeMap;

use super::ExperimentError;
use crate::models::ModelError;
use crate::numerics::quad::trapezoid;
use crate::stats::{distance, DensityEstimate, DistanceKind, DistanceSeries, GridSpec, Interpolation, StatsError};

pub const DEFAULT_BINS: usize = 200;
/// Fraction of the Born mass the histogram grid spans.
pub const DEFAULT_COVERAGE: f64 = 0.999;
/// Resolution of the Born-density table used to locate the grid.
const SUPPORT_POINTS: usize = 4001;
/// Quadrature points per bin when integrating distances.
const POINTS_PER_BIN: usize = 4;

/// Interval holding all but `1 - coverage` of a density's mass, split evenly
/// between the two tails.
pub fn mass_interval<F>(density: F, support: (f64, f64), coverage: f64) -> Result<(f64, f64), ModelError>
where
    F: Fn(f64) -> Result<f64, ModelError>,
{
    let (lo, hi) = support;
    let h = (hi - lo) / (SUPPORT_POINTS - 1) as f64;
    let mut cdf = Vec::with_capacity(SUPPORT_POINTS);
    let mut prev = density(lo)?;
    let mut acc = 0.0;
    cdf.push(0.0);
    for i in 1..SUPPORT_POINTS {
        let cur = density(lo + i as f64 * h)?;
        acc += 0.5 * h * (prev + cur);
        cdf.push(acc);
        prev = cur;
    }
    let tail = 0.5 * (1.0 - coverage) * acc;
    let locate = |target: f64| {
        let i = cdf.partition_point(|&c| c < target).clamp(1, SUPPORT_POINTS - 1);
        let (c0, c1) = (cdf[i - 1], cdf[i]);
        let f = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
        lo + (i as f64 - 1.0 + f) * h
    };
    Ok((locate(tail), locate(acc - tail)))
}

/// Accumulates the four distance series over a run.
#[derive(Debug, Clone)]
pub struct DistanceTracker {
    bins: usize,
    coverage: f64,
    interpolation: Interpolation,
    series: BTreeMap<DistanceKind, DistanceSeries>,
    skipped: BTreeMap<DistanceKind, usize>,
    max_outside: f64,
}

impl DistanceTracker {
    pub fn new(bins: usize) -> Self {
        Self {
            bins,
            coverage: DEFAULT_COVERAGE,
            interpolation: Interpolation::MonotoneCubic,
            series: DistanceKind::ALL.iter().map(|&k| (k, DistanceSeries::new(k))).collect(),
            skipped: BTreeMap::new(),
            max_outside: 0.0,
        }
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    /// Histograms `positions` on a grid spanning the Born mass and records all
    /// four distances at time `t`. An entropy distance undefined because of
    /// empty reference support is skipped and counted.
    pub fn observe<F>(&mut self, t: f64, positions: &[f64], support: (f64, f64), born: F) -> Result<(), ExperimentError>
    where
        F: Fn(f64) -> Result<f64, ModelError>,
    {
        let (lo, hi) = mass_interval(&born, support, self.coverage)?;
        let grid = GridSpec::new(lo, hi, self.bins)?;
        let xs = grid.fine_points(POINTS_PER_BIN);
        let mut g = xs.iter().map(|&x| born(x)).collect::<Result<Vec<f64>, _>>()?;
        let mass = trapezoid(&xs, &g);
        g.iter_mut().for_each(|v| *v /= mass);
        let estimate = DensityEstimate::from_positions(positions, grid, self.interpolation)?;
        self.max_outside = self.max_outside.max(estimate.outside() as f64 / positions.len() as f64);
        let f = estimate.eval_many(&xs);
        for kind in DistanceKind::ALL {
            match distance(kind, &xs, &f, &g) {
                Ok(v) => self.series.get_mut(&kind).expect("all kinds present").push(t, v),
                Err(StatsError::SupportMismatch { .. }) => *self.skipped.entry(kind).or_default() += 1,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(())
    }

    pub fn series(&self, kind: DistanceKind) -> &DistanceSeries {
        &self.series[&kind]
    }

    pub fn all_series(&self) -> impl Iterator<Item = &DistanceSeries> {
        self.series.values()
    }

    /// Observations skipped per kind because the distance was undefined.
    pub fn skipped(&self) -> &BTreeMap<DistanceKind, usize> {
        &self.skipped
    }

    /// Largest fraction of the ensemble that fell outside the histogram grid.
    pub fn max_outside_fraction(&self) -> f64 {
        self.max_outside
    }
}
