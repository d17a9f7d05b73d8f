//! Drawing initial positions from a tabulated density by inverse CDF.

use super::rng::{RngStream, LANE_INIT};
use super::SdeError;

/// Grid resolution for the cumulative table.
const TABLE_POINTS: usize = 40_001;

/// Inverse-CDF sampler for a non-negative density on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    pub fn new<F: Fn(f64) -> f64>(density: F, lo: f64, hi: f64) -> Result<Self, SdeError> {
        if !(hi > lo) {
            return Err(SdeError::InvalidConfig(format!("empty sampling interval [{lo}, {hi}]")));
        }
        let h = (hi - lo) / (TABLE_POINTS - 1) as f64;
        let xs: Vec<f64> = (0..TABLE_POINTS).map(|i| lo + i as f64 * h).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| density(x).max(0.0)).collect();
        let mut cdf = Vec::with_capacity(TABLE_POINTS);
        cdf.push(0.0);
        for w in ys.windows(2) {
            let last = *cdf.last().unwrap();
            cdf.push(last + 0.5 * h * (w[0] + w[1]));
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0 && total.is_finite()) {
            return Err(SdeError::InvalidConfig("density has no mass on the sampling interval".into()));
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Self { xs, cdf })
    }

    /// Position at cumulative probability `u`, linear between table nodes.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let f = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.xs[i - 1] + f * (self.xs[i] - self.xs[i - 1])
    }

    /// `n` positions; position `i` uses its own initialisation stream, so the
    /// draw is reproducible and independent of the noise streams.
    pub fn sample(&self, n: usize, master_seed: u64) -> Vec<f64> {
        (0..n as u64)
            .map(|i| self.quantile(RngStream::new(master_seed, i, LANE_INIT).uniform()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        let s = InverseCdf::new(|x| (-x * x / 2.0).exp(), -8.0, 8.0).unwrap();
        let xs = s.sample(200_000, 5);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.01);
    }

    #[test]
    fn quantile_endpoints() {
        let s = InverseCdf::new(|_| 1.0, 2.0, 4.0).unwrap();
        assert!((s.quantile(0.0) - 2.0).abs() < 1e-9);
        assert!((s.quantile(0.5) - 3.0).abs() < 1e-9);
        assert!(InverseCdf::new(|_| 0.0, 0.0, 1.0).is_err());
    }
}
