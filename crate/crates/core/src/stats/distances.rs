//! Distances between a particle density `f = P` and the Born density `g = |psi|²`,
//! both tabulated on a shared grid and integrated by the trapezoid rule.

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::numerics::quad::trapezoid;

/// Densities at or below this are treated as empty in the entropy distance.
pub const DENSITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DistanceKind {
    L1,
    L2,
    Linf,
    H,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 4] = [DistanceKind::L1, DistanceKind::L2, DistanceKind::Linf, DistanceKind::H];

    pub fn label(&self) -> &'static str {
        match self {
            DistanceKind::L1 => "L1",
            DistanceKind::L2 => "L2",
            DistanceKind::Linf => "Linf",
            DistanceKind::H => "H",
        }
    }
}

impl std::fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

fn check(x: &[f64], f: &[f64], g: &[f64]) -> Result<(), StatsError> {
    if f.len() != g.len() || x.len() != f.len() || x.len() < 2 {
        return Err(StatsError::GridMismatch { left: f.len(), right: g.len() });
    }
    Ok(())
}

/// `(∫|f - g|^p dx)^{1/p}` for `p ∈ {1, 2}`.
pub fn lp_distance(x: &[f64], f: &[f64], g: &[f64], p: u32) -> Result<f64, StatsError> {
    check(x, f, g)?;
    let diff: Vec<f64> = match p {
        1 => f.iter().zip(g).map(|(a, b)| (a - b).abs()).collect(),
        2 => f.iter().zip(g).map(|(a, b)| (a - b).powi(2)).collect(),
        _ => return Err(StatsError::InvalidInput(format!("unsupported norm order {p}"))),
    };
    let integral = trapezoid(x, &diff);
    Ok(if p == 1 { integral } else { integral.sqrt() })
}

/// `max |f - g|` over the grid.
pub fn linf_distance(f: &[f64], g: &[f64]) -> Result<f64, StatsError> {
    if f.len() != g.len() || f.is_empty() {
        return Err(StatsError::GridMismatch { left: f.len(), right: g.len() });
    }
    Ok(f.iter().zip(g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// `∫ f ln(f/g) dx`; points with `f <= floor` contribute nothing.
pub fn entropy_h(x: &[f64], f: &[f64], g: &[f64]) -> Result<f64, StatsError> {
    check(x, f, g)?;
    let mut integrand = Vec::with_capacity(f.len());
    for (i, (&a, &b)) in f.iter().zip(g).enumerate() {
        if a <= DENSITY_FLOOR {
            integrand.push(0.0);
        } else if b <= DENSITY_FLOOR {
            return Err(StatsError::SupportMismatch { x: x[i] });
        } else {
            integrand.push(a * (a / b).ln());
        }
    }
    Ok(trapezoid(x, &integrand))
}

pub fn distance(kind: DistanceKind, x: &[f64], f: &[f64], g: &[f64]) -> Result<f64, StatsError> {
    match kind {
        DistanceKind::L1 => lp_distance(x, f, g, 1),
        DistanceKind::L2 => lp_distance(x, f, g, 2),
        DistanceKind::Linf => {
            check(x, f, g)?;
            linf_distance(f, g)
        }
        DistanceKind::H => entropy_h(x, f, g),
    }
}

/// A distance tracked over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSeries {
    pub kind: DistanceKind,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl DistanceSeries {
    pub fn new(kind: DistanceKind) -> Self {
        Self { kind, times: Vec::new(), values: Vec::new() }
    }

    pub fn from_parts(kind: DistanceKind, times: Vec<f64>, values: Vec<f64>) -> Result<Self, StatsError> {
        if times.len() != values.len() {
            return Err(StatsError::GridMismatch { left: times.len(), right: values.len() });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::InvalidInput("times must increase and values be finite".into()));
        }
        Ok(Self { kind, times, values })
    }

    pub fn push(&mut self, t: f64, v: f64) {
        self.times.push(t);
        self.values.push(v);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Restriction to `t > after`.
    pub fn after(&self, after: f64) -> Self {
        let (times, values) = self.times.iter().zip(&self.values).filter(|(t, _)| **t > after).map(|(t, v)| (*t, *v)).unzip();
        Self { kind: self.kind, times, values }
    }

    /// CSV with header `t,value`.
    pub fn to_csv(&self) -> String {
        series_csv(&self.times, &self.values)
    }
}

/// Two-column CSV (`t,value`) using the shortest round-trip float formatting.
pub fn series_csv(times: &[f64], values: &[f64]) -> String {
    let mut out = String::from("t,value\n");
    for (t, v) in times.iter().zip(values) {
        out.push_str(&format!("{t},{v}\n"));
    }
    out
}
