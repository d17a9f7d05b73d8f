//! End-to-end studies: specs in, per-point records and series out.

pub mod double_slit;
pub mod gravity;
pub mod oscillator;
pub mod tracking;
pub mod validation;

use std::cell::RefCell;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::models::{DriftField, ModelError};
use crate::sde::{simulate, Ensemble, IntegratorConfig, Scheme, SdeError, SimulationLog, StepCounters};
use crate::stats::{FitResult, StatsError};
use tracking::DistanceTracker;

pub use double_slit::{interference_time, run_double_slit_study};
pub use gravity::{gravity_interference_time, run_gravity_study};
pub use oscillator::{gamma_series, run_barrier_study, run_oscillator_study, run_superposition_study, theta_relaxation_time};
pub use validation::{run_validation_suite, ValidationCheck};

/// Smallest ensemble a study accepts.
pub const MIN_ENSEMBLE: usize = 1000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sde(#[from] SdeError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid study spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    DoubleSlit,
    Oscillator,
    Barrier,
    Superposition,
    Gravity,
}

impl Scenario {
    pub const ALL: [Scenario; 5] =
        [Scenario::DoubleSlit, Scenario::Oscillator, Scenario::Barrier, Scenario::Superposition, Scenario::Gravity];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::DoubleSlit => "double-slit",
            Scenario::Oscillator => "oscillator",
            Scenario::Barrier => "barrier",
            Scenario::Superposition => "superposition",
            Scenario::Gravity => "gravity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to reproduce a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub scenario: Scenario,
    /// Named parameter lists; which names are read depends on the scenario.
    pub grid: BTreeMap<String, Vec<f64>>,
    /// Ensemble size.
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub master_seed: u64,
    /// Observation cadence in scenario time units.
    pub observe_every: f64,
    /// Histogram bins.
    pub bins: usize,
    pub scheme: Scheme,
    /// Also run an equilibrium-start control for each point.
    pub control: bool,
}

fn grid(pairs: &[(&str, &[f64])]) -> BTreeMap<String, Vec<f64>> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect()
}

impl StudySpec {
    /// Reference configuration for a scenario.
    pub fn defaults(scenario: Scenario) -> Self {
        let base = |grid, n, dt, t_end, observe_every| StudySpec {
            scenario,
            grid,
            n,
            dt,
            t_end,
            master_seed: 20_240_601,
            observe_every,
            bins: tracking::DEFAULT_BINS,
            scheme: Scheme::Heun,
            control: true,
        };
        match scenario {
            Scenario::DoubleSlit => base(grid(&[("sigma", &[0.2, 0.3, 0.4, 0.5, 0.6, 0.7])]), 100_000, 1e-4, 0.4, 1e-3),
            Scenario::Oscillator => base(
                grid(&[
                    ("b0", &[0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]),
                    ("theta", &[5e-4, 1e-3, 5e-3, 1e-2]),
                    ("window", &[10.0]),
                    ("gamma_step", &[1e-4]),
                    ("mc_b0", &[0.5]),
                    ("mc_t_end", &[1.0]),
                ]),
                100_000,
                1e-3,
                5.0,
                1e-3,
            ),
            Scenario::Barrier => base(
                grid(&[("dt", &[0.1, 1e-3, 1e-6]), ("start", &[1.0]), ("reduced_n", &[1000.0]), ("reduce_below_dt", &[1e-5])]),
                10_000,
                1e-4,
                50.0,
                50.0,
            ),
            Scenario::Superposition => base(
                grid(&[("mix_deg", &[0.1]), ("start", &[1.0]), ("floor_factor", &[2.0])]),
                100_000,
                1e-3,
                5.0,
                1e-2,
            ),
            Scenario::Gravity => base(
                grid(&[
                    ("h", &[1.5, 2.5, 3.5, 5.0]),
                    ("zeta", &[0.09]),
                    ("p", &[0.0025, 0.0152, 0.05, 0.152]),
                    ("floor_factor", &[2.0]),
                    ("min_rise", &[0.05]),
                    ("table_dx", &[0.01]),
                ]),
                100_000,
                1e-4,
                1.0,
                2e-3,
            ),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::InvalidSpec(m));
        if self.n < MIN_ENSEMBLE {
            return bad(format!("ensemble size {} is below {MIN_ENSEMBLE}", self.n));
        }
        if !(self.dt > 0.0) || !(self.t_end > 0.0) || !(self.observe_every > 0.0) {
            return bad("dt, t_end and observe_every must be positive".into());
        }
        if self.bins < 2 {
            return bad("need at least two bins".into());
        }
        if let Some((k, _)) = self.grid.iter().find(|(_, v)| v.is_empty()) {
            return bad(format!("grid `{k}` is empty"));
        }
        if let Some((k, _)) = self.grid.iter().find(|(_, v)| v.iter().any(|x| !x.is_finite())) {
            return bad(format!("grid `{k}` has a non-finite entry"));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn provenance(&self) -> Provenance {
        Provenance { spec_hash: self.hash(), master_seed: self.master_seed }
    }

    pub fn list(&self, key: &str) -> Result<&[f64], ExperimentError> {
        self.grid
            .get(key)
            .map(|v| v.as_slice())
            .ok_or_else(|| ExperimentError::InvalidSpec(format!("{} study needs grid `{key}`", self.scenario)))
    }

    pub fn scalar(&self, key: &str) -> Result<f64, ExperimentError> {
        let v = self.list(key)?;
        if v.len() != 1 {
            return Err(ExperimentError::InvalidSpec(format!("grid `{key}` must hold exactly one value")));
        }
        Ok(v[0])
    }

    pub(crate) fn integrator(&self, dt: f64, diffusion: f64) -> IntegratorConfig {
        IntegratorConfig::new(dt, diffusion).with_scheme(self.scheme)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec_hash: String,
    pub master_seed: u64,
}

/// Results for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub params: BTreeMap<String, f64>,
    pub provenance: Provenance,
    /// Relaxation times, keyed by method and measure (e.g. `fit-L1`, `floor-H`).
    pub tau_q: BTreeMap<String, f64>,
    /// Interference times, keyed by detector setting.
    pub tau_int: BTreeMap<String, f64>,
    pub tau_1: Option<f64>,
    pub tau_2: Option<f64>,
    pub fits: BTreeMap<String, FitResult>,
    pub counters: Option<StepCounters>,
    pub noise_floors: BTreeMap<String, f64>,
    pub metrics: BTreeMap<String, f64>,
    /// Per-point failures that did not abort the study.
    pub errors: Vec<String>,
}

impl PointRecord {
    pub fn new(params: BTreeMap<String, f64>, provenance: Provenance) -> Self {
        Self {
            params,
            provenance,
            tau_q: BTreeMap::new(),
            tau_int: BTreeMap::new(),
            tau_1: None,
            tau_2: None,
            fits: BTreeMap::new(),
            counters: None,
            noise_floors: BTreeMap::new(),
            metrics: BTreeMap::new(),
            errors: Vec::new(),
        }
    }

    /// Records `Ok` values under `key`, errors in the error list.
    pub(crate) fn note<T, E: std::fmt::Display>(&mut self, key: &str, r: Result<T, E>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{key}: {e}"));
                None
            }
        }
    }

    /// Directory name `<param=value>/...` for this point.
    pub fn dir(&self, scenario: Scenario, keys: &[&str]) -> String {
        let mut parts = vec![scenario.name().to_string()];
        parts.extend(keys.iter().filter_map(|k| self.params.get(*k).map(|v| format!("{k}={v}"))));
        parts.join("/")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub scenario: Scenario,
    pub provenance: Provenance,
    pub spec: StudySpec,
    pub records: Vec<PointRecord>,
    /// Study-wide fits (e.g. across the parameter grid).
    pub fits: BTreeMap<String, FitResult>,
    pub metrics: BTreeMap<String, f64>,
    pub errors: Vec<String>,
    /// Extra JSON for scenario-specific context such as physical units.
    pub context: BTreeMap<String, serde_json::Value>,
}

impl StudyReport {
    pub fn new(spec: &StudySpec) -> Self {
        Self {
            scenario: spec.scenario,
            provenance: spec.provenance(),
            spec: spec.clone(),
            records: Vec::new(),
            fits: BTreeMap::new(),
            metrics: BTreeMap::new(),
            errors: Vec::new(),
            context: BTreeMap::new(),
        }
    }
}

/// A time series produced by a study, written as `<dir>/series_<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesArtifact {
    pub dir: String,
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Suggests a logarithmic value axis when plotted.
    pub log_y: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    pub report: StudyReport,
    pub series: Vec<SeriesArtifact>,
}

pub fn run_study(spec: &StudySpec) -> Result<StudyOutput, ExperimentError> {
    spec.validate()?;
    match spec.scenario {
        Scenario::DoubleSlit => run_double_slit_study(spec),
        Scenario::Oscillator => run_oscillator_study(spec),
        Scenario::Barrier => run_barrier_study(spec),
        Scenario::Superposition => run_superposition_study(spec),
        Scenario::Gravity => run_gravity_study(spec),
    }
}

/// Simulates while comparing the ensemble with the Born density at each
/// observation; `observe` fills the tracker.
pub fn track_relaxation<D, B>(
    ens: &mut Ensemble,
    field: &D,
    cfg: &IntegratorConfig,
    t_end: f64,
    every: f64,
    bins: usize,
    mut observe: B,
) -> Result<(DistanceTracker, SimulationLog), ExperimentError>
where
    D: DriftField,
    B: FnMut(f64, &[f64], &mut DistanceTracker) -> Result<(), ExperimentError>,
{
    let tracker = RefCell::new(DistanceTracker::new(bins));
    let failure = RefCell::new(None);
    let result = simulate(ens, field, cfg, t_end, every, |snap| {
        observe(snap.t, snap.positions, &mut tracker.borrow_mut()).map_err(|e| {
            let msg = e.to_string();
            *failure.borrow_mut() = Some(e);
            msg
        })
    });
    match result {
        Ok(log) => Ok((tracker.into_inner(), log)),
        Err(SdeError::Observer { .. }) if failure.borrow().is_some() => Err(failure.into_inner().expect("checked")),
        Err(e) => Err(e.into()),
    }
}

/// Tracker series as report artifacts, log-scaled.
pub(crate) fn distance_artifacts(dir: &str, prefix: &str, tracker: &DistanceTracker) -> Vec<SeriesArtifact> {
    tracker
        .all_series()
        .map(|s| SeriesArtifact {
            dir: dir.to_string(),
            name: format!("{prefix}{}", s.kind),
            times: s.times.clone(),
            values: s.values.clone(),
            log_y: true,
        })
        .collect()
}
