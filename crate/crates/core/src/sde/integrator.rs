use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rng::{rng_stream, RngStream};
use crate::models::{DriftField, DriftFrame, ModelError};

/// Positions beyond this magnitude abort the run.
pub const BLOW_UP: f64 = 1e6;
/// Trajectories per parallel work item; fixed so the partition never depends on the pool.
const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    EulerMaruyama,
    Heun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    None,
    ReflectAtZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Quantum diffusion coefficient `D_Q = hbar/2m`; the noise variance per step is `2 D_Q dt`.
    pub diffusion: f64,
    pub scheme: Scheme,
    pub boundary: Boundary,
    /// Distance to a node below which models refuse to evaluate the drift.
    pub node_guard: f64,
}

impl IntegratorConfig {
    pub fn new(dt: f64, diffusion: f64) -> Self {
        Self { dt, diffusion, scheme: Scheme::Heun, boundary: Boundary::None, node_guard: 1e-12 }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.diffusion > 0.0 && self.diffusion.is_finite()) {
            return Err(SdeError::InvalidConfig(format!(
                "need dt > 0 and D_Q > 0, got dt = {}, D_Q = {}",
                self.dt, self.diffusion
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdeError {
    #[error("trajectory {trajectory} at t = {t}: {source}")]
    Model {
        trajectory: usize,
        t: f64,
        #[source]
        source: ModelError,
    },
    #[error("trajectory {trajectory} blew up at t = {t} (x = {x})")]
    BlowUp { trajectory: usize, t: f64, x: f64 },
    #[error("invalid integrator setup: {0}")]
    InvalidConfig(String),
    #[error("observer failed at t = {t}: {message}")]
    Observer { t: f64, message: String },
}

/// Per-step event counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCounters {
    /// Corrector (or Euler) updates that landed below zero and were mirrored.
    pub reflections: u64,
    /// Trajectories whose position changed sign during the step.
    pub sign_changes: u64,
}

impl std::ops::AddAssign for StepCounters {
    fn add_assign(&mut self, o: Self) {
        self.reflections += o.reflections;
        self.sign_changes += o.sign_changes;
    }
}

/// `N` trajectories at a common time, each with its own noise stream.
#[derive(Debug, Clone)]
pub struct Ensemble {
    positions: Vec<f64>,
    streams: Vec<RngStream>,
    t: f64,
    master_seed: u64,
}

impl Ensemble {
    pub fn new(positions: Vec<f64>, t: f64, master_seed: u64) -> Result<Self, SdeError> {
        if positions.is_empty() || positions.iter().any(|x| !x.is_finite()) {
            return Err(SdeError::InvalidConfig("ensemble needs at least one finite position".into()));
        }
        let streams = (0..positions.len() as u64).map(|id| rng_stream(master_seed, id)).collect();
        Ok(Self { positions, streams, t, master_seed })
    }

    /// All trajectories at `x0`.
    pub fn delta(x0: f64, n: usize, master_seed: u64) -> Result<Self, SdeError> {
        Self::new(vec![x0; n], 0.0, master_seed)
    }

    /// Half the trajectories at `-a`, half at `+a` (odd `N` puts the extra one at `+a`).
    pub fn delta_pair(a: f64, n: usize, master_seed: u64) -> Result<Self, SdeError> {
        let positions = (0..n).map(|i| if i < n / 2 { -a } else { a }).collect();
        Self::new(positions, 0.0, master_seed)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    fn extent(&self) -> (f64, f64) {
        self.positions
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    }
}

#[inline]
fn apply_boundary(boundary: Boundary, x: f64) -> (f64, bool) {
    match boundary {
        Boundary::None => (x, false),
        Boundary::ReflectAtZero if x > 0.0 => (x, false),
        Boundary::ReflectAtZero => {
            let r = -x;
            (if r > 0.0 { r } else { f64::EPSILON }, true)
        }
    }
}

fn advance_chunk<F: DriftFrame>(
    xs: &mut [f64],
    streams: &mut [RngStream],
    first_id: usize,
    now: &F,
    next: &F,
    cfg: &IntegratorConfig,
    t: f64,
) -> Result<StepCounters, SdeError> {
    let dt = cfg.dt;
    let scale = (2.0 * cfg.diffusion * dt).sqrt();
    let mut counters = StepCounters::default();
    for (i, (x, stream)) in xs.iter_mut().zip(streams.iter_mut()).enumerate() {
        let id = first_id + i;
        let wrap = |source: ModelError, at: f64| SdeError::Model { trajectory: id, t: at, source };
        let dw = scale * stream.standard_normal();
        let b = now.drift(*x).map_err(|e| wrap(e, t))?;
        let euler = *x + b * dt + dw;
        let raw = match cfg.scheme {
            Scheme::EulerMaruyama => euler,
            Scheme::Heun => {
                let (pred, _) = apply_boundary(cfg.boundary, euler);
                let b_pred = next.drift(pred).map_err(|e| wrap(e, t + dt))?;
                *x + 0.5 * (b + b_pred) * dt + dw
            }
        };
        let (new, reflected) = apply_boundary(cfg.boundary, raw);
        if !new.is_finite() || new.abs() > BLOW_UP {
            return Err(SdeError::BlowUp { trajectory: id, t: t + dt, x: new });
        }
        if reflected {
            counters.reflections += 1;
        }
        if (new > 0.0) != (*x > 0.0) {
            counters.sign_changes += 1;
        }
        *x = new;
    }
    Ok(counters)
}

/// One step from frozen frames at `t` and `t + dt`.
fn step_frames<F: DriftFrame>(ens: &mut Ensemble, now: &F, next: &F, cfg: &IntegratorConfig, t_now: f64) -> Result<StepCounters, SdeError> {
    let results: Vec<Result<StepCounters, SdeError>> = ens
        .positions
        .par_chunks_mut(CHUNK)
        .zip(ens.streams.par_chunks_mut(CHUNK))
        .enumerate()
        .map(|(c, (xs, ss))| advance_chunk(xs, ss, c * CHUNK, now, next, cfg, t_now))
        .collect();
    let mut total = StepCounters::default();
    for r in results {
        total += r?;
    }
    Ok(total)
}

/// Advances the ensemble by one `dt` (Heun: predictor with the drift at `t`,
/// corrector averaging it with the drift at `t + dt` at the predicted point,
/// same Wiener increment for both).
pub fn step<D: DriftField>(ens: &mut Ensemble, field: &D, cfg: &IntegratorConfig) -> Result<StepCounters, SdeError> {
    cfg.validate()?;
    let t = ens.t;
    let ext = ens.extent();
    let wrap = |source, at| SdeError::Model { trajectory: 0, t: at, source };
    let now = field.frame(t, ext).map_err(|e| wrap(e, t))?;
    let next = field.frame(t + cfg.dt, ext).map_err(|e| wrap(e, t + cfg.dt))?;
    let c = step_frames(ens, &now, &next, cfg, t)?;
    ens.t = t + cfg.dt;
    Ok(c)
}

/// Immutable view handed to observers.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot<'a> {
    pub t: f64,
    pub step: usize,
    pub positions: &'a [f64],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SimulationLog {
    pub steps: usize,
    pub observations: usize,
    pub counters: StepCounters,
    pub observation_times: Vec<f64>,
}

/// Runs from the ensemble's time to `t_end`, calling `observer` at the start
/// and then every `observe_every` (rounded to a whole number of steps).
///
/// Time is `t0 + k dt`, never accumulated, so observation times are exact.
pub fn simulate<D, O>(
    ens: &mut Ensemble,
    field: &D,
    cfg: &IntegratorConfig,
    t_end: f64,
    observe_every: f64,
    mut observer: O,
) -> Result<SimulationLog, SdeError>
where
    D: DriftField,
    O: FnMut(Snapshot<'_>) -> Result<(), String>,
{
    cfg.validate()?;
    let t0 = ens.t;
    if !(t_end > t0) || !(observe_every >= cfg.dt * (1.0 - 1e-9)) {
        return Err(SdeError::InvalidConfig(format!(
            "need t_end > t0 and observe_every >= dt, got t0 = {t0}, t_end = {t_end}, every = {observe_every}"
        )));
    }
    let steps = ((t_end - t0) / cfg.dt).round() as usize;
    let stride = ((observe_every / cfg.dt).round() as usize).max(1);
    let mut log = SimulationLog::default();
    let time_of = |k: usize| t0 + k as f64 * cfg.dt;
    let mut observe = |log: &mut SimulationLog, ens: &Ensemble, k: usize| -> Result<(), SdeError> {
        let t = time_of(k);
        observer(Snapshot { t, step: k, positions: &ens.positions }).map_err(|message| SdeError::Observer { t, message })?;
        log.observations += 1;
        log.observation_times.push(t);
        Ok(())
    };
    observe(&mut log, ens, 0)?;
    let wrap = |source, at| SdeError::Model { trajectory: 0, t: at, source };
    let mut now = field.frame(t0, ens.extent()).map_err(|e| wrap(e, t0))?;
    let batch = field.batch_len().max(1);
    // frames for steps first_queued.., valid while the ensemble stays in `covered`
    let mut queue = std::collections::VecDeque::new();
    let mut covered = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..steps {
        let t = time_of(k);
        let t_next = time_of(k + 1);
        let ext = ens.extent();
        if batch == 1 {
            queue.clear();
            queue.push_back(field.frame(t_next, ext).map_err(|e| wrap(e, t_next))?);
        } else if queue.is_empty() || ext.0 < covered.0 || ext.1 > covered.1 {
            let margin = 0.05 * (ext.1 - ext.0) + 0.05;
            covered = (ext.0 - margin, ext.1 + margin);
            let ts: Vec<f64> = (k + 1..=(k + batch).min(steps)).map(time_of).collect();
            queue = field.frames(&ts, covered).map_err(|e| wrap(e, t_next))?.into();
        }
        let next = queue.pop_front().expect("queue refilled above");
        log.counters += step_frames(ens, &now, &next, cfg, t)?;
        ens.t = t_next;
        log.steps += 1;
        if (k + 1) % stride == 0 || k + 1 == steps {
            observe(&mut log, ens, k + 1)?;
        }
        now = next;
    }
    Ok(log)
}

/// Collects `(trajectory_id, t, x)` rows for the first few trajectories.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryRecorder {
    count: usize,
    rows: Vec<(usize, f64, f64)>,
}

impl TrajectoryRecorder {
    pub fn new(count: usize) -> Self {
        Self { count, rows: Vec::new() }
    }

    pub fn record(&mut self, snap: Snapshot<'_>) {
        for (id, &x) in snap.positions.iter().take(self.count).enumerate() {
            self.rows.push((id, snap.t, x));
        }
    }

    pub fn rows(&self) -> &[(usize, f64, f64)] {
        &self.rows
    }

    /// CSV with header `trajectory_id,t,x`, sorted by trajectory then time.
    pub fn to_csv(&self) -> String {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut out = String::from("trajectory_id,t,x\n");
        for (id, t, x) in rows {
            out.push_str(&format!("{id},{t},{x}\n"));
        }
        out
    }
}
