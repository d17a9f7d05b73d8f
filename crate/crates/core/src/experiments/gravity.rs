//! Wavepacket bouncing on a mirror: three-phase relaxation and the onset of
//! interference fringes.

use std::collections::BTreeMap;

use super::double_slit::record_floors;
use super::tracking::DistanceTracker;
use super::{distance_artifacts, track_relaxation, ExperimentError, PointRecord, StudyOutput, StudyReport, StudySpec};
use crate::models::gravity::{neutron_units, GravityField, GravityModel};
use crate::sde::{Boundary, Ensemble, InverseCdf, SimulationLog};
use crate::stats::timescales::PEAK_BAND;
use crate::stats::{detect_peaks_prominence, detect_phase_boundaries, settling_time, DistanceKind};

/// Quantum diffusion coefficient in gravity units.
pub const DIFFUSION: f64 = 1.0;
/// Peaks needed to declare interference.
pub const MIN_PEAKS: usize = 2;

/// Upper edge of the region holding the packet at time `t`.
fn upper_at(model: &GravityModel, t: f64) -> f64 {
    model.reach(t)
}

/// For each prominence threshold, the first time on the `step` lattice at which
/// `|psi|²` has at least two in-band peaks more prominent than it.
pub fn gravity_interference_time(field: &GravityField, prominences: &[f64], horizon: f64, step: f64) -> BTreeMap<String, f64> {
    let mut found = BTreeMap::new();
    let n = (horizon / step).round() as usize;
    for k in 0..=n {
        let t = k as f64 * step;
        let frame = field.frame_upto(t, upper_at(field.model(), t).min(field.x_max()));
        let curve = frame.node_densities();
        for &p in prominences {
            let key = format!("p={p}");
            if !found.contains_key(&key) && detect_peaks_prominence(&curve, PEAK_BAND, p).len() >= MIN_PEAKS {
                found.insert(key, t);
            }
        }
        if found.len() == prominences.len() {
            break;
        }
    }
    found
}

/// Runs an ensemble in the tabulated field, comparing with `|psi|²` at each
/// observation. `start = None` samples the initial Born density.
pub fn track_gravity(
    field: &GravityField,
    spec: &StudySpec,
    start: Option<f64>,
) -> Result<(DistanceTracker, SimulationLog), ExperimentError> {
    let model = field.model();
    let cfg = spec.integrator(spec.dt, DIFFUSION).with_boundary(Boundary::ReflectAtZero);
    let positions = match start {
        Some(h) => vec![h; spec.n],
        None => {
            let frame = field.frame_upto(0.0, upper_at(model, 0.0));
            let (h, z) = (model.h(), model.zeta());
            let born = InverseCdf::new(|x| frame.density(x).unwrap_or(0.0), (h - 12.0 * z).max(0.0), h + 12.0 * z)?;
            born.sample(spec.n, spec.master_seed)
        }
    };
    let mut ens = Ensemble::new(positions, 0.0, spec.master_seed)?;
    track_relaxation(&mut ens, field, &cfg, spec.t_end, spec.observe_every, spec.bins, |t, xs, tr| {
        let upper = upper_at(model, t).min(field.x_max());
        let frame = field.frame_upto(t, upper);
        tr.observe(t, xs, (0.0, upper), |x| frame.density(x))
    })
}

/// Builds the tabulated field for one drop height.
pub fn gravity_field(h: f64, zeta: f64, t_end: f64, dx: f64) -> Result<GravityField, ExperimentError> {
    let model = GravityModel::auto(h, zeta)?;
    let upper = model.reach(t_end);
    Ok(model.tabulate(upper, dx)?)
}

pub fn run_gravity_study(spec: &StudySpec) -> Result<StudyOutput, ExperimentError> {
    spec.validate()?;
    let zeta = spec.scalar("zeta")?;
    let factor = spec.scalar("floor_factor")?;
    let min_rise = spec.scalar("min_rise")?;
    let dx = spec.scalar("table_dx")?;
    let ps = spec.list("p")?.to_vec();
    let mut report = StudyReport::new(spec);
    report.context.insert("units".into(), serde_json::to_value(neutron_units()).expect("units serialize"));
    let mut series = Vec::new();
    for &h in spec.list("h")? {
        let field = gravity_field(h, zeta, spec.t_end, dx)?;
        let model = field.model();
        let mut rec = PointRecord::new(BTreeMap::from([("h".into(), h), ("zeta".into(), zeta)]), report.provenance.clone());
        rec.metrics.insert("n-states".into(), model.n_max() as f64);
        rec.metrics.insert("raw-norm".into(), model.raw_norm());
        let dir = rec.dir(spec.scenario, &["h"]);

        let (tracker, log) = track_gravity(&field, spec, Some(h))?;
        rec.counters = Some(log.counters);
        rec.metrics.insert("outside-fraction".into(), tracker.max_outside_fraction());
        let lh = tracker.series(DistanceKind::H).after(0.0);
        if let Some((t1, t2)) = rec.note("phases", detect_phase_boundaries(&lh.times, &lh.values, min_rise)) {
            rec.tau_1 = Some(t1);
            rec.tau_2 = Some(t2);
        }
        rec.tau_int = gravity_interference_time(&field, &ps, spec.t_end, spec.observe_every);
        for &p in &ps {
            if !rec.tau_int.contains_key(&format!("p={p}")) {
                rec.errors.push(format!("tau-int p={p}: no interference up to t = {}", spec.t_end));
            }
        }
        if let Some(t1) = rec.tau_1 {
            let ratios: Vec<f64> = rec.tau_int.values().map(|ti| ti / t1).collect();
            for (k, ti) in rec.tau_int.clone() {
                rec.metrics.insert(format!("ratio-{k}"), ti / t1);
            }
            if !ratios.is_empty() {
                rec.metrics.insert("ratio-min".into(), ratios.iter().copied().fold(f64::INFINITY, f64::min));
                rec.metrics.insert("ratio-max".into(), ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
        }
        series.extend(distance_artifacts(&dir, "", &tracker));

        if spec.control {
            let (ctl, _) = track_gravity(&field, spec, None)?;
            record_floors(&mut rec, &ctl);
            series.extend(distance_artifacts(&dir, "control_", &ctl));
            for kind in DistanceKind::ALL {
                let floor = rec.noise_floors[&format!("mean-{kind}")];
                let s = tracker.series(kind);
                let k = format!("floor-{kind}");
                if let Some(t) = rec.note(&k, settling_time(&s.times, &s.values, factor * floor)) {
                    rec.tau_q.insert(k, t);
                }
            }
        }
        let units = neutron_units();
        if let Some(t) = rec.tau_q.get("floor-H") {
            rec.metrics.insert("tau-q-H-seconds".into(), t * units.time_s);
        }
        rec.metrics.insert("h-metres".into(), h * units.length_m);
        report.records.push(rec);
    }
    report.records.sort_by(|a, b| a.params["h"].total_cmp(&b.params["h"]));
    Ok(StudyOutput { report, series })
}
