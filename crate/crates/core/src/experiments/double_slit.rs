//! Relaxation versus interference behind two slits.

use std::collections::BTreeMap;

use super::{distance_artifacts, track_relaxation, ExperimentError, PointRecord, StudyOutput, StudyReport, StudySpec};
use crate::models::{DoubleSlitModel, WavefunctionModel};
use crate::sde::{Ensemble, InverseCdf};
use crate::stats::{detect_interference_double_slit, fit_relaxation, fit_tanh, DistanceKind, StatsError};

/// Slit half-separation in scenario units.
pub const HALF_SEPARATION: f64 = 1.0;
/// Quantum diffusion coefficient `hbar/2m`.
pub const DIFFUSION: f64 = 0.5;
/// Time step of the interference scan.
pub const SCAN_STEP: f64 = 1e-4;
/// Points across `[-3a, 3a]` in the interference scan.
const SCAN_POINTS: usize = 3001;

/// Earliest time (on a `step` lattice up to `horizon`) at which `|psi|²`
/// shows a third peak between the two slit images.
pub fn interference_time(model: &DoubleSlitModel, horizon: f64, step: f64) -> Result<f64, StatsError> {
    let a = model.half_separation();
    let xs: Vec<f64> = (0..SCAN_POINTS).map(|i| -3.0 * a + 6.0 * a * i as f64 / (SCAN_POINTS - 1) as f64).collect();
    let frames = (0..=(horizon / step).round() as usize).map(|k| {
        let t = k as f64 * step;
        (t, xs.iter().map(|&x| model.density_at(x, t)).collect())
    });
    detect_interference_double_slit(frames)
}

fn run_point(spec: &StudySpec, sigma: f64, report: &mut StudyReport) -> Result<(PointRecord, Vec<super::SeriesArtifact>), ExperimentError> {
    let model = DoubleSlitModel::with_separation(sigma, HALF_SEPARATION)?;
    let mut rec = PointRecord::new(BTreeMap::from([("sigma".to_string(), sigma)]), report.provenance.clone());
    let dir = rec.dir(spec.scenario, &["sigma"]);
    let cfg = spec.integrator(spec.dt, DIFFUSION);
    let observe = |t: f64, xs: &[f64], tr: &mut super::tracking::DistanceTracker| {
        tr.observe(t, xs, model.support(t), |x| Ok(model.density_at(x, t)))
    };

    let mut ens = Ensemble::delta_pair(HALF_SEPARATION, spec.n, spec.master_seed)?;
    let (tracker, log) = track_relaxation(&mut ens, &model, &cfg, spec.t_end, spec.observe_every, spec.bins, observe)?;
    rec.counters = Some(log.counters);
    for kind in DistanceKind::ALL {
        // the delta start has no meaningful histogram distance
        let series = tracker.series(kind).after(0.0);
        match fit_relaxation(&series) {
            Ok(fit) => {
                rec.tau_q.insert(format!("fit-{kind}"), fit.tau_q.expect("relaxation fits define tau_q"));
                rec.fits.insert(kind.to_string(), fit);
            }
            Err(StatsError::FitDiverged(best)) => {
                rec.errors.push(format!("fit-{kind}: did not converge"));
                rec.fits.insert(kind.to_string(), *best);
            }
            Err(e) => rec.errors.push(format!("fit-{kind}: {e}")),
        }
        if let Some(n) = tracker.skipped().get(&kind) {
            rec.metrics.insert(format!("skipped-{kind}"), *n as f64);
        }
    }
    rec.metrics.insert("outside-fraction".into(), tracker.max_outside_fraction());
    let horizon = spec.t_end.max(5.0);
    if let Some(t) = rec.note("tau-int", interference_time(&model, horizon, SCAN_STEP)) {
        rec.tau_int.insert("third-peak".into(), t);
    }
    let mut series = distance_artifacts(&dir, "", &tracker);

    if spec.control {
        let (lo, hi) = model.support(0.0);
        let born = InverseCdf::new(|x| model.density_at(x, 0.0), lo, hi)?;
        let mut eq = Ensemble::new(born.sample(spec.n, spec.master_seed), 0.0, spec.master_seed)?;
        let (ctl, _) = track_relaxation(&mut eq, &model, &cfg, spec.t_end, spec.observe_every, spec.bins, observe)?;
        record_floors(&mut rec, &ctl);
        series.extend(distance_artifacts(&dir, "control_", &ctl));
    }
    Ok((rec, series))
}

/// Initial and peak distances of an equilibrium-start control.
pub(crate) fn record_floors(rec: &mut PointRecord, ctl: &super::tracking::DistanceTracker) {
    for s in ctl.all_series() {
        if let Some(&first) = s.values.first() {
            let peak = s.values.iter().copied().fold(0.0, f64::max);
            let mean = s.values.iter().sum::<f64>() / s.values.len() as f64;
            rec.noise_floors.insert(format!("initial-{}", s.kind), first);
            rec.noise_floors.insert(format!("mean-{}", s.kind), mean);
            rec.noise_floors.insert(format!("max-{}", s.kind), peak);
        }
    }
}

pub fn run_double_slit_study(spec: &StudySpec) -> Result<StudyOutput, ExperimentError> {
    spec.validate()?;
    let sigmas = spec.list("sigma")?.to_vec();
    if let Some(s) = sigmas.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
        return Err(ExperimentError::InvalidSpec(format!("sigma must lie in (0, 1), got {s}")));
    }
    let mut report = StudyReport::new(spec);
    let mut series = Vec::new();
    for &sigma in &sigmas {
        let (rec, s) = run_point(spec, sigma, &mut report)?;
        report.records.push(rec);
        series.extend(s);
    }
    report.records.sort_by(|a, b| a.params["sigma"].total_cmp(&b.params["sigma"]));

    for kind in DistanceKind::ALL {
        let key = format!("fit-{kind}");
        let pts: Vec<(f64, f64)> =
            report.records.iter().filter_map(|r| r.tau_q.get(&key).map(|t| (r.params["sigma"], *t))).collect();
        match fit_tanh(&pts) {
            Ok(fit) => {
                report.fits.insert(format!("tanh-{kind}"), fit);
            }
            Err(e) => report.errors.push(format!("tanh-{kind}: {e}")),
        }
        let ordered = report.records.iter().all(|r| match (r.tau_q.get(&key), r.tau_int.get("third-peak")) {
            (Some(q), Some(i)) => q < i,
            _ => false,
        });
        report.metrics.insert(format!("ordered-{kind}"), if ordered { 1.0 } else { 0.0 });
    }
    Ok(StudyOutput { report, series })
}
