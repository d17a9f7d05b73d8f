//! Harmonic-oscillator studies: Gaussian relaxation through `gamma = C/B`,
//! node barriers of the first excited state, and a nearly pure superposition.

use std::collections::BTreeMap;

use super::double_slit::record_floors;
use super::tracking::DistanceTracker;
use super::{
    distance_artifacts, track_relaxation, ExperimentError, PointRecord, SeriesArtifact, StudyOutput, StudyReport, StudySpec,
};
use crate::models::{OscillatorEigenModel, OscillatorGaussian, WavefunctionModel};
use crate::sde::{simulate, Ensemble, InverseCdf};
use crate::stats::{settling_time, sliding_rms, threshold_time, DistanceKind, StatsError};

/// Quantum diffusion coefficient in oscillator units.
pub const DIFFUSION: f64 = 1.0;
/// Cadence at which `gamma` series are written out.
const ARTIFACT_STRIDE: usize = 10;

/// `(t_k, gamma(t_k))` for `t_k = k step`, `k = 1..=t_end/step`.
pub fn gamma_series(model: &OscillatorGaussian, t_end: f64, step: f64) -> Result<(Vec<f64>, Vec<f64>), ExperimentError> {
    let n = (t_end / step).round() as usize;
    let times: Vec<f64> = (1..=n).map(|k| k as f64 * step).collect();
    let gammas = times.iter().map(|&t| model.gamma(t)).collect::<Result<Vec<_>, _>>()?;
    Ok((times, gammas))
}

/// Relaxation time from the sliding RMS of `gamma`: first time `Θ < theta`
/// holding for a full window.
pub fn theta_relaxation_time(times: &[f64], theta_series: &[f64], theta: f64, window: usize) -> Result<f64, StatsError> {
    threshold_time(times, theta_series, theta, window)
}

fn key(name: &str, v: f64) -> String {
    format!("{name}={v}")
}

/// Empirical precision `1/var` of an ensemble.
fn precision_of(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    1.0 / var
}

/// Monte Carlo check of the ensemble precision against the closed form at ten
/// checkpoints; returns `(t, empirical C, exact C, z-score)` rows.
pub fn precision_check(model: &OscillatorGaussian, spec: &StudySpec, t_end: f64) -> Result<Vec<(f64, f64, f64, f64)>, ExperimentError> {
    let cfg = spec.integrator(spec.dt, DIFFUSION);
    let mut ens = Ensemble::delta(0.0, spec.n, spec.master_seed)?;
    let mut rows = Vec::new();
    let n = spec.n as f64;
    simulate(&mut ens, model, &cfg, t_end, t_end / 10.0, |snap| {
        if snap.step > 0 {
            let emp = precision_of(snap.positions);
            let exact = model.precision(snap.t).map_err(|e| e.to_string())?;
            let se = exact * (2.0 / (n - 1.0)).sqrt();
            rows.push((snap.t, emp, exact, (emp - exact) / se));
        }
        Ok(())
    })?;
    Ok(rows)
}

pub fn run_oscillator_study(spec: &StudySpec) -> Result<StudyOutput, ExperimentError> {
    spec.validate()?;
    let b0s = spec.list("b0")?.to_vec();
    let thetas = spec.list("theta")?.to_vec();
    let window = spec.scalar("window")? as usize;
    let step = spec.scalar("gamma_step")?;
    let mut report = StudyReport::new(spec);
    let mut series = Vec::new();
    for &b0 in &b0s {
        let model = OscillatorGaussian::from_inv_width(b0)?;
        let sigma0 = (2.0 / b0).sqrt();
        let mut rec = PointRecord::new(BTreeMap::from([("b0".into(), b0), ("sigma0".into(), sigma0)]), report.provenance.clone());
        let dir = rec.dir(spec.scenario, &["b0"]);
        let (times, gammas) = gamma_series(&model, spec.t_end, step)?;
        let theta_series = sliding_rms(&gammas, window)?;
        for &theta in &thetas {
            if let Some(t) = rec.note(&key("threshold-theta", theta), theta_relaxation_time(&times, &theta_series, theta, window)) {
                rec.tau_q.insert(key("threshold-theta", theta), t);
            }
        }
        let thin = |v: &[f64]| v.iter().step_by(ARTIFACT_STRIDE).copied().collect::<Vec<_>>();
        series.push(SeriesArtifact { dir: dir.clone(), name: "gamma".into(), times: thin(&times), values: thin(&gammas), log_y: false });
        series.push(SeriesArtifact { dir, name: "theta".into(), times: thin(&times), values: thin(&theta_series), log_y: true });
        report.records.push(rec);
    }
    report.records.sort_by(|a, b| a.params["b0"].total_cmp(&b.params["b0"]));

    let mc_t = spec.scalar("mc_t_end")?;
    for &b0 in spec.list("mc_b0")? {
        let model = OscillatorGaussian::from_inv_width(b0)?;
        let rows = precision_check(&model, spec, mc_t)?;
        let worst = rows.iter().map(|r| r.3.abs()).fold(0.0, f64::max);
        report.metrics.insert(key("mc-max-abs-z-b0", b0), worst);
        series.push(SeriesArtifact {
            dir: format!("{}/mc/b0={b0}", spec.scenario),
            name: "precision".into(),
            times: rows.iter().map(|r| r.0).collect(),
            values: rows.iter().map(|r| r.1).collect(),
            log_y: false,
        });
        series.push(SeriesArtifact {
            dir: format!("{}/mc/b0={b0}", spec.scenario),
            name: "precision_exact".into(),
            times: rows.iter().map(|r| r.0).collect(),
            values: rows.iter().map(|r| r.2).collect(),
            log_y: false,
        });
    }
    Ok(StudyOutput { report, series })
}

/// Fraction of positions on the other side of the origin from `start`.
pub fn crossing_fraction(positions: &[f64], start: f64) -> f64 {
    positions.iter().filter(|&&x| (x > 0.0) != (start > 0.0)).count() as f64 / positions.len() as f64
}

pub fn run_barrier_study(spec: &StudySpec) -> Result<StudyOutput, ExperimentError> {
    spec.validate()?;
    let model = OscillatorEigenModel::first_excited();
    let reduced_n = spec.scalar("reduced_n")? as usize;
    let reduce_below = spec.scalar("reduce_below_dt")?;
    let mut report = StudyReport::new(spec);
    let mut series = Vec::new();
    for &start in spec.list("start")? {
        let mut fractions = Vec::new();
        for &dt in spec.list("dt")? {
            let n = if dt < reduce_below { reduced_n } else { spec.n };
            let mut rec = PointRecord::new(
                BTreeMap::from([("dt".into(), dt), ("start".into(), start), ("n".into(), n as f64)]),
                report.provenance.clone(),
            );
            let cfg = spec.integrator(dt, DIFFUSION);
            let mut ens = Ensemble::delta(start, n, spec.master_seed)?;
            let every = spec.observe_every.max(dt);
            let mut times = Vec::new();
            let mut fraction = Vec::new();
            let run = simulate(&mut ens, &model, &cfg, spec.t_end, every, |snap| {
                times.push(snap.t);
                fraction.push(crossing_fraction(snap.positions, start));
                Ok(())
            });
            if let Some(log) = rec.note("simulate", run) {
                rec.counters = Some(log.counters);
                let f = crossing_fraction(ens.positions(), start);
                rec.metrics.insert("crossing-fraction".into(), f);
                fractions.push(f);
            }
            series.push(SeriesArtifact {
                dir: rec.dir(spec.scenario, &["start", "dt"]),
                name: "crossing_fraction".into(),
                times,
                values: fraction,
                log_y: false,
            });
            report.records.push(rec);
        }
        let decreasing = fractions.windows(2).all(|w| w[1] < w[0]) && fractions.len() == spec.list("dt")?.len();
        report.metrics.insert(key("strictly-decreasing-start", start), if decreasing { 1.0 } else { 0.0 });
    }
    Ok(StudyOutput { report, series })
}

/// Distances to the Born density of a ground/first-excited mixture started at `start`.
pub fn track_superposition(
    model: &OscillatorEigenModel,
    spec: &StudySpec,
    start: Option<f64>,
) -> Result<(DistanceTracker, crate::sde::SimulationLog), ExperimentError> {
    let cfg = spec.integrator(spec.dt, DIFFUSION);
    let mut ens = match start {
        Some(x0) => Ensemble::delta(x0, spec.n, spec.master_seed)?,
        None => {
            let (lo, hi) = model.support(0.0);
            let born = InverseCdf::new(|x| model.density(x, 0.0).unwrap_or(0.0), lo, hi)?;
            Ensemble::new(born.sample(spec.n, spec.master_seed), 0.0, spec.master_seed)?
        }
    };
    track_relaxation(&mut ens, model, &cfg, spec.t_end, spec.observe_every, spec.bins, |t, xs, tr| {
        tr.observe(t, xs, model.support(t), |x| model.density(x, t))
    })
}

pub fn run_superposition_study(spec: &StudySpec) -> Result<StudyOutput, ExperimentError> {
    spec.validate()?;
    let factor = spec.scalar("floor_factor")?;
    let mut report = StudyReport::new(spec);
    let mut series = Vec::new();
    for &start in spec.list("start")? {
        for &deg in spec.list("mix_deg")? {
            let model = OscillatorEigenModel::ground_first_degrees(deg)?;
            let mut rec =
                PointRecord::new(BTreeMap::from([("mix_deg".into(), deg), ("start".into(), start)]), report.provenance.clone());
            let dir = rec.dir(spec.scenario, &["mix_deg", "start"]);
            let (tracker, log) = track_superposition(&model, spec, Some(start))?;
            rec.counters = Some(log.counters);
            series.extend(distance_artifacts(&dir, "", &tracker));
            if spec.control {
                let (ctl, _) = track_superposition(&model, spec, None)?;
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
            report.records.push(rec);
        }
    }
    Ok(StudyOutput { report, series })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_series_relaxes() {
        let m = OscillatorGaussian::from_inv_width(2.0).unwrap();
        let (t, g) = gamma_series(&m, 3.0, 1e-3).unwrap();
        assert_eq!(t.len(), 3000);
        assert!(g[0] > 100.0 && (g[2999] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn crossing_counts_other_side() {
        assert_eq!(crossing_fraction(&[1.0, -0.5, 2.0, -3.0], 1.0), 0.5);
        assert_eq!(crossing_fraction(&[1.0, -0.5, 2.0, -3.0], -1.0), 0.5);
        assert_eq!(crossing_fraction(&[-1.0, -0.5], -1.0), 0.0);
    }

    #[test]
    fn precision_of_known_sample() {
        let xs = [-1.0, 1.0, -1.0, 1.0];
        assert!((precision_of(&xs) - 0.75).abs() < 1e-15);
    }
}
