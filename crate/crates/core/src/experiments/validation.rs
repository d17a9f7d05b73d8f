//! Fast self-checks of the numerical building blocks and the controls each
//! study relies on.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use super::double_slit::{self, interference_time};
use super::gravity::{gravity_field, track_gravity};
use super::oscillator::{self, gamma_series, theta_relaxation_time};
use super::tracking::DistanceTracker;
use super::{run_study, track_relaxation, ExperimentError, Scenario, StudySpec};
use crate::models::airy::{airy_pair, airy_zeros, gaussian_airy_integral};
use crate::models::eigen::OscillatorEigenModel;
use crate::models::oscillator::riccati_gamma;
use crate::models::{DoubleSlitModel, DriftField, OscillatorGaussian, WavefunctionModel};
use crate::numerics::quad::integrate;
use crate::sde::{Ensemble, InverseCdf};
use crate::stats::fit::relaxation_curve;
use crate::stats::{fit_relaxation, lp_distance, sliding_rms, DistanceKind, DistanceSeries};

/// One row of the validation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl ValidationCheck {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }

    fn from_result(name: &str, r: Result<(bool, String), ExperimentError>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

/// Largest `|closed form - quadrature|` of the Gaussian–Airy identity over
/// `(a, b) ∈ {0.1, 0.3} × {-1, 0, 2}`.
pub fn airy_identity_error() -> Result<f64, ExperimentError> {
    let mut worst: f64 = 0.0;
    for a in [0.1, 0.3] {
        for b in [-1.0, 0.0, 2.0] {
            let mut failure = None;
            let q = integrate(
                |u| match airy_pair(2.0 * a * u + b) {
                    Ok((ai, _)) => (-u * u).exp() * ai,
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                },
                -9.0,
                9.0,
                1e-14,
                1e-14,
            );
            if let Some(e) = failure {
                return Err(e.into());
            }
            worst = worst.max((q.value - gaussian_airy_integral(a, b)?).abs());
        }
    }
    Ok(worst)
}

/// Largest gap between the first `k` tabulated Airy zeros and Newton roots
/// started a small distance away.
pub fn airy_zero_error(k: usize) -> Result<f64, ExperimentError> {
    let zeros = airy_zeros(k)?;
    let mut worst: f64 = 0.0;
    for &z in &zeros {
        let mut e = z + 1e-3;
        for _ in 0..50 {
            let (ai, aip) = airy_pair(-e)?;
            // d/de Ai(-e) = -Ai'(-e)
            let delta = ai / aip;
            e += delta;
            if delta.abs() < 1e-15 * e {
                break;
            }
        }
        worst = worst.max((e - z).abs());
    }
    Ok(worst)
}

/// Largest relative gap between the closed-form `gamma` and direct integration
/// of the precision equation over `times`.
pub fn riccati_oracle_error(b0: f64, times: &[f64]) -> Result<f64, ExperimentError> {
    let model = OscillatorGaussian::from_inv_width(b0)?;
    let ode = model.precision_ode(None, times)?;
    let mut worst: f64 = 0.0;
    for (&t, c) in times.iter().zip(ode) {
        let closed = riccati_gamma(|s| model.state(s).inv_width, t)?;
        let direct = c / model.state(t).inv_width;
        worst = worst.max(((closed - direct) / direct).abs());
    }
    Ok(worst)
}

/// `tau_q(sigma0)` from the `gamma`/Θ pipeline at one threshold.
pub fn oscillator_tau_curve(sigma0s: &[f64], theta: f64, window: usize, step: f64, t_end: f64) -> Result<Vec<f64>, ExperimentError> {
    sigma0s
        .iter()
        .map(|&s| {
            let model = OscillatorGaussian::from_width(s)?;
            let (times, gammas) = gamma_series(&model, t_end, step)?;
            let rms = sliding_rms(&gammas, window)?;
            Ok(theta_relaxation_time(&times, &rms, theta, window)?)
        })
        .collect()
}

/// Initial and largest distances of a Born-sampled ensemble, per kind.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumControl {
    pub initial: BTreeMap<DistanceKind, f64>,
    pub max: BTreeMap<DistanceKind, f64>,
}

impl EquilibriumControl {
    fn from_tracker(tr: &DistanceTracker) -> Self {
        let mut initial = BTreeMap::new();
        let mut max = BTreeMap::new();
        for s in tr.all_series() {
            if let Some(&first) = s.values.first() {
                initial.insert(s.kind, first);
                max.insert(s.kind, s.values.iter().copied().fold(0.0, f64::max));
            }
        }
        Self { initial, max }
    }

    /// Largest `max / initial` across kinds.
    pub fn worst_ratio(&self) -> f64 {
        self.max.iter().map(|(k, m)| m / self.initial[k]).fold(0.0, f64::max)
    }
}

/// Runs a Born-sampled ensemble of `model` and records its distances.
pub fn born_control<M>(model: &M, spec: &StudySpec, diffusion: f64) -> Result<EquilibriumControl, ExperimentError>
where
    M: WavefunctionModel + DriftField,
{
    let (lo, hi) = model.support(0.0);
    let born = InverseCdf::new(|x| model.density(x, 0.0).unwrap_or(0.0), lo, hi)?;
    let mut ens = Ensemble::new(born.sample(spec.n, spec.master_seed), 0.0, spec.master_seed)?;
    let cfg = spec.integrator(spec.dt, diffusion);
    let (tr, _) = track_relaxation(&mut ens, model, &cfg, spec.t_end, spec.observe_every, spec.bins, |t, xs, tr| {
        tr.observe(t, xs, model.support(t), |x| model.density(x, t))
    })?;
    Ok(EquilibriumControl::from_tracker(&tr))
}

/// Equilibrium controls for the three physical settings, sized by `n`.
pub fn equilibrium_controls(n: usize, seed: u64) -> Result<BTreeMap<&'static str, EquilibriumControl>, ExperimentError> {
    let mut out = BTreeMap::new();

    let mut spec = StudySpec::defaults(Scenario::DoubleSlit);
    (spec.n, spec.master_seed, spec.t_end, spec.observe_every) = (n, seed, 0.2, 1e-2);
    let ds = DoubleSlitModel::with_separation(0.3, double_slit::HALF_SEPARATION)?;
    out.insert("double-slit", born_control(&ds, &spec, double_slit::DIFFUSION)?);

    let mut spec = StudySpec::defaults(Scenario::Oscillator);
    (spec.n, spec.master_seed, spec.t_end, spec.observe_every) = (n, seed, 2.0, 5e-2);
    // an even mixture sloshes without changing its peak height, so absolute
    // measures keep a comparable noise level throughout
    let osc = OscillatorEigenModel::ground_first_degrees(45.0)?;
    out.insert("oscillator", born_control(&osc, &spec, oscillator::DIFFUSION)?);

    let mut spec = StudySpec::defaults(Scenario::Gravity);
    (spec.n, spec.master_seed, spec.t_end, spec.observe_every) = (n, seed, 0.1, 5e-3);
    let field = gravity_field(1.5, spec.scalar("zeta")?, spec.t_end, spec.scalar("table_dx")?)?;
    let (tr, _) = track_gravity(&field, &spec, None)?;
    out.insert("gravity", EquilibriumControl::from_tracker(&tr));
    Ok(out)
}

/// Serialized outputs of a small double-slit study run on a pool of `threads`.
pub fn determinism_fingerprint(threads: usize) -> Result<String, ExperimentError> {
    let mut spec = StudySpec::defaults(Scenario::DoubleSlit);
    spec.grid.insert("sigma".into(), vec![0.3]);
    (spec.n, spec.t_end, spec.observe_every) = (4000, 0.02, 2e-3);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ExperimentError::InvalidSpec(e.to_string()))?;
    let out = pool.install(|| run_study(&spec))?;
    let mut text = serde_json::to_string(&out.report).expect("report serializes");
    for s in &out.series {
        text.push_str(&crate::stats::series_csv(&s.times, &s.values));
    }
    Ok(text)
}

/// Runs every check; none aborts the rest.
pub fn run_validation_suite() -> Vec<ValidationCheck> {
    let mut checks = Vec::new();

    checks.push(ValidationCheck::from_result(
        "airy-gaussian-identity",
        airy_identity_error().map(|e| (e < 1e-8, format!("max error {e:.2e} (tolerance 1e-8)"))),
    ));
    checks.push(ValidationCheck::from_result(
        "airy-zeros-newton",
        airy_zero_error(200).map(|e| (e < 1e-10, format!("max gap over 200 zeros {e:.2e} (tolerance 1e-10)"))),
    ));

    let times: Vec<f64> = (0..=50).map(|k| 0.05 + 4.95 * k as f64 / 50.0).collect();
    checks.push(ValidationCheck::from_result(
        "riccati-vs-ode",
        [0.125, 0.5, 2.0, 8.0]
            .iter()
            .map(|&b0| riccati_oracle_error(b0, &times))
            .collect::<Result<Vec<_>, _>>()
            .map(|v| {
                let worst = v.iter().copied().fold(0.0, f64::max);
                (worst < 1e-6, format!("max relative error {worst:.2e} (tolerance 1e-6)"))
            }),
    ));

    let sigma0s = [0.25, 0.5, 1.0, 2.0, 4.0];
    checks.push(ValidationCheck::from_result(
        "oscillator-saturation",
        oscillator_tau_curve(&sigma0s, 5e-4, 10, 1e-4, 5.0).map(|tau| {
            let increasing = tau.windows(2).all(|w| w[1] > w[0]);
            let bounded = tau.iter().all(|&t| t > 0.0 && t <= FRAC_PI_4 + 0.02);
            let saturated = tau[tau.len() - 1] >= 0.95 * FRAC_PI_4;
            (increasing && bounded && saturated, format!("tau_q = {tau:.4?}"))
        }),
    ));

    checks.push(ValidationCheck::from_result(
        "interference-onset-order",
        (|| {
            let t = [0.2, 0.3, 0.5]
                .iter()
                .map(|&s| Ok(interference_time(&DoubleSlitModel::new(s)?, 5.0, 1e-3)?))
                .collect::<Result<Vec<_>, ExperimentError>>()?;
            Ok((t.windows(2).all(|w| w[1] > w[0]), format!("tau_int = {t:.3?}")))
        })(),
    ));

    let b = OscillatorEigenModel::first_excited().drift(0.1, 0.0);
    checks.push(ValidationCheck::from_result(
        "node-repulsion",
        b.map_err(ExperimentError::from).map(|b| ((b - 2.0 * (1.0 / 0.1 - 0.1)).abs() < 1e-9, format!("drift at x = 0.1 is {b:.6}"))),
    ));

    checks.push(ValidationCheck::from_result(
        "relaxation-fit-round-trip",
        (|| {
            let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.01).collect();
            let values = times.iter().map(|&t| 0.5 * (-0.8 * (3.0 * t).exp()).exp()).collect();
            let fit = fit_relaxation(&DistanceSeries::from_parts(DistanceKind::L1, times, values)?)?;
            let tau = fit.tau_q.unwrap_or(f64::NAN);
            let ok = (tau - 1.0 / 2.4).abs() < 1e-6 && (relaxation_curve(&fit, 1.0) - 0.5 * (-0.8 * 3f64.exp()).exp()).abs() < 1e-9;
            Ok((ok, format!("tau_q = {tau:.9}")))
        })(),
    ));

    checks.push(ValidationCheck::from_result(
        "l1-gaussian-shift",
        (|| {
            let xs: Vec<f64> = (0..=20000).map(|i| -12.0 + 24.0 * i as f64 / 20000.0).collect();
            let n = |x: f64, m: f64| (-(x - m) * (x - m) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let f: Vec<f64> = xs.iter().map(|&x| n(x, 0.0)).collect();
            let g: Vec<f64> = xs.iter().map(|&x| n(x, 1.0)).collect();
            let d = lp_distance(&xs, &f, &g, 1)?;
            Ok(((d - 0.765_849_845_096_052).abs() < 1e-5, format!("L1 = {d:.9}")))
        })(),
    ));

    match equilibrium_controls(20_000, 20_240_601) {
        Ok(controls) => {
            for (name, c) in controls {
                let r = c.worst_ratio();
                checks.push(ValidationCheck::new(
                    &format!("equilibrium-{name}"),
                    r <= 2.0,
                    format!("max distance / initial distance = {r:.3} (limit 2)"),
                ));
            }
        }
        Err(e) => checks.push(ValidationCheck::new("equilibrium", false, format!("error: {e}"))),
    }

    checks.push(ValidationCheck::from_result(
        "thread-count-determinism",
        (|| {
            let a = determinism_fingerprint(1)?;
            let b = determinism_fingerprint(3)?;
            Ok((a == b, format!("{} bytes compared", a.len())))
        })(),
    ));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_zero_oracles() {
        assert!(airy_identity_error().unwrap() < 1e-8);
        assert!(airy_zero_error(50).unwrap() < 1e-10);
    }

    #[test]
    fn riccati_matches_ode() {
        assert!(riccati_oracle_error(2.0, &[0.05, 0.5, 1.3, 5.0]).unwrap() < 1e-6);
    }

    #[test]
    fn worst_ratio_over_kinds() {
        let c = EquilibriumControl {
            initial: BTreeMap::from([(DistanceKind::L1, 0.1), (DistanceKind::H, 0.01)]),
            max: BTreeMap::from([(DistanceKind::L1, 0.15), (DistanceKind::H, 0.03)]),
        };
        assert!((c.worst_ratio() - 3.0).abs() < 1e-12);
    }
}
