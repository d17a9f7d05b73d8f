//! Box-bounded Levenberg–Marquardt and the two fitting families used for
//! relaxation times: `L(t) = α₁ exp(-α₂ e^{α₃ t})` and `β₁ tanh(β₂σ² + β₃) + β₄`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::distances::DistanceSeries;
use super::StatsError;

pub const MIN_RELAXATION_POINTS: usize = 20;
pub const MIN_TANH_POINTS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub params: BTreeMap<String, f64>,
    /// Relaxation time implied by the fit, where the family defines one.
    pub tau_q: Option<f64>,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn param(&self, name: &str) -> f64 {
        self.params.get(name).copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub cost_tolerance: f64,
    pub step_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 2000, cost_tolerance: 1e-30, step_tolerance: 1e-14 }
    }
}

fn jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: &F, p: &[f64], r0: &[f64], lower: &[f64], upper: &[f64]) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(r0.len(), p.len());
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = 1e-7 * p[j].abs().max(1e-3);
        // central difference, falling back to one-sided at a bound
        let (lo, hi) = ((p[j] - h).max(lower[j]), (p[j] + h).min(upper[j]));
        q[j] = hi;
        let rp = if hi > p[j] { f(&q) } else { r0.to_vec() };
        q[j] = lo;
        let rm = if lo < p[j] { f(&q) } else { r0.to_vec() };
        q[j] = p[j];
        let span = hi - lo;
        for i in 0..r0.len() {
            jac[(i, j)] = (rp[i] - rm[i]) / span;
        }
    }
    jac
}

/// Largest residual–column cosine accepted as stationary; finite-difference
/// Jacobians limit how small it can be driven.
const GRADIENT_TOLERANCE: f64 = 1e-6;

fn cost(r: &[f64]) -> f64 {
    let c: f64 = r.iter().map(|v| v * v).sum();
    if c.is_finite() { c } else { f64::INFINITY }
}

/// Minimizes `Σ r_i(p)²` subject to `lower ≤ p ≤ upper`, with Marquardt
/// diagonal scaling and projection onto the box.
pub fn levenberg_marquardt<F: Fn(&[f64]) -> Vec<f64>>(
    residuals: F,
    p0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: LmOptions,
) -> LmOutcome {
    let n = p0.len();
    let clamp = |p: &mut [f64]| p.iter_mut().enumerate().for_each(|(j, v)| *v = v.clamp(lower[j], upper[j]));
    let mut p = p0.to_vec();
    clamp(&mut p);
    let mut r = residuals(&p);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    if !c.is_finite() {
        return LmOutcome { params: p, cost: c, iterations, converged };
    }
    while iterations < opts.max_iterations {
        iterations += 1;
        if c <= opts.cost_tolerance {
            converged = true;
            break;
        }
        let jac = jacobian(&residuals, &p, &r, lower, upper);
        let jt = jac.transpose();
        let a = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let scale_floor = 1e-12 * a.diagonal().max().max(1e-300);
        let mut improved = false;
        while lambda < 1e16 {
            let mut m = a.clone();
            for j in 0..n {
                m[(j, j)] += lambda * a[(j, j)].max(scale_floor);
            }
            let Some(step) = m.cholesky().map(|ch| ch.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            clamp(&mut trial);
            let rt = residuals(&trial);
            let ct = cost(&rt);
            if ct < c {
                let moved = trial.iter().zip(&p).map(|(a, b)| (a - b).abs() / b.abs().max(1e-3)).fold(0.0, f64::max);
                let drop = (c - ct) / c;
                p = trial;
                r = rt;
                c = ct;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if moved < opts.step_tolerance || drop < 1e-15 {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            // no descent possible: stationary if the residual is orthogonal to
            // every Jacobian column (scale-free, so noisy residuals qualify)
            let rn = c.sqrt();
            let cosine = (0..n).map(|j| g[j].abs() / (jac.column(j).norm() * rn).max(1e-300)).fold(0.0, f64::max);
            converged = cosine <= GRADIENT_TOLERANCE || c <= opts.cost_tolerance.max(1e-24);
            break;
        }
        if converged {
            break;
        }
    }
    LmOutcome { params: p, cost: c, iterations, converged }
}

/// Least-squares line `y = a + b x`.
fn line_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

const RELAX_LOWER: [f64; 3] = [-60.0, -1e4, -1e4];
const RELAX_UPPER: [f64; 3] = [60.0, 1e4, 1e4];

/// Fits `ln L = ln α₁ − α₂ e^{α₃ t}`; `τ_q = 1/(α₂α₃)`.
///
/// Both signs of `(α₂, α₃)` are admitted: with both negative the family decays
/// from above onto the plateau `α₁`, which is how a noise floor shows up.
pub fn fit_relaxation(series: &DistanceSeries) -> Result<FitResult, StatsError> {
    let (t, l) = (&series.times, &series.values);
    if t.len() < MIN_RELAXATION_POINTS {
        return Err(StatsError::InsufficientData { got: t.len(), need: MIN_RELAXATION_POINTS });
    }
    if l.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(StatsError::InvalidInput("relaxation fit needs positive finite values".into()));
    }
    let y: Vec<f64> = l.iter().map(|v| v.ln()).collect();
    let residuals = |p: &[f64]| -> Vec<f64> {
        t.iter().zip(&y).map(|(ti, yi)| p[0] - p[1] * (p[2] * ti).exp() - yi).collect()
    };
    let (lmax, lmin) = (l.iter().copied().fold(f64::MIN, f64::max), l.iter().copied().fold(f64::MAX, f64::min));

    let mut starts: Vec<[f64; 3]> = Vec::new();
    // decaying to zero: ln ln(α₁/L) = ln α₂ + α₃ t
    for scale in [1.0, 1.2, 2.0, 5.0] {
        let a1 = l[0].max(lmax) * scale;
        let (xs, zs): (Vec<f64>, Vec<f64>) =
            t.iter().zip(l).filter(|(_, v)| **v < 0.99 * a1).map(|(ti, v)| (*ti, (a1 / v).ln().ln())).unzip();
        if let Some((c, s)) = line_fit(&xs, &zs) {
            starts.push([a1.ln(), c.exp(), s]);
        }
    }
    // decaying onto a plateau: ln ln(L/α₁) = ln(-α₂) + α₃ t
    for scale in [0.3, 0.7, 0.95] {
        let floor = lmin * scale;
        let (xs, zs): (Vec<f64>, Vec<f64>) =
            t.iter().zip(l).filter(|(_, v)| **v > 1.01 * floor).map(|(ti, v)| (*ti, (v / floor).ln().ln())).unzip();
        if let Some((c, s)) = line_fit(&xs, &zs) {
            starts.push([floor.ln(), -c.exp(), s]);
        }
    }
    let span = t[t.len() - 1] - t[0];
    starts.push([lmax.ln(), 1.0, 1.0 / span]);

    let mut best: Option<LmOutcome> = None;
    for s in starts {
        let s = [s[0], s[1].clamp(RELAX_LOWER[1], RELAX_UPPER[1]), s[2].clamp(RELAX_LOWER[2], RELAX_UPPER[2])];
        let out = levenberg_marquardt(residuals, &s, &RELAX_LOWER, &RELAX_UPPER, LmOptions::default());
        if best.as_ref().map_or(true, |b| out.cost < b.cost) {
            best = Some(out);
        }
    }
    let best = best.expect("at least one start");
    let p = &best.params;
    let tau = 1.0 / (p[1] * p[2]);
    let result = FitResult {
        model: "relaxation".into(),
        params: BTreeMap::from([
            ("alpha1".to_string(), p[0].exp()),
            ("alpha2".to_string(), p[1]),
            ("alpha3".to_string(), p[2]),
        ]),
        tau_q: Some(tau),
        residual_norm: best.cost.sqrt(),
        converged: best.converged,
        iterations: best.iterations,
    };
    let decade = lmax / lmin >= 10.0;
    if !decade || !best.converged || !result.residual_norm.is_finite() || !(tau > 0.0 && tau.is_finite()) {
        return Err(StatsError::FitDiverged(Box::new(FitResult { converged: false, ..result })));
    }
    Ok(result)
}

/// `β₁ tanh(β₂σ² + β₃) + β₄`, reported with `β₂ > 0`.
pub fn fit_tanh(points: &[(f64, f64)]) -> Result<FitResult, StatsError> {
    if points.len() < MIN_TANH_POINTS {
        return Err(StatsError::InsufficientData { got: points.len(), need: MIN_TANH_POINTS });
    }
    if points.iter().any(|(s, t)| !s.is_finite() || !t.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite point in tanh fit".into()));
    }
    let s2: Vec<f64> = points.iter().map(|(s, _)| s * s).collect();
    let tau: Vec<f64> = points.iter().map(|(_, t)| *t).collect();
    let residuals = |p: &[f64]| -> Vec<f64> {
        s2.iter().zip(&tau).map(|(x, y)| p[0] * (p[1] * x + p[2]).tanh() + p[3] - y).collect()
    };
    let lower = [-1e6; 4];
    let upper = [1e6; 4];
    let xmax = s2.iter().copied().fold(0.0, f64::max).max(1e-12);

    let mut best: Option<LmOutcome> = None;
    for k in [0.3, 1.0, 3.0, 10.0, 30.0] {
        for b3 in [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
            let b2 = k / xmax;
            // outer amplitude and offset are linear given (β₂, β₃)
            let u: Vec<f64> = s2.iter().map(|x| (b2 * x + b3).tanh()).collect();
            let Some((b4, b1)) = line_fit(&u, &tau) else { continue };
            let out = levenberg_marquardt(residuals, &[b1, b2, b3, b4], &lower, &upper, LmOptions::default());
            if best.as_ref().map_or(true, |b| out.cost < b.cost) {
                best = Some(out);
            }
        }
    }
    let Some(best) = best else {
        return Err(StatsError::InvalidInput("tanh fit needs distinct abscissae".into()));
    };
    let mut p = best.params.clone();
    if p[1] < 0.0 {
        p[0] = -p[0];
        p[1] = -p[1];
        p[2] = -p[2];
    }
    let result = FitResult {
        model: "tanh".into(),
        params: BTreeMap::from([
            ("beta1".to_string(), p[0]),
            ("beta2".to_string(), p[1]),
            ("beta3".to_string(), p[2]),
            ("beta4".to_string(), p[3]),
        ]),
        tau_q: None,
        residual_norm: best.cost.sqrt(),
        converged: best.converged,
        iterations: best.iterations,
    };
    if !best.converged || !result.residual_norm.is_finite() {
        return Err(StatsError::FitDiverged(Box::new(FitResult { converged: false, ..result })));
    }
    Ok(result)
}

/// Evaluates the relaxation family at `t`.
pub fn relaxation_curve(fit: &FitResult, t: f64) -> f64 {
    fit.param("alpha1") * (-fit.param("alpha2") * (fit.param("alpha3") * t).exp()).exp()
}

/// Evaluates the tanh family at `sigma`.
pub fn tanh_curve(fit: &FitResult, sigma: f64) -> f64 {
    fit.param("beta1") * (fit.param("beta2") * sigma * sigma + fit.param("beta3")).tanh() + fit.param("beta4")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::DistanceKind;

    fn synthetic(a: [f64; 3], n: usize, t_end: f64) -> DistanceSeries {
        let times: Vec<f64> = (0..n).map(|i| i as f64 * t_end / (n - 1) as f64).collect();
        let values = times.iter().map(|t| a[0] * (-a[1] * (a[2] * t).exp()).exp()).collect();
        DistanceSeries::from_parts(DistanceKind::L1, times, values).unwrap()
    }

    #[test]
    fn relaxation_round_trip() {
        let fit = fit_relaxation(&synthetic([0.5, 0.8, 3.0], 60, 1.0)).unwrap();
        assert!((fit.param("alpha1") - 0.5).abs() < 1e-6 * 0.5);
        assert!((fit.param("alpha2") - 0.8).abs() < 1e-6 * 0.8);
        assert!((fit.param("alpha3") - 3.0).abs() < 1e-6 * 3.0);
        assert!((fit.tau_q.unwrap() - 1.0 / 2.4).abs() < 1e-6);
    }

    #[test]
    fn plateau_branch() {
        // decays from ~1 onto 0.01
        let fit = fit_relaxation(&synthetic([0.01, -4.6, -5.0], 80, 2.0)).unwrap();
        assert!((fit.param("alpha1") - 0.01).abs() < 1e-8);
        assert!((fit.tau_q.unwrap() - 1.0 / 23.0).abs() < 1e-6);
    }

    #[test]
    fn flat_series_diverges() {
        let times: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let s = DistanceSeries::from_parts(DistanceKind::L1, times, vec![0.3; 30]).unwrap();
        assert!(matches!(fit_relaxation(&s), Err(StatsError::FitDiverged(_))));
    }

    #[test]
    fn tanh_round_trip() {
        let beta = [0.1, 5.0, -0.5, 0.15];
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let s = 0.05 + 0.05 * i as f64;
                (s, beta[0] * (beta[1] * s * s + beta[2]).tanh() + beta[3])
            })
            .collect();
        let fit = fit_tanh(&pts).unwrap();
        for (name, want) in ["beta1", "beta2", "beta3", "beta4"].iter().zip(beta) {
            assert!((fit.param(name) - want).abs() < 1e-6 * want.abs(), "{name}: {}", fit.param(name));
        }
        assert!(matches!(fit_tanh(&pts[..2]), Err(StatsError::InsufficientData { .. })));
    }

    #[test]
    fn lm_respects_bounds() {
        let out = levenberg_marquardt(|p| vec![p[0] - 5.0], &[0.0], &[-1.0], &[2.0], LmOptions::default());
        assert_eq!(out.params[0], 2.0);
    }
}
