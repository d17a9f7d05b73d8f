use nelson_relax::sde::InverseCdf;
use nelson_relax::stats::timescales::{detect_phase_boundaries, detect_peaks_prominence, PEAK_BAND};
use nelson_relax::stats::{
    distance, entropy_h, estimate_density, fit_relaxation, fit_tanh, lp_distance, DistanceKind, DistanceSeries, GridSpec, StatsError,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal as NormalDist};
use statrs::distribution::{Continuous, Normal};

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn pdf(mean: f64, sd: f64, xs: &[f64]) -> Vec<f64> {
    let d = Normal::new(mean, sd).unwrap();
    xs.iter().map(|&x| d.pdf(x)).collect()
}

#[test]
fn shifted_gaussians_l1() {
    let xs = grid(-12.0, 13.0, 50_001);
    let d = lp_distance(&xs, &pdf(0.0, 1.0, &xs), &pdf(1.0, 1.0, &xs), 1).unwrap();
    // 2·erf(1/(2√2)), the full L1 (twice the total variation)
    assert!((d - 0.765_849_845_096_052).abs() < 1e-6, "{d}");
}

#[test]
fn entropy_matches_gaussian_kl() {
    let xs = grid(-30.0, 30.0, 60_001);
    for (s1, s2) in [(1.0, 2.0), (0.5, 1.0), (1.5, 2.0)] {
        let h = entropy_h(&xs, &pdf(0.0, s1, &xs), &pdf(0.0, s2, &xs)).unwrap();
        let kl = (s2 / s1).ln() + s1 * s1 / (2.0 * s2 * s2) - 0.5;
        assert!((h - kl).abs() < 1e-6, "({s1},{s2}): {h} vs {kl}");
    }
}

#[test]
fn entropy_rejects_missing_support() {
    let xs = grid(0.0, 1.0, 11);
    let f = vec![1.0; 11];
    let mut g = vec![1.0; 11];
    g[5] = 0.0;
    assert!(matches!(entropy_h(&xs, &f, &g), Err(StatsError::SupportMismatch { .. })));
}

#[test]
fn million_sample_density_is_close() {
    let sample = InverseCdf::new(|x| (-x * x / 2.0).exp(), -9.0, 9.0).unwrap().sample(1_000_000, 17);
    let spec = GridSpec::new(-5.0, 5.0, 200).unwrap();
    let est = estimate_density(&sample, spec).unwrap();
    let xs = spec.fine_points(4);
    let d = distance(DistanceKind::L1, &xs, &est.eval_many(&xs), &pdf(0.0, 1.0, &xs)).unwrap();
    assert!(d < 0.02, "{d}");
    assert!((est.integral() - 1.0).abs() < 1e-12);
}

fn relaxation_series(noise: &[f64]) -> DistanceSeries {
    let times: Vec<f64> = (0..100).map(|k| k as f64 * 0.02).collect();
    let values = times.iter().zip(noise).map(|(&t, e)| 0.5 * (-0.8 * (3.0 * t).exp()).exp() * (1.0 + e)).collect();
    DistanceSeries::from_parts(DistanceKind::H, times, values).unwrap()
}

#[test]
fn relaxation_fit_tolerates_percent_noise() {
    let exact = 1.0 / 2.4;
    let mut rng = StdRng::seed_from_u64(2024);
    let normal = NormalDist::new(0.0, 0.01).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let noise: Vec<f64> = (0..100).map(|_| normal.sample(&mut rng)).collect();
        let fit = fit_relaxation(&relaxation_series(&noise)).unwrap();
        worst = worst.max((fit.tau_q.unwrap() - exact).abs() / exact);
    }
    assert!(worst < 0.05, "worst relative error {worst}");
}

#[test]
fn relaxation_fit_tangent_crosses_zero_at_tau() {
    let fit = fit_relaxation(&relaxation_series(&[0.0; 100])).unwrap();
    let (a1, a2, a3) = (fit.param("alpha1"), fit.param("alpha2"), fit.param("alpha3"));
    let l0 = a1 * (-a2).exp();
    // dL/dt(0) = -α2α3 L(0), so the tangent L(0)(1 - t/τ) vanishes at τ
    let slope = -a2 * a3;
    let tau = fit.tau_q.unwrap();
    assert!((1.0 + slope * tau).abs() < 1e-9 && l0 > 0.0);
}

#[test]
fn tanh_fit_round_trip_and_precondition() {
    let beta = (0.1, 5.0, -0.5, 0.15);
    let pts: Vec<(f64, f64)> = (0..12)
        .map(|i| 0.09 + 0.06 * i as f64)
        .map(|s| (s, beta.0 * (beta.1 * s * s + beta.2).tanh() + beta.3))
        .collect();
    let fit = fit_tanh(&pts).unwrap();
    for (k, v) in [("beta1", beta.0), ("beta2", beta.1), ("beta3", beta.2), ("beta4", beta.3)] {
        assert!((fit.param(k) - v).abs() < 1e-6, "{k}: {}", fit.param(k));
    }
    assert!(fit_tanh(&pts[..2]).is_err());
}

/// Half-cosine interpolation through `(x, y)` knots.
fn cosine_path(knots: &[(f64, f64)], xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let i = knots.windows(2).position(|w| x <= w[1].0).unwrap_or(knots.len() - 2);
            let ((x0, y0), (x1, y1)) = (knots[i], knots[i + 1]);
            let u = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
            y0 + (y1 - y0) * 0.5 * (1.0 - (std::f64::consts::PI * u).cos())
        })
        .collect()
}

#[test]
fn prominence_fixture() {
    let xs = grid(0.0, 3.0, 3001);
    // main peak 1, then side peaks of prominence 0.3 and 0.04
    let knots = [(0.0, 0.0), (0.5, 1.0), (1.0, 0.1), (1.5, 0.4), (2.0, 0.3), (2.5, 0.34), (3.0, 0.0)];
    let y = cosine_path(&knots, &xs);
    let coarse = detect_peaks_prominence(&y, PEAK_BAND, 0.05);
    let fine = detect_peaks_prominence(&y, PEAK_BAND, 0.01);
    assert_eq!(coarse.len(), 1);
    assert!((coarse[0].prominence - 0.3).abs() < 1e-9);
    assert_eq!(fine.len(), 2);
    assert!((fine[1].prominence - 0.04).abs() < 1e-9);
    let single = pdf(0.0, 1.0, &xs);
    assert!(detect_peaks_prominence(&single, PEAK_BAND, 1e-4).is_empty());
}

#[test]
fn dip_bump_decay_fixture() {
    let dt = 0.005;
    let times: Vec<f64> = (0..=100).map(|k| k as f64 * dt).collect();
    let logs = cosine_path(&[(0.0, 0.0), (0.03, -3.0), (0.1, -2.0), (0.5, -6.0)], &times);
    let values: Vec<f64> = logs.iter().map(|v| v.exp()).collect();
    let (t1, t2) = detect_phase_boundaries(&times, &values, 0.05).unwrap();
    assert!((t1 - 0.03).abs() <= dt + 1e-12 && (t2 - 0.1).abs() <= dt + 1e-12, "({t1}, {t2})");
    let decay: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
    assert!(matches!(detect_phase_boundaries(&times, &decay, 0.05), Err(StatsError::MonotoneSeries)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distances_vanish_on_identical_inputs(mean in -1.0f64..1.0, sd in 0.3f64..2.0) {
        let xs = grid(-8.0, 8.0, 801);
        let f = pdf(mean, sd, &xs);
        for kind in DistanceKind::ALL {
            prop_assert!(distance(kind, &xs, &f, &f).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn holder_and_gibbs(m1 in -1.0f64..1.0, m2 in -1.0f64..1.0, s1 in 0.5f64..1.5, widen in 0.5f64..1.0) {
        // g is wider than f, so it covers wherever f is above the density floor
        let xs = grid(-10.0, 10.0, 2001);
        let (f, g) = (pdf(m1, s1, &xs), pdf(m2, s1 + widen, &xs));
        let l1 = lp_distance(&xs, &f, &g, 1).unwrap();
        let l2 = lp_distance(&xs, &f, &g, 2).unwrap();
        prop_assert!(l1 <= 20f64.sqrt() * l2 + 1e-12);
        prop_assert!(entropy_h(&xs, &f, &g).unwrap() >= -1e-9);
    }

    #[test]
    fn peaks_ignore_positive_rescaling(scale in 1e-3f64..1e3, p in 0.001f64..0.2) {
        let xs = grid(0.0, 3.0, 601);
        let y = cosine_path(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.1), (1.5, 0.4), (2.0, 0.3), (2.5, 0.34), (3.0, 0.0)], &xs);
        let scaled: Vec<f64> = y.iter().map(|v| v * scale).collect();
        let a: Vec<usize> = detect_peaks_prominence(&y, PEAK_BAND, p).iter().map(|q| q.index).collect();
        let b: Vec<usize> = detect_peaks_prominence(&scaled, PEAK_BAND, p).iter().map(|q| q.index).collect();
        prop_assert_eq!(a, b);
    }
}
