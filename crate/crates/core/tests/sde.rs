use nelson_relax::models::FnDrift;
use nelson_relax::sde::{rng_stream, simulate, Boundary, Ensemble, IntegratorConfig, InverseCdf, Scheme, SdeError};
use proptest::prelude::*;

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn free_diffusion_variance_grows_as_2dt() {
    let n = 40_000;
    let mut ens = Ensemble::delta(0.0, n, 1).unwrap();
    let cfg = IntegratorConfig::new(1e-2, 0.5).with_scheme(Scheme::EulerMaruyama);
    simulate(&mut ens, &FnDrift(|_x: f64, _t: f64| 0.0), &cfg, 1.0, 1.0, |_| Ok(())).unwrap();
    let (m, v) = moments(ens.positions());
    // exact variance 2 D t = 1
    let se = (2.0 / (n as f64 - 1.0)).sqrt();
    assert!(m.abs() < 4.0 / (n as f64).sqrt(), "{m}");
    assert!((v - 1.0).abs() < 4.0 * se, "{v}");
}

#[test]
fn ornstein_uhlenbeck_variance_matches_closed_form() {
    let n = 40_000;
    for scheme in [Scheme::EulerMaruyama, Scheme::Heun] {
        let mut ens = Ensemble::delta(0.0, n, 2).unwrap();
        let cfg = IntegratorConfig::new(1e-3, 1.0).with_scheme(scheme);
        simulate(&mut ens, &FnDrift(|x: f64, _t: f64| -x), &cfg, 1.0, 1.0, |_| Ok(())).unwrap();
        let exact = 1.0 - (-2.0f64).exp();
        let (_, v) = moments(ens.positions());
        let se = exact * (2.0 / (n as f64 - 1.0)).sqrt();
        assert!((v - exact).abs() < 4.0 * se, "{scheme:?}: {v} vs {exact}");
    }
}

#[test]
fn mirror_keeps_positions_nonnegative() {
    let mut ens = Ensemble::delta(0.05, 5_000, 3).unwrap();
    let cfg = IntegratorConfig::new(1e-3, 1.0).with_boundary(Boundary::ReflectAtZero);
    let log = simulate(&mut ens, &FnDrift(|_x: f64, _t: f64| -1.0), &cfg, 0.5, 0.1, |s| {
        if s.positions.iter().all(|&x| x >= 0.0) {
            Ok(())
        } else {
            Err("negative position".into())
        }
    })
    .unwrap();
    assert!(log.counters.reflections > 0);
    assert_eq!(log.observations, 6);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut ens = Ensemble::delta(0.3, 10_000, 42).unwrap();
            let cfg = IntegratorConfig::new(1e-3, 1.0);
            simulate(&mut ens, &FnDrift(|x: f64, t: f64| -x * (1.0 + t)), &cfg, 0.2, 0.2, |_| Ok(())).unwrap();
            ens.positions().to_vec()
        })
    };
    let a = run(1);
    assert_eq!(a, run(2));
    assert_eq!(a, run(5));
}

#[test]
fn blow_up_is_reported() {
    let mut ens = Ensemble::delta(1.0, 10, 0).unwrap();
    let cfg = IntegratorConfig::new(0.1, 0.5).with_scheme(Scheme::EulerMaruyama);
    let err = simulate(&mut ens, &FnDrift(|x: f64, _t: f64| 100.0 * x), &cfg, 10.0, 10.0, |_| Ok(())).unwrap_err();
    assert!(matches!(err, SdeError::BlowUp { .. }), "{err}");
}

#[test]
fn inverse_cdf_sample_has_target_moments() {
    let s = InverseCdf::new(|x| (-x * x / 2.0).exp(), -9.0, 9.0).unwrap().sample(100_000, 9);
    let (m, v) = moments(&s);
    assert!(m.abs() < 0.01 && (v - 1.0).abs() < 0.015, "{m} {v}");
}

proptest! {
    #[test]
    fn streams_replay_and_separate(seed in any::<u64>(), id in 0u64..1_000_000) {
        let mut a = rng_stream(seed, id);
        let mut b = rng_stream(seed, id);
        let mut c = rng_stream(seed, id + 1);
        let xa: Vec<f64> = (0..8).map(|_| a.standard_normal()).collect();
        let xb: Vec<f64> = (0..8).map(|_| b.standard_normal()).collect();
        let xc: Vec<f64> = (0..8).map(|_| c.standard_normal()).collect();
        prop_assert_eq!(&xa, &xb);
        prop_assert_ne!(&xa, &xc);
        prop_assert!(xa.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn uniforms_lie_in_unit_interval(seed in any::<u64>()) {
        let mut s = rng_stream(seed, 0);
        for _ in 0..64 {
            let u = s.uniform();
            prop_assert!((0.0..1.0).contains(&u));
        }
    }
}
