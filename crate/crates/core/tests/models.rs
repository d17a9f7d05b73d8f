use nelson_relax::models::airy::{airy_pair, airy_zeros, gaussian_airy_integral};
use nelson_relax::models::eigen::OscillatorEigenModel;
use nelson_relax::models::{DoubleSlitModel, GravityModel, OscillatorGaussian, WavefunctionModel};
use nelson_relax::numerics::quad::integrate;
use proptest::prelude::*;

// reference values from 30-digit arbitrary-precision evaluation
const AIRY_TABLE: [(f64, f64, f64); 8] = [
    (-50.0, -0.161_881_423_612_320_92, 0.968_989_837_276_749_1),
    (-7.5, 0.321_775_716_380_647_9, 0.318_809_506_698_554_6),
    (-2.0, 0.227_407_428_201_685_58, 0.618_259_020_741_691_04),
    (-1.0, 0.535_560_883_292_352_1, -0.010_160_567_116_645_209),
    (0.5, 0.231_693_606_480_833_5, -0.224_910_532_664_683_9),
    (2.5, 0.015_725_923_380_470_49, -0.026_250_881_035_903_23),
    (5.0, 1.083_444_281_360_744_2e-4, -2.474_138_908_684_624_8e-4),
    (10.0, 1.104_753_255_289_868_6e-10, -3.520_633_676_738_923_6e-10),
];

const AIRY_ZEROS: [(usize, f64); 6] = [
    (1, 2.338_107_410_459_767),
    (2, 4.087_949_444_130_971),
    (3, 5.520_559_828_095_551),
    (10, 12.828_776_752_865_757),
    (100, 60.455_557_274_116_7),
    (1000, 281.031_519_612_521_55),
];

#[test]
fn airy_matches_reference_values() {
    for (x, ai, aip) in AIRY_TABLE {
        let (a, b) = airy_pair(x).unwrap();
        let scale = |v: f64| if v.abs() < 1e-3 { v.abs() } else { 1.0 };
        assert!((a - ai).abs() <= 1e-10 * scale(ai), "Ai({x}) = {a}, want {ai}");
        assert!((b - aip).abs() <= 1e-10 * scale(aip), "Ai'({x}) = {b}, want {aip}");
    }
}

#[test]
fn airy_zeros_match_reference_roots() {
    let z = airy_zeros(1000).unwrap();
    for (k, e) in AIRY_ZEROS {
        assert!((z[k - 1] - e).abs() < 1e-10, "zero {k}: {} vs {e}", z[k - 1]);
    }
    assert!(z.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn gaussian_airy_identity_on_grid() {
    for a in [0.1, 0.3] {
        for b in [-1.0, 0.0, 2.0] {
            let q = integrate(|u| (-u * u).exp() * airy_pair(2.0 * a * u + b).unwrap().0, -9.0, 9.0, 1e-14, 1e-14);
            let closed = gaussian_airy_integral(a, b).unwrap();
            assert!((q.value - closed).abs() < 1e-8, "({a}, {b}): {} vs {closed}", q.value);
        }
    }
}

#[test]
fn double_slit_norm_is_preserved() {
    let m = DoubleSlitModel::new(0.3).unwrap();
    for t in [0.0, 0.1, 1.0] {
        let q = integrate(|x| m.density_at(x, t), -30.0, 30.0, 1e-12, 1e-12);
        assert!((q.value - 1.0).abs() < 1e-9, "t = {t}: {}", q.value);
    }
}

#[test]
fn gravity_packet_is_normalized_and_vanishes_at_mirror() {
    let m = GravityModel::auto(2.5, 0.09).unwrap();
    let q = integrate(|x| m.density(x, 0.0).unwrap(), 0.0, 5.0, 1e-10, 1e-10);
    assert!((q.value - 1.0).abs() < 2e-3, "{}", q.value);
    assert!(m.density(0.0, 0.3).unwrap() < 1e-20);
}

#[test]
fn ground_state_drift_restores() {
    let m = OscillatorGaussian::from_inv_width(2.0).unwrap();
    for x in [-2.0, -0.5, 0.5, 2.0] {
        assert!((m.drift(x, 0.7).unwrap() + 2.0 * x).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn double_slit_is_mirror_symmetric(sigma in 0.09f64..0.7, x in -4.0f64..4.0, t in 0.0f64..2.0) {
        let m = DoubleSlitModel::new(sigma).unwrap();
        let (p, q) = (m.density_at(x, t), m.density_at(-x, t));
        prop_assert!((p - q).abs() <= 1e-12 * p.max(1e-300));
        if let (Ok(a), Ok(b)) = (m.drift_at(x, t), m.drift_at(-x, t)) {
            prop_assert!((a + b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn gamma_exceeds_one_and_decreases_over_a_period(b0 in 0.125f64..32.0, t in 0.01f64..5.0) {
        let m = OscillatorGaussian::from_inv_width(b0).unwrap();
        let g = m.gamma(t).unwrap();
        prop_assert!(g > 1.0);
        prop_assert!(m.gamma(t + std::f64::consts::FRAC_PI_2).unwrap() < g);
    }

    #[test]
    fn mixture_density_is_nonnegative_and_node_drift_points_away(deg in 0.0f64..10.0, x in 0.05f64..0.3) {
        let m = OscillatorEigenModel::ground_first_degrees(deg).unwrap();
        prop_assert!(m.density(x, 0.0).unwrap() >= 0.0);
        if deg == 0.0 {
            prop_assert!(m.drift(x, 0.0).unwrap() > 0.0 && m.drift(-x, 0.0).unwrap() < 0.0);
        }
    }
}
