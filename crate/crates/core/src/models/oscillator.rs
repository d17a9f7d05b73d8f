//! Breathing Gaussian in the harmonic well, units `hbar = 1`, `m = 1/2`, `omega = 2`
//! (so the Hamiltonian is `-d²/dx² + x²` and `D_Q = 1`).
//!
//! The state `(B/2π)^{1/4} exp(-B x²/4 + i(A x²/2 + a))` obeys
//!
//! ```text
//! A' = B²/2 - 2A² - 2,   a' = -B/2,   B' = -4AB.
//! ```
//!
//! With `u = -B/2 + iA` this is the constant-coefficient Riccati equation
//! `u' = -2i(1 - u²)`, solved by `u = (u0 cos 2t - i sin 2t) / (cos 2t - i u0 sin 2t)`.
//! The denominator `d(t)` also gives the phase: `∫B = arg d`, unwrapped.
//!
//! A delta-started ensemble stays Gaussian with precision `C(t)`; `gamma = C/B`
//! relaxes to 1. Since `∫_0^t B φ = (1 - φ)/2` for `φ = exp(-2∫B)`, the Riccati
//! solution collapses to `gamma = 1/(1 - φ)`.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{ComplexValue, DriftField, DriftFrame, ModelError, WavefunctionModel};
use crate::numerics::ode::{integrate_to, Tolerance};
use crate::numerics::quad::integrate;

/// Breathing period of `A` and `B`.
pub const PERIOD: f64 = FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorGaussianState {
    /// Phase curvature `A`.
    pub curvature: f64,
    /// Inverse squared width `B = 2/σ²`.
    pub inv_width: f64,
    /// Global phase `a`.
    pub phase: f64,
    pub t: f64,
}

impl OscillatorGaussianState {
    /// Coefficient of `x` in the Nelson drift.
    pub fn drift_slope(&self) -> f64 {
        2.0 * self.curvature - self.inv_width
    }

    pub fn drift(&self, x: f64) -> f64 {
        self.drift_slope() * x
    }

    pub fn psi(&self, x: f64) -> ComplexValue {
        let b = self.inv_width;
        let amp = (b / (2.0 * PI)).powf(0.25) * (-b * x * x / 4.0).exp();
        ComplexValue::from_polar(amp, self.curvature * x * x / 2.0 + self.phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorGaussian {
    curvature0: f64,
    inv_width0: f64,
    phase0: f64,
}

impl OscillatorGaussian {
    pub fn new(curvature0: f64, inv_width0: f64, phase0: f64) -> Result<Self, ModelError> {
        if !(inv_width0 > 0.0 && inv_width0.is_finite()) || !curvature0.is_finite() || !phase0.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "need finite A0, a0 and B0 > 0, got A0 = {curvature0}, B0 = {inv_width0}, a0 = {phase0}"
            )));
        }
        Ok(Self { curvature0, inv_width0, phase0 })
    }

    /// Real, unchirped initial Gaussian with inverse squared width `b0`.
    pub fn from_inv_width(b0: f64) -> Result<Self, ModelError> {
        Self::new(0.0, b0, 0.0)
    }

    /// Initial width `σ0 = sqrt(2/B0)`.
    pub fn from_width(sigma0: f64) -> Result<Self, ModelError> {
        Self::from_inv_width(2.0 / (sigma0 * sigma0))
    }

    pub fn inv_width0(&self) -> f64 {
        self.inv_width0
    }

    fn u0(&self) -> ComplexValue {
        ComplexValue::new(-self.inv_width0 / 2.0, self.curvature0)
    }

    fn denominator(&self, t: f64) -> ComplexValue {
        let (s, c) = (2.0 * t).sin_cos();
        ComplexValue::new(c, 0.0) - ComplexValue::i() * self.u0() * s
    }

    /// `∫_0^t B(τ) dτ`, continuous in `t`.
    pub fn integrated_inv_width(&self, t: f64) -> f64 {
        let k = (t / PERIOD).floor();
        let d = self.denominator(t - k * PERIOD);
        k * PI + d.im.atan2(d.re)
    }

    pub fn state(&self, t: f64) -> OscillatorGaussianState {
        let (s, c) = (2.0 * t).sin_cos();
        let u0 = self.u0();
        let u = (u0 * c - ComplexValue::i() * s) / self.denominator(t);
        OscillatorGaussianState {
            curvature: u.im,
            inv_width: -2.0 * u.re,
            phase: self.phase0 - 0.5 * self.integrated_inv_width(t),
            t,
        }
    }

    /// `φ(t) = exp(-2∫B)`.
    pub fn phi(&self, t: f64) -> f64 {
        (-2.0 * self.integrated_inv_width(t)).exp()
    }

    /// `gamma = C/B` for a delta-started ensemble, `1/(1 - φ)`.
    pub fn gamma(&self, t: f64) -> Result<f64, ModelError> {
        let one_minus_phi = -(-2.0 * self.integrated_inv_width(t)).exp_m1();
        if !(one_minus_phi > f64::MIN_POSITIVE) {
            return Err(ModelError::DivergentGamma { t });
        }
        Ok(1.0 / one_minus_phi)
    }

    /// Ensemble precision `C(t)` for a delta start.
    pub fn precision(&self, t: f64) -> Result<f64, ModelError> {
        Ok(self.gamma(t)? * self.state(t).inv_width)
    }

    /// Integrates `(A, a, B)` with an adaptive Runge–Kutta scheme.
    pub fn evolve_ode(&self, times: &[f64]) -> Result<Vec<OscillatorGaussianState>, ModelError> {
        let rhs = |_t: f64, y: &[f64; 3]| {
            let (a, b) = (y[0], y[2]);
            [b * b / 2.0 - 2.0 * a * a - 2.0, -b / 2.0, -4.0 * a * b]
        };
        let ys = integrate_to(
            rhs,
            0.0,
            [self.curvature0, self.phase0, self.inv_width0],
            times,
            Tolerance { rel: 1e-12, abs: 1e-13 },
        )?;
        Ok(ys
            .iter()
            .zip(times)
            .map(|(y, &t)| OscillatorGaussianState { curvature: y[0], inv_width: y[2], phase: y[1], t })
            .collect())
    }

    /// Precision `C` from `C' = -2C(2A - B) - 2C²`, integrated in the form
    /// `w = 1/C`, `w' = 2(2A - B)w + 2`. `c0 = None` means a delta start (`w(0) = 0`).
    pub fn precision_ode(&self, c0: Option<f64>, times: &[f64]) -> Result<Vec<f64>, ModelError> {
        let w0 = match c0 {
            None => 0.0,
            Some(c) if c > 0.0 => 1.0 / c,
            Some(c) => return Err(ModelError::InvalidParameter(format!("initial precision must be positive, got {c}"))),
        };
        let rhs = |t: f64, w: &[f64; 1]| [2.0 * self.state(t).drift_slope() * w[0] + 2.0];
        let ws = integrate_to(rhs, 0.0, [w0], times, Tolerance { rel: 1e-13, abs: 1e-18 })?;
        Ok(ws.iter().map(|w| 1.0 / w[0]).collect())
    }
}

/// `gamma(t) = 1 + φ/(2∫_0^t Bφ)` with `φ = exp(-2∫_0^t B)`, by nested adaptive quadrature.
///
/// Works for any positive `B(t)`; `gamma(0) = ∞` is the delta-start condition.
pub fn riccati_gamma<F: Fn(f64) -> f64>(b_of_t: F, t: f64) -> Result<f64, ModelError> {
    const TOL: f64 = 1e-12;
    if !(t > 0.0) {
        return Err(ModelError::DivergentGamma { t });
    }
    let int_b = |s: f64| integrate(&b_of_t, 0.0, s, TOL, TOL).value;
    let phi = (-2.0 * int_b(t)).exp();
    let weight = integrate(|s| b_of_t(s) * (-2.0 * int_b(s)).exp(), 0.0, t, 1e-300, TOL).value;
    let den = 2.0 * weight;
    if !(den > 1e-300) {
        return Err(ModelError::DivergentGamma { t });
    }
    Ok(1.0 + phi / den)
}

impl WavefunctionModel for OscillatorGaussian {
    fn psi_and_derivative(&self, x: f64, t: f64) -> Result<(ComplexValue, ComplexValue), ModelError> {
        let st = self.state(t);
        let psi = st.psi(x);
        Ok((psi, ComplexValue::new(-st.inv_width / 2.0, st.curvature) * x * psi))
    }

    fn hbar_over_m(&self) -> f64 {
        2.0
    }

    fn drift(&self, x: f64, t: f64) -> Result<f64, ModelError> {
        Ok(self.state(t).drift(x))
    }

    fn support(&self, t: f64) -> (f64, f64) {
        let r = 10.0 / self.state(t).inv_width.sqrt();
        (-r, r)
    }
}

/// The drift is linear in `x`; a frame is just its slope.
pub struct LinearFrame(f64);

impl DriftFrame for LinearFrame {
    fn drift(&self, x: f64) -> Result<f64, ModelError> {
        Ok(self.0 * x)
    }
}

impl DriftField for OscillatorGaussian {
    type Frame = LinearFrame;
    fn frame(&self, t: f64, _extent: (f64, f64)) -> Result<LinearFrame, ModelError> {
        Ok(LinearFrame(self.state(t).drift_slope()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::drift_from_psi;

    fn closed_form_b(b0: f64, t: f64) -> f64 {
        8.0 * b0 / (b0 * b0 + 4.0 - (b0 * b0 - 4.0) * (4.0 * t).cos())
    }

    #[test]
    fn ground_state_is_stationary() {
        let m = OscillatorGaussian::from_inv_width(2.0).unwrap();
        for t in [0.0, 0.3, 1.7, 10.0] {
            let s = m.state(t);
            assert!(s.curvature.abs() < 1e-15 && (s.inv_width - 2.0).abs() < 1e-14);
            // energy 1: phase advances as -t
            assert!((s.phase + t).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_ode() {
        let times: Vec<f64> = (1..=40).map(|k| k as f64 * 0.25).collect();
        for b0 in [0.125, 0.5, 2.0, 8.0, 32.0] {
            let m = OscillatorGaussian::from_inv_width(b0).unwrap();
            let ode = m.evolve_ode(&times).unwrap();
            for s in ode {
                let c = m.state(s.t);
                let scale = c.inv_width.abs().max(1.0);
                assert!((s.inv_width - c.inv_width).abs() < 1e-8 * scale, "B0 {b0} t {}", s.t);
                assert!((s.curvature - c.curvature).abs() < 1e-8 * scale, "B0 {b0} t {}", s.t);
                assert!((s.phase - c.phase).abs() < 1e-8 * scale.max(s.phase.abs()), "B0 {b0} t {}", s.t);
                assert!((c.inv_width - closed_form_b(b0, s.t)).abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn chirped_start_matches_ode() {
        let m = OscillatorGaussian::new(0.7, 1.3, 0.2).unwrap();
        let times = [0.1, 0.9, 2.3, 4.0];
        for s in m.evolve_ode(&times).unwrap() {
            let c = m.state(s.t);
            assert!((s.inv_width - c.inv_width).abs() < 1e-9);
            assert!((s.curvature - c.curvature).abs() < 1e-9);
            assert!((s.phase - c.phase).abs() < 1e-9);
        }
    }

    #[test]
    fn breathing_range_and_period() {
        let m = OscillatorGaussian::from_inv_width(0.5).unwrap();
        let bs: Vec<f64> = (0..=1000).map(|k| m.state(k as f64 * PERIOD / 1000.0).inv_width).collect();
        let max = bs.iter().cloned().fold(f64::MIN, f64::max);
        let min = bs.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - 8.0).abs() < 1e-9 && (min - 0.5).abs() < 1e-12);
        assert!((m.state(0.3).inv_width - m.state(0.3 + PERIOD).inv_width).abs() < 1e-12);
    }

    #[test]
    fn ansatz_drift_matches_generic() {
        let m = OscillatorGaussian::new(0.4, 0.9, 0.0).unwrap();
        for &(x, t) in &[(0.5, 0.2), (-1.2, 1.1), (2.0, 3.3)] {
            let (psi, dpsi) = m.psi_and_derivative(x, t).unwrap();
            let g = drift_from_psi(psi, dpsi, 2.0).unwrap();
            assert!((g - m.drift(x, t).unwrap()).abs() < 1e-10);
        }
        let ground = OscillatorGaussian::from_inv_width(2.0).unwrap();
        assert!((ground.drift(1.5, 0.7).unwrap() + 3.0).abs() < 1e-14);
    }

    #[test]
    fn gamma_for_constant_b() {
        let b0 = 0.8f64;
        for t in [0.05, 0.5, 2.0] {
            let g = riccati_gamma(|_| b0, t).unwrap();
            let exact = 1.0 / (1.0 - (-2.0 * b0 * t).exp());
            assert!((g - exact).abs() < 1e-10 * exact);
        }
        assert!(riccati_gamma(|_| 1.0, 0.0).is_err());
    }

    #[test]
    fn nested_quadrature_agrees_with_identity() {
        let m = OscillatorGaussian::from_inv_width(0.5).unwrap();
        for t in [0.05, 0.4, 1.3] {
            let q = riccati_gamma(|s| m.state(s).inv_width, t).unwrap();
            let g = m.gamma(t).unwrap();
            assert!((q - g).abs() < 1e-9 * g, "{t}: {q} vs {g}");
        }
    }

    #[test]
    fn precision_ode_matches_gamma() {
        let m = OscillatorGaussian::from_inv_width(8.0).unwrap();
        let times = [0.05, 0.5, 1.0, 3.0, 5.0];
        let cs = m.precision_ode(None, &times).unwrap();
        for (c, &t) in cs.iter().zip(&times) {
            let expect = m.precision(t).unwrap();
            assert!((c - expect).abs() < 1e-9 * expect);
        }
    }
}
