//! Two-level superpositions of oscillator eigenstates (same units as
//! [`oscillator`](super::oscillator): `E_n = 2n + 1`, `hbar/m = 2`).
//!
//! `psi = sin θ ψ_low e^{-i E_low t} + cos θ ψ_high e^{-i E_high t}`, with Hermite
//! functions `ψ_n = p_n(x) e^{-x²/2}`. Because the Gaussian factor is shared,
//! `psi'/psi = P'/P - x` where `P` is a complex polynomial, so the drift needs no
//! exponentials at all.

use std::f64::consts::PI;

use super::{ComplexValue, DriftField, DriftFrame, ModelError, WavefunctionModel};

/// Default node guard: `|psi| < guard · |psi'|` is treated as sitting on a node.
pub const NODE_GUARD: f64 = 1e-12;
/// Highest supported level; monomial coefficients lose precision beyond it.
pub const MAX_LEVEL: usize = 30;

/// Monomial coefficients of `p_n`, lowest power first.
fn hermite_polynomial(n: usize) -> Vec<f64> {
    let mut prev: Vec<f64> = Vec::new();
    let mut cur = vec![PI.powf(-0.25)];
    for k in 0..n {
        let kf = k as f64;
        let mut next = vec![0.0; k + 2];
        let up = (2.0 / (kf + 1.0)).sqrt();
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += up * c;
        }
        let down = (kf / (kf + 1.0)).sqrt();
        for (i, c) in prev.iter().enumerate() {
            next[i] -= down * c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// Hermite function `ψ_n(x)` and its derivative, by the stable three-term recurrence.
pub fn hermite_function(n: usize, x: f64) -> (f64, f64) {
    let g = PI.powf(-0.25) * (-x * x / 2.0).exp();
    let (mut prev, mut cur) = (0.0, g);
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    // ψ_n' = sqrt(n/2) ψ_{n-1} - sqrt((n+1)/2) ψ_{n+1}
    let nf = n as f64;
    let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
    let d = (nf / 2.0).sqrt() * prev - ((nf + 1.0) / 2.0).sqrt() * next;
    (cur, d)
}

pub fn energy(n: usize) -> f64 {
    2.0 * n as f64 + 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorEigenModel {
    mix_angle: f64,
    n_low: usize,
    n_high: usize,
    guard: f64,
    poly_low: Vec<f64>,
    poly_high: Vec<f64>,
}

impl OscillatorEigenModel {
    /// `mix_angle` in radians; `0` gives the pure `n_high` state.
    pub fn new(mix_angle: f64, n_low: usize, n_high: usize) -> Result<Self, ModelError> {
        if n_low >= n_high || n_high > MAX_LEVEL || !mix_angle.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "need n_low < n_high <= {MAX_LEVEL} and a finite angle, got ({n_low}, {n_high}, {mix_angle})"
            )));
        }
        Ok(Self {
            mix_angle,
            n_low,
            n_high,
            guard: NODE_GUARD,
            poly_low: hermite_polynomial(n_low),
            poly_high: hermite_polynomial(n_high),
        })
    }

    /// Ground/first-excited mixture with the angle given in degrees.
    pub fn ground_first_degrees(degrees: f64) -> Result<Self, ModelError> {
        Self::new(degrees.to_radians(), 0, 1)
    }

    /// Pure first excited state.
    pub fn first_excited() -> Self {
        Self::new(0.0, 0, 1).expect("valid levels")
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    pub fn mix_angle(&self) -> f64 {
        self.mix_angle
    }

    pub fn levels(&self) -> (usize, usize) {
        (self.n_low, self.n_high)
    }

    /// Complex amplitudes of the two levels at time `t`.
    fn weights(&self, t: f64) -> (ComplexValue, ComplexValue) {
        let (s, c) = self.mix_angle.sin_cos();
        (
            ComplexValue::from_polar(s, -energy(self.n_low) * t),
            ComplexValue::from_polar(c, -energy(self.n_high) * t),
        )
    }

    /// Polynomial part `P(x, t)` of `psi`, lowest power first.
    fn polynomial(&self, t: f64) -> Vec<ComplexValue> {
        let (wl, wh) = self.weights(t);
        let mut p = vec![ComplexValue::new(0.0, 0.0); self.poly_high.len().max(self.poly_low.len())];
        for (i, c) in self.poly_low.iter().enumerate() {
            p[i] += wl * c;
        }
        for (i, c) in self.poly_high.iter().enumerate() {
            p[i] += wh * c;
        }
        p
    }
}

/// `(P(x), P'(x))` by Horner.
fn horner(poly: &[ComplexValue], x: f64) -> (ComplexValue, ComplexValue) {
    let mut p = ComplexValue::new(0.0, 0.0);
    let mut dp = ComplexValue::new(0.0, 0.0);
    for c in poly.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn polynomial_drift(poly: &[ComplexValue], guard: f64, x: f64, t: f64) -> Result<f64, ModelError> {
    let (p, dp) = horner(poly, x);
    // psi'/psi = P'/P - x, with the Gaussian factor cancelled
    let dpsi = dp - p * x;
    if p.norm() <= guard * dpsi.norm() || p.norm() == 0.0 {
        return Err(ModelError::NodeSingularity { x, t });
    }
    let r = dpsi / p;
    let b = 2.0 * (r.re + r.im);
    if b.is_finite() {
        Ok(b)
    } else {
        Err(ModelError::NodeSingularity { x, t })
    }
}

impl WavefunctionModel for OscillatorEigenModel {
    fn psi_and_derivative(&self, x: f64, t: f64) -> Result<(ComplexValue, ComplexValue), ModelError> {
        let (wl, wh) = self.weights(t);
        let (fl, dl) = hermite_function(self.n_low, x);
        let (fh, dh) = hermite_function(self.n_high, x);
        Ok((wl * fl + wh * fh, wl * dl + wh * dh))
    }

    fn hbar_over_m(&self) -> f64 {
        2.0
    }

    fn drift(&self, x: f64, t: f64) -> Result<f64, ModelError> {
        polynomial_drift(&self.polynomial(t), self.guard, x, t)
    }

    fn support(&self, _t: f64) -> (f64, f64) {
        // classical turning point of the higher level plus a generous tail
        let r = energy(self.n_high).sqrt() + 6.0;
        (-r, r)
    }
}

pub struct EigenFrame {
    poly: Vec<ComplexValue>,
    guard: f64,
    t: f64,
}

impl DriftFrame for EigenFrame {
    fn drift(&self, x: f64) -> Result<f64, ModelError> {
        polynomial_drift(&self.poly, self.guard, x, self.t)
    }
}

impl DriftField for OscillatorEigenModel {
    type Frame = EigenFrame;
    fn frame(&self, t: f64, _extent: (f64, f64)) -> Result<EigenFrame, ModelError> {
        Ok(EigenFrame { poly: self.polynomial(t), guard: self.guard, t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::drift_from_psi;
    use crate::numerics::quad::integrate;

    #[test]
    fn hermite_functions_are_orthonormal() {
        for m in 0..6 {
            for n in 0..6 {
                let r = integrate(|x| hermite_function(m, x).0 * hermite_function(n, x).0, -12.0, 12.0, 1e-13, 1e-13);
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((r.value - expect).abs() < 1e-10, "({m},{n}) {}", r.value);
            }
        }
    }

    #[test]
    fn hermite_derivative_matches_difference() {
        let h = 1e-6;
        for n in 0..8 {
            for x in [-2.1, 0.3, 1.7] {
                let fd = (hermite_function(n, x + h).0 - hermite_function(n, x - h).0) / (2.0 * h);
                assert!((fd - hermite_function(n, x).1).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn polynomial_form_matches_recurrence() {
        for n in 0..10 {
            let p = hermite_polynomial(n);
            for x in [-1.5, 0.2, 2.5] {
                let poly: f64 = p.iter().rev().fold(0.0, |acc, c| acc * x + c);
                let direct = hermite_function(n, x).0;
                assert!((poly * (-x * x / 2.0).exp() - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn first_excited_drift() {
        let m = OscillatorEigenModel::first_excited();
        for x in [0.1, 0.5, -0.7, 2.0] {
            let b = m.drift(x, 1.3).unwrap();
            assert!((b - 2.0 * (1.0 / x - x)).abs() < 1e-12 * b.abs().max(1.0));
        }
        assert!(m.drift(1e-9, 0.0).unwrap() > 1e8);
        assert!(matches!(m.drift(0.0, 0.0), Err(ModelError::NodeSingularity { .. })));
        assert!(m.drift(1e-13, 0.0).is_err());
    }

    #[test]
    fn mixture_drift_matches_generic() {
        let m = OscillatorEigenModel::ground_first_degrees(20.0).unwrap();
        for &(x, t) in &[(0.4, 0.1), (-1.3, 0.9), (2.2, 2.5)] {
            let (psi, dpsi) = m.psi_and_derivative(x, t).unwrap();
            let g = drift_from_psi(psi, dpsi, 2.0).unwrap();
            assert!((g - m.drift(x, t).unwrap()).abs() < 1e-10 * g.abs().max(1.0));
        }
    }

    #[test]
    fn small_mix_angle() {
        assert!((0.1f64.to_radians().sin() - 0.0017).abs() < 5e-5);
    }
}
