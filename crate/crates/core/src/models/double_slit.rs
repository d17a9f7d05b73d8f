//! Two freely spreading Gaussians centred on the slits at `±a`.
//!
//! Units `hbar = m = a = 1`; time in `tau = m a^2 / hbar`. Each packet evolves as
//! `(s^2/z)^{1/2} exp(-(x ∓ a)^2 / 2z)` with `z = s^2 + i t`.

use std::f64::consts::PI;

use super::{ComplexValue, DriftField, DriftFrame, ModelError, WavefunctionModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleSlitModel {
    sigma: f64,
    half_separation: f64,
}

impl DoubleSlitModel {
    /// Slits at `±1` with width `sigma` (in units of the half separation).
    pub fn new(sigma: f64) -> Result<Self, ModelError> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(ModelError::InvalidParameter(format!("slit width must lie in (0, 1), got {sigma}")));
        }
        Ok(Self { sigma, half_separation: 1.0 })
    }

    /// General geometry; `half_separation = 0` collapses to a single Gaussian.
    pub fn with_separation(sigma: f64, half_separation: f64) -> Result<Self, ModelError> {
        if !(sigma > 0.0) || !(half_separation >= 0.0) || !half_separation.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "need sigma > 0 and a >= 0, got sigma = {sigma}, a = {half_separation}"
            )));
        }
        Ok(Self { sigma, half_separation })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn half_separation(&self) -> f64 {
        self.half_separation
    }

    fn norm(&self) -> f64 {
        let (s, a) = (self.sigma, self.half_separation);
        1.0 / (2.0 * s * PI.sqrt() * (1.0 + (-a * a / (s * s)).exp())).sqrt()
    }

    /// Exponents of the two packets and their common prefactor `N (s^2/z)^{1/2}`.
    fn parts(&self, x: f64, t: f64) -> (ComplexValue, ComplexValue, ComplexValue, ComplexValue) {
        let s2 = self.sigma * self.sigma;
        let z = ComplexValue::new(s2, t);
        let a = self.half_separation;
        let e1 = -(x + a) * (x + a) / (2.0 * z);
        let e2 = -(x - a) * (x - a) / (2.0 * z);
        let pre = self.norm() * (s2 / z).sqrt();
        (z, e1, e2, pre)
    }

    /// Standard deviation of one packet's density at time `t`.
    pub fn packet_width(&self, t: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        ((s2 * s2 + t * t) / (2.0 * s2)).sqrt()
    }

    /// `|psi|^2` evaluated in closed form.
    pub fn density_at(&self, x: f64, t: f64) -> f64 {
        let (_, e1, e2, pre) = self.parts(x, t);
        let (big, small) = if e1.re >= e2.re { (e1, e2) } else { (e2, e1) };
        let sum = 1.0 + (small - big).exp();
        pre.norm_sqr() * (2.0 * big.re).exp() * sum.norm_sqr()
    }

    /// Nelson drift from `psi'/psi = (a tanh(a x / z) - x) / z`.
    pub fn drift_at(&self, x: f64, t: f64) -> Result<f64, ModelError> {
        let inv_z = ComplexValue::new(self.sigma * self.sigma, t).inv();
        slit_drift(x, self.half_separation, inv_z).map_err(|e| e.at(x, t))
    }
}

/// `tanh(p + iq)` from a single `exp(-2|p|)`, finite for any `p`.
fn stable_tanh(u: ComplexValue) -> Option<ComplexValue> {
    let e = (-2.0 * u.re.abs()).exp();
    let (s, c) = (2.0 * u.im).sin_cos();
    let den = 1.0 + e * e + 2.0 * e * c;
    if den == 0.0 {
        return None;
    }
    Some(ComplexValue::new(u.re.signum() * (1.0 - e * e), 2.0 * e * s) / den)
}

#[inline]
fn slit_drift(x: f64, a: f64, inv_z: ComplexValue) -> Result<f64, ModelError> {
    let th = stable_tanh((a * x) * inv_z).ok_or(ModelError::NodeSingularity { x, t: f64::NAN })?;
    let r = (a * th - x) * inv_z;
    let b = r.re + r.im;
    if b.is_finite() {
        Ok(b)
    } else {
        Err(ModelError::NodeSingularity { x, t: f64::NAN })
    }
}

impl WavefunctionModel for DoubleSlitModel {
    fn psi_and_derivative(&self, x: f64, t: f64) -> Result<(ComplexValue, ComplexValue), ModelError> {
        let (z, e1, e2, pre) = self.parts(x, t);
        let a = self.half_separation;
        let p1 = pre * e1.exp();
        let p2 = pre * e2.exp();
        Ok((p1 + p2, -((x + a) * p1 + (x - a) * p2) / z))
    }

    fn hbar_over_m(&self) -> f64 {
        1.0
    }

    fn density(&self, x: f64, t: f64) -> Result<f64, ModelError> {
        Ok(self.density_at(x, t))
    }

    fn drift(&self, x: f64, t: f64) -> Result<f64, ModelError> {
        self.drift_at(x, t)
    }

    fn support(&self, t: f64) -> (f64, f64) {
        let r = self.half_separation + 8.0 * self.packet_width(t);
        (-r, r)
    }
}

pub struct DoubleSlitFrame {
    inv_z: ComplexValue,
    a: f64,
    t: f64,
}

impl DriftFrame for DoubleSlitFrame {
    fn drift(&self, x: f64) -> Result<f64, ModelError> {
        slit_drift(x, self.a, self.inv_z).map_err(|e| e.at(x, self.t))
    }
}

impl DriftField for DoubleSlitModel {
    type Frame = DoubleSlitFrame;
    fn frame(&self, t: f64, _extent: (f64, f64)) -> Result<DoubleSlitFrame, ModelError> {
        let inv_z = ComplexValue::new(self.sigma * self.sigma, t).inv();
        Ok(DoubleSlitFrame { inv_z, a: self.half_separation, t })
    }
}
