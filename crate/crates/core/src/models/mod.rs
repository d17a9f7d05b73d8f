//! Analytic and semi-analytic wavefunctions, their Nelson drift fields, and the
//! special functions behind them.
//!
//! Every model answers the same questions at a point `(x, t)`: the complex
//! amplitude, its spatial derivative, the Born density, and the drift
//! `b = (hbar/m) (Re + Im)(psi'/psi)`.

pub mod airy;
pub mod double_slit;
pub mod eigen;
pub mod gravity;
pub mod oscillator;

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::ode::OdeError;

pub use double_slit::DoubleSlitModel;
pub use eigen::OscillatorEigenModel;
pub use gravity::GravityModel;
pub use oscillator::{OscillatorGaussian, OscillatorGaussianState};

pub type ComplexValue = Complex64;

/// Amplitudes below this are treated as nodes by [`drift_from_psi`].
pub const PSI_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("wavefunction node at x = {x}, t = {t}")]
    NodeSingularity { x: f64, t: f64 },
    #[error("gamma diverges at t = {t} (denominator underflow)")]
    DivergentGamma { t: f64 },
    #[error("truncated expansion keeps {captured} of the norm, need at least {required}")]
    TruncationTooSevere { captured: f64, required: f64 },
    #[error("argument {x} is outside the evaluable domain")]
    DomainOverflow { x: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

impl ModelError {
    /// Attaches a location to a node error raised without one.
    pub fn at(self, x: f64, t: f64) -> Self {
        match self {
            ModelError::NodeSingularity { .. } => ModelError::NodeSingularity { x, t },
            other => other,
        }
    }
}

/// `(hbar/m) (Re + Im)(dpsi/psi)`: phase-gradient velocity plus osmotic velocity.
pub fn drift_from_psi(psi: ComplexValue, dpsi_dx: ComplexValue, hbar_over_m: f64) -> Result<f64, ModelError> {
    if !(psi.norm() > PSI_FLOOR) {
        return Err(ModelError::NodeSingularity { x: f64::NAN, t: f64::NAN });
    }
    let ratio = dpsi_dx / psi;
    let b = hbar_over_m * (ratio.re + ratio.im);
    if b.is_finite() {
        Ok(b)
    } else {
        Err(ModelError::NodeSingularity { x: f64::NAN, t: f64::NAN })
    }
}

/// Common face of the scenario wavefunctions.
pub trait WavefunctionModel: Sync {
    /// `(psi, dpsi/dx)` at `(x, t)`.
    fn psi_and_derivative(&self, x: f64, t: f64) -> Result<(ComplexValue, ComplexValue), ModelError>;

    /// `hbar/m` in the model's units (twice the quantum diffusion coefficient).
    fn hbar_over_m(&self) -> f64;

    fn density(&self, x: f64, t: f64) -> Result<f64, ModelError> {
        Ok(self.psi_and_derivative(x, t)?.0.norm_sqr())
    }

    fn drift(&self, x: f64, t: f64) -> Result<f64, ModelError> {
        let (psi, dpsi) = self.psi_and_derivative(x, t)?;
        drift_from_psi(psi, dpsi, self.hbar_over_m()).map_err(|e| e.at(x, t))
    }

    /// Interval outside which the density at `t` is negligible.
    fn support(&self, t: f64) -> (f64, f64);
}

/// A drift field frozen at one instant, evaluated at many positions.
pub trait DriftFrame: Sync {
    fn drift(&self, x: f64) -> Result<f64, ModelError>;
}

/// A time-dependent drift field that can be frozen once per time level.
///
/// `extent` bounds the particle positions the frame will be asked about; models
/// with expensive evaluations use it to restrict precomputation.
pub trait DriftField: Sync {
    type Frame: DriftFrame;
    fn frame(&self, t: f64, extent: (f64, f64)) -> Result<Self::Frame, ModelError>;

    /// Frames at several times sharing one `extent`; fields whose frames have
    /// a costly common setup override this together with [`Self::batch_len`].
    fn frames(&self, ts: &[f64], extent: (f64, f64)) -> Result<Vec<Self::Frame>, ModelError> {
        ts.iter().map(|&t| self.frame(t, extent)).collect()
    }

    /// Preferred number of time levels per [`Self::frames`] call.
    fn batch_len(&self) -> usize {
        1
    }
}

/// Frame of any [`WavefunctionModel`]: direct pointwise evaluation.
pub struct PointwiseFrame<'a, M: ?Sized> {
    model: &'a M,
    t: f64,
}

impl<M: WavefunctionModel + ?Sized> DriftFrame for PointwiseFrame<'_, M> {
    fn drift(&self, x: f64) -> Result<f64, ModelError> {
        self.model.drift(x, self.t)
    }
}

/// Adapts a model reference into a [`DriftField`] with pointwise frames.
pub struct Pointwise<'a, M: ?Sized>(pub &'a M);

impl<'a, M: WavefunctionModel + ?Sized> DriftField for Pointwise<'a, M> {
    type Frame = PointwiseFrame<'a, M>;
    fn frame(&self, t: f64, _extent: (f64, f64)) -> Result<Self::Frame, ModelError> {
        Ok(PointwiseFrame { model: self.0, t })
    }
}

/// A drift given directly as a function of `(x, t)`.
#[derive(Clone, Copy)]
pub struct FnDrift<F>(pub F);

pub struct FnFrame<F> {
    f: F,
    t: f64,
}

impl<F: Fn(f64, f64) -> f64 + Sync> DriftFrame for FnFrame<F> {
    fn drift(&self, x: f64) -> Result<f64, ModelError> {
        Ok((self.f)(x, self.t))
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync + Copy> DriftField for FnDrift<F> {
    type Frame = FnFrame<F>;
    fn frame(&self, t: f64, _extent: (f64, f64)) -> Result<Self::Frame, ModelError> {
        Ok(FnFrame { f: self.0, t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_even_at_origin_has_no_drift() {
        let b = drift_from_psi(ComplexValue::new(0.7, 0.0), ComplexValue::new(0.0, 0.0), 1.0).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn plane_wave_drift_is_phase_gradient() {
        let (k, x, hm) = (1.7, 0.3, 2.0);
        let psi = ComplexValue::from_polar(1.0, k * x);
        let dpsi = ComplexValue::i() * k * psi;
        let b = drift_from_psi(psi, dpsi, hm).unwrap();
        assert!((b - hm * k).abs() < 1e-14);
    }

    #[test]
    fn gaussian_drift_is_osmotic() {
        let x = 0.8f64;
        let psi = ComplexValue::new((-x * x / 2.0).exp(), 0.0);
        let b = drift_from_psi(psi, -x * psi, 1.0).unwrap();
        assert!((b + x).abs() < 1e-14);
    }

    #[test]
    fn node_is_reported() {
        let err = drift_from_psi(ComplexValue::new(0.0, 0.0), ComplexValue::new(1.0, 0.0), 1.0).unwrap_err();
        assert!(matches!(err.at(0.0, 1.0), ModelError::NodeSingularity { x, t } if x == 0.0 && t == 1.0));
    }
}
