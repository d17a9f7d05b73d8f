//! Density estimates, distances to the Born density, and timescale extraction.

pub mod density;
pub mod distances;
pub mod fit;
pub mod timescales;

use thiserror::Error;

pub use density::{estimate_density, DensityEstimate, GridSpec, Interpolation};
pub use distances::{distance, entropy_h, linf_distance, lp_distance, series_csv, DistanceKind, DistanceSeries};
pub use fit::{fit_relaxation, fit_tanh, levenberg_marquardt, FitResult, LmOptions};
pub use timescales::{
    detect_interference_double_slit, detect_peaks_prominence, detect_phase_boundaries, has_interior_peak,
    moving_median, settling_time, sliding_rms, threshold_time, Peak,
};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("too few samples: {got}, need {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("grids do not match ({left} vs {right} points)")]
    GridMismatch { left: usize, right: usize },
    #[error("particle density is positive where the reference vanishes (x = {x})")]
    SupportMismatch { x: f64 },
    #[error("fit did not converge (residual norm {})", .0.residual_norm)]
    FitDiverged(Box<FitResult>),
    #[error("not enough data: {got} points, need {need}")]
    InsufficientData { got: usize, need: usize },
    #[error("series never settled below {threshold}")]
    NeverConverged { threshold: f64 },
    #[error("no interference up to t = {horizon}")]
    NoInterference { horizon: f64 },
    #[error("series has no interior extrema")]
    MonotoneSeries,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
