//! Ensembles of Nelson trajectories `dx = b dt + dW` with `<dW²> = 2 D_Q dt`.

pub mod integrator;
pub mod rng;
pub mod sampling;

pub use integrator::{
    simulate, step, Boundary, Ensemble, IntegratorConfig, Scheme, SdeError, SimulationLog, Snapshot, StepCounters,
    TrajectoryRecorder,
};
pub use rng::{rng_stream, wiener_increment, RngStream};
pub use sampling::InverseCdf;
