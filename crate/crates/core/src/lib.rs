//! Nelson stochastic trajectories guided by analytic wavefunctions, and the
//! statistics used to watch an ensemble relax to the Born density.

pub mod cli;
pub mod models;
pub mod numerics;
pub mod sde;
pub mod experiments;
pub mod stats;
