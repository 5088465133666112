//! Beamspace-aware reduced-rank Kalman channel estimation for massive MIMO
//! uplinks with pilot contamination from neighbouring user groups.

pub mod beamspace;
pub mod channel;
pub mod covariance;
pub mod error;
pub mod harness;
pub mod kalman;
pub mod linalg;
pub mod matio;
pub mod training;

pub use error::{Error, Result};
