//! Seed-reproducible simulation and verification harness for conservative
//! random walks and random flights driven by inhomogeneous Poisson point
//! processes.
//!
//! The math kernel (rates, quadrature, directions, walks, point processes,
//! geometry, special functions) is generic over the float width through
//! [`scalar::Real`]; the statistics, config, and experiment layers commit
//! to f64. The aliases below pin the kernel types at concrete precisions.

pub mod analysis;
pub mod config;
pub mod directions;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod mathkit;
pub mod ppp;
pub mod quad;
pub mod rates;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};

/// Double-precision rate function, the default for experiments.
pub type RateFunction64 = rates::RateFunction<f64>;
/// Single-precision rate function.
pub type RateFunction32 = rates::RateFunction<f32>;
/// Double-precision trajectory.
pub type Trajectory64 = walk::Trajectory<f64>;
/// Single-precision trajectory.
pub type Trajectory32 = walk::Trajectory<f32>;
/// Double-precision unit direction.
pub type UnitVector64 = directions::UnitVector<f64>;
/// Single-precision unit direction.
pub type UnitVector32 = directions::UnitVector<f32>;
/// Double-precision point-process sample.
pub type PointProcessSample64 = ppp::PointProcessSample<f64>;
/// Double-precision compensated accumulator.
pub type Compensated64 = scalar::Compensated<f64>;
