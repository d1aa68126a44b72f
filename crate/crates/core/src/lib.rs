//! Fuel-optimal and time-optimal velocity planning over routes with
//! signalized intersections.
//!
//! The planner works in the spatial domain: distance along the route is the
//! independent variable and `(velocity, travel time)` is the state. Signal
//! passing constraints are expressed on each intersection's periodic clock,
//! and the robust variant tightens the red phase by a quantile of the
//! uncertain "effective red" delay so that every intersection is cleared
//! with a requested reliability.
//!
//! All numerical modules are generic over [`Real`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! scenario loader, the evaluator and the CLI use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dp;
pub mod error;
pub mod evaluate;
pub mod idm;
pub mod num;
pub mod scenario;
pub mod signals;
pub mod trajectory;
pub mod vehicle;

pub use error::{Error, Result};
pub use num::Real;

pub type VehicleParams = vehicle::VehicleParams<f64>;
pub type FuelMap = vehicle::FuelMap<f64>;
pub type SignalSpec = signals::SignalSpec<f64>;
pub type DelayDistribution = signals::DelayDistribution<f64>;
pub type TruncatedGaussian = signals::TruncatedGaussian<f64>;
pub type Route = scenario::Route<f64>;
pub type IdmParams = idm::IdmParams<f64>;
pub type GridSpec = dp::GridSpec<f64>;
pub type DpSolution = dp::DpSolution<f64>;
pub type Trajectory = trajectory::Trajectory<f64>;

/// Single-precision variants, mainly useful for memory-bound grids.
pub type VehicleParamsF32 = vehicle::VehicleParams<f32>;
pub type RouteF32 = scenario::Route<f32>;
pub type GridSpecF32 = dp::GridSpec<f32>;
