//! Spatial dynamic programming over `(velocity, travel time)` states.
//!
//! The route is cut into cells of length `ΔD`. Each cell is crossed with a
//! constant control `(gear, engine torque, brake torque)` and the
//! acceleration held at its entry value, so speed and time at the next
//! boundary follow in closed form. Cost-to-go tables live on a regular
//! velocity × time grid and are read back by bilinear interpolation.
//!
//! Zero speed is only reachable at boundaries where the vehicle may stand:
//! signals, stop signs and the destination. Cells that end there may use an
//! exact-stop control whose brake (or brake-free engine) torque is solved so
//! that the vehicle halts on the line. A stopped vehicle waits on the time
//! grid, burning idle fuel, until departing is optimal and the signal gate
//! allows it.

mod grid;
mod model;
mod replay;
mod solver;

pub use grid::GridSpec;
pub use model::{
    signal_gate, step_dynamics, stop_step, stopping_controls, CellStep, Control, Objective,
    SpeedBounds, WEIGHT_SNAP,
};
pub use replay::extract_trajectory;
pub use solver::{solve, DpSolution};
