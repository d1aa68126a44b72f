use crate::error::{Error, Result};
use crate::num::{linspace, whole_steps, Real};
use crate::scenario::Route;
use crate::vehicle::VehicleParams;

/// Discretization of the spatial DP.
///
/// The velocity axis spans `[0, max speed limit]` and the time axis
/// `[0, deadline]`; both derive from the route at solve time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    /// m
    pub distance_step: T,
    /// m/s
    pub velocity_step: T,
    /// s
    pub time_step: T,
    pub engine_levels: usize,
    pub brake_levels: usize,
    /// 1-based gears the solver may select; empty means all.
    pub gears: Vec<u8>,
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        Self {
            distance_step: T::lit(5.0),
            velocity_step: T::lit(0.5),
            time_step: T::lit(0.5),
            engine_levels: 25,
            brake_levels: 5,
            gears: Vec::new(),
        }
    }
}

const STEP_TOL: f64 = 1e-9;

/// Axes and control levels resolved against a route and a vehicle.
#[derive(Debug, Clone)]
pub(crate) struct Axes<T> {
    pub stages: usize,
    pub velocity: Vec<T>,
    pub time: Vec<T>,
    pub engine: Vec<T>,
    pub brake: Vec<T>,
    /// `(gear, combined ratio)`
    pub gears: Vec<(u8, T)>,
}

impl<T: Real> GridSpec<T> {
    pub fn validate(&self) -> Result<()> {
        for (path, value) in [
            ("grid.distance_step", self.distance_step),
            ("grid.velocity_step", self.velocity_step),
            ("grid.time_step", self.time_step),
        ] {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(Error::config(
                    path,
                    format!("must be positive and finite, got {value}"),
                ));
            }
        }
        if self.engine_levels == 0 {
            return Err(Error::config(
                "grid.engine_levels",
                "at least one level is required",
            ));
        }
        if self.brake_levels == 0 {
            return Err(Error::config(
                "grid.brake_levels",
                "at least one level is required",
            ));
        }
        let mut seen = self.gears.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.gears.len() {
            return Err(Error::config("grid.gears", "gears must be distinct"));
        }
        Ok(())
    }

    /// Checks the grid against a route and vehicle and builds the axes.
    pub(crate) fn axes(&self, route: &Route<T>, vehicle: &VehicleParams<T>) -> Result<Axes<T>> {
        self.validate()?;
        let stages = whole_steps(route.length, self.distance_step, STEP_TOL).ok_or_else(|| {
            Error::config(
                "grid.distance_step",
                format!(
                    "route length {} is not a multiple of {}",
                    route.length, self.distance_step
                ),
            )
        })?;
        if stages == 0 {
            return Err(Error::config(
                "grid.distance_step",
                "exceeds the route length",
            ));
        }
        for (i, sig) in route.signals.iter().enumerate() {
            if whole_steps(sig.position, self.distance_step, STEP_TOL).is_none() {
                return Err(Error::config(
                    format!("signals[{i}].position"),
                    format!(
                        "{} m is not on a {} m boundary",
                        sig.position, self.distance_step
                    ),
                ));
            }
        }
        let v_top = route.max_speed();
        let nv = whole_steps(v_top, self.velocity_step, STEP_TOL).ok_or_else(|| {
            Error::config(
                "grid.velocity_step",
                format!(
                    "maximum speed limit {v_top} is not a multiple of {}",
                    self.velocity_step
                ),
            )
        })?;
        if nv == 0 {
            return Err(Error::config(
                "route.speed_limits",
                "maximum speed limit must be positive",
            ));
        }
        let nt = whole_steps(route.deadline, self.time_step, STEP_TOL).ok_or_else(|| {
            Error::config(
                "grid.time_step",
                format!(
                    "deadline {} is not a multiple of {}",
                    route.deadline, self.time_step
                ),
            )
        })?;
        let gears: Vec<u8> = if self.gears.is_empty() {
            (1..=vehicle.gear_count() as u8).collect()
        } else {
            self.gears.clone()
        };
        let gears = gears
            .into_iter()
            .map(|g| {
                vehicle
                    .gear_ratio(g)
                    .map(|r| (g, r))
                    .map_err(|_| Error::config("grid.gears", format!("vehicle has no gear {g}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let codes = gears.len() * self.engine_levels * (self.brake_levels + 2);
        if codes >= usize::from(u16::MAX) {
            return Err(Error::config(
                "grid.engine_levels",
                format!("control grid has {codes} entries; at most 65534 are supported"),
            ));
        }
        let axis = |n: usize, step: T, top: T| -> Vec<T> {
            (0..=n)
                .map(|i| if i == n { top } else { step * T::lit(i as f64) })
                .collect()
        };
        Ok(Axes {
            stages,
            velocity: axis(nv, self.velocity_step, v_top),
            time: axis(nt, self.time_step, route.deadline),
            engine: linspace(
                vehicle.engine_torque_min,
                vehicle.engine_torque_max,
                self.engine_levels,
            ),
            brake: if self.brake_levels == 1 {
                vec![T::zero()]
            } else {
                linspace(T::zero(), vehicle.brake_torque_max, self.brake_levels)
            },
            gears,
        })
    }

    /// Compact description written into trajectory headers.
    pub fn describe(&self) -> String {
        let gears = if self.gears.is_empty() {
            "all".to_string()
        } else {
            self.gears
                .iter()
                .map(u8::to_string)
                .collect::<Vec<_>>()
                .join("/")
        };
        format!(
            "dD={} dv={} dt={} nT={} nB={} gears={}",
            self.distance_step,
            self.velocity_step,
            self.time_step,
            self.engine_levels,
            self.brake_levels,
            gears
        )
    }
}
