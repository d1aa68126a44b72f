//! Cell dynamics, boundary classification and control enumeration.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::scenario::Route;
use crate::signals::SignalKind;
use crate::vehicle::{engine_speed, VehicleParams};

use super::grid::{Axes, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Total fuel mass.
    Fuel,
    /// Integral of travel time over distance.
    Time,
}

impl Objective {
    pub fn label(self) -> &'static str {
        match self {
            Objective::Fuel => "op-fuel",
            Objective::Time => "op-time",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control<T> {
    pub gear: u8,
    /// N·m at the engine.
    pub engine_torque: T,
    /// N·m at the wheels.
    pub brake_torque: T,
}

/// Result of integrating one distance cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStep<T> {
    /// Speed at the end of the cell.
    pub velocity: T,
    /// Time at the end of the cell.
    pub time: T,
    pub stage_time: T,
    /// g
    pub fuel: T,
    pub acceleration: T,
    /// Engine speed at the mean cell speed.
    pub engine_speed: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedBounds<T> {
    pub min: T,
    pub max: T,
}

/// Weights of an interpolation within this distance of 0 or 1 are snapped,
/// so that values exactly on a node never pick up a neighbour.
pub const WEIGHT_SNAP: f64 = 1e-9;

/// Integrates a cell of length `distance_step` with the acceleration held at
/// its entry value. Returns `None` for any violated limit, including a
/// vehicle that cannot traverse the cell.
pub fn step_dynamics<T: Real>(
    vehicle: &VehicleParams<T>,
    v: T,
    t: T,
    control: &Control<T>,
    distance_step: T,
    grade: T,
    bounds: SpeedBounds<T>,
) -> Option<CellStep<T>> {
    let ratio = vehicle.gear_ratio(control.gear).ok()?;
    if !within_limits(vehicle, control) || v < T::zero() {
        return None;
    }
    let (a, v1, dt) = traverse(vehicle, v, control, ratio, distance_step, grade)?;
    if v1 < bounds.min || v1 > bounds.max {
        return None;
    }
    let omega = engine_speed(T::lit(0.5) * (v + v1), ratio, vehicle.wheel_radius);
    Some(CellStep {
        velocity: v1,
        time: t + dt,
        stage_time: dt,
        fuel: vehicle.fuel_rate(control.engine_torque, omega) * dt,
        acceleration: a,
        engine_speed: omega,
    })
}

/// Integrates a cell that ends exactly at standstill. `control` must be one
/// returned by [`stopping_controls`] for the same state.
pub fn stop_step<T: Real>(
    vehicle: &VehicleParams<T>,
    v: T,
    t: T,
    control: &Control<T>,
    distance_step: T,
) -> Option<CellStep<T>> {
    let ratio = vehicle.gear_ratio(control.gear).ok()?;
    if !(v > T::zero()) || !within_limits(vehicle, control) {
        return None;
    }
    let a = -(v * v) / (T::lit(2.0) * distance_step);
    if a < vehicle.accel_min || a > vehicle.accel_max {
        return None;
    }
    if engine_speed(v, ratio, vehicle.wheel_radius) > vehicle.engine_speed_max {
        return None;
    }
    let dt = T::lit(2.0) * distance_step / v;
    let omega = engine_speed(T::lit(0.5) * v, ratio, vehicle.wheel_radius);
    Some(CellStep {
        velocity: T::zero(),
        time: t + dt,
        stage_time: dt,
        fuel: vehicle.fuel_rate(control.engine_torque, omega) * dt,
        acceleration: a,
        engine_speed: omega,
    })
}

/// Controls that bring speed `v` to exactly zero over one cell in `gear`:
/// for each non-positive engine level the brake torque is solved for, then
/// the brake-free engine torque is appended. Out-of-range solutions are
/// dropped.
pub fn stopping_controls<T: Real>(
    vehicle: &VehicleParams<T>,
    v: T,
    gear: u8,
    engine_levels: &[T],
    distance_step: T,
    grade: T,
) -> Vec<Control<T>> {
    let Ok(ratio) = vehicle.gear_ratio(gear) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    if !(v > T::zero()) {
        return out;
    }
    let a = -(v * v) / (T::lit(2.0) * distance_step);
    let needed = vehicle.mass * a + vehicle.road_load(v, grade);
    for &te in engine_levels.iter().filter(|te| **te <= T::zero()) {
        let brake = (ratio * te / vehicle.wheel_radius - needed) * vehicle.wheel_radius;
        let brake = snap_zero(brake);
        if brake >= T::zero() && brake <= vehicle.brake_torque_max {
            out.push(Control {
                gear,
                engine_torque: te,
                brake_torque: brake,
            });
        }
    }
    let te = needed * vehicle.wheel_radius / ratio;
    if te >= vehicle.engine_torque_min && te <= vehicle.engine_torque_max {
        out.push(Control {
            gear,
            engine_torque: te,
            brake_torque: T::zero(),
        });
    }
    out
}

fn snap_zero<T: Real>(x: T) -> T {
    if x.abs() <= T::lit(1e-9) {
        T::zero()
    } else {
        x
    }
}

fn within_limits<T: Real>(vehicle: &VehicleParams<T>, c: &Control<T>) -> bool {
    c.engine_torque >= vehicle.engine_torque_min
        && c.engine_torque <= vehicle.engine_torque_max
        && c.brake_torque >= vehicle.brake_torque_min
        && c.brake_torque <= vehicle.brake_torque_max
}

/// Shared kinematics: `(a, v', dt)` or `None` when the cell cannot be
/// traversed or a vehicle limit binds.
#[inline]
fn traverse<T: Real>(
    vehicle: &VehicleParams<T>,
    v: T,
    control: &Control<T>,
    ratio: T,
    distance_step: T,
    grade: T,
) -> Option<(T, T, T)> {
    let a = vehicle.acceleration_with_ratio(
        v,
        control.engine_torque,
        control.brake_torque,
        ratio,
        grade,
    );
    if a < vehicle.accel_min || a > vehicle.accel_max {
        return None;
    }
    let s = v * v + T::lit(2.0) * a * distance_step;
    if s < T::zero() {
        return None;
    }
    let v1 = s.sqrt();
    let sum = v + v1;
    if !(sum > T::zero()) {
        return None;
    }
    let top = if v1 > v { v1 } else { v };
    if engine_speed(top, ratio, vehicle.wheel_radius) > vehicle.engine_speed_max {
        return None;
    }
    Some((a, v1, T::lit(2.0) * distance_step / sum))
}

/// Passing predicate at a route position. Positions without a signal always
/// pass; a stop sign passes only at standstill; a signal passes when its
/// clock has reached the (possibly tightened) red threshold.
pub fn signal_gate<T: Real>(route: &Route<T>, distance: T, t: T, v: T, eta: T) -> Result<bool> {
    if !(eta >= T::zero() && eta <= T::one()) {
        return Err(Error::InvalidArgument(format!("eta {eta} outside [0, 1]")));
    }
    let tol = T::lit(1e-9) * (T::one() + distance.abs());
    let Some(sig) = route
        .signals
        .iter()
        .find(|s| (s.position - distance).abs() <= tol)
    else {
        return Ok(true);
    };
    match sig.kind {
        SignalKind::Stop => Ok(v == T::zero()),
        SignalKind::Signal => Ok(sig.clock_time(t) >= sig.gate_threshold(eta)?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BoundaryKind {
    Origin,
    Free,
    Signal,
    Stop,
    Terminal,
}

#[derive(Debug, Clone)]
pub(crate) struct Boundary<T> {
    pub distance: T,
    pub kind: BoundaryKind,
    pub v_min: T,
    pub v_max: T,
    /// Index into `route.signals`.
    pub signal: Option<usize>,
    /// Gate threshold on the signal clock.
    pub threshold: T,
    /// Grade of the cell that starts here.
    pub grade: T,
}

impl BoundaryKind {
    pub fn stop_capable(self) -> bool {
        matches!(
            self,
            BoundaryKind::Signal | BoundaryKind::Stop | BoundaryKind::Terminal
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Arc<T> {
    pub code: u16,
    pub control: Control<T>,
    pub next_v: T,
    pub dt: T,
    pub fuel: T,
    pub omega: T,
    pub stop: bool,
}

pub(crate) const NO_CONTROL: u16 = u16::MAX;

/// Everything the backward pass and the replay share.
pub(crate) struct Problem<'a, T> {
    pub route: &'a Route<T>,
    pub vehicle: &'a VehicleParams<T>,
    pub objective: Objective,
    pub axes: Axes<T>,
    pub boundaries: Vec<Boundary<T>>,
    pub distance_step: T,
    pub velocity_step: T,
    pub time_step: T,
    pub v_floor: T,
    pub idle: T,
}

impl<'a, T: Real> Problem<'a, T> {
    pub fn new(
        route: &'a Route<T>,
        vehicle: &'a VehicleParams<T>,
        grid: &GridSpec<T>,
        objective: Objective,
        eta: T,
    ) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(Error::InvalidArgument(format!("eta {eta} outside [0, 1]")));
        }
        vehicle.validate()?;
        route.validate()?;
        let axes = grid.axes(route, vehicle)?;
        let k_of = |d: T| {
            (d / grid.distance_step)
                .round()
                .to_usize()
                .unwrap_or(usize::MAX)
        };
        let mut boundaries: Vec<Boundary<T>> = (0..=axes.stages)
            .map(|k| {
                let d = if k == axes.stages {
                    route.length
                } else {
                    grid.distance_step * T::lit(k as f64)
                };
                let (v_min, v_max) = route.limits_at(d);
                Boundary {
                    distance: d,
                    kind: match k {
                        0 => BoundaryKind::Origin,
                        k if k == axes.stages => BoundaryKind::Terminal,
                        _ => BoundaryKind::Free,
                    },
                    v_min,
                    v_max,
                    signal: None,
                    threshold: T::zero(),
                    grade: route.grade_at(d),
                }
            })
            .collect();
        for (i, sig) in route.signals.iter().enumerate() {
            let k = k_of(sig.position);
            let b = &mut boundaries[k];
            match sig.kind {
                SignalKind::Stop => {
                    if b.kind != BoundaryKind::Terminal {
                        b.kind = BoundaryKind::Stop;
                    }
                }
                SignalKind::Signal => {
                    if k == 0 || k == axes.stages {
                        return Err(Error::config(
                            format!("signals[{i}].position"),
                            "signals must lie strictly inside the route",
                        ));
                    }
                    b.kind = BoundaryKind::Signal;
                    b.threshold = sig.gate_threshold(eta).map_err(|_| {
                        Error::config(
                            format!("signals[{i}].delay"),
                            "a delay distribution is required when eta > 0",
                        )
                    })?;
                }
            }
            b.signal = Some(i);
        }
        Ok(Self {
            route,
            vehicle,
            objective,
            boundaries,
            distance_step: grid.distance_step,
            velocity_step: grid.velocity_step,
            time_step: grid.time_step,
            v_floor: grid.velocity_step,
            idle: vehicle.idle_rate(),
            axes,
        })
    }

    pub fn stages(&self) -> usize {
        self.axes.stages
    }

    pub fn nv(&self) -> usize {
        self.axes.velocity.len()
    }

    pub fn nt(&self) -> usize {
        self.axes.time.len()
    }

    /// Whether a departure node at boundary `k` with speed `v` exists.
    pub fn node_allowed(&self, k: usize, v: T) -> bool {
        let b = &self.boundaries[k];
        match b.kind {
            BoundaryKind::Terminal => v == T::zero(),
            BoundaryKind::Stop => v == T::zero(),
            BoundaryKind::Origin | BoundaryKind::Signal => {
                v == T::zero() || (v >= b.v_min && v <= b.v_max)
            }
            BoundaryKind::Free => v >= b.v_min.max(self.v_floor) && v <= b.v_max,
        }
    }

    /// Signal gate at boundary `k` for a passing at time `t`.
    #[inline]
    pub fn gate(&self, k: usize, t: T) -> bool {
        let b = &self.boundaries[k];
        match (b.kind, b.signal) {
            (BoundaryKind::Signal, Some(i)) => self.route.signals[i].clock_time(t) >= b.threshold,
            _ => true,
        }
    }

    /// Objective charge for a cell, excluding the `ΔD·t` part of the time
    /// objective that depends on the departure time.
    #[inline]
    pub fn cell_cost(&self, arc: &Arc<T>) -> T {
        match self.objective {
            Objective::Fuel => arc.fuel,
            Objective::Time => self.distance_step * arc.dt * T::lit(0.5),
        }
    }

    #[inline]
    pub fn departure_cost(&self, t: T) -> T {
        match self.objective {
            Objective::Fuel => T::zero(),
            Objective::Time => self.distance_step * t,
        }
    }

    #[inline]
    pub fn wait_cost(&self, duration: T) -> T {
        match self.objective {
            Objective::Fuel => self.idle * duration,
            Objective::Time => T::zero(),
        }
    }

    fn code(&self, gear_idx: usize, engine_idx: usize, slot: usize) -> u16 {
        let nb = self.axes.brake.len() + 2;
        ((gear_idx * self.axes.engine.len() + engine_idx) * nb + slot) as u16
    }

    /// All admissible cells leaving boundary `k` at speed `v`, sorted by
    /// gear, then engine torque, then brake torque.
    pub fn arcs_from(&self, k: usize, v: T, out: &mut Vec<Arc<T>>) {
        out.clear();
        let next = &self.boundaries[k + 1];
        let grade = self.boundaries[k].grade;
        let dd = self.distance_step;
        let veh = self.vehicle;
        let stop_ok = next.kind.stop_capable() && v > T::zero();
        let (lo, hi, moving_ok) = match next.kind {
            BoundaryKind::Free => (next.v_min.max(self.v_floor), next.v_max, true),
            BoundaryKind::Signal => (next.v_min, next.v_max, true),
            _ => (T::zero(), T::zero(), false),
        };
        let nb = self.axes.brake.len();
        for (gi, &(gear, ratio)) in self.axes.gears.iter().enumerate() {
            if engine_speed(v, ratio, veh.wheel_radius) > veh.engine_speed_max {
                continue;
            }
            for (ei, &te) in self.axes.engine.iter().enumerate() {
                let brakes = if te > T::zero() { 1 } else { nb };
                if moving_ok {
                    for (bi, &tb) in self.axes.brake.iter().enumerate().take(brakes) {
                        let control = Control {
                            gear,
                            engine_torque: te,
                            brake_torque: tb,
                        };
                        let Some((_, v1, dt)) = traverse(veh, v, &control, ratio, dd, grade) else {
                            continue;
                        };
                        if !(v1 > T::zero()) || v1 < lo || v1 > hi {
                            continue;
                        }
                        let omega = engine_speed(T::lit(0.5) * (v + v1), ratio, veh.wheel_radius);
                        out.push(Arc {
                            code: self.code(gi, ei, bi),
                            control,
                            next_v: v1,
                            dt,
                            fuel: veh.fuel_rate(te, omega) * dt,
                            omega,
                            stop: false,
                        });
                    }
                }
            }
            if stop_ok {
                for control in stopping_controls(veh, v, gear, &self.axes.engine, dd, grade) {
                    let Some(step) = stop_step(veh, v, T::zero(), &control, dd) else {
                        continue;
                    };
                    let slot_engine = self
                        .axes
                        .engine
                        .iter()
                        .position(|&e| e == control.engine_torque);
                    let code = match (control.brake_torque > T::zero(), slot_engine) {
                        (true, Some(ei)) => self.code(gi, ei, nb),
                        (false, Some(ei)) if control.engine_torque <= T::zero() => {
                            self.code(gi, ei, nb)
                        }
                        _ => self.code(gi, 0, nb + 1),
                    };
                    out.push(Arc {
                        code,
                        control,
                        next_v: T::zero(),
                        dt: step.stage_time,
                        fuel: step.fuel,
                        omega: step.engine_speed,
                        stop: true,
                    });
                }
            }
        }
        out.sort_by(|a, b| {
            let key = |x: &Arc<T>| {
                (
                    x.control.gear,
                    x.control.engine_torque,
                    x.control.brake_torque,
                )
            };
            let (ga, ea, ba) = key(a);
            let (gb, eb, bb) = key(b);
            ga.cmp(&gb)
                .then(ea.partial_cmp(&eb).unwrap_or(std::cmp::Ordering::Equal))
                .then(ba.partial_cmp(&bb).unwrap_or(std::cmp::Ordering::Equal))
        });
    }
}

/// Position of `x` on an axis of spacing `step` with `last + 1` nodes:
/// `(lower index, weight of the upper node)`, or `None` beyond the axis.
#[inline]
pub(crate) fn locate<T: Real>(x: T, step: T, last: usize) -> Option<(usize, T)> {
    let u = x / step;
    let snap = T::lit(WEIGHT_SNAP);
    if u < -snap {
        return None;
    }
    let mut i = u.floor().max(T::zero());
    let mut w = (u - i).max(T::zero());
    if w > T::one() - snap {
        i += T::one();
        w = T::zero();
    } else if w < snap {
        w = T::zero();
    }
    let i = i.to_usize()?;
    if i > last || (i == last && w > T::zero()) {
        return None;
    }
    Some((i, w))
}

/// Bilinear value of a row-major `(velocity × time)` table and the spread of
/// the corners that carry weight. Any infinite weighted corner yields `∞`.
#[inline]
pub(crate) fn bilinear<T: Real>(
    table: &[T],
    nt: usize,
    (iv, wv): (usize, T),
    (jt, wt): (usize, T),
) -> (T, T) {
    let mut value = T::zero();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let rows: [(usize, T); 2] = [(iv, T::one() - wv), (iv + 1, wv)];
    let cols: [(usize, T); 2] = [(jt, T::one() - wt), (jt + 1, wt)];
    for &(r, a) in &rows {
        if a == T::zero() {
            continue;
        }
        for &(c, b) in &cols {
            if b == T::zero() {
                continue;
            }
            let x = table[r * nt + c];
            if x.is_infinite() {
                return (T::infinity(), T::zero());
            }
            value += a * b * x;
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (value, hi - lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn open() -> SpeedBounds<f64> {
        SpeedBounds {
            min: 0.0,
            max: f64::INFINITY,
        }
    }

    #[test]
    fn constant_speed_cell() {
        let veh = VehicleParams::<f64>::sedan();
        // Engine torque that balances road load at 10 m/s in third gear.
        let ratio = veh.gear_ratio(3).unwrap();
        let te = veh.road_load(10.0, 0.0) * veh.wheel_radius / ratio;
        let c = Control {
            gear: 3,
            engine_torque: te,
            brake_torque: 0.0,
        };
        let s = step_dynamics(&veh, 10.0, 3.0, &c, 5.0, 0.0, open()).unwrap();
        assert_relative_eq!(s.velocity, 10.0, epsilon = 1e-12);
        assert_relative_eq!(s.stage_time, 0.5, epsilon = 1e-12);
        assert_relative_eq!(s.time, 3.5, epsilon = 1e-12);
    }

    #[test]
    fn unit_acceleration_cell() {
        // Zero-resistance vehicle so that a = ratio·T/(R·m) exactly.
        let mut veh = VehicleParams::<f64>::sedan();
        veh.rolling_c1 = 0.0;
        veh.rolling_c2 = 0.0;
        veh.drag_coeff = 0.0;
        let ratio = veh.gear_ratio(4).unwrap();
        let te = veh.mass * veh.wheel_radius / ratio;
        let c = Control {
            gear: 4,
            engine_torque: te,
            brake_torque: 0.0,
        };
        let s = step_dynamics(&veh, 10.0, 0.0, &c, 5.0, 0.0, open()).unwrap();
        assert_relative_eq!(s.acceleration, 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.velocity, 110f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s.stage_time, 10.0 / (10.0 + 110f64.sqrt()), epsilon = 1e-12);
        assert!((s.stage_time - 0.488).abs() < 1e-3);
    }

    #[test]
    fn cannot_traverse_cell() {
        let mut veh = VehicleParams::<f64>::sedan();
        veh.rolling_c1 = 0.0;
        veh.rolling_c2 = 0.0;
        veh.drag_coeff = 0.0;
        // a = −2 m/s² through the brakes.
        let c = Control {
            gear: 1,
            engine_torque: 0.0,
            brake_torque: 2.0 * veh.mass * veh.wheel_radius,
        };
        assert!(step_dynamics(&veh, 1.0, 0.0, &c, 5.0, 0.0, open()).is_none());
    }

    #[test]
    fn speed_bounds_and_engine_speed_reject() {
        let veh = VehicleParams::<f64>::sedan();
        let c = Control {
            gear: 1,
            engine_torque: 100.0,
            brake_torque: 0.0,
        };
        // 16 m/s in first gear is beyond the engine speed limit.
        assert!(step_dynamics(&veh, 16.0, 0.0, &c, 5.0, 0.0, open()).is_none());
        let tight = SpeedBounds { min: 0.0, max: 1.0 };
        assert!(step_dynamics(&veh, 2.0, 0.0, &c, 5.0, 0.0, tight).is_none());
        let bad = Control {
            engine_torque: 500.0,
            ..c
        };
        assert!(step_dynamics(&veh, 2.0, 0.0, &bad, 5.0, 0.0, open()).is_none());
    }

    #[test]
    fn stopping_controls_stop_exactly() {
        let veh = VehicleParams::<f64>::sedan();
        let levels = crate::num::linspace(-40.0, 240.0, 5);
        let cs = stopping_controls(&veh, 8.0, 2, &levels, 5.0, 0.0);
        assert!(!cs.is_empty());
        for c in &cs {
            assert!(!(c.engine_torque > 0.0 && c.brake_torque > 0.0));
            let a = veh
                .acceleration(8.0, c.engine_torque, c.brake_torque, 2, 0.0)
                .unwrap();
            assert_relative_eq!(a, -6.4, epsilon = 1e-9);
            let s = stop_step(&veh, 8.0, 1.0, c, 5.0).unwrap();
            assert_eq!(s.velocity, 0.0);
            assert_relative_eq!(s.time, 1.0 + 10.0 / 8.0);
        }
    }

    #[test]
    fn locate_snaps_near_nodes() {
        assert_eq!(locate(1.0f64, 0.5, 4), Some((2, 0.0)));
        assert_eq!(locate(1.0 - 1e-12, 0.5, 4), Some((2, 0.0)));
        assert_eq!(locate(2.0, 0.5, 4), Some((4, 0.0)));
        assert_eq!(locate(2.1, 0.5, 4), None);
        let (i, w) = locate(1.2f64, 0.5, 4).unwrap();
        assert_eq!(i, 2);
        assert_relative_eq!(w, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn bilinear_skips_unweighted_infinite_corners() {
        let inf = f64::INFINITY;
        let table = [1.0, 2.0, inf, 3.0, 4.0, inf];
        assert_eq!(bilinear(&table, 3, (0, 0.0), (1, 0.0)).0, 2.0);
        assert_eq!(bilinear(&table, 3, (0, 0.5), (0, 0.5)).0, 2.5);
        assert!(bilinear(&table, 3, (0, 0.5), (1, 0.5)).0.is_infinite());
    }
}
