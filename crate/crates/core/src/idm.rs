//! Modified intelligent driver model used as the human-driver baseline.
//!
//! The driver previews the nearest signal or stop line within a fixed vision
//! distance. A stop line, or a signal that is red (now or at the predicted
//! crossing), switches the law to the constant deceleration that stops
//! exactly at the line; otherwise the free-road IDM law applies.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::scenario::Route;
use crate::signals::SignalKind;
use crate::trajectory::{SignalPassage, Trajectory, TrajectoryHeader, TrajectoryRow};
use crate::vehicle::{engine_speed, VehicleParams};

/// Form of the interaction term in the desired gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapLaw {
    /// `D_min + v·t_hw − v·D_sf / (2·sqrt(a_max·a_c))`.
    #[default]
    Published,
    /// Standard IDM `D_min + v·t_hw + v·Δv / (2·sqrt(a_max·a_c))` with a
    /// stationary obstacle, so `Δv = v`.
    Standard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdmParams<T> {
    /// m
    pub min_gap: T,
    /// s
    pub headway: T,
    /// m/s²
    pub comfort_decel: T,
    /// m/s²
    pub max_accel: T,
    /// m/s
    pub desired_speed: T,
    /// m
    pub vision_distance: T,
    /// s
    pub timestep: T,
    pub gap_law: GapLaw,
    /// Simulation aborts after this multiple of the free-flow travel time.
    pub horizon_factor: T,
}

impl<T: Real> Default for IdmParams<T> {
    fn default() -> Self {
        Self {
            min_gap: T::lit(2.0),
            headway: T::lit(1.5),
            comfort_decel: T::lit(2.0),
            max_accel: T::lit(2.0),
            desired_speed: T::lit(16.0),
            vision_distance: T::lit(100.0),
            timestep: T::lit(0.1),
            gap_law: GapLaw::Published,
            horizon_factor: T::lit(10.0),
        }
    }
}

/// Preview result for the nearest obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalStatus {
    /// Nothing requires a stop within the vision distance.
    Clear,
    /// Stop at the line ahead.
    Stop,
}

impl<T: Real> IdmParams<T> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("idm.min_gap", self.min_gap),
            ("idm.headway", self.headway),
            ("idm.comfort_decel", self.comfort_decel),
            ("idm.max_accel", self.max_accel),
            ("idm.desired_speed", self.desired_speed),
            ("idm.vision_distance", self.vision_distance),
            ("idm.timestep", self.timestep),
            ("idm.horizon_factor", self.horizon_factor),
        ];
        for (path, value) in fields {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(Error::config(
                    path,
                    format!("must be positive and finite, got {value}"),
                ));
            }
        }
        if self.timestep > T::lit(0.5) {
            return Err(Error::config("idm.timestep", "must not exceed 0.5 s"));
        }
        Ok(())
    }

    /// Desired gap, never below `min_gap`.
    pub fn desired_gap(&self, v: T, d_sf: T) -> T {
        let scale = T::lit(2.0) * (self.max_accel * self.comfort_decel).sqrt();
        let interaction = if v == T::zero() {
            T::zero()
        } else {
            match self.gap_law {
                GapLaw::Published => -(v * d_sf) / scale,
                GapLaw::Standard => v * v / scale,
            }
        };
        (self.min_gap + v * self.headway + interaction).max(self.min_gap)
    }

    /// IDM acceleration. `d_sf` may be infinite for a free road.
    pub fn acceleration(&self, v: T, d_sf: T, status: SignalStatus) -> T {
        match status {
            SignalStatus::Stop => {
                if v == T::zero() {
                    T::zero()
                } else {
                    -(v * v) / (T::lit(2.0) * d_sf)
                }
            }
            SignalStatus::Clear => {
                let speed_term = (v / self.desired_speed).powi(4);
                let gap_term = if d_sf.is_infinite() {
                    T::zero()
                } else {
                    (self.desired_gap(v, d_sf) / d_sf).powi(2)
                };
                self.max_accel * (T::one() - speed_term - gap_term)
            }
        }
    }
}

/// Speed-threshold gear selection: upshift out of gear `g` once the engine
/// would exceed `0.75·ω_max·g/n`, downshift below 90 % of the previous
/// gear's upshift speed.
#[derive(Debug, Clone)]
pub struct ShiftSchedule<T> {
    upshift_speed: Vec<T>,
}

impl<T: Real> ShiftSchedule<T> {
    pub fn new(vehicle: &VehicleParams<T>) -> Self {
        let n = vehicle.gear_count();
        let upshift_speed = (1..=n)
            .map(|g| {
                let ratio = vehicle.gearbox_ratios[g - 1] * vehicle.final_drive;
                let omega =
                    T::lit(0.75) * vehicle.engine_speed_max * T::lit(g as f64) / T::lit(n as f64);
                omega * vehicle.wheel_radius / ratio
            })
            .collect();
        Self { upshift_speed }
    }

    /// Gear to use at speed `v` when currently in `gear` (1-based).
    pub fn select(&self, gear: u8, v: T) -> u8 {
        let n = self.upshift_speed.len() as u8;
        let mut g = gear.clamp(1, n);
        while g < n && v > self.upshift_speed[usize::from(g) - 1] {
            g += 1;
        }
        while g > 1 && v < T::lit(0.9) * self.upshift_speed[usize::from(g) - 2] {
            g -= 1;
        }
        g
    }
}

/// A signal crossing by the simulated vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing<T> {
    /// Index into `route.signals`.
    pub signal: usize,
    pub position: T,
    pub time: T,
    pub clock: T,
    /// Realized effective red, `red_duration + α`.
    pub threshold: T,
    pub violated: bool,
}

#[derive(Debug, Clone)]
pub struct IdmRun<T> {
    pub trajectory: Trajectory<T>,
    pub crossings: Vec<Crossing<T>>,
    /// Position where braking for each obstacle began, keyed by signal
    /// index (`None` for the implicit terminal stop).
    pub braking_onsets: Vec<(Option<usize>, T)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Obstacle {
    Signal,
    Stop,
    Terminal,
}

/// Runs the IDM driver over `route`. `alphas[i]` is the realized red
/// extension of `route.signals[i]` (ignored for stop signs); pass zeros for a
/// deterministic run.
pub fn simulate<T: Real>(
    route: &Route<T>,
    vehicle: &VehicleParams<T>,
    params: &IdmParams<T>,
    alphas: &[T],
) -> Result<IdmRun<T>> {
    params.validate()?;
    if alphas.len() != route.signals.len() {
        return Err(Error::InvalidArgument(format!(
            "{} delay realizations for {} signals",
            alphas.len(),
            route.signals.len()
        )));
    }
    let half = T::lit(0.5);
    let snap = T::lit(1e-6);
    let dt = params.timestep;

    let mut obstacles: Vec<(Option<usize>, T, Obstacle)> = route
        .signals
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let kind = match s.kind {
                SignalKind::Signal => Obstacle::Signal,
                SignalKind::Stop if (s.position - route.length).abs() <= snap => Obstacle::Terminal,
                SignalKind::Stop => Obstacle::Stop,
            };
            (Some(i), s.position, kind)
        })
        .collect();
    if obstacles.last().map(|o| o.2) != Some(Obstacle::Terminal) {
        obstacles.push((None, route.length, Obstacle::Terminal));
    }

    let schedule = ShiftSchedule::new(vehicle);
    let idle = vehicle.idle_rate();
    let horizon = params.horizon_factor * route.length / params.desired_speed;

    let (mut x, mut v, mut t) = (T::zero(), T::zero(), T::zero());
    let mut gear = 1u8;
    let mut next = 0usize;
    let mut rows = vec![TrajectoryRow::origin()];
    let mut passages = Vec::new();
    let mut crossings = Vec::new();
    let mut braking_onsets = Vec::new();
    let mut braking_for: Option<usize> = None;
    let mut approaching = false;

    loop {
        if t > horizon {
            return Err(Error::NonTermination(format!(
                "no arrival after {t} s (horizon {horizon} s) at position {x} m"
            )));
        }
        let (sig_idx, pos, kind) = obstacles[next];
        let gap = pos - x;
        let alpha = sig_idx.map_or(T::zero(), |i| alphas[i]);

        // At the line: finish, leave a stop sign, or pass a green signal.
        if gap <= snap && v == T::zero() {
            match kind {
                Obstacle::Terminal => break,
                Obstacle::Stop => {
                    next += 1;
                    braking_for = None;
                    approaching = false;
                    continue;
                }
                Obstacle::Signal => {
                    let sig = &route.signals[sig_idx.expect("signal obstacle has an index")];
                    if !sig.violates(t, alpha) {
                        let c = record_crossing(sig_idx.unwrap(), sig, pos, t, alpha);
                        passages.push(passage(&c));
                        crossings.push(c);
                        next += 1;
                        braking_for = None;
                        approaching = false;
                        continue;
                    }
                }
            }
        }

        gear = schedule.select(gear, v);
        let ratio = vehicle.gear_ratio(gear)?;
        let theta = route.grade_at(x);
        let free = params.acceleration(v, T::infinity(), SignalStatus::Clear);

        let mut status = SignalStatus::Clear;
        if gap <= params.vision_distance {
            status = match kind {
                Obstacle::Stop | Obstacle::Terminal => SignalStatus::Stop,
                Obstacle::Signal => {
                    let sig = &route.signals[sig_idx.unwrap()];
                    let predicted = if v > T::zero() {
                        t + gap / v
                    } else {
                        T::infinity()
                    };
                    let red_later = predicted.is_finite() && sig.violates(predicted, alpha);
                    let (_, _, tau) = advance(v, free, dt, gap);
                    let red_in_step = tau.is_some_and(|tau| sig.violates(t + tau, alpha));
                    if gap <= snap || sig.violates(t, alpha) || red_later || red_in_step {
                        SignalStatus::Stop
                    } else {
                        SignalStatus::Clear
                    }
                }
            };
        }

        let mut a = match status {
            SignalStatus::Clear => {
                approaching = false;
                braking_for = None;
                free
            }
            SignalStatus::Stop => {
                if braking_for != Some(next) {
                    braking_for = Some(next);
                    if v > T::zero() {
                        braking_onsets.push((sig_idx, x));
                    } else {
                        approaching = gap > snap;
                    }
                }
                // From rest short of the line: pull up until stopping needs
                // half the comfortable deceleration, then brake onto the line.
                if approaching && v * v < params.comfort_decel * gap {
                    free
                } else {
                    approaching = false;
                    params.acceleration(v, gap, SignalStatus::Stop)
                }
            }
        };
        let cap = (ratio * vehicle.engine_torque_max / vehicle.wheel_radius
            - vehicle.road_load(v, theta))
            / vehicle.mass;
        a = a.min(cap);

        let (mut x1, v1, moving) = {
            let (dx, v1, _) = advance(v, a, dt, T::infinity());
            let moving = if v1 == T::zero() && a < T::zero() {
                v / -a
            } else {
                dt
            };
            (x + dx, v1, moving.min(dt))
        };
        if status == SignalStatus::Stop
            && (x1 > pos || (v1 == T::zero() && pos - x1 <= T::lit(1e-3)))
        {
            x1 = pos;
        }

        // Signals crossed while moving freely during this step.
        while next < obstacles.len()
            && obstacles[next].2 == Obstacle::Signal
            && obstacles[next].1 <= x1
            && x1 > x
        {
            let (i, p, _) = obstacles[next];
            let i = i.unwrap();
            if p == x1 && v1 == T::zero() {
                break; // stopped on the line; handled next iteration
            }
            let (_, _, tau) = advance(v, a, dt, p - x);
            let tc = t + tau.unwrap_or(T::zero());
            let c = record_crossing(i, &route.signals[i], p, tc, alphas[i]);
            passages.push(passage(&c));
            crossings.push(c);
            next += 1;
            braking_for = None;
        }

        let v_avg = half * (v + v1);
        let omega = engine_speed(v_avg, ratio, vehicle.wheel_radius);
        let accel = if moving > T::zero() {
            (v1 - v) / moving
        } else {
            T::zero()
        };
        let (engine_torque, brake_torque) = if x1 > x {
            let force = vehicle.mass * accel + vehicle.road_load(v_avg, theta);
            let wheel_torque = force * vehicle.wheel_radius;
            let te = (wheel_torque / ratio).min(vehicle.engine_torque_max);
            if te >= T::zero() {
                (te, T::zero())
            } else {
                let te = te.max(vehicle.engine_torque_min);
                (te, (te * ratio - wheel_torque).max(T::zero()))
            }
        } else {
            (T::zero(), T::zero())
        };
        let fuel = if x1 > x {
            vehicle.fuel_rate(engine_torque, omega) * moving + idle * (dt - moving)
        } else {
            idle * dt
        };
        let t1 = t + dt;

        if x1 > x {
            rows.push(TrajectoryRow {
                distance: x1,
                time: t1,
                velocity: v1,
                gear,
                engine_torque,
                brake_torque,
                engine_speed: omega,
                fuel,
            });
        } else {
            let last = rows.last_mut().expect("origin row present");
            last.time = t1;
            last.fuel += fuel;
        }
        x = x1;
        v = v1;
        t = t1;
    }

    Ok(IdmRun {
        trajectory: Trajectory {
            header: TrajectoryHeader {
                scenario_hash: String::new(),
                controller: "idm".into(),
                eta: 0.0,
                grid: format!("dt={}", params.timestep),
            },
            rows,
            passages,
        },
        crossings,
        braking_onsets,
    })
}

/// Constant-acceleration step of at most `dt`, stopping at zero speed.
/// Returns the distance covered, the final speed and the time at which the
/// distance `target` is first reached, if within the step.
fn advance<T: Real>(v: T, a: T, dt: T, target: T) -> (T, T, Option<T>) {
    let half = T::lit(0.5);
    let (duration, v1) = if a < T::zero() && v + a * dt <= T::zero() {
        (v / -a, T::zero())
    } else {
        (dt, v + a * dt)
    };
    let dx = v * duration + half * a * duration * duration;
    let tau = if target <= T::zero() {
        Some(T::zero())
    } else if target <= dx {
        let tau = if a == T::zero() {
            target / v
        } else {
            let disc = (v * v + T::lit(2.0) * a * target).max(T::zero());
            (disc.sqrt() - v) / a
        };
        Some(tau.max(T::zero()).min(duration))
    } else {
        None
    };
    (dx, v1, tau)
}

fn record_crossing<T: Real>(
    index: usize,
    sig: &crate::signals::SignalSpec<T>,
    position: T,
    time: T,
    alpha: T,
) -> Crossing<T> {
    Crossing {
        signal: index,
        position,
        time,
        clock: sig.clock_time(time),
        threshold: sig.red_duration + alpha,
        violated: sig.violates(time, alpha),
    }
}

fn passage<T: Real>(c: &Crossing<T>) -> SignalPassage<T> {
    SignalPassage {
        position: c.position,
        pass_time: c.time,
        clock: c.clock,
        threshold: c.threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::SignalSpec;
    use approx::assert_relative_eq;

    fn p() -> IdmParams<f64> {
        IdmParams::default()
    }

    #[test]
    fn desired_gap_examples() {
        assert_eq!(p().desired_gap(0.0, 50.0), 2.0);
        // 2 + 15 − 10·50/4 is negative and clamps to the minimum gap.
        assert_eq!(p().desired_gap(10.0, 50.0), 2.0);
        assert_relative_eq!(p().desired_gap(10.0, 1e-12), 17.0, epsilon = 1e-9);
        let std = IdmParams {
            gap_law: GapLaw::Standard,
            ..p()
        };
        assert_relative_eq!(std.desired_gap(10.0, 50.0), 2.0 + 15.0 + 100.0 / 4.0);
    }

    #[test]
    fn acceleration_examples() {
        assert_eq!(
            p().acceleration(16.0, f64::INFINITY, SignalStatus::Clear),
            0.0
        );
        assert_eq!(p().acceleration(10.0, 100.0, SignalStatus::Stop), -0.5);
        assert_eq!(
            p().acceleration(0.0, f64::INFINITY, SignalStatus::Clear),
            2.0
        );
    }

    #[test]
    fn timestep_limit() {
        let bad = IdmParams {
            timestep: 0.6,
            ..p()
        };
        assert!(matches!(bad.validate(), Err(Error::Config { .. })));
        let bad = IdmParams {
            headway: 0.0,
            ..p()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn shift_schedule_is_monotone_with_hysteresis() {
        let veh = VehicleParams::<f64>::sedan();
        let s = ShiftSchedule::new(&veh);
        let mut g = 1;
        let mut last = 1;
        for i in 0..=160 {
            g = s.select(g, i as f64 * 0.1);
            assert!(g >= last);
            last = g;
        }
        assert!(g >= 3);
        // Slightly below the upshift speed the gear is held.
        let up = s.upshift_speed[1];
        assert_eq!(s.select(3, up * 0.95), 3);
        assert_eq!(s.select(3, up * 0.85), 2);
    }

    fn plain_route(length: f64) -> Route<f64> {
        Route::uniform(length, 200.0, 16.0, vec![SignalSpec::stop(length)])
    }

    #[test]
    fn free_flow_rises_then_stops_at_the_end() {
        let veh = VehicleParams::sedan();
        let run = simulate(&plain_route(600.0), &veh, &p(), &[0.0]).unwrap();
        let rows = &run.trajectory.rows;
        let last = rows.last().unwrap();
        assert_eq!(last.velocity, 0.0);
        assert_relative_eq!(last.distance, 600.0, epsilon = 1e-9);
        let peak = rows.iter().map(|r| r.velocity).fold(0.0, f64::max);
        assert!(peak <= 16.0 + 0.1);
        // Monotone rise until braking for the end begins.
        let onset = run.braking_onsets[0].1;
        for w in rows.windows(2).filter(|w| w[1].distance < onset) {
            assert!(w[1].velocity >= w[0].velocity);
        }
        assert_relative_eq!(onset, 500.0, epsilon = 2.0);
        run.trajectory.check().unwrap();
    }

    #[test]
    fn waits_at_red_and_never_violates() {
        let veh = VehicleParams::sedan();
        let route = Route::uniform(
            400.0,
            200.0,
            16.0,
            vec![
                SignalSpec::signal(200.0, 60.0, 30.0, 10.0),
                SignalSpec::stop(400.0),
            ],
        );
        for alpha in [0.0, 5.0, 12.0] {
            let run = simulate(&route, &veh, &p(), &[alpha, 0.0]).unwrap();
            assert_eq!(run.crossings.len(), 1);
            let c = run.crossings[0];
            assert!(!c.violated, "alpha {alpha}: crossed at clock {}", c.clock);
            assert!(c.clock >= 30.0 + alpha - 1e-9);
            run.trajectory.check().unwrap();
        }
    }

    #[test]
    fn short_route_starts_within_vision() {
        let veh = VehicleParams::sedan();
        let run = simulate(&plain_route(40.0), &veh, &p(), &[0.0]).unwrap();
        let last = run.trajectory.rows.last().unwrap();
        assert_relative_eq!(last.distance, 40.0, epsilon = 1e-9);
        assert!(last.time < 60.0);
    }

    #[test]
    fn stationary_steps_burn_idle_fuel() {
        let veh = VehicleParams::sedan();
        let route = Route::uniform(
            300.0,
            200.0,
            16.0,
            vec![
                SignalSpec::signal(100.0, 60.0, 50.0, 0.0),
                SignalSpec::stop(300.0),
            ],
        );
        let run = simulate(&route, &veh, &p(), &[0.0, 0.0]).unwrap();
        let stop = run
            .trajectory
            .rows
            .iter()
            .find(|r| (r.distance - 100.0).abs() < 1e-9)
            .expect("stopped at the line");
        assert_eq!(stop.velocity, 0.0);
        assert!(stop.time >= 50.0 - 1e-9);
        assert!(stop.fuel > veh.idle_rate() * 30.0);
    }
}
