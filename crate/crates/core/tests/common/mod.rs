//! Brute-force reference for the DP solver.
//!
//! The value of a grid node is computed by direct recursion over every
//! admissible control and every interpolation corner, built only from the
//! public cell primitives. Nothing is shared with the solver's tables.

#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::HashMap;

use ecodrive::dp::{
    signal_gate, step_dynamics, stop_step, stopping_controls, Objective, SpeedBounds, WEIGHT_SNAP,
};
use ecodrive::signals::{DelayDistribution, SignalKind, TruncatedGaussian};
use ecodrive::{GridSpec, Route, SignalSpec, VehicleParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Instance {
    pub route: Route,
    pub vehicle: VehicleParams,
    pub grid: GridSpec,
    pub objective: Objective,
    pub eta: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Origin,
    Free,
    Signal,
    Stop,
    Terminal,
}

pub struct Oracle<'a> {
    inst: &'a Instance,
    kinds: Vec<Kind>,
    dist: Vec<f64>,
    vel: Vec<f64>,
    time: Vec<f64>,
    engine: Vec<f64>,
    brake: Vec<f64>,
    gears: Vec<u8>,
    memo: RefCell<HashMap<(usize, usize, usize), f64>>,
    standing: RefCell<HashMap<(usize, usize), f64>>,
}

fn axis(step: f64, top: f64) -> Vec<f64> {
    let n = (top / step).round() as usize;
    (0..=n)
        .map(|i| if i == n { top } else { step * i as f64 })
        .collect()
}

fn levels(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect()
}

/// `(index, upper weight)` on a uniform axis, snapping weights near 0 or 1.
fn place(x: f64, step: f64, last: usize) -> Option<(usize, f64)> {
    let u = x / step;
    if u < -WEIGHT_SNAP {
        return None;
    }
    let mut i = u.floor().max(0.0);
    let mut w = (u - i).max(0.0);
    if w > 1.0 - WEIGHT_SNAP {
        i += 1.0;
        w = 0.0;
    } else if w < WEIGHT_SNAP {
        w = 0.0;
    }
    let i = i as usize;
    if i > last || (i == last && w > 0.0) {
        return None;
    }
    Some((i, w))
}

impl<'a> Oracle<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let g = &inst.grid;
        let r = &inst.route;
        let stages = (r.length / g.distance_step).round() as usize;
        let dist: Vec<f64> = (0..=stages)
            .map(|k| {
                if k == stages {
                    r.length
                } else {
                    g.distance_step * k as f64
                }
            })
            .collect();
        let kinds = dist
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                let sig = r.signals.iter().find(|s| (s.position - d).abs() < 1e-9);
                match (k, sig.map(|s| s.kind)) {
                    (k, _) if k == stages => Kind::Terminal,
                    (0, _) => Kind::Origin,
                    (_, Some(SignalKind::Signal)) => Kind::Signal,
                    (_, Some(SignalKind::Stop)) => Kind::Stop,
                    _ => Kind::Free,
                }
            })
            .collect();
        let vmax = r.speed_limits.iter().map(|l| l.max).fold(0.0, f64::max);
        let veh = &inst.vehicle;
        Self {
            inst,
            kinds,
            dist,
            vel: axis(g.velocity_step, vmax),
            time: axis(g.time_step, r.deadline),
            engine: levels(
                veh.engine_torque_min,
                veh.engine_torque_max,
                g.engine_levels,
            ),
            brake: if g.brake_levels == 1 {
                vec![0.0]
            } else {
                levels(0.0, veh.brake_torque_max, g.brake_levels)
            },
            gears: if g.gears.is_empty() {
                (1..=veh.gearbox_ratios.len() as u8).collect()
            } else {
                g.gears.clone()
            },
            memo: RefCell::new(HashMap::new()),
            standing: RefCell::new(HashMap::new()),
        }
    }

    pub fn nodes_per_stage(&self) -> usize {
        self.vel.len() * self.time.len()
    }

    pub fn controls_per_state(&self) -> usize {
        let per_gear = self
            .engine
            .iter()
            .map(|&te| if te > 0.0 { 1 } else { self.brake.len() })
            .sum::<usize>();
        per_gear * self.gears.len()
    }

    pub fn stages(&self) -> usize {
        self.dist.len() - 1
    }

    /// Optimal cost from rest at the origin at time zero.
    pub fn total(&self) -> f64 {
        self.value(0, 0, 0)
    }

    fn is_fuel(&self) -> bool {
        self.inst.objective == Objective::Fuel
    }

    fn wait(&self, duration: f64) -> f64 {
        if self.is_fuel() {
            self.inst.vehicle.idle_rate() * duration
        } else {
            0.0
        }
    }

    fn allowed(&self, k: usize, v: f64) -> bool {
        let (lo, hi) = self.inst.route.limits_at(self.dist[k]);
        match self.kinds[k] {
            Kind::Terminal | Kind::Stop => v == 0.0,
            Kind::Origin | Kind::Signal => v == 0.0 || (v >= lo && v <= hi),
            Kind::Free => v >= lo.max(self.inst.grid.velocity_step) && v <= hi,
        }
    }

    fn passes(&self, k: usize, t: f64, v: f64) -> bool {
        signal_gate(&self.inst.route, self.dist[k], t, v, self.inst.eta).unwrap()
    }

    fn corner_value(&self, k: usize, v: f64, j: usize, r: f64) -> f64 {
        let Some((iv, wv)) = place(v, self.inst.grid.velocity_step, self.vel.len() - 1) else {
            return f64::INFINITY;
        };
        let mut acc = 0.0;
        for (i, a) in [(iv, 1.0 - wv), (iv + 1, wv)] {
            if a == 0.0 {
                continue;
            }
            for (jj, b) in [(j, 1.0 - r), (j + 1, r)] {
                if b == 0.0 {
                    continue;
                }
                let x = self.value(k, i, jj);
                if x.is_infinite() {
                    return f64::INFINITY;
                }
                acc += a * b * x;
            }
        }
        acc
    }

    fn stand(&self, k: usize, j: usize) -> f64 {
        if let Some(&c) = self.standing.borrow().get(&(k, j)) {
            return c;
        }
        let last = self.time.len() - 1;
        let go = if self.passes(k, self.time[j], 0.0) {
            self.value(k, 0, j)
        } else {
            f64::INFINITY
        };
        let hold = if j < last {
            self.wait(self.inst.grid.time_step) + self.stand(k, j + 1)
        } else {
            f64::INFINITY
        };
        let c = go.min(hold);
        self.standing.borrow_mut().insert((k, j), c);
        c
    }

    fn value(&self, k: usize, i: usize, j: usize) -> f64 {
        if k == self.stages() {
            return if i == 0 { 0.0 } else { f64::INFINITY };
        }
        if let Some(&c) = self.memo.borrow().get(&(k, i, j)) {
            return c;
        }
        let c = self.evaluate(k, i, j);
        self.memo.borrow_mut().insert((k, i, j), c);
        c
    }

    fn evaluate(&self, k: usize, i: usize, j: usize) -> f64 {
        let v = self.vel[i];
        if !self.allowed(k, v) {
            return f64::INFINITY;
        }
        let inst = self.inst;
        let veh = &inst.vehicle;
        let g = &inst.grid;
        let dd = g.distance_step;
        let grade = inst.route.grade_at(self.dist[k]);
        let last = self.time.len() - 1;
        let next = self.kinds[k + 1];
        let (lo, hi) = inst.route.limits_at(self.dist[k + 1]);
        let bounds = match next {
            Kind::Free => Some(SpeedBounds {
                min: lo.max(g.velocity_step),
                max: hi,
            }),
            Kind::Signal => Some(SpeedBounds { min: lo, max: hi }),
            _ => None,
        };
        let cell = |fuel: f64, dt: f64| if self.is_fuel() { fuel } else { dd * dt * 0.5 };
        let mut best = f64::INFINITY;

        for &gear in &self.gears {
            if let Some(bounds) = bounds {
                for &te in &self.engine {
                    for &tb in &self.brake {
                        if te > 0.0 && tb > 0.0 {
                            continue;
                        }
                        let control = ecodrive::dp::Control {
                            gear,
                            engine_torque: te,
                            brake_torque: tb,
                        };
                        let Some(s) =
                            step_dynamics(veh, v, self.time[j], &control, dd, grade, bounds)
                        else {
                            continue;
                        };
                        if s.velocity <= 0.0 {
                            continue;
                        }
                        let Some((q, r)) = place(s.stage_time, g.time_step, usize::MAX - 1) else {
                            continue;
                        };
                        let reach = q + usize::from(r > 0.0);
                        if j + reach > last {
                            continue;
                        }
                        if next == Kind::Signal
                            && !self.passes(k + 1, self.time[j] + s.stage_time, s.velocity)
                        {
                            continue;
                        }
                        let rest = self.corner_value(k + 1, s.velocity, j + q, r);
                        best = best.min(cell(s.fuel, s.stage_time) + rest);
                    }
                }
            }
            if matches!(next, Kind::Signal | Kind::Stop | Kind::Terminal) && v > 0.0 {
                for control in stopping_controls(veh, v, gear, &self.engine, dd, grade) {
                    let Some(s) = stop_step(veh, v, self.time[j], &control, dd) else {
                        continue;
                    };
                    let Some((q, r)) = place(s.stage_time, g.time_step, usize::MAX - 1) else {
                        continue;
                    };
                    let reach = q + usize::from(r > 0.0);
                    if j + reach > last {
                        continue;
                    }
                    let rest = if next == Kind::Terminal {
                        0.0
                    } else {
                        let partial = if r > 0.0 {
                            self.wait((1.0 - r) * g.time_step)
                        } else {
                            0.0
                        };
                        partial + self.stand(k + 1, j + reach)
                    };
                    best = best.min(cell(s.fuel, s.stage_time) + rest);
                }
            }
        }
        if best.is_finite() && !self.is_fuel() {
            best += dd * self.time[j];
        }
        best
    }
}

/// Random tiny instance: at most 4 stages, at most 50 nodes per stage and at
/// most 5 controls per state, with an optional signal or stop sign inside.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let stages = rng.random_range(2..=4usize);
    let dd = [10.0, 20.0][rng.random_range(0..2)];
    let length = dd * stages as f64;
    let dv = 2.0;
    let vmax = [4.0, 6.0][rng.random_range(0..2)];
    let nv = (vmax / dv) as usize + 1;
    let dt = [1.0, 2.0, 3.0, 4.0][rng.random_range(0..4)];
    let nt = 50 / nv;
    let deadline = dt * (nt - 1) as f64;

    let mut vehicle = VehicleParams::sedan();
    vehicle.engine_torque_min = -rng.random_range(0.0..40.0f64).round();
    vehicle.engine_torque_max = rng.random_range(60.0..240.0f64).round();
    vehicle.brake_torque_max = rng.random_range(500.0..4000.0f64).round();

    let mut signals = Vec::new();
    let k = rng.random_range(1..stages);
    match rng.random_range(0..4) {
        0 | 1 => {
            let offset = rng.random_range(0..10) as f64;
            let law = TruncatedGaussian::new(1.0, 1.0, 0.0, 6.0).unwrap();
            signals.push(
                SignalSpec::signal(dd * k as f64, 10.0, 4.0, offset)
                    .with_delay(DelayDistribution::TruncatedGaussian(law)),
            );
        }
        2 => signals.push(SignalSpec::stop(dd * k as f64)),
        _ => {}
    }
    if rng.random_bool(0.5) {
        signals.push(SignalSpec::stop(length));
    }
    let has_signal = signals.iter().any(|s| s.kind == SignalKind::Signal);
    let eta = if has_signal && rng.random_bool(0.5) {
        [0.3, 0.6, 0.9][rng.random_range(0..3)]
    } else {
        0.0
    };
    let engine_levels = rng.random_range(2..=3usize);
    let brake_levels = if engine_levels == 2 {
        rng.random_range(1..=2usize)
    } else {
        1
    };
    let grid = GridSpec {
        distance_step: dd,
        velocity_step: dv,
        time_step: dt,
        engine_levels,
        brake_levels,
        gears: vec![rng.random_range(4..=6u8)],
    };
    Instance {
        route: Route::uniform(length, deadline, vmax, signals),
        vehicle,
        grid,
        objective: if rng.random_bool(0.5) {
            Objective::Fuel
        } else {
            Objective::Time
        },
        eta,
    }
}

pub fn instance_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
