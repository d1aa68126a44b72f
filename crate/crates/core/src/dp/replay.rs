use crate::error::{Error, Result};
use crate::num::Real;
use crate::scenario::Route;
use crate::trajectory::{SignalPassage, Trajectory, TrajectoryHeader, TrajectoryRow};
use crate::vehicle::VehicleParams;

use super::model::{bilinear, locate, Arc, BoundaryKind, Problem};
use super::solver::DpSolution;

/// Continuation value of taking `arc` from boundary `k` at time `t`, and the
/// spread of the interpolation corners involved.
fn continuation<T: Real>(
    p: &Problem<'_, T>,
    sol: &DpSolution<T>,
    k: usize,
    arc: &Arc<T>,
    t: T,
) -> Option<(T, T)> {
    let arrive = t + arc.dt;
    let next = k + 1;
    let last = p.nt() - 1;
    let (jt, r) = locate(arrive, p.time_step, last)?;
    if arc.stop {
        if p.boundaries[next].kind == BoundaryKind::Terminal {
            return Some((T::zero(), T::zero()));
        }
        let jh = jt + usize::from(r > T::zero());
        let wait = if r > T::zero() {
            (T::one() - r) * p.time_step
        } else {
            T::zero()
        };
        let v = p.wait_cost(wait) + *sol.stop_cost[next].get(jh)?;
        return v.is_finite().then_some((v, T::zero()));
    }
    if !p.gate(next, arrive) {
        return None;
    }
    let vloc = locate(arc.next_v, p.velocity_step, p.nv() - 1)?;
    let (v, spread) = bilinear(&sol.cost[next], p.nt(), vloc, (jt, r));
    v.is_finite().then_some((v, spread))
}

/// Forward pass from rest at the origin, re-optimizing one cell ahead at the
/// actual (off-grid) state against the stored value tables.
///
/// Every signal passing is re-checked against the gate, and the realized
/// objective must agree with the solver's optimum within twice the summed
/// interpolation spread.
pub fn extract_trajectory<T: Real>(
    sol: &DpSolution<T>,
    route: &Route<T>,
    vehicle: &VehicleParams<T>,
) -> Result<Trajectory<T>> {
    let p = Problem::new(route, vehicle, &sol.grid, sol.objective, sol.eta)?;
    if p.stages() != sol.stages()
        || p.nt() != sol.time_axis.len()
        || p.nv() != sol.velocity_axis.len()
    {
        return Err(Error::InvalidArgument(
            "solution was computed for a different problem".into(),
        ));
    }
    let last = p.nt() - 1;
    let mut rows = vec![TrajectoryRow::origin()];
    let mut passages = Vec::new();
    let (mut v, mut t) = (T::zero(), T::zero());
    let mut realized = T::zero();
    let mut spread_sum = T::zero();
    let mut arcs = Vec::new();

    for k in 0..p.stages() {
        p.arcs_from(k, v, &mut arcs);
        let mut best: Option<(T, T, Arc<T>)> = None;
        for arc in &arcs {
            if let Some((value, spread)) = continuation(&p, sol, k, arc, t) {
                let total = p.cell_cost(arc) + value;
                if best.as_ref().is_none_or(|b| total < b.0) {
                    best = Some((total, spread, *arc));
                }
            }
        }
        let Some((_, spread, arc)) = best else {
            return Err(Error::Consistency(format!(
                "no feasible continuation at {} m (v = {v} m/s, t = {t} s)",
                p.boundaries[k].distance
            )));
        };
        spread_sum += spread;
        realized += p.departure_cost(t) + p.cell_cost(&arc);
        let arrive = t + arc.dt;
        let next = &p.boundaries[k + 1];
        let mut fuel = arc.fuel;
        let mut depart = arrive;
        if arc.stop && next.kind != BoundaryKind::Terminal {
            let (jt, r) = locate(arrive, p.time_step, last).ok_or_else(|| {
                Error::Consistency(format!("arrival {arrive} s beyond the deadline"))
            })?;
            let mut j = jt + usize::from(r > T::zero());
            let step_wait = p.wait_cost(p.time_step);
            let standing = &sol.stop_cost[k + 1];
            loop {
                let go = if p.gate(k + 1, p.axes.time[j]) {
                    sol.cost[k + 1][j]
                } else {
                    T::infinity()
                };
                let hold = if j < last {
                    step_wait + standing[j + 1]
                } else {
                    T::infinity()
                };
                if go.is_finite() && go <= hold {
                    break;
                }
                if j >= last {
                    return Err(Error::Consistency(format!("stuck at {} m", next.distance)));
                }
                j += 1;
            }
            depart = p.axes.time[j].max(arrive);
            let waited = depart - arrive;
            fuel += p.idle * waited;
            realized += p.wait_cost(waited);
        }
        if let Some(i) = next.signal.filter(|_| next.kind == BoundaryKind::Signal) {
            if !p.gate(k + 1, depart) {
                return Err(Error::Consistency(format!(
                    "signal at {} m passed inside the red",
                    next.distance
                )));
            }
            let sig = &route.signals[i];
            passages.push(SignalPassage {
                position: next.distance,
                pass_time: depart,
                clock: sig.clock_time(depart),
                threshold: next.threshold,
            });
        }
        rows.push(TrajectoryRow {
            distance: next.distance,
            time: depart,
            velocity: arc.next_v,
            gear: arc.control.gear,
            engine_torque: arc.control.engine_torque,
            brake_torque: arc.control.brake_torque,
            engine_speed: arc.omega,
            fuel,
        });
        v = arc.next_v;
        t = depart;
    }

    if v != T::zero() || t > route.deadline {
        return Err(Error::Consistency(format!(
            "terminal state v = {v}, t = {t}"
        )));
    }
    let tol = T::lit(2.0) * spread_sum + T::lit(1e-9) * (T::one() + sol.total_cost.abs());
    let gap = (realized - sol.total_cost).abs();
    if gap > tol {
        return Err(Error::Consistency(format!(
            "replayed cost {realized} differs from the optimum {} by {gap} (tolerance {tol})",
            sol.total_cost
        )));
    }
    log::debug!(
        "replay cost {realized}, optimum {}, spread {spread_sum}",
        sol.total_cost
    );
    Ok(Trajectory {
        header: TrajectoryHeader {
            scenario_hash: String::new(),
            controller: sol.objective.label().into(),
            eta: sol.eta.as_f64(),
            grid: sol.grid.describe(),
        },
        rows,
        passages,
    })
}
