use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::scenario::Route;
use crate::vehicle::VehicleParams;

use super::grid::GridSpec;
use super::model::{bilinear, locate, Arc, BoundaryKind, Control, Objective, Problem, NO_CONTROL};

/// Value and policy tables of a solved problem.
///
/// Tables are indexed by boundary `k` (distance `k·ΔD`), then row-major by
/// velocity node and time node. `cost_to_go` is the optimal remaining cost of
/// *departing* boundary `k` in that state. At boundaries where the vehicle
/// may stand (signals, stop signs, the origin) the velocity-0 row describes a
/// departure from rest; arrivals that stop there continue through the
/// `stop_cost` table, which adds the option of waiting one time step.
#[derive(Debug, Clone)]
pub struct DpSolution<T> {
    pub objective: Objective,
    pub eta: T,
    pub grid: GridSpec<T>,
    pub distances: Vec<T>,
    pub velocity_axis: Vec<T>,
    pub time_axis: Vec<T>,
    /// Optimal cost from the origin at rest at time zero.
    pub total_cost: T,
    pub(crate) cost: Vec<Vec<T>>,
    pub(crate) stop_cost: Vec<Vec<T>>,
    pub(crate) policy: Vec<Vec<u16>>,
}

impl<T: Real> DpSolution<T> {
    pub fn stages(&self) -> usize {
        self.distances.len() - 1
    }

    /// Cost-to-go at boundary `k`, velocity node `i`, time node `j`.
    pub fn cost_to_go(&self, k: usize, i: usize, j: usize) -> T {
        self.cost[k][i * self.time_axis.len() + j]
    }

    /// Best cost of standing at rest at boundary `k` from time node `j`
    /// (waiting allowed), or `None` where the vehicle cannot stand.
    pub fn standing_cost(&self, k: usize, j: usize) -> Option<T> {
        self.stop_cost[k].get(j).copied()
    }

    /// Optimal control at a grid node, or `None` where the node is
    /// infeasible or terminal.
    pub fn control_at(
        &self,
        route: &Route<T>,
        vehicle: &VehicleParams<T>,
        k: usize,
        i: usize,
        j: usize,
    ) -> Result<Option<Control<T>>> {
        if k >= self.stages() {
            return Ok(None);
        }
        let code = self.policy[k][i * self.time_axis.len() + j];
        if code == NO_CONTROL {
            return Ok(None);
        }
        let problem = Problem::new(route, vehicle, &self.grid, self.objective, self.eta)?;
        let mut arcs = Vec::new();
        problem.arcs_from(k, self.velocity_axis[i], &mut arcs);
        Ok(arcs.iter().find(|a| a.code == code).map(|a| a.control))
    }
}

/// Backward induction over distance boundaries.
///
/// `eta = 0` gates signals on the base red; `eta > 0` on the red extended by
/// the `eta`-quantile of each signal's delay law.
pub fn solve<T: Real>(
    route: &Route<T>,
    vehicle: &VehicleParams<T>,
    grid: &GridSpec<T>,
    objective: Objective,
    eta: T,
) -> Result<DpSolution<T>> {
    let p = Problem::new(route, vehicle, grid, objective, eta)?;
    let stages = p.stages();
    let (nv, nt) = (p.nv(), p.nt());
    let last = nt - 1;

    let mut cost: Vec<Vec<T>> = vec![Vec::new(); stages + 1];
    let mut stop_cost: Vec<Vec<T>> = vec![Vec::new(); stages + 1];
    let mut policy: Vec<Vec<u16>> = vec![Vec::new(); stages];

    let mut terminal = vec![T::infinity(); nv * nt];
    terminal[..nt].iter_mut().for_each(|c| *c = T::zero());
    cost[stages] = terminal;

    for k in (0..stages).rev() {
        let mut table = vec![T::infinity(); nv * nt];
        let mut pol = vec![NO_CONTROL; nv * nt];
        {
            let next = &cost[k + 1];
            let next_stop = &stop_cost[k + 1];
            let p = &p;
            table
                .par_chunks_mut(nt)
                .zip(pol.par_chunks_mut(nt))
                .enumerate()
                .for_each_init(Vec::new, |arcs, (i, (row, prow))| {
                    let v = p.axes.velocity[i];
                    if p.node_allowed(k, v) {
                        stage_row(p, k, v, next, next_stop, arcs, row, prow);
                    }
                });
        }
        if p.boundaries[k].kind.stop_capable() {
            let step = p.wait_cost(p.time_step);
            let mut standing = vec![T::infinity(); nt];
            for j in (0..nt).rev() {
                let depart = if p.gate(k, p.axes.time[j]) {
                    table[j]
                } else {
                    T::infinity()
                };
                let wait = if j < last {
                    step + standing[j + 1]
                } else {
                    T::infinity()
                };
                standing[j] = if depart <= wait { depart } else { wait };
            }
            stop_cost[k] = standing;
        }
        cost[k] = table;
        policy[k] = pol;
        log::trace!("stage {k} done");
    }

    let total = cost[0][0];
    if !total.is_finite() {
        let dead = (0..stages)
            .rev()
            .find(|&k| cost[k].iter().all(|c| c.is_infinite()))
            .map(|k| p.boundaries[k].distance.as_f64());
        return Err(Error::Infeasible {
            reason: match dead {
                Some(d) => format!("no feasible state at {d} m"),
                None => "no feasible departure from rest at time zero".into(),
            },
            dead_boundary: dead,
        });
    }
    Ok(DpSolution {
        objective,
        eta,
        grid: grid.clone(),
        distances: p.boundaries.iter().map(|b| b.distance).collect(),
        velocity_axis: p.axes.velocity.clone(),
        time_axis: p.axes.time.clone(),
        total_cost: total,
        cost,
        stop_cost,
        policy,
    })
}

/// Splits a duration into whole grid steps and the snapped remainder.
#[inline]
pub(crate) fn split_steps<T: Real>(dt: T, step: T) -> Option<(usize, T)> {
    locate(dt, step, usize::MAX - 1)
}

/// Fills one velocity row of the departure table at boundary `k`.
#[allow(clippy::too_many_arguments)]
fn stage_row<T: Real>(
    p: &Problem<'_, T>,
    k: usize,
    v: T,
    next: &[T],
    next_stop: &[T],
    arcs: &mut Vec<Arc<T>>,
    row: &mut [T],
    prow: &mut [u16],
) {
    let nt = row.len();
    let last = nt - 1;
    let next_kind = p.boundaries[k + 1].kind;
    p.arcs_from(k, v, arcs);
    for arc in arcs.iter() {
        let Some((q, r)) = split_steps(arc.dt, p.time_step) else {
            continue;
        };
        let reach = q + usize::from(r > T::zero());
        if reach > last {
            continue;
        }
        let jmax = last - reach;
        let base = p.cell_cost(arc);
        if arc.stop {
            if next_kind == BoundaryKind::Terminal {
                for j in 0..=jmax {
                    relax(row, prow, j, base, arc.code);
                }
            } else {
                let wait = if r > T::zero() {
                    p.wait_cost((T::one() - r) * p.time_step)
                } else {
                    T::zero()
                };
                for j in 0..=jmax {
                    let s = next_stop[j + reach];
                    if s.is_finite() {
                        relax(row, prow, j, base + wait + s, arc.code);
                    }
                }
            }
            continue;
        }
        let Some(vloc) = locate(arc.next_v, p.velocity_step, p.nv() - 1) else {
            continue;
        };
        let gated = next_kind == BoundaryKind::Signal;
        for j in 0..=jmax {
            if gated && !p.gate(k + 1, p.axes.time[j] + arc.dt) {
                continue;
            }
            let (value, _) = bilinear(next, nt, vloc, (j + q, r));
            if value.is_finite() {
                relax(row, prow, j, base + value, arc.code);
            }
        }
    }
    for (j, c) in row.iter_mut().enumerate() {
        if c.is_finite() {
            *c += p.departure_cost(p.axes.time[j]);
        }
    }
}

#[inline]
fn relax<T: Real>(row: &mut [T], prow: &mut [u16], j: usize, cand: T, code: u16) {
    if cand < row[j] {
        row[j] = cand;
        prow[j] = code;
    }
}
