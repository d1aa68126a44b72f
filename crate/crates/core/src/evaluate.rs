//! Trip metrics, comparison tables and Monte-Carlo violation estimates.
//!
//! Replicate `i` of a Monte-Carlo run draws from `ChaCha8Rng` seeded with the
//! master seed and switched to stream `i`, so results do not depend on how
//! replicates are scheduled across threads. Each replicate draws one delay
//! per signal for the whole trip.

use std::fmt::Write as _;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dp::{extract_trajectory, solve, GridSpec, Objective};
use crate::error::{Error, Result};
use crate::idm::{self, IdmParams};
use crate::scenario::Route;
use crate::signals::SignalKind;
use crate::trajectory::Trajectory;
use crate::vehicle::VehicleParams;

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub label: String,
    pub scenario_hash: String,
    /// s
    pub arrival_time: f64,
    /// g
    pub total_fuel: f64,
    /// Total fuel over positive crank energy, g/kWh; `None` without traction.
    pub avg_bsfc: Option<f64>,
    /// kWh
    pub positive_energy: f64,
    /// Clock reading at each signal passing.
    pub passing_clocks: Vec<f64>,
    /// Standstills away from the origin and the destination.
    pub complete_stops: usize,
}

/// Summarizes a complete trajectory.
pub fn metrics(traj: &Trajectory<f64>) -> Result<RunMetrics> {
    traj.check()?;
    let rows = &traj.rows;
    let mut energy_j = 0.0;
    for (k, r) in rows.iter().enumerate().skip(1) {
        let power = r.engine_torque * r.engine_speed;
        if power > 0.0 {
            energy_j += power * traj.cell_duration(k);
        }
    }
    let total_fuel = traj.total_fuel();
    let mut complete_stops = 0;
    let mut standing = false;
    for r in &rows[1..rows.len() - 1] {
        let now = r.velocity == 0.0;
        if now && !standing {
            complete_stops += 1;
        }
        standing = now;
    }
    Ok(RunMetrics {
        label: traj.header.controller.clone(),
        scenario_hash: traj.header.scenario_hash.clone(),
        arrival_time: traj.arrival_time().unwrap_or(0.0),
        total_fuel,
        avg_bsfc: (energy_j > 0.0).then(|| total_fuel * 3.6e6 / energy_j),
        positive_energy: energy_j / 3.6e6,
        passing_clocks: traj.passages.iter().map(|p| p.clock).collect(),
        complete_stops,
    })
}

/// Two-sided 95 % standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials at normal quantile
/// `z` ([`Z95`] for 95 %).
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Nearest-rank `q`-quantile of `values`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "quantile level {q} outside [0, 1]"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

/// Random generator for replicate `index` under `seed`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws one delay per entry of `route.signals` (zero for stop signs).
pub fn sample_delays(route: &Route<f64>, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    route
        .signals
        .iter()
        .enumerate()
        .map(|(i, s)| match (s.kind, &s.delay) {
            (SignalKind::Stop, _) => Ok(0.0),
            (SignalKind::Signal, Some(d)) => Ok(d.sample(rng)),
            (SignalKind::Signal, None) => Err(Error::config(
                format!("signals[{i}].delay"),
                "Monte-Carlo evaluation needs a delay distribution",
            )),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalViolations {
    pub position: f64,
    pub violations: usize,
    pub samples: usize,
    pub rate: f64,
    /// Wilson 95 % interval of the rate.
    pub interval: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub label: String,
    pub samples: usize,
    pub seed: u64,
    pub per_signal: Vec<SignalViolations>,
    /// Replicates with at least one violation.
    pub trips_with_violation: usize,
    /// Arrival time of every replicate, in replicate order.
    pub arrivals: Vec<f64>,
}

impl MonteCarloReport {
    pub fn total_violations(&self) -> usize {
        self.per_signal.iter().map(|s| s.violations).sum()
    }

    fn build(
        label: String,
        samples: usize,
        seed: u64,
        positions: &[f64],
        hits: Vec<Vec<bool>>,
        arrivals: Vec<f64>,
    ) -> Self {
        let per_signal = positions
            .iter()
            .enumerate()
            .map(|(s, &position)| {
                let violations = hits.iter().filter(|h| h[s]).count();
                SignalViolations {
                    position,
                    violations,
                    samples,
                    rate: violations as f64 / samples as f64,
                    interval: wilson_interval(violations, samples, Z95),
                }
            })
            .collect();
        Self {
            label,
            samples,
            seed,
            per_signal,
            trips_with_violation: hits.iter().filter(|h| h.iter().any(|&x| x)).count(),
            arrivals,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{}: {} replicates, seed {}",
            self.label, self.samples, self.seed
        );
        let _ = writeln!(
            s,
            "{:>10}  {:>10}  {:>8}  {:>19}",
            "signal_m", "violations", "rate", "wilson95"
        );
        for v in &self.per_signal {
            let _ = writeln!(
                s,
                "{:>10.1}  {:>10}  {:>8.4}  [{:>7.4}, {:>7.4}]",
                v.position, v.violations, v.rate, v.interval.0, v.interval.1
            );
        }
        let _ = writeln!(s, "trips with a violation: {}", self.trips_with_violation);
        if let (Ok(lo), Ok(med), Ok(hi)) = (
            quantile(&self.arrivals, 0.0),
            quantile(&self.arrivals, 0.5),
            quantile(&self.arrivals, 1.0),
        ) {
            let _ = writeln!(
                s,
                "arrival time min/median/max: {lo:.2} / {med:.2} / {hi:.2} s"
            );
        }
        s
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "signal_m",
            "violations",
            "samples",
            "rate",
            "wilson_lo",
            "wilson_hi",
        ])?;
        for v in &self.per_signal {
            w.write_record([
                v.position.to_string(),
                v.violations.to_string(),
                v.samples.to_string(),
                v.rate.to_string(),
                v.interval.0.to_string(),
                v.interval.1.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Arrival-time histogram with bins of `width` seconds.
    pub fn write_histogram_csv<W: Write>(&self, out: W, width: f64) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_start_s", "bin_end_s", "count"])?;
        if let (Ok(lo), Ok(hi)) = (quantile(&self.arrivals, 0.0), quantile(&self.arrivals, 1.0)) {
            let start = (lo / width).floor() * width;
            let bins = (((hi - start) / width).floor() as usize) + 1;
            let mut counts = vec![0usize; bins];
            for &a in &self.arrivals {
                counts[(((a - start) / width).floor() as usize).min(bins - 1)] += 1;
            }
            for (b, c) in counts.iter().enumerate() {
                let s0 = start + b as f64 * width;
                w.write_record([s0.to_string(), (s0 + width).to_string(), c.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "at least one sample is required".into(),
        ));
    }
    Ok(())
}

/// Open-loop evaluation of a planned trajectory: its passing times are
/// fixed and each replicate checks them against freshly drawn delays.
pub fn monte_carlo_plan(
    traj: &Trajectory<f64>,
    route: &Route<f64>,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    check_samples(samples)?;
    let arrival = traj
        .arrival_time()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    let mut checks = Vec::new();
    for p in &traj.passages {
        let idx = route
            .signals
            .iter()
            .position(|s| s.kind == SignalKind::Signal && (s.position - p.position).abs() < 1e-6)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("no signal at {} m in the route", p.position))
            })?;
        checks.push((idx, p.pass_time));
    }
    let hits: Vec<Vec<bool>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(seed, i as u64);
            let alphas = sample_delays(route, &mut rng)?;
            Ok(checks
                .iter()
                .map(|&(idx, t)| route.signals[idx].violates(t, alphas[idx]))
                .collect())
        })
        .collect::<Result<_>>()?;
    let positions: Vec<f64> = traj.passages.iter().map(|p| p.position).collect();
    Ok(MonteCarloReport::build(
        traj.header.controller.clone(),
        samples,
        seed,
        &positions,
        hits,
        vec![arrival; samples],
    ))
}

/// Closed-loop evaluation: the IDM driver is re-simulated against each
/// replicate's delays.
pub fn monte_carlo_idm(
    route: &Route<f64>,
    vehicle: &VehicleParams<f64>,
    params: &IdmParams<f64>,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    check_samples(samples)?;
    let positions: Vec<f64> = route.timed_signals().map(|(_, s)| s.position).collect();
    let runs: Vec<(Vec<bool>, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(seed, i as u64);
            let alphas = sample_delays(route, &mut rng)?;
            let run = idm::simulate(route, vehicle, params, &alphas)?;
            let hits = route
                .timed_signals()
                .map(|(idx, _)| run.crossings.iter().any(|c| c.signal == idx && c.violated))
                .collect();
            Ok((hits, run.trajectory.arrival_time().unwrap_or(f64::NAN)))
        })
        .collect::<Result<_>>()?;
    let (hits, arrivals): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    Ok(MonteCarloReport::build(
        "idm".into(),
        samples,
        seed,
        &positions,
        hits,
        arrivals,
    ))
}

/// Relative change of one run against the baseline, as fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct Delta {
    pub label: String,
    pub arrival_time: f64,
    pub avg_bsfc: Option<f64>,
    pub total_fuel: f64,
}

fn rel(x: f64, base: f64) -> f64 {
    (x - base) / base
}

/// Deltas of every run against `runs[baseline]`.
pub fn compare(runs: &[RunMetrics], baseline: usize) -> Result<Vec<Delta>> {
    if runs.len() < 2 {
        return Err(Error::InvalidArgument(
            "comparison needs at least two runs".into(),
        ));
    }
    let base = runs
        .get(baseline)
        .ok_or_else(|| Error::InvalidArgument(format!("baseline index {baseline} out of range")))?;
    Ok(runs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != baseline)
        .map(|(_, r)| Delta {
            label: r.label.clone(),
            arrival_time: rel(r.arrival_time, base.arrival_time),
            avg_bsfc: match (r.avg_bsfc, base.avg_bsfc) {
                (Some(a), Some(b)) => Some(rel(a, b)),
                _ => None,
            },
            total_fuel: rel(r.total_fuel, base.total_fuel),
        })
        .collect())
}

fn pct(x: f64) -> String {
    format!("{:+.1}%", 100.0 * x)
}

/// Aligned comparison table. With a baseline and more than one run, a
/// `Change` row per non-baseline run follows; mismatched scenario hashes add
/// a warning line.
pub fn format_table(runs: &[RunMetrics], baseline: Option<usize>) -> Result<String> {
    let mut s = String::new();
    let hashes: Vec<&str> = runs.iter().map(|r| r.scenario_hash.as_str()).collect();
    if hashes.windows(2).any(|w| w[0] != w[1]) {
        let _ = writeln!(
            s,
            "warning: runs come from different scenarios ({})",
            hashes.join(", ")
        );
    }
    let _ = writeln!(
        s,
        "{:<22} {:>16} {:>11} {:>14} {:>10} {:>6}",
        "run", "scenario", "arrival_s", "bsfc_g_per_kwh", "fuel_g", "stops"
    );
    for r in runs {
        let _ = writeln!(
            s,
            "{:<22} {:>16} {:>11.2} {:>14} {:>10.2} {:>6}",
            r.label,
            r.scenario_hash,
            r.arrival_time,
            r.avg_bsfc.map_or("-".into(), |b| format!("{b:.1}")),
            r.total_fuel,
            r.complete_stops
        );
    }
    if let (Some(b), true) = (baseline, runs.len() > 1) {
        for d in compare(runs, b)? {
            let _ = writeln!(
                s,
                "{:<22} {:>16} {:>11} {:>14} {:>10} {:>6}",
                format!("Change {} vs {}", d.label, runs[b].label),
                "",
                pct(d.arrival_time),
                d.avg_bsfc.map_or("-".into(), pct),
                pct(d.total_fuel),
                ""
            );
        }
    }
    Ok(s)
}

pub fn write_metrics_csv<W: Write>(runs: &[RunMetrics], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "run",
        "scenario_hash",
        "arrival_s",
        "avg_bsfc_g_per_kwh",
        "fuel_g",
        "positive_energy_kwh",
        "complete_stops",
        "passing_clocks_s",
    ])?;
    for r in runs {
        w.write_record([
            r.label.clone(),
            r.scenario_hash.clone(),
            r.arrival_time.to_string(),
            r.avg_bsfc.map_or(String::new(), |b| b.to_string()),
            r.total_fuel.to_string(),
            r.positive_energy.to_string(),
            r.complete_stops.to_string(),
            r.passing_clocks
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// How the arrival deadline is chosen at each point of an η sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepDeadline {
    /// The route's own deadline at every η.
    Fixed,
    /// The minimum-time arrival at the same η plus `slack` seconds, rounded
    /// up to the time grid and capped at the route's deadline.
    Paced { slack: f64 },
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub eta: f64,
    /// Deadline used for this point, if one could be set.
    pub deadline: Option<f64>,
    pub trajectory: Option<Trajectory<f64>>,
    pub metrics: Option<RunMetrics>,
    /// Why the point has no solution.
    pub infeasible: Option<String>,
}

impl SweepPoint {
    fn failed(eta: f64, deadline: Option<f64>, reason: String) -> Self {
        Self {
            eta,
            deadline,
            trajectory: None,
            metrics: None,
            infeasible: Some(reason),
        }
    }
}

fn solve_once(
    route: &Route<f64>,
    vehicle: &VehicleParams<f64>,
    grid: &GridSpec<f64>,
    objective: Objective,
    eta: f64,
) -> Result<std::result::Result<Trajectory<f64>, String>> {
    match solve(route, vehicle, grid, objective, eta) {
        Ok(sol) => extract_trajectory(&sol, route, vehicle).map(Ok),
        Err(Error::Infeasible { reason, .. }) => Ok(Err(reason)),
        Err(e) => Err(e),
    }
}

/// Solves `objective` at each reliability in `etas`. Infeasible points are
/// reported in place; any other error aborts the sweep.
pub fn eta_sweep(
    route: &Route<f64>,
    vehicle: &VehicleParams<f64>,
    grid: &GridSpec<f64>,
    objective: Objective,
    etas: &[f64],
    deadline: SweepDeadline,
) -> Result<Vec<SweepPoint>> {
    if etas.is_empty() {
        return Err(Error::InvalidArgument("empty eta list".into()));
    }
    if let Some(e) = etas.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::InvalidArgument(format!("eta {e} outside [0, 1]")));
    }
    if let SweepDeadline::Paced { slack } = deadline {
        if !(slack.is_finite() && slack >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "deadline slack {slack} must be finite and >= 0"
            )));
        }
    }
    let mut out = Vec::with_capacity(etas.len());
    for &eta in etas {
        let mut local = route.clone();
        if let SweepDeadline::Paced { slack } = deadline {
            let fastest = match solve_once(route, vehicle, grid, Objective::Time, eta)? {
                Ok(t) => t,
                Err(reason) => {
                    out.push(SweepPoint::failed(eta, None, reason));
                    continue;
                }
            };
            let arrival = fastest.arrival_time().unwrap_or(0.0);
            let steps = ((arrival + slack) / grid.time_step - 1e-9).ceil();
            local.deadline = (steps * grid.time_step).min(route.deadline);
            if objective == Objective::Time {
                out.push(finish(eta, local.deadline, fastest)?);
                continue;
            }
        }
        match solve_once(&local, vehicle, grid, objective, eta)? {
            Ok(traj) => out.push(finish(eta, local.deadline, traj)?),
            Err(reason) => out.push(SweepPoint::failed(eta, Some(local.deadline), reason)),
        }
    }
    Ok(out)
}

fn finish(eta: f64, deadline: f64, traj: Trajectory<f64>) -> Result<SweepPoint> {
    let m = metrics(&traj)?;
    Ok(SweepPoint {
        eta,
        deadline: Some(deadline),
        trajectory: Some(traj),
        metrics: Some(m),
        infeasible: None,
    })
}

/// Per-η table with fuel and arrival normalized to the first solved point.
pub fn format_sweep(points: &[SweepPoint]) -> String {
    let reference = points.iter().find_map(|p| p.metrics.as_ref());
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>5} {:>10} {:>10} {:>9} {:>9} {:>9}",
        "eta", "deadline", "arrival", "fuel", "arr/ref", "fuel/ref"
    );
    for p in points {
        let dl = p.deadline.map_or("-".to_string(), |d| format!("{d:.1}"));
        match (&p.metrics, reference) {
            (Some(m), Some(r)) => {
                let _ = writeln!(
                    s,
                    "{:>5.2} {:>10} {:>10.2} {:>9.2} {:>9.4} {:>9.4}",
                    p.eta,
                    dl,
                    m.arrival_time,
                    m.total_fuel,
                    m.arrival_time / r.arrival_time,
                    m.total_fuel / r.total_fuel
                );
            }
            _ => {
                let why = p.infeasible.as_deref().unwrap_or("no solution");
                let _ = writeln!(s, "{:>5.2} {:>10} infeasible: {why}", p.eta, dl);
            }
        }
    }
    s
}

pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "eta",
        "deadline_s",
        "arrival_s",
        "fuel_g",
        "avg_bsfc_g_per_kwh",
        "status",
    ])?;
    for p in points {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        let m = p.metrics.as_ref();
        w.write_record([
            p.eta.to_string(),
            opt(p.deadline),
            opt(m.map(|m| m.arrival_time)),
            opt(m.map(|m| m.total_fuel)),
            opt(m.and_then(|m| m.avg_bsfc)),
            p.infeasible.clone().unwrap_or_else(|| "ok".into()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
