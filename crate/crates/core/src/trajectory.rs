//! Trajectory record shared by the DP replay, the IDM simulator and the
//! evaluator, plus its CSV representation.
//!
//! Row `k` describes the vehicle at distance `distance`: the cell that led
//! there (gear, torques, mean engine speed, fuel burned since the previous
//! row) and the time at which the vehicle *leaves* that position. A stop is
//! therefore a row with zero velocity whose time includes the wait.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::num::Real;

pub const CSV_COLUMNS: [&str; 8] = [
    "distance_m",
    "time_s",
    "velocity_mps",
    "gear",
    "engine_torque_nm",
    "brake_torque_nm",
    "engine_speed_radps",
    "fuel_g",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow<T> {
    pub distance: T,
    pub time: T,
    pub velocity: T,
    pub gear: u8,
    pub engine_torque: T,
    pub brake_torque: T,
    pub engine_speed: T,
    pub fuel: T,
}

impl<T: Real> TrajectoryRow<T> {
    pub fn origin() -> Self {
        Self {
            distance: T::zero(),
            time: T::zero(),
            velocity: T::zero(),
            gear: 0,
            engine_torque: T::zero(),
            brake_torque: T::zero(),
            engine_speed: T::zero(),
            fuel: T::zero(),
        }
    }
}

/// Passage through a signalized intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalPassage<T> {
    pub position: T,
    pub pass_time: T,
    pub clock: T,
    /// Clock value the passing had to reach.
    pub threshold: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryHeader {
    pub scenario_hash: String,
    /// `op-fuel`, `op-time` or `idm`.
    pub controller: String,
    pub eta: f64,
    pub grid: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub header: TrajectoryHeader,
    pub rows: Vec<TrajectoryRow<T>>,
    pub passages: Vec<SignalPassage<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn arrival_time(&self) -> Option<T> {
        self.rows.last().map(|r| r.time)
    }

    pub fn total_fuel(&self) -> T {
        self.rows.iter().map(|r| r.fuel).sum()
    }

    /// Driving time of the cell ending at row `k` (excludes waiting).
    pub fn cell_duration(&self, k: usize) -> T {
        if k == 0 {
            return T::zero();
        }
        let (a, b) = (&self.rows[k - 1], &self.rows[k]);
        let speed_sum = a.velocity + b.velocity;
        if speed_sum > T::zero() {
            T::lit(2.0) * (b.distance - a.distance) / speed_sum
        } else {
            T::zero()
        }
    }

    /// Checks the record invariants: distance strictly increasing, time
    /// non-decreasing, non-negative fuel increments.
    pub fn check(&self) -> Result<()> {
        if self.rows.len() < 2 {
            return Err(Error::InvalidArgument(
                "incomplete trajectory: fewer than two rows".into(),
            ));
        }
        for (k, w) in self.rows.windows(2).enumerate() {
            if !(w[1].distance > w[0].distance) {
                return Err(Error::Consistency(format!(
                    "distance not increasing at row {}",
                    k + 1
                )));
            }
            if !(w[1].time >= w[0].time) {
                return Err(Error::Consistency(format!(
                    "time decreasing at row {}",
                    k + 1
                )));
            }
        }
        if let Some(k) = self.rows.iter().position(|r| !(r.fuel >= T::zero())) {
            return Err(Error::Consistency(format!(
                "negative fuel increment at row {k}"
            )));
        }
        Ok(())
    }

    pub fn to_f64(&self) -> Trajectory<f64> {
        Trajectory {
            header: self.header.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| TrajectoryRow {
                    distance: r.distance.as_f64(),
                    time: r.time.as_f64(),
                    velocity: r.velocity.as_f64(),
                    gear: r.gear,
                    engine_torque: r.engine_torque.as_f64(),
                    brake_torque: r.brake_torque.as_f64(),
                    engine_speed: r.engine_speed.as_f64(),
                    fuel: r.fuel.as_f64(),
                })
                .collect(),
            passages: self
                .passages
                .iter()
                .map(|p| SignalPassage {
                    position: p.position.as_f64(),
                    pass_time: p.pass_time.as_f64(),
                    clock: p.clock.as_f64(),
                    threshold: p.threshold.as_f64(),
                })
                .collect(),
        }
    }

    /// Writes `#`-prefixed metadata (header fields and one `passage` line per
    /// signal) followed by the row table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# ecodrive trajectory")?;
        writeln!(out, "# scenario_hash={}", self.header.scenario_hash)?;
        writeln!(out, "# controller={}", self.header.controller)?;
        writeln!(out, "# eta={}", self.header.eta)?;
        writeln!(out, "# grid={}", self.header.grid)?;
        for p in &self.passages {
            writeln!(
                out,
                "# passage,{},{},{},{}",
                p.position, p.pass_time, p.clock, p.threshold
            )?;
        }
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(CSV_COLUMNS)?;
        for r in &self.rows {
            wtr.write_record([
                r.distance.to_string(),
                r.time.to_string(),
                r.velocity.to_string(),
                r.gear.to_string(),
                r.engine_torque.to_string(),
                r.brake_torque.to_string(),
                r.engine_speed.to_string(),
                r.fuel.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

impl Trajectory<f64> {
    pub fn read_csv<R: Read>(input: R, origin: &str) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            origin: origin.to_string(),
            message,
        };
        let num = |s: &str, line: usize| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| parse_err(format!("line {line}: `{s}`: {e}")))
        };
        let mut header = TrajectoryHeader::default();
        let mut passages = Vec::new();
        let mut body = String::new();
        for (idx, line) in BufReader::new(input).lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let Some(meta) = line.strip_prefix('#') else {
                body.push_str(&line);
                body.push('\n');
                continue;
            };
            let meta = meta.trim();
            if let Some(rest) = meta.strip_prefix("passage,") {
                let f: Vec<&str> = rest.split(',').collect();
                if f.len() != 4 {
                    return Err(parse_err(format!(
                        "line {lineno}: passage needs four fields"
                    )));
                }
                passages.push(SignalPassage {
                    position: num(f[0], lineno)?,
                    pass_time: num(f[1], lineno)?,
                    clock: num(f[2], lineno)?,
                    threshold: num(f[3], lineno)?,
                });
            } else if let Some((key, value)) = meta.split_once('=') {
                match key.trim() {
                    "scenario_hash" => header.scenario_hash = value.trim().to_string(),
                    "controller" => header.controller = value.trim().to_string(),
                    "eta" => header.eta = num(value, lineno)?,
                    "grid" => header.grid = value.trim().to_string(),
                    _ => {}
                }
            }
        }
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let cols = rdr.headers()?.clone();
        if cols.iter().ne(CSV_COLUMNS) {
            return Err(parse_err(format!(
                "unexpected columns {:?}",
                cols.iter().collect::<Vec<_>>()
            )));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            rows.push(TrajectoryRow {
                distance: num(&rec[0], line)?,
                time: num(&rec[1], line)?,
                velocity: num(&rec[2], line)?,
                gear: rec[3]
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(format!("row {line}: gear: {e}")))?,
                engine_torque: num(&rec[4], line)?,
                brake_torque: num(&rec[5], line)?,
                engine_speed: num(&rec[6], line)?,
                fuel: num(&rec[7], line)?,
            });
        }
        Ok(Self {
            header,
            rows,
            passages,
        })
    }
}
