//! Longitudinal vehicle dynamics, gearbox kinematics and engine fuel maps.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::num::Real;

/// Physical parameters of the subject vehicle.
///
/// Torques are engine-side (`engine_*`) or wheel-side (`brake_*`). The
/// gearbox ratios are ordered from first to top gear.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleParams<T> {
    /// kg
    pub mass: T,
    /// m
    pub wheel_radius: T,
    /// m²
    pub frontal_area: T,
    /// kg/m³
    pub air_density: T,
    pub drag_coeff: T,
    pub rolling_c1: T,
    /// s/m
    pub rolling_c2: T,
    /// m/s²
    pub gravity: T,
    pub final_drive: T,
    pub gearbox_ratios: Vec<T>,
    /// N·m, engine drag below zero.
    pub engine_torque_min: T,
    pub engine_torque_max: T,
    /// rad/s
    pub engine_speed_max: T,
    /// N·m at the wheels.
    pub brake_torque_min: T,
    pub brake_torque_max: T,
    /// m/s², both default to non-binding.
    pub accel_min: T,
    pub accel_max: T,
    pub fuel_map: FuelMap<T>,
}

impl<T: Real> VehicleParams<T> {
    /// Mid-size gasoline sedan with a six-speed gearbox and the synthetic
    /// fuel map. Limits not tied to the published parameter set use the
    /// documented defaults: engine drag −40 N·m, brakes up to 4000 N·m at the
    /// wheels and unconstrained acceleration.
    pub fn sedan() -> Self {
        let l = T::lit;
        let engine_torque_max = l(240.0);
        let engine_speed_max = l(600.0);
        Self {
            mass: l(1745.0),
            wheel_radius: l(0.3413),
            frontal_area: l(2.841),
            air_density: l(1.1985),
            drag_coeff: l(0.356),
            rolling_c1: l(0.0084),
            rolling_c2: l(1.2e-4),
            gravity: l(9.81),
            final_drive: l(3.51),
            gearbox_ratios: [4.584, 2.964, 1.912, 1.446, 1.0, 0.74].map(l).to_vec(),
            engine_torque_min: l(-40.0),
            engine_torque_max,
            engine_speed_max,
            brake_torque_min: T::zero(),
            brake_torque_max: l(4000.0),
            accel_min: T::neg_infinity(),
            accel_max: T::infinity(),
            fuel_map: FuelMap::synthetic(engine_torque_max, engine_speed_max),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("vehicle.mass", self.mass),
            ("vehicle.wheel_radius", self.wheel_radius),
            ("vehicle.frontal_area", self.frontal_area),
            ("vehicle.air_density", self.air_density),
            ("vehicle.gravity", self.gravity),
            ("vehicle.final_drive", self.final_drive),
            ("vehicle.engine_speed_max", self.engine_speed_max),
        ];
        for (path, value) in positive {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(Error::config(
                    path,
                    format!("must be positive and finite, got {value}"),
                ));
            }
        }
        let non_negative = [
            ("vehicle.drag_coeff", self.drag_coeff),
            ("vehicle.rolling_c1", self.rolling_c1),
            ("vehicle.rolling_c2", self.rolling_c2),
        ];
        for (path, value) in non_negative {
            if !(value >= T::zero()) {
                return Err(Error::config(
                    path,
                    format!("must be non-negative, got {value}"),
                ));
            }
        }
        if self.gearbox_ratios.is_empty() {
            return Err(Error::config(
                "vehicle.gearbox_ratios",
                "at least one gear is required",
            ));
        }
        if self.gearbox_ratios.len() > 16 {
            return Err(Error::config(
                "vehicle.gearbox_ratios",
                "at most 16 gears are supported",
            ));
        }
        for (i, r) in self.gearbox_ratios.iter().enumerate() {
            if !(*r > T::zero()) {
                return Err(Error::config(
                    format!("vehicle.gearbox_ratios[{i}]"),
                    format!("ratio must be positive, got {r}"),
                ));
            }
        }
        for (i, w) in self.gearbox_ratios.windows(2).enumerate() {
            if !(w[1] < w[0]) {
                return Err(Error::config(
                    format!("vehicle.gearbox_ratios[{}]", i + 1),
                    "ratios must strictly decrease with gear number",
                ));
            }
        }
        if !(self.engine_torque_min <= T::zero() && T::zero() <= self.engine_torque_max) {
            return Err(Error::config(
                "vehicle.engine_torque_min",
                "engine torque limits must bracket zero",
            ));
        }
        if self.brake_torque_min != T::zero() {
            return Err(Error::config("vehicle.brake_torque_min", "must be zero"));
        }
        if !(self.brake_torque_max >= T::zero()) {
            return Err(Error::config(
                "vehicle.brake_torque_max",
                "must be non-negative",
            ));
        }
        if !(self.accel_min <= self.accel_max) {
            return Err(Error::config(
                "vehicle.accel_min",
                "must not exceed accel_max",
            ));
        }
        Ok(())
    }

    pub fn gear_count(&self) -> usize {
        self.gearbox_ratios.len()
    }

    /// Combined gearbox and final drive ratio for a 1-based gear number.
    pub fn gear_ratio(&self, gear: u8) -> Result<T> {
        let idx = usize::from(gear);
        if idx == 0 || idx > self.gearbox_ratios.len() {
            return Err(Error::InvalidArgument(format!(
                "gear {gear} outside 1..={}",
                self.gearbox_ratios.len()
            )));
        }
        Ok(self.gearbox_ratios[idx - 1] * self.final_drive)
    }

    /// Resistive force (N) from rolling resistance, grade and aerodynamic
    /// drag at speed `v` on grade `theta` (rad).
    #[inline]
    pub fn road_load(&self, v: T, theta: T) -> T {
        let rolling =
            self.mass * self.gravity * theta.cos() * (self.rolling_c1 + self.rolling_c2 * v);
        let climbing = self.mass * self.gravity * theta.sin();
        let drag = T::lit(0.5) * self.air_density * self.frontal_area * self.drag_coeff * v * v;
        rolling + climbing + drag
    }

    /// Acceleration for a combined ratio `ratio`, without limit checks.
    ///
    /// At standstill, a net force that does not overcome resistance leaves the
    /// vehicle at rest instead of rolling it backward.
    #[inline]
    pub fn acceleration_with_ratio(
        &self,
        v: T,
        engine_torque: T,
        brake_torque: T,
        ratio: T,
        theta: T,
    ) -> T {
        let traction = ratio * engine_torque / self.wheel_radius;
        let braking = brake_torque / self.wheel_radius;
        let net = traction - self.road_load(v, theta) - braking;
        if v <= T::zero() && net <= T::zero() {
            return T::zero();
        }
        net / self.mass
    }

    /// Longitudinal acceleration (m/s²) for the given controls.
    pub fn acceleration(
        &self,
        v: T,
        engine_torque: T,
        brake_torque: T,
        gear: u8,
        theta: T,
    ) -> Result<T> {
        let ratio = self.gear_ratio(gear)?;
        if v < T::zero() {
            return Err(Error::InvalidArgument(format!("negative speed {v}")));
        }
        if engine_torque < self.engine_torque_min || engine_torque > self.engine_torque_max {
            return Err(Error::Constraint(format!(
                "engine torque {engine_torque} outside [{}, {}]",
                self.engine_torque_min, self.engine_torque_max
            )));
        }
        if brake_torque < self.brake_torque_min || brake_torque > self.brake_torque_max {
            return Err(Error::Constraint(format!(
                "brake torque {brake_torque} outside [{}, {}]",
                self.brake_torque_min, self.brake_torque_max
            )));
        }
        Ok(self.acceleration_with_ratio(v, engine_torque, brake_torque, ratio, theta))
    }

    /// Fuel mass flow (g/s). Negative engine torque (engine braking) reads the
    /// zero-torque row of the map.
    #[inline]
    pub fn fuel_rate(&self, engine_torque: T, engine_speed: T) -> T {
        self.fuel_map
            .rate(engine_torque.max(T::zero()), engine_speed)
    }

    /// Fuel burned per second while stopped with the engine idling.
    pub fn idle_rate(&self) -> T {
        self.fuel_map.idle_rate()
    }
}

/// Engine speed (rad/s) for road speed `v`, combined ratio and wheel radius.
#[inline]
pub fn engine_speed<T: Real>(v: T, ratio: T, wheel_radius: T) -> T {
    v * ratio / wheel_radius
}

/// Brake specific fuel consumption in g/kWh, or `None` when the engine is
/// not delivering positive power.
pub fn bsfc<T: Real>(engine_torque: T, engine_speed: T, fuel_rate: T) -> Option<T> {
    let power = engine_torque * engine_speed;
    (power > T::zero()).then(|| fuel_rate * T::lit(3.6e6) / power)
}

/// Tabulated fuel flow (g/s) over engine torque (rows) and speed (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct FuelMap<T> {
    torque_axis: Vec<T>,
    speed_axis: Vec<T>,
    /// Row-major: `rates[i * speed_axis.len() + j]` at `(torque_axis[i], speed_axis[j])`.
    rates: Vec<T>,
}

impl<T: Real> FuelMap<T> {
    pub fn new(torque_axis: Vec<T>, speed_axis: Vec<T>, rates: Vec<T>) -> Result<Self> {
        for (name, axis) in [("torque", &torque_axis), ("speed", &speed_axis)] {
            if axis.len() < 2 {
                return Err(Error::config(
                    format!("fuel_map.{name}_axis"),
                    "needs at least two points",
                ));
            }
            if axis.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::config(
                    format!("fuel_map.{name}_axis"),
                    "must be strictly increasing",
                ));
            }
        }
        if rates.len() != torque_axis.len() * speed_axis.len() {
            return Err(Error::config(
                "fuel_map.rates",
                format!(
                    "expected {}x{} values, got {}",
                    torque_axis.len(),
                    speed_axis.len(),
                    rates.len()
                ),
            ));
        }
        if let Some(bad) = rates
            .iter()
            .position(|r| !(*r >= T::zero()) || !r.is_finite())
        {
            let (i, j) = (bad / speed_axis.len(), bad % speed_axis.len());
            return Err(Error::config(
                format!("fuel_map.rates[{i}][{j}]"),
                "fuel rates must be finite and non-negative",
            ));
        }
        Ok(Self {
            torque_axis,
            speed_axis,
            rates,
        })
    }

    /// Willans-line map with a BSFC bowl: idle flow 0.15 g/s, friction torque
    /// growing with speed and an indicated efficiency that peaks at mid speed
    /// and falls off under full-load enrichment. Minimum BSFC is close to
    /// 240 g/kWh at mid torque and speed.
    pub fn synthetic(torque_max: T, speed_max: T) -> Self {
        const IDLE: f64 = 0.15; // g/s
        const LHV: f64 = 43_000.0; // J/g
        let tmax = torque_max.as_f64();
        let wmax = speed_max.as_f64();
        let torque_axis: Vec<f64> = (0..=24).map(|i| tmax * f64::from(i) / 24.0).collect();
        let speed_axis: Vec<f64> = (0..=30).map(|j| wmax * f64::from(j) / 30.0).collect();
        let w_opt = 0.5 * wmax;
        let mut rates = Vec::with_capacity(torque_axis.len() * speed_axis.len());
        for &tq in &torque_axis {
            for &w in &speed_axis {
                let friction = 10.0 + 3.0e-5 * w * w;
                let speed_dev = (w - w_opt) / w_opt;
                let enrich = ((tq / tmax - 0.75) / 0.25).max(0.0);
                let efficiency =
                    0.40 * (1.0 - 0.25 * speed_dev * speed_dev) * (1.0 - 0.15 * enrich * enrich);
                rates.push(IDLE + (tq + friction) * w / (efficiency * LHV));
            }
        }
        Self::new(
            torque_axis.into_iter().map(T::lit).collect(),
            speed_axis.into_iter().map(T::lit).collect(),
            rates.into_iter().map(T::lit).collect(),
        )
        .expect("synthetic fuel map is well formed")
    }

    pub fn torque_axis(&self) -> &[T] {
        &self.torque_axis
    }

    pub fn speed_axis(&self) -> &[T] {
        &self.speed_axis
    }

    pub fn node(&self, torque_idx: usize, speed_idx: usize) -> T {
        self.rates[torque_idx * self.speed_axis.len() + speed_idx]
    }

    pub fn idle_rate(&self) -> T {
        self.rate(T::zero(), T::zero())
    }

    /// Bilinear interpolation. Arguments outside the axes are clamped to the
    /// boundary, so negative torque reads the lowest torque row.
    pub fn rate(&self, torque: T, speed: T) -> T {
        let (i, wt) = bracket(&self.torque_axis, torque);
        let (j, ws) = bracket(&self.speed_axis, speed);
        let ns = self.speed_axis.len();
        let r00 = self.rates[i * ns + j];
        let r01 = self.rates[i * ns + j + 1];
        let r10 = self.rates[(i + 1) * ns + j];
        let r11 = self.rates[(i + 1) * ns + j + 1];
        let one = T::one();
        (one - wt) * ((one - ws) * r00 + ws * r01) + wt * ((one - ws) * r10 + ws * r11)
    }

    /// Reads the CSV layout: first row is the speed axis (after a corner
    /// cell), first column the torque axis, body the rates in g/s.
    pub fn from_csv<R: Read>(reader: R, origin: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let parse = |s: &str, row: usize, col: usize| -> Result<T> {
            s.parse::<f64>().map(T::lit).map_err(|e| Error::Parse {
                origin: origin.to_string(),
                message: format!("row {}, column {}: `{s}`: {e}", row + 1, col + 1),
            })
        };
        let mut speed_axis = Vec::new();
        let mut torque_axis = Vec::new();
        let mut rates = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if row == 0 {
                for (col, cell) in record.iter().enumerate().skip(1) {
                    speed_axis.push(parse(cell, row, col)?);
                }
                continue;
            }
            if record.len() != speed_axis.len() + 1 {
                return Err(Error::Parse {
                    origin: origin.to_string(),
                    message: format!(
                        "row {} has {} cells, expected {}",
                        row + 1,
                        record.len(),
                        speed_axis.len() + 1
                    ),
                });
            }
            for (col, cell) in record.iter().enumerate() {
                let value = parse(cell, row, col)?;
                if col == 0 {
                    torque_axis.push(value);
                } else {
                    rates.push(value);
                }
            }
        }
        Self::new(torque_axis, speed_axis, rates)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec![String::from("torque_nm\\speed_radps")];
        header.extend(self.speed_axis.iter().map(|s| s.to_string()));
        wtr.write_record(&header)?;
        for (i, tq) in self.torque_axis.iter().enumerate() {
            let mut row = vec![tq.to_string()];
            row.extend((0..self.speed_axis.len()).map(|j| self.node(i, j).to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Lower bracketing index and fractional weight of `x` on a sorted axis,
/// clamped to the axis range.
#[inline]
fn bracket<T: Real>(axis: &[T], x: T) -> (usize, T) {
    let last = axis.len() - 1;
    if !(x > axis[0]) {
        return (0, T::zero());
    }
    if x >= axis[last] {
        return (last - 1, T::one());
    }
    let hi = axis.partition_point(|a| *a <= x);
    let lo = hi - 1;
    (lo, (x - axis[lo]) / (axis[hi] - axis[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sedan() -> VehicleParams<f64> {
        VehicleParams::sedan()
    }

    #[test]
    fn gear_ratios_match_reference_vehicle() {
        let p = sedan();
        assert_relative_eq!(p.gear_ratio(1).unwrap(), 16.08984, epsilon = 1e-9);
        assert_relative_eq!(p.gear_ratio(6).unwrap(), 2.5974, epsilon = 1e-9);
        assert!(matches!(p.gear_ratio(0), Err(Error::InvalidArgument(_))));
        assert!(matches!(p.gear_ratio(7), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn identity_ratios() {
        let mut p = sedan();
        p.final_drive = 1.0;
        p.gearbox_ratios = vec![1.0; 6];
        assert_eq!(p.gear_ratio(3).unwrap(), 1.0);
    }

    #[test]
    fn engine_speed_examples() {
        assert_eq!(engine_speed(0.0, 16.09, 0.3413), 0.0);
        assert_relative_eq!(engine_speed(10.0, 16.090, 0.3413), 471.4, epsilon = 0.05);
        assert_relative_eq!(engine_speed(16.0, 2.5974, 0.3413), 121.8, epsilon = 0.05);
    }

    #[test]
    fn acceleration_hand_evaluation() {
        // traction 1966.340 N, rolling 164.337 N, drag 60.608 N.
        let a = sedan().acceleration(10.0, 100.0, 0.0, 3, 0.0).unwrap();
        assert_relative_eq!(a, 0.997_934_348_215_377_4, epsilon = 1e-12);
    }

    #[test]
    fn standstill_does_not_roll_backward() {
        let p = sedan();
        assert_eq!(p.acceleration(0.0, 0.0, 0.0, 1, 0.0).unwrap(), 0.0);
        // The unclamped value would be −g·C_r1.
        assert_relative_eq!(-p.road_load(0.0, 0.0) / p.mass, -0.082404, epsilon = 1e-6);
    }

    #[test]
    fn coast_down_decelerates() {
        assert!(sedan().acceleration(16.0, 0.0, 0.0, 6, 0.0).unwrap() < 0.0);
    }

    #[test]
    fn torque_limits_are_enforced() {
        let p = sedan();
        assert!(matches!(
            p.acceleration(5.0, 300.0, 0.0, 2, 0.0),
            Err(Error::Constraint(_))
        ));
        assert!(matches!(
            p.acceleration(5.0, 0.0, -1.0, 2, 0.0),
            Err(Error::Constraint(_))
        ));
        assert!(matches!(
            p.acceleration(5.0, 0.0, 5000.0, 2, 0.0),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn fuel_map_corner_and_nodes() {
        let map = FuelMap::<f64>::synthetic(240.0, 600.0);
        assert_relative_eq!(map.rate(0.0, 0.0), 0.15, epsilon = 1e-12);
        assert_eq!(
            map.rate(map.torque_axis()[7], map.speed_axis()[11]),
            map.node(7, 11)
        );
        let t = 0.5 * (map.torque_axis()[3] + map.torque_axis()[4]);
        let w = 0.5 * (map.speed_axis()[9] + map.speed_axis()[10]);
        let mean = (map.node(3, 9) + map.node(3, 10) + map.node(4, 9) + map.node(4, 10)) / 4.0;
        assert_relative_eq!(map.rate(t, w), mean, epsilon = 1e-12);
    }

    #[test]
    fn synthetic_map_has_bsfc_bowl() {
        let map = FuelMap::<f64>::synthetic(240.0, 600.0);
        let mut best = f64::INFINITY;
        for (i, &t) in map.torque_axis().iter().enumerate() {
            for (j, &w) in map.speed_axis().iter().enumerate() {
                if let Some(b) = bsfc(t, w, map.node(i, j)) {
                    best = best.min(b);
                }
            }
        }
        assert!((230.0..=250.0).contains(&best), "minimum BSFC {best}");
        let low_load = bsfc(20.0, 100.0, map.rate(20.0, 100.0)).unwrap();
        assert!(low_load > 1.5 * best);
    }

    #[test]
    fn engine_braking_reads_zero_torque_row() {
        let p = sedan();
        assert_eq!(p.fuel_rate(-10.0, 300.0), p.fuel_rate(0.0, 300.0));
        assert!(p.fuel_rate(0.0, 300.0) > 0.0);
        assert_relative_eq!(p.idle_rate(), 0.15, epsilon = 1e-12);
    }

    #[test]
    fn bsfc_examples() {
        assert_relative_eq!(bsfc(100.0, 300.0, 4.0).unwrap(), 480.0, epsilon = 1e-9);
        assert_eq!(bsfc(0.0, 300.0, 1.0), None);
        assert_eq!(bsfc(-10.0, 300.0, 1.0), None);
        assert_relative_eq!(bsfc(100.0, 300.0, 8.0).unwrap(), 960.0, epsilon = 1e-9);
    }

    #[test]
    fn fuel_map_csv_round_trip() {
        let map = FuelMap::<f64>::synthetic(240.0, 600.0);
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        let back = FuelMap::<f64>::from_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, map);
    }

    #[test]
    fn fuel_map_rejects_bad_tables() {
        assert!(FuelMap::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1.0, 2.0]).is_err());
        assert!(FuelMap::new(vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0; 4]).is_err());
        assert!(FuelMap::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, -1.0, 0.0, 0.0]).is_err());
        let csv = "x,0,100\n0,0.1,0.2\n100,0.3\n";
        assert!(matches!(
            FuelMap::<f64>::from_csv(csv.as_bytes(), "m"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn validation_catches_bad_ratios() {
        let mut p = sedan();
        p.gearbox_ratios.swap(0, 1);
        assert!(matches!(p.validate(), Err(Error::Config { .. })));
        assert!(sedan().validate().is_ok());
    }

    #[test]
    fn single_precision_matches_double() {
        let p32 = VehicleParams::<f32>::sedan();
        let a = p32.acceleration(10.0, 100.0, 0.0, 3, 0.0).unwrap();
        assert!((f64::from(a) - 0.997_934_3).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn acceleration_monotone(v in 0.1f64..16.0, t1 in -40.0f64..240.0, dt in 0.1f64..50.0, gear in 1u8..=6) {
            let p = sedan();
            let t2 = (t1 + dt).min(240.0);
            prop_assume!(t2 > t1);
            let a1 = p.acceleration(v, t1, 0.0, gear, 0.0).unwrap();
            let a2 = p.acceleration(v, t2, 0.0, gear, 0.0).unwrap();
            prop_assert!(a2 > a1);
            let a3 = p.acceleration(v + 1.0, t1, 0.0, gear, 0.0).unwrap();
            prop_assert!(a3 < a1);
        }

        #[test]
        fn interpolation_within_cell_bounds(t in -10.0f64..260.0, w in -5.0f64..650.0) {
            let map = FuelMap::<f64>::synthetic(240.0, 600.0);
            let (i, _) = bracket(map.torque_axis(), t);
            let (j, _) = bracket(map.speed_axis(), w);
            let corners = [map.node(i, j), map.node(i, j + 1), map.node(i + 1, j), map.node(i + 1, j + 1)];
            let lo = corners.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let r = map.rate(t, w);
            prop_assert!(r >= lo - 1e-12 && r <= hi + 1e-12);
        }

        #[test]
        fn bsfc_scale_invariant(t in 1.0f64..240.0, w in 10.0f64..600.0, rate in 0.01f64..10.0, k in 0.1f64..10.0) {
            let a = bsfc(t, w, rate).unwrap();
            let b = bsfc(k * t, w, k * rate).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }

        #[test]
        fn engine_speed_linear(v in 0.0f64..20.0, gear in 1u8..=5) {
            let p = sedan();
            let r = p.gear_ratio(gear).unwrap();
            let w = engine_speed(v, r, p.wheel_radius);
            prop_assert!((engine_speed(2.0 * v, r, p.wheel_radius) - 2.0 * w).abs() < 1e-9);
            prop_assert!(p.gear_ratio(gear + 1).unwrap() < r);
        }
    }
}
