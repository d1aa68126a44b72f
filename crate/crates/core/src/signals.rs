//! Traffic signal clocks and effective-red delay distributions.
//!
//! Every intersection runs its own periodic clock of period `cycle_period`
//! whose zero marks the start of red. The clock reads `clock_offset` when the
//! vehicle departs, so universal travel time `t` maps to
//! `(clock_offset + t) mod cycle_period`. The interval `[0, red)` is red and
//! `[red, cycle)` green. Under uncertainty the red phase is extended by a
//! random delay α; the cycle length itself is unaffected.

use std::io::Read;

use rand::Rng;

use crate::error::{Error, Result};
use crate::num::{std_normal_cdf, std_normal_pdf, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Signal,
    /// Unconditional full stop; timing fields are ignored.
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec<T> {
    /// m from the route origin.
    pub position: T,
    /// s
    pub cycle_period: T,
    /// Base red duration, s.
    pub red_duration: T,
    /// Clock reading at departure, s.
    pub clock_offset: T,
    /// Law of the extra red delay; `None` for a deterministic signal.
    pub delay: Option<DelayDistribution<T>>,
    pub kind: SignalKind,
}

impl<T: Real> SignalSpec<T> {
    pub fn signal(position: T, cycle_period: T, red_duration: T, clock_offset: T) -> Self {
        Self {
            position,
            cycle_period,
            red_duration,
            clock_offset,
            delay: None,
            kind: SignalKind::Signal,
        }
    }

    pub fn stop(position: T) -> Self {
        Self {
            position,
            cycle_period: T::one(),
            red_duration: T::zero(),
            clock_offset: T::zero(),
            delay: None,
            kind: SignalKind::Stop,
        }
    }

    pub fn with_delay(mut self, delay: DelayDistribution<T>) -> Self {
        self.delay = Some(delay);
        self
    }

    pub fn is_stop(&self) -> bool {
        self.kind == SignalKind::Stop
    }

    /// Checks the clock invariants; `path` prefixes error locations.
    pub fn validate(&self, path: &str, route_length: T) -> Result<()> {
        if !(self.position >= T::zero() && self.position <= route_length) {
            return Err(Error::config(
                format!("{path}.position"),
                format!(
                    "position {} outside route [0, {route_length}]",
                    self.position
                ),
            ));
        }
        if self.kind == SignalKind::Stop {
            return Ok(());
        }
        if !(self.cycle_period > T::zero()) || !self.cycle_period.is_finite() {
            return Err(Error::config(
                format!("{path}.cycle_period"),
                "must be positive",
            ));
        }
        if !(self.red_duration >= T::zero() && self.red_duration <= self.cycle_period) {
            return Err(Error::config(
                format!("{path}.red_duration"),
                format!("must lie in [0, cycle_period = {}]", self.cycle_period),
            ));
        }
        if !(self.clock_offset >= T::zero() && self.clock_offset < self.cycle_period) {
            return Err(Error::config(
                format!("{path}.clock_offset"),
                format!("must lie in [0, cycle_period = {})", self.cycle_period),
            ));
        }
        if let Some(delay) = &self.delay {
            let (lo, hi) = delay.support();
            if lo < T::zero() {
                return Err(Error::config(
                    format!("{path}.delay"),
                    "support must start at or after 0",
                ));
            }
            let green = self.cycle_period - self.red_duration;
            if hi > green + T::lit(1e-9) {
                return Err(Error::config(
                    format!("{path}.delay"),
                    format!("support upper bound {hi} exceeds the green duration {green}"),
                ));
            }
        }
        Ok(())
    }

    /// Signal clock reading when the vehicle passes at universal time `t`.
    #[inline]
    pub fn clock_time(&self, t: T) -> T {
        let c = (self.clock_offset + t) % self.cycle_period;
        if c < T::zero() {
            c + self.cycle_period
        } else {
            c
        }
    }

    /// Deterministic passing predicate: the clock has left the base red.
    pub fn is_green(&self, t: T) -> bool {
        self.kind == SignalKind::Signal && self.clock_time(t) >= self.red_duration
    }

    /// Red duration tightened so that passing at or after it clears the
    /// realized effective red with probability at least `eta`.
    pub fn effective_red(&self, eta: T) -> Result<T> {
        let delay = self
            .delay
            .as_ref()
            .ok_or_else(|| Error::config("signals.delay", "signal has no delay distribution"))?;
        Ok(self.red_duration + delay.inv_cdf(eta)?)
    }

    /// Clock threshold a passing must reach: the base red when `eta` is zero,
    /// the effective red otherwise.
    pub fn gate_threshold(&self, eta: T) -> Result<T> {
        if eta == T::zero() {
            Ok(self.red_duration)
        } else {
            self.effective_red(eta)
        }
    }

    /// True when a passing at `t` falls inside the realized effective red.
    pub fn violates(&self, t: T, alpha: T) -> bool {
        self.kind == SignalKind::Signal && self.clock_time(t) < self.red_duration + alpha
    }
}

/// Law of the random red extension α.
#[derive(Debug, Clone, PartialEq)]
pub enum DelayDistribution<T> {
    TruncatedGaussian(TruncatedGaussian<T>),
    Tabulated(TabulatedCdf<T>),
}

impl<T: Real> DelayDistribution<T> {
    pub fn support(&self) -> (T, T) {
        match self {
            Self::TruncatedGaussian(d) => (d.lo, d.hi),
            Self::Tabulated(d) => d.support(),
        }
    }

    /// CDF, clamped to 0 and 1 outside the support.
    pub fn cdf(&self, x: T) -> T {
        match self {
            Self::TruncatedGaussian(d) => d.cdf(x),
            Self::Tabulated(d) => d.cdf(x),
        }
    }

    pub fn pdf(&self, x: T) -> T {
        match self {
            Self::TruncatedGaussian(d) => d.pdf(x),
            Self::Tabulated(d) => d.pdf(x),
        }
    }

    /// Smallest α in the support with `cdf(α) >= eta`.
    pub fn inv_cdf(&self, eta: T) -> Result<T> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(Error::InvalidArgument(format!(
                "reliability {eta} outside [0, 1]"
            )));
        }
        Ok(match self {
            Self::TruncatedGaussian(d) => d.inv_cdf(eta),
            Self::Tabulated(d) => d.inv_cdf(eta),
        })
    }

    pub fn mean(&self) -> T {
        match self {
            Self::TruncatedGaussian(d) => d.mean(),
            Self::Tabulated(d) => d.mean(),
        }
    }

    /// Inverse-transform draw from a caller-seeded generator.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u: f64 = rng.random();
        match self {
            Self::TruncatedGaussian(d) => d.inv_cdf(T::lit(u)),
            Self::Tabulated(d) => d.inv_cdf(T::lit(u)),
        }
    }
}

/// Gaussian N(mean, variance) conditioned on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedGaussian<T> {
    mean: T,
    variance: T,
    lo: T,
    hi: T,
    std_dev: T,
    cdf_lo: T,
    mass: T,
}

impl<T: Real> TruncatedGaussian<T> {
    pub fn new(mean: T, variance: T, lo: T, hi: T) -> Result<Self> {
        if !(variance > T::zero()) || !variance.is_finite() {
            return Err(Error::config(
                "delay.variance",
                format!("must be positive, got {variance}"),
            ));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::config(
                "delay.hi",
                format!("support [{lo}, {hi}] is empty"),
            ));
        }
        if !mean.is_finite() {
            return Err(Error::config("delay.mean", "must be finite"));
        }
        let std_dev = variance.sqrt();
        let cdf_lo = std_normal_cdf((lo - mean) / std_dev);
        let cdf_hi = std_normal_cdf((hi - mean) / std_dev);
        let mass = cdf_hi - cdf_lo;
        if !(mass > T::zero()) {
            return Err(Error::config(
                "delay",
                "support carries no probability mass",
            ));
        }
        Ok(Self {
            mean,
            variance,
            lo,
            hi,
            std_dev,
            cdf_lo,
            mass,
        })
    }

    /// Light traffic: N(3, 4) on [0, 30]. Illustrative default.
    pub fn light() -> Self {
        Self::new(T::lit(3.0), T::lit(4.0), T::zero(), T::lit(30.0)).expect("valid preset")
    }

    /// Moderate traffic: N(6, 16) on [0, 30].
    pub fn moderate() -> Self {
        Self::new(T::lit(6.0), T::lit(16.0), T::zero(), T::lit(30.0)).expect("valid preset")
    }

    /// Heavy traffic: N(15, 25) on [0, 30]. Illustrative default.
    pub fn heavy() -> Self {
        Self::new(T::lit(15.0), T::lit(25.0), T::zero(), T::lit(30.0)).expect("valid preset")
    }

    /// Location parameter of the untruncated Gaussian.
    pub fn location(&self) -> T {
        self.mean
    }

    pub fn variance(&self) -> T {
        self.variance
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn cdf(&self, x: T) -> T {
        if x <= self.lo {
            return T::zero();
        }
        if x >= self.hi {
            return T::one();
        }
        let f = (std_normal_cdf((x - self.mean) / self.std_dev) - self.cdf_lo) / self.mass;
        f.max(T::zero()).min(T::one())
    }

    pub fn pdf(&self, x: T) -> T {
        if x < self.lo || x > self.hi {
            return T::zero();
        }
        std_normal_pdf((x - self.mean) / self.std_dev) / (self.std_dev * self.mass)
    }

    /// Bisection on the closed-form CDF down to 1e-9 s (or the scalar's
    /// resolution, whichever is reached first).
    pub fn inv_cdf(&self, eta: T) -> T {
        if eta <= T::zero() {
            return self.lo;
        }
        if eta >= T::one() {
            return self.hi;
        }
        let tol = T::lit(1e-9);
        let (mut a, mut b) = (self.lo, self.hi);
        for _ in 0..200 {
            let mid = T::lit(0.5) * (a + b);
            if mid <= a || mid >= b || b - a <= tol {
                break;
            }
            if self.cdf(mid) < eta {
                a = mid;
            } else {
                b = mid;
            }
        }
        b
    }

    /// Mean of the truncated law.
    pub fn mean(&self) -> T {
        let za = (self.lo - self.mean) / self.std_dev;
        let zb = (self.hi - self.mean) / self.std_dev;
        self.mean + self.std_dev * (std_normal_pdf(za) - std_normal_pdf(zb)) / self.mass
    }
}

/// Piecewise-linear CDF given by monotone `(α, F)` knots.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf<T> {
    knots: Vec<(T, T)>,
}

impl<T: Real> TabulatedCdf<T> {
    pub fn new(knots: Vec<(T, T)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::config("delay.knots", "need at least two knots"));
        }
        for (i, w) in knots.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::config(
                    format!("delay.knots[{}]", i + 1),
                    "α must strictly increase",
                ));
            }
            if !(w[1].1 >= w[0].1) {
                return Err(Error::config(
                    format!("delay.knots[{}]", i + 1),
                    "F must not decrease",
                ));
            }
        }
        if knots[0].1 != T::zero() {
            return Err(Error::config("delay.knots[0]", "F must start at 0"));
        }
        if knots[knots.len() - 1].1 != T::one() {
            return Err(Error::config(
                format!("delay.knots[{}]", knots.len() - 1),
                "F must end at 1",
            ));
        }
        Ok(Self { knots })
    }

    /// Two-column `α,F` CSV; a non-numeric first row is treated as a header.
    pub fn from_csv<R: Read>(reader: R, origin: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut knots = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Parse {
                    origin: origin.to_string(),
                    message: format!("row {} must have exactly two columns", row + 1),
                });
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(v) => knots.push((T::lit(v[0]), T::lit(v[1]))),
                Err(_) if row == 0 => continue,
                Err(e) => {
                    return Err(Error::Parse {
                        origin: origin.to_string(),
                        message: format!("row {}: {e}", row + 1),
                    })
                }
            }
        }
        Self::new(knots)
    }

    pub fn knots(&self) -> &[(T, T)] {
        &self.knots
    }

    pub fn support(&self) -> (T, T) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    pub fn cdf(&self, x: T) -> T {
        let (lo, hi) = self.support();
        if x <= lo {
            return T::zero();
        }
        if x >= hi {
            return T::one();
        }
        let k = self.knots.partition_point(|(a, _)| *a <= x);
        let (a0, f0) = self.knots[k - 1];
        let (a1, f1) = self.knots[k];
        f0 + (f1 - f0) * (x - a0) / (a1 - a0)
    }

    pub fn pdf(&self, x: T) -> T {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return T::zero();
        }
        let k = self
            .knots
            .partition_point(|(a, _)| *a <= x)
            .clamp(1, self.knots.len() - 1);
        let (a0, f0) = self.knots[k - 1];
        let (a1, f1) = self.knots[k];
        (f1 - f0) / (a1 - a0)
    }

    pub fn inv_cdf(&self, eta: T) -> T {
        if eta <= T::zero() {
            return self.knots[0].0;
        }
        let k = self
            .knots
            .partition_point(|(_, f)| *f < eta)
            .min(self.knots.len() - 1);
        let (a0, f0) = self.knots[k - 1];
        let (a1, f1) = self.knots[k];
        a0 + (a1 - a0) * (eta - f0) / (f1 - f0)
    }

    pub fn mean(&self) -> T {
        self.knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) * T::lit(0.5) * (w[0].0 + w[1].0))
            .sum()
    }
}
