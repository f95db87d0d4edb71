//! Simulated time.
//!
//! Time is kept as an integer count of picoseconds so that event ordering is
//! exact and runs are bit-reproducible. At 11 Gbps a 1500 byte frame takes
//! 1090.909... ns, which nanoseconds cannot represent without drift.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

const PS_PER_SEC: f64 = 1e12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_picos(ps: u64) -> Self {
        SimTime(ps)
    }

    pub const fn from_nanos(ns: u64) -> Self {
        SimTime(ns * 1_000)
    }

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us * 1_000_000)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000_000_000)
    }

    /// Rounds to the nearest picosecond; negative and NaN inputs map to zero.
    pub fn from_secs_f64(secs: f64) -> Self {
        if secs.is_nan() || secs <= 0.0 {
            return SimTime::ZERO;
        }
        let ps = (secs * PS_PER_SEC).round();
        if ps >= u64::MAX as f64 {
            SimTime::MAX
        } else {
            SimTime(ps as u64)
        }
    }

    pub const fn as_picos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / PS_PER_SEC
    }

    /// Time needed to clock `bytes` onto a link of `bits_per_sec`.
    pub fn serialization(bytes: u64, bits_per_sec: f64) -> Self {
        SimTime::from_secs_f64(bytes as f64 * 8.0 / bits_per_sec)
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }

    pub fn saturating_mul(self, k: u64) -> SimTime {
        SimTime(self.0.saturating_mul(k))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_add(rhs.0))
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        *self = *self + rhs;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9}s", self.as_secs_f64())
    }
}
