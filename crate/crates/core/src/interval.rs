//! Numeric value bands used by states and value ranges.
//!
//! The stored encoding is `[lo,hi]` with `(`/`)` for open ends and `INF`/`-INF`
//! for unbounded sides, e.g. `(-INF,3.5)` or `[6.6,7.3]`.

use alloc::format;
use alloc::string::String;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid interval `{0}`")]
pub struct IntervalError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

fn pow10(digits: u32) -> f64 {
    (0..digits).fold(1.0, |acc, _| acc * 10.0)
}

/// Rounds half away from zero onto a grid of `digits` decimal places.
pub fn to_grid(value: f64, digits: u32) -> i64 {
    libm::round(value * pow10(digits)) as i64
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_open: false, hi_open: false }
    }

    pub fn below(hi: f64) -> Self {
        Interval { lo: f64::NEG_INFINITY, hi, lo_open: true, hi_open: true }
    }

    pub fn above(lo: f64) -> Self {
        Interval { lo, hi: f64::INFINITY, lo_open: true, hi_open: true }
    }

    pub fn is_valid(&self) -> bool {
        !self.lo.is_nan() && !self.hi.is_nan() && self.lo <= self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_open { v > self.lo } else { v >= self.lo };
        let below = if self.hi_open { v < self.hi } else { v <= self.hi };
        above && below
    }

    /// Inclusive range of grid points covered at `digits` decimal places.
    pub fn grid(&self, digits: u32) -> (i64, i64) {
        let lo = if self.lo == f64::NEG_INFINITY {
            i64::MIN
        } else {
            let k = to_grid(self.lo, digits);
            if self.lo_open {
                k + 1
            } else {
                k
            }
        };
        let hi = if self.hi == f64::INFINITY {
            i64::MAX
        } else {
            let k = to_grid(self.hi, digits);
            if self.hi_open {
                k - 1
            } else {
                k
            }
        };
        (lo, hi)
    }

    pub fn encode(&self) -> String {
        let bound = |v: f64| {
            if v == f64::INFINITY {
                String::from("INF")
            } else if v == f64::NEG_INFINITY {
                String::from("-INF")
            } else {
                format!("{v}")
            }
        };
        format!(
            "{}{},{}{}",
            if self.lo_open { '(' } else { '[' },
            bound(self.lo),
            bound(self.hi),
            if self.hi_open { ')' } else { ']' }
        )
    }

    pub fn decode(text: &str) -> Result<Self, IntervalError> {
        let err = || IntervalError(String::from(text));
        let t = text.trim();
        let lo_open = match t.chars().next() {
            Some('(') => true,
            Some('[') => false,
            _ => return Err(err()),
        };
        let hi_open = match t.chars().last() {
            Some(')') => true,
            Some(']') => false,
            _ => return Err(err()),
        };
        let inner = &t[1..t.len() - 1];
        let (a, b) = inner.split_once(',').ok_or_else(err)?;
        let num = |s: &str| match s.trim() {
            "INF" | "+INF" => Ok(f64::INFINITY),
            "-INF" => Ok(f64::NEG_INFINITY),
            s => s.parse::<f64>().map_err(|_| err()),
        };
        let interval = Interval { lo: num(a)?, hi: num(b)?, lo_open, hi_open };
        if interval.is_valid() {
            Ok(interval)
        } else {
            Err(err())
        }
    }

    /// Human form: `< 3.5`, `3.5-4.4`, `> 9.0`, with `digits` decimals.
    pub fn describe(&self, digits: u32) -> String {
        let d = digits as usize;
        match (self.lo == f64::NEG_INFINITY, self.hi == f64::INFINITY) {
            (true, true) => String::from("any value"),
            (true, false) => format!("{} {:.d$}", if self.hi_open { "<" } else { "≤" }, self.hi),
            (false, true) => format!("{} {:.d$}", if self.lo_open { ">" } else { "≥" }, self.lo),
            (false, false) => format!("{:.d$}-{:.d$}", self.lo, self.hi),
        }
    }
}
