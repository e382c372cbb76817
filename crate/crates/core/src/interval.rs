//! Real intervals with open, closed or infinite endpoints.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// A nondegenerate interval `I` of the extended real line.
///
/// Infinite endpoints are always treated as open, whatever the flag says.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    lower: f64,
    upper: f64,
    lower_closed: bool,
    upper_closed: bool,
}

impl Interval {
    pub fn new(lower: f64, upper: f64, lower_closed: bool, upper_closed: bool) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() {
            return Err(Error::InvalidInterval("endpoint is NaN".into()));
        }
        if lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::InvalidInterval(format!(
                "endpoints ({lower}, {upper}) lie on the wrong side"
            )));
        }
        if lower >= upper {
            return Err(Error::InvalidInterval(format!(
                "lower endpoint {lower} must be below upper endpoint {upper}"
            )));
        }
        Ok(Self {
            lower,
            upper,
            lower_closed: lower_closed && lower.is_finite(),
            upper_closed: upper_closed && upper.is_finite(),
        })
    }

    pub fn closed(lower: f64, upper: f64) -> Result<Self> {
        Self::new(lower, upper, true, true)
    }

    pub fn open(lower: f64, upper: f64) -> Result<Self> {
        Self::new(lower, upper, false, false)
    }

    /// The whole real line.
    pub fn reals() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            lower_closed: false,
            upper_closed: false,
        }
    }

    /// `(0, +inf)`.
    pub fn positive() -> Self {
        Self {
            lower: 0.0,
            upper: f64::INFINITY,
            lower_closed: false,
            upper_closed: false,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn lower_closed(&self) -> bool {
        self.lower_closed
    }

    pub fn upper_closed(&self) -> bool {
        self.upper_closed
    }

    pub fn contains(&self, x: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        let above = if self.lower_closed {
            x >= self.lower
        } else {
            x > self.lower
        };
        let below = if self.upper_closed {
            x <= self.upper
        } else {
            x < self.upper
        };
        above && below
    }

    /// True when every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        let lower_ok = self.lower > other.lower
            || (self.lower == other.lower && (other.lower_closed || !self.lower_closed));
        let upper_ok = self.upper < other.upper
            || (self.upper == other.upper && (other.upper_closed || !self.upper_closed));
        lower_ok && upper_ok
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lower_closed { '[' } else { '(' };
        let close = if self.upper_closed { ']' } else { ')' };
        write!(
            f,
            "{open}{}, {}{close}",
            fmt_endpoint(self.lower),
            fmt_endpoint(self.upper)
        )
    }
}

fn fmt_endpoint(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        x.to_string()
    }
}

pub(crate) fn parse_extended_real(token: &str) -> Result<f64> {
    let t = token.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => t
            .parse::<f64>()
            .ok()
            .filter(|x| !x.is_nan())
            .ok_or_else(|| Error::parse(t, "expected a real number or ±inf")),
    }
}

/// Parses interval notation such as `[0, 1]`, `(0, inf)` or `[-1, 2)`.
impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        let lower_closed = match chars.next() {
            Some('[') => true,
            Some('(') => false,
            _ => return Err(Error::parse(s, "interval must start with `[` or `(`")),
        };
        let upper_closed = match chars.next_back() {
            Some(']') => true,
            Some(')') => false,
            _ => return Err(Error::parse(s, "interval must end with `]` or `)`")),
        };
        let body = chars.as_str();
        let (lo, hi) = body
            .split_once(',')
            .ok_or_else(|| Error::parse(body, "expected two endpoints separated by `,`"))?;
        Interval::new(
            parse_extended_real(lo)?,
            parse_extended_real(hi)?,
            lower_closed,
            upper_closed,
        )
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IntervalRepr {
    Text(String),
    Table {
        lower: f64,
        upper: f64,
        #[serde(default)]
        lower_closed: bool,
        #[serde(default)]
        upper_closed: bool,
    },
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = IntervalRepr::deserialize(deserializer)?;
        let parsed = match repr {
            IntervalRepr::Text(s) => s.parse(),
            IntervalRepr::Table {
                lower,
                upper,
                lower_closed,
                upper_closed,
            } => Interval::new(lower, upper, lower_closed, upper_closed),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}
