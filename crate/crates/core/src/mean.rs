//! The catalog of concrete means and their evaluation.
//!
//! A mean on `I` is a function `I^p -> I` that is internal:
//! `min(v) <= M(v) <= max(v)`. Every catalog formula is internal in exact
//! arithmetic; [`eval_mean`] additionally clamps the floating-point result
//! into `[min(v), max(v)]` so internality and reflexivity hold exactly.
//! [`internality_probe`] checks the unclamped formulas.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::sampling::{SampleBox, Sampler};

/// Absolute slack allowed when checking internality of floating-point results.
pub const INTERNALITY_TOL: f64 = 1e-12;
/// Tolerance on the sum of weights of a weighted arithmetic mean.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Power exponents closer to zero than this use the geometric-mean formula.
pub const POWER_ZERO_CUTOFF: f64 = 1e-8;

/// Strictly monotone continuous generators for quasi-arithmetic means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    Identity,
    /// `ln`, on `(0, inf)`.
    Log,
    /// `x^q` with `q != 0`, on `(0, inf)`.
    Power(f64),
    Exp,
}

impl Generator {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Generator::Identity => x,
            Generator::Log => x.ln(),
            Generator::Power(q) => x.powf(q),
            Generator::Exp => x.exp(),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match *self {
            Generator::Identity => y,
            Generator::Log => y.exp(),
            Generator::Power(q) => y.powf(q.recip()),
            Generator::Exp => y.ln(),
        }
    }

    pub fn domain(&self) -> Interval {
        match self {
            Generator::Identity | Generator::Exp => Interval::reals(),
            Generator::Log | Generator::Power(_) => Interval::positive(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Generator::Power(q) if q == 0.0 || !q.is_finite() => Err(Error::InvalidSpec(format!(
                "generator exponent must be finite and nonzero, got {q}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Identity => f.write_str("identity"),
            Generator::Log => f.write_str("log"),
            Generator::Power(q) => write!(f, "power:{q}"),
            Generator::Exp => f.write_str("exp"),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (head, arg) = match lower.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (lower.as_str(), None),
        };
        let g = match (head, arg) {
            ("identity" | "id", None) => Generator::Identity,
            ("log" | "ln", None) => Generator::Log,
            ("exp", None) => Generator::Exp,
            ("power" | "pow", Some(a)) => Generator::Power(parse_real(a)?),
            ("power" | "pow", None) => return Err(Error::parse(s.trim(), "power generator needs an exponent, e.g. `power:2`")),
            _ => return Err(Error::parse(head, "unknown generator")),
        };
        g.validate()?;
        Ok(g)
    }
}

/// Which mean, independent of arity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MeanKind {
    Arithmetic,
    Geometric,
    Harmonic,
    Power(f64),
    QuasiArithmetic(Generator),
    Median,
    Min,
    Max,
    /// 1-based coordinate index.
    Projection(usize),
    WeightedArithmetic(Vec<f64>),
}

impl MeanKind {
    /// Where the formula itself is defined, before any user domain applies.
    pub fn natural_domain(&self) -> Interval {
        match *self {
            MeanKind::Geometric | MeanKind::Harmonic => Interval::positive(),
            MeanKind::Power(r) if r.abs() < POWER_ZERO_CUTOFF || r < 0.0 => Interval::positive(),
            MeanKind::Power(_) => Interval::new(0.0, f64::INFINITY, true, false).expect("valid"),
            MeanKind::QuasiArithmetic(g) => g.domain(),
            _ => Interval::reals(),
        }
    }
}

impl fmt::Display for MeanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanKind::Arithmetic => f.write_str("arithmetic"),
            MeanKind::Geometric => f.write_str("geometric"),
            MeanKind::Harmonic => f.write_str("harmonic"),
            MeanKind::Power(r) => write!(f, "power:{r}"),
            MeanKind::QuasiArithmetic(g) => write!(f, "quasi:{g}"),
            MeanKind::Median => f.write_str("median"),
            MeanKind::Min => f.write_str("min"),
            MeanKind::Max => f.write_str("max"),
            MeanKind::Projection(i) => write!(f, "projection:{i}"),
            MeanKind::WeightedArithmetic(w) => {
                let joined: Vec<String> = w.iter().map(|x| x.to_string()).collect();
                write!(f, "weighted:{}", joined.join(","))
            }
        }
    }
}

fn parse_real(token: &str) -> Result<f64> {
    let t = token.trim();
    t.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::parse(t, "expected a finite real number"))
}

/// Parses the canonical text form, e.g. `arithmetic`, `power:0.5`,
/// `projection:2`, `quasi:log`, `weighted:0.3,0.7`. Case-insensitive.
impl FromStr for MeanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (head, arg) = match lower.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (lower.as_str(), None),
        };
        let need_arg = |what: &str| -> Result<&str> {
            arg.filter(|a| !a.is_empty())
                .ok_or_else(|| Error::parse(head, format!("`{head}` needs {what}")))
        };
        let no_arg = |kind: MeanKind| -> Result<MeanKind> {
            match arg {
                None => Ok(kind),
                Some(a) => Err(Error::parse(a, format!("`{head}` takes no parameter"))),
            }
        };
        match head {
            "arithmetic" => no_arg(MeanKind::Arithmetic),
            "geometric" => no_arg(MeanKind::Geometric),
            "harmonic" => no_arg(MeanKind::Harmonic),
            "median" => no_arg(MeanKind::Median),
            "min" => no_arg(MeanKind::Min),
            "max" => no_arg(MeanKind::Max),
            "power" => Ok(MeanKind::Power(parse_real(need_arg("an exponent")?)?)),
            "quasi" | "quasi_arithmetic" => Ok(MeanKind::QuasiArithmetic(
                need_arg("a generator")?.parse()?,
            )),
            "projection" => {
                let a = need_arg("a 1-based index")?;
                let index: usize = a
                    .parse()
                    .map_err(|_| Error::parse(a, "expected a positive integer index"))?;
                if index == 0 {
                    return Err(Error::parse(a, "projection index is 1-based"));
                }
                Ok(MeanKind::Projection(index))
            }
            "weighted" | "weighted_arithmetic" => {
                let weights = need_arg("a comma-separated weight list")?
                    .split(',')
                    .map(parse_real)
                    .collect::<Result<Vec<_>>>()?;
                Ok(MeanKind::WeightedArithmetic(weights))
            }
            other => Err(Error::parse(other, "unknown mean")),
        }
    }
}

impl TryFrom<String> for MeanKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MeanKind> for String {
    fn from(k: MeanKind) -> String {
        k.to_string()
    }
}

/// A catalog mean with a fixed arity.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSpec {
    kind: MeanKind,
    arity: usize,
}

impl MeanSpec {
    pub fn new(kind: MeanKind, arity: usize) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidSpec("arity must be positive".into()));
        }
        match &kind {
            MeanKind::Projection(i) if *i == 0 || *i > arity => {
                return Err(Error::InvalidSpec(format!(
                    "projection index {i} is outside 1..={arity}"
                )));
            }
            MeanKind::WeightedArithmetic(w) => {
                if w.len() != arity {
                    return Err(Error::InvalidSpec(format!(
                        "{} weights given for arity {arity}",
                        w.len()
                    )));
                }
                if let Some(bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
                    return Err(Error::InvalidSpec(format!("weight {bad} is negative or not finite")));
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                    return Err(Error::InvalidSpec(format!("weights sum to {sum}, not 1")));
                }
            }
            MeanKind::Power(r) if !r.is_finite() => {
                return Err(Error::InvalidSpec(format!("power exponent {r} is not finite")));
            }
            MeanKind::QuasiArithmetic(g) => g.validate()?,
            _ => {}
        }
        Ok(Self { kind, arity })
    }

    /// Parses the canonical text form and binds it to `arity`.
    pub fn parse(text: &str, arity: usize) -> Result<Self> {
        Self::new(text.parse()?, arity)
    }

    pub fn kind(&self) -> &MeanKind {
        &self.kind
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

impl fmt::Display for MeanSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

/// Anything that behaves as a mean of fixed arity.
pub trait Mean: Send + Sync {
    fn arity(&self) -> usize;
    fn eval(&self, v: &[f64]) -> Result<f64>;
}

impl<M: Mean + ?Sized> Mean for &M {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn eval(&self, v: &[f64]) -> Result<f64> {
        (**self).eval(v)
    }
}

/// A catalog mean bound to a domain.
#[derive(Debug, Clone)]
pub struct CatalogMean {
    pub spec: MeanSpec,
    pub domain: Interval,
}

impl CatalogMean {
    pub fn new(spec: MeanSpec, domain: Interval) -> Self {
        Self { spec, domain }
    }
}

impl Mean for CatalogMean {
    fn arity(&self) -> usize {
        self.spec.arity
    }

    fn eval(&self, v: &[f64]) -> Result<f64> {
        eval_mean(&self.spec, v, &self.domain)
    }
}

/// Checks arity, finiteness and membership in `domain` and in the mean's
/// natural domain.
pub(crate) fn check_input(spec: &MeanSpec, v: &[f64], domain: &Interval) -> Result<()> {
    if v.len() != spec.arity {
        return Err(Error::ArityMismatch {
            expected: spec.arity,
            actual: v.len(),
        });
    }
    let natural = spec.kind.natural_domain();
    for (index, &value) in v.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteInput { index, value });
        }
        if !domain.contains(value) {
            return Err(Error::DomainViolation {
                index,
                value,
                constraint: format!("domain {domain}"),
            });
        }
        if !natural.contains(value) {
            return Err(Error::DomainViolation {
                index,
                value,
                constraint: format!("natural domain {natural} of `{}`", spec.kind),
            });
        }
    }
    Ok(())
}

pub(crate) fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

fn arithmetic(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn geometric(v: &[f64]) -> f64 {
    if let [x, y] = v {
        return x.sqrt() * y.sqrt();
    }
    (v.iter().map(|x| x.ln()).sum::<f64>() / v.len() as f64).exp()
}

fn power(v: &[f64], r: f64) -> f64 {
    if r.abs() < POWER_ZERO_CUTOFF {
        return geometric(v);
    }
    // Scale by the largest coordinate so x^r cannot overflow for large |r|.
    let scale = if r > 0.0 {
        v.iter().fold(0.0_f64, |m, &x| m.max(x))
    } else {
        v.iter().fold(f64::INFINITY, |m, &x| m.min(x))
    };
    if scale == 0.0 {
        return 0.0;
    }
    let mean = v.iter().map(|&x| (x / scale).powf(r)).sum::<f64>() / v.len() as f64;
    scale * mean.powf(r.recip())
}

fn quasi_arithmetic(v: &[f64], g: Generator) -> f64 {
    match g {
        Generator::Identity => arithmetic(v),
        Generator::Power(q) => power(v, q),
        Generator::Exp => {
            // log-mean-exp, shifted to stay finite.
            let (_, hi) = min_max(v);
            let mean = v.iter().map(|&x| (x - hi).exp()).sum::<f64>() / v.len() as f64;
            hi + mean.ln()
        }
        Generator::Log => geometric(v),
    }
}

fn median(v: &[f64]) -> f64 {
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        let (a, b) = (sorted[n / 2 - 1], sorted[n / 2]);
        a + 0.5 * (b - a)
    }
}

/// The formula value without the final clamp. Inputs must already be valid.
pub(crate) fn raw_value(kind: &MeanKind, v: &[f64]) -> f64 {
    match kind {
        MeanKind::Arithmetic => arithmetic(v),
        MeanKind::Geometric => geometric(v),
        MeanKind::Harmonic => v.len() as f64 / v.iter().map(|x| x.recip()).sum::<f64>(),
        MeanKind::Power(r) => power(v, *r),
        MeanKind::QuasiArithmetic(g) => quasi_arithmetic(v, *g),
        MeanKind::Median => median(v),
        MeanKind::Min => min_max(v).0,
        MeanKind::Max => min_max(v).1,
        MeanKind::Projection(i) => v[i - 1],
        MeanKind::WeightedArithmetic(w) => w.iter().zip(v).map(|(w, x)| w * x).sum(),
    }
}

/// Evaluates `spec` at `v`, which must lie in `domain^p`.
pub fn eval_mean(spec: &MeanSpec, v: &[f64], domain: &Interval) -> Result<f64> {
    check_input(spec, v, domain)?;
    let (lo, hi) = min_max(v);
    let value = raw_value(&spec.kind, v);
    if value.is_nan() {
        return Err(Error::InvalidSpec(format!("`{}` evaluated to NaN", spec.kind)));
    }
    Ok(value.clamp(lo, hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct InternalityViolation {
    pub sample: usize,
    pub v: Vec<f64>,
    pub value: f64,
    /// Distance of `value` outside `[min(v), max(v)]`.
    pub excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InternalityReport {
    pub samples: usize,
    pub violations: Vec<InternalityViolation>,
    pub worst: Option<InternalityViolation>,
    /// Samples that could not be evaluated, with the error message.
    pub errors: Vec<(usize, String)>,
}

impl InternalityReport {
    pub fn violation_count(&self) -> usize {
        self.violations.len()
    }
}

/// Samples `domain^p` and records every vector whose unclamped mean value
/// leaves `[min(v), max(v)]` by more than [`INTERNALITY_TOL`].
pub fn internality_probe(
    spec: &MeanSpec,
    domain: &Interval,
    sample_count: usize,
    seed: u64,
) -> Result<InternalityReport> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument {
            field: "sample_count",
            reason: "must be at least 1".into(),
        });
    }
    let samples = Sampler::new(SampleBox::within(domain), spec.arity, seed).draw(sample_count);
    let outcomes: Vec<Result<(f64, f64)>> = samples
        .par_iter()
        .map(|v| {
            check_input(spec, v, domain)?;
            let (lo, hi) = min_max(v);
            let value = raw_value(&spec.kind, v);
            let excess = if value.is_nan() {
                f64::INFINITY
            } else {
                (lo - value).max(value - hi).max(0.0)
            };
            Ok((value, excess))
        })
        .collect();

    let mut report = InternalityReport {
        samples: sample_count,
        violations: Vec::new(),
        worst: None,
        errors: Vec::new(),
    };
    for (sample, (v, outcome)) in samples.into_iter().zip(outcomes).enumerate() {
        match outcome {
            Err(e) => report.errors.push((sample, e.to_string())),
            Ok((value, excess)) if excess > INTERNALITY_TOL => {
                let violation = InternalityViolation {
                    sample,
                    v,
                    value,
                    excess,
                };
                if report.worst.as_ref().is_none_or(|w| excess > w.excess) {
                    report.worst = Some(violation.clone());
                }
                report.violations.push(violation);
            }
            Ok(_) => {}
        }
    }
    Ok(report)
}
