//! Invariant functions `F` with `F ∘ M = F` and their factorisation
//! `F = φ ∘ K`, where `K` is the invariant mean of `M` and
//! `φ(x) = F(x, ..., x)` is the restriction of `F` to the diagonal.
//!
//! Both sides are checked numerically on a finite sample set; reports carry
//! residual magnitudes only.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::invariant::{gauss_iterate, GaussOptions, InvariantMean, Status};
use crate::mapping::MeanTypeMapping;
use crate::mean::{eval_mean, Mean, MeanKind, MeanSpec};
use crate::probe::{max_over, reduce_max, MaxReport};
use crate::sampling::{SampleBox, Sampler};

/// Invariance residual above which a report warns that `F` does not look `M`-invariant.
pub const INVARIANCE_WARN_TOL: f64 = 1e-9;

/// Continuous real functions used as outer maps `ψ` in `ψ ∘ F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Unary {
    Identity,
    Square,
    Sqrt,
    Exp,
    Log,
    Power(f64),
    /// `a * x + b`.
    Affine(f64, f64),
}

impl Unary {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Unary::Identity => x,
            Unary::Square => x * x,
            Unary::Sqrt => x.sqrt(),
            Unary::Exp => x.exp(),
            Unary::Log => x.ln(),
            Unary::Power(q) => x.powf(q),
            Unary::Affine(a, b) => a * x + b,
        }
    }
}

impl fmt::Display for Unary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unary::Identity => f.write_str("identity"),
            Unary::Square => f.write_str("square"),
            Unary::Sqrt => f.write_str("sqrt"),
            Unary::Exp => f.write_str("exp"),
            Unary::Log => f.write_str("log"),
            Unary::Power(q) => write!(f, "power:{q}"),
            Unary::Affine(a, b) => write!(f, "affine:{a},{b}"),
        }
    }
}

fn parse_finite(token: &str) -> Result<f64> {
    let t = token.trim();
    t.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::parse(t, "expected a finite real number"))
}

impl FromStr for Unary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (head, arg) = match lower.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (lower.as_str(), None),
        };
        match (head, arg) {
            ("identity" | "id", None) => Ok(Unary::Identity),
            ("square", None) => Ok(Unary::Square),
            ("sqrt", None) => Ok(Unary::Sqrt),
            ("exp", None) => Ok(Unary::Exp),
            ("log" | "ln", None) => Ok(Unary::Log),
            ("power" | "pow", Some(a)) => Ok(Unary::Power(parse_finite(a)?)),
            ("affine", Some(a)) => {
                let (slope, offset) = a
                    .split_once(',')
                    .ok_or_else(|| Error::parse(a, "affine needs `a,b`"))?;
                Ok(Unary::Affine(parse_finite(slope)?, parse_finite(offset)?))
            }
            _ => Err(Error::parse(s.trim(), "unknown unary function")),
        }
    }
}

/// Expression for a function `I^p -> R` built from catalog pieces.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionExpr {
    Product,
    Sum,
    /// 1-based coordinate.
    Coordinate(usize),
    Constant(f64),
    Mean(MeanKind),
    /// The invariant mean `K` of the mapping the function is bound to.
    Invariant,
    Apply(Unary, Box<FunctionExpr>),
}

impl FunctionExpr {
    fn uses_invariant(&self) -> bool {
        match self {
            FunctionExpr::Invariant => true,
            FunctionExpr::Apply(_, inner) => inner.uses_invariant(),
            _ => false,
        }
    }
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionExpr::Product => f.write_str("product"),
            FunctionExpr::Sum => f.write_str("sum"),
            FunctionExpr::Coordinate(i) => write!(f, "coord:{i}"),
            FunctionExpr::Constant(c) => write!(f, "const:{c}"),
            FunctionExpr::Mean(k) => write!(f, "mean:{k}"),
            FunctionExpr::Invariant => f.write_str("invariant"),
            FunctionExpr::Apply(u, inner) => write!(f, "{u}({inner})"),
        }
    }
}

/// Grammar: `product | sum | coord:i | const:c | mean:<mean> | invariant | <unary>(<expr>)`.
impl FromStr for FunctionExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(open) = s.find('(') {
            let inner = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::parse(s, "unbalanced parentheses"))?;
            let unary: Unary = s[..open].parse()?;
            return Ok(FunctionExpr::Apply(unary, Box::new(inner.parse()?)));
        }
        let lower = s.to_ascii_lowercase();
        let (head, arg) = match lower.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (lower.as_str(), None),
        };
        match (head, arg) {
            ("product", None) => Ok(FunctionExpr::Product),
            ("sum", None) => Ok(FunctionExpr::Sum),
            ("invariant" | "k", None) => Ok(FunctionExpr::Invariant),
            ("coord", Some(a)) => match a.parse::<usize>() {
                Ok(i) if i >= 1 => Ok(FunctionExpr::Coordinate(i)),
                _ => Err(Error::parse(a, "expected a 1-based coordinate index")),
            },
            ("const", Some(a)) => Ok(FunctionExpr::Constant(parse_finite(a)?)),
            ("mean", Some(a)) => Ok(FunctionExpr::Mean(a.parse()?)),
            _ => Err(Error::parse(s, "unknown function expression")),
        }
    }
}

/// A function `F: I^p -> R` bound to the mapping whose invariance is tested.
#[derive(Debug, Clone)]
pub struct InvariantFunction {
    expr: FunctionExpr,
    arity: usize,
    domain: Interval,
    mean: Option<MeanSpec>,
    k: Option<InvariantMean>,
}

impl InvariantFunction {
    /// `options` configure `K` when the expression mentions `invariant`.
    pub fn new(expr: FunctionExpr, mapping: &MeanTypeMapping, options: GaussOptions) -> Result<Self> {
        let arity = mapping.p();
        let mut mean = None;
        let mut cursor = &expr;
        loop {
            match cursor {
                FunctionExpr::Apply(_, inner) => cursor = inner,
                FunctionExpr::Coordinate(i) if *i > arity => {
                    return Err(Error::InvalidSpec(format!("coordinate {i} is outside 1..={arity}")));
                }
                FunctionExpr::Mean(kind) => {
                    mean = Some(MeanSpec::new(kind.clone(), arity)?);
                    break;
                }
                _ => break,
            }
        }
        let k = if expr.uses_invariant() {
            Some(InvariantMean::new(mapping.clone(), options)?)
        } else {
            None
        };
        Ok(Self {
            expr,
            arity,
            domain: *mapping.domain(),
            mean,
            k,
        })
    }

    pub fn parse(text: &str, mapping: &MeanTypeMapping, options: GaussOptions) -> Result<Self> {
        Self::new(text.parse()?, mapping, options)
    }

    pub fn expr(&self) -> &FunctionExpr {
        &self.expr
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                actual: v.len(),
            });
        }
        if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::NonFiniteInput { index, value });
        }
        self.eval_expr(&self.expr, v)
    }

    fn eval_expr(&self, expr: &FunctionExpr, v: &[f64]) -> Result<f64> {
        Ok(match expr {
            FunctionExpr::Product => v.iter().product(),
            FunctionExpr::Sum => v.iter().sum(),
            FunctionExpr::Coordinate(i) => v[i - 1],
            FunctionExpr::Constant(c) => *c,
            FunctionExpr::Mean(_) => eval_mean(self.mean.as_ref().expect("bound at construction"), v, &self.domain)?,
            FunctionExpr::Invariant => self.k.as_ref().expect("bound at construction").eval(v)?,
            FunctionExpr::Apply(u, inner) => u.apply(self.eval_expr(inner, v)?),
        })
    }
}

/// `φ(x) = F(x, ..., x)`.
#[derive(Debug, Clone, Copy)]
pub struct DiagonalRestriction<'a> {
    f: &'a InvariantFunction,
}

impl DiagonalRestriction<'_> {
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.f.eval(&vec![x; self.f.arity])
    }
}

pub fn diagonal_restriction(f: &InvariantFunction) -> DiagonalRestriction<'_> {
    DiagonalRestriction { f }
}

fn default_sampler(mapping: &MeanTypeMapping, seed: u64) -> Sampler {
    Sampler::new(SampleBox::within(mapping.domain()), mapping.p(), seed)
}

/// `max |F(M(v)) - F(v)|`.
pub fn check_invariance(f: &InvariantFunction, mapping: &MeanTypeMapping, sample_count: usize, seed: u64) -> Result<MaxReport> {
    check_invariance_with(f, mapping, &default_sampler(mapping, seed), sample_count)
}

pub fn check_invariance_with(
    f: &InvariantFunction,
    mapping: &MeanTypeMapping,
    sampler: &Sampler,
    sample_count: usize,
) -> Result<MaxReport> {
    require_compatible(f, mapping, sample_count)?;
    let samples = sampler.draw(sample_count);
    Ok(max_over(&samples, |v| Ok((f.eval(&mapping.apply(v)?)? - f.eval(v)?).abs())))
}

fn require_compatible(f: &InvariantFunction, mapping: &MeanTypeMapping, sample_count: usize) -> Result<()> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument {
            field: "sample_count",
            reason: "must be at least 1".into(),
        });
    }
    if f.arity != mapping.p() {
        return Err(Error::ArityMismatch {
            expected: mapping.p(),
            actual: f.arity,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub fixture: String,
    pub invariance_residual: f64,
    /// `max |φ(K(v)) - F(v)|`.
    pub decomposition_residual: f64,
    pub samples: usize,
    pub tol: f64,
    #[serde(rename = "K_steps")]
    pub k_steps: StepStats,
    /// Samples on which `K` stopped at `max_iter` without converging.
    pub max_iter_reached: usize,
    pub errors: Vec<(usize, String)>,
    pub warnings: Vec<String>,
}

impl DecompositionReport {
    /// The invariance residual is large enough that the factorisation is not
    /// expected to hold.
    pub fn hypothesis_violated(&self) -> bool {
        self.invariance_residual > INVARIANCE_WARN_TOL
    }
}

/// Computes `K` by Gauss iteration at `tol`, `φ` by diagonal restriction,
/// and both residuals over one sample set.
pub fn verify_decomposition(
    fixture: &str,
    f: &InvariantFunction,
    mapping: &MeanTypeMapping,
    options: &GaussOptions,
    sample_count: usize,
    seed: u64,
) -> Result<DecompositionReport> {
    verify_decomposition_with(fixture, f, mapping, options, &default_sampler(mapping, seed), sample_count)
}

pub fn verify_decomposition_with(
    fixture: &str,
    f: &InvariantFunction,
    mapping: &MeanTypeMapping,
    options: &GaussOptions,
    sampler: &Sampler,
    sample_count: usize,
) -> Result<DecompositionReport> {
    require_compatible(f, mapping, sample_count)?;
    let options = GaussOptions {
        keep_trace: false,
        ..*options
    };
    let samples = sampler.draw(sample_count);
    let invariance = max_over(&samples, |v| Ok((f.eval(&mapping.apply(v)?)? - f.eval(v)?).abs()));

    let phi = diagonal_restriction(f);
    let runs: Vec<Result<(f64, usize, Status)>> = samples
        .par_iter()
        .map(|v| {
            let k = gauss_iterate(mapping, v, &options)?;
            let residual = (phi.eval(k.value)? - f.eval(v)?).abs();
            Ok((residual, k.steps, k.status))
        })
        .collect();
    let steps: Vec<usize> = runs.iter().filter_map(|r| r.as_ref().ok().map(|(_, s, _)| *s)).collect();
    let max_iter_reached = runs
        .iter()
        .filter(|r| matches!(r, Ok((_, _, Status::MaxIterReached))))
        .count();
    let decomposition = reduce_max(&samples, runs.into_iter().map(|r| r.map(|(x, _, _)| x)).collect());

    let k_steps = StepStats {
        min: steps.iter().copied().min().unwrap_or(0),
        max: steps.iter().copied().max().unwrap_or(0),
        mean: if steps.is_empty() {
            0.0
        } else {
            steps.iter().sum::<usize>() as f64 / steps.len() as f64
        },
    };

    let mut errors = invariance.errors.clone();
    for e in decomposition.errors {
        if !errors.iter().any(|(i, _)| *i == e.0) {
            errors.push(e);
        }
    }
    errors.sort_by_key(|(i, _)| *i);

    let mut report = DecompositionReport {
        fixture: fixture.to_string(),
        invariance_residual: invariance.max,
        decomposition_residual: decomposition.max,
        samples: sample_count,
        tol: options.tol,
        k_steps,
        max_iter_reached,
        errors,
        warnings: Vec::new(),
    };
    if max_iter_reached > 0 {
        report.warnings.push(format!(
            "K reached max_iter = {} without converging on {max_iter_reached} samples; residuals are diagnostic only",
            options.max_iter
        ));
    }
    if report.hypothesis_violated() {
        report.warnings.push(format!(
            "invariance residual {:e} exceeds {INVARIANCE_WARN_TOL:e}; F = φ∘K is not expected to hold",
            report.invariance_residual
        ));
    }
    if !report.errors.is_empty() {
        report.warnings.push(format!("{} samples failed to evaluate", report.errors.len()));
    }
    Ok(report)
}
