//! Invariant means by Gauss iteration.
//!
//! For a continuous weakly contractive mean-type mapping the iterates
//! `M^n(v)` converge to a constant vector `(K(v), ..., K(v))`, and `K` is
//! the unique `M`-invariant mean. At finite tolerance the engine stops once
//! the diameter of the iterate falls below `tol` and reads a single number
//! off the final vector.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::mapping::{diameter, IterationTrace, MeanTypeMapping};
use crate::mean::{check_input, min_max, Mean};
use crate::probe::{max_over, MaxReport};
use crate::sampling::{SampleBox, Sampler};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// How a number is read off the (nearly constant) final iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    /// `(max + min) / 2`; within `final_diameter / 2` of the limit.
    #[default]
    Mid,
    Min,
    Max,
    First,
}

impl Readout {
    pub fn read(&self, v: &[f64]) -> f64 {
        let (lo, hi) = min_max(v);
        match self {
            Readout::Mid => lo + 0.5 * (hi - lo),
            Readout::Min => lo,
            Readout::Max => hi,
            Readout::First => v[0],
        }
    }
}

impl FromStr for Readout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mid" => Ok(Readout::Mid),
            "min" => Ok(Readout::Min),
            "max" => Ok(Readout::Max),
            "first" => Ok(Readout::First),
            other => Err(Error::parse(other, "expected one of mid, min, max, first")),
        }
    }
}

impl fmt::Display for Readout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Readout::Mid => "mid",
            Readout::Min => "min",
            Readout::Max => "max",
            Readout::First => "first",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoppingRule {
    /// `diameter < tol`.
    #[default]
    Absolute,
    /// `diameter < tol * |midpoint|`, for domains far from zero.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub stopping: StoppingRule,
    pub readout: Readout,
    /// Keep the trace of converged runs too. Non-converged runs always keep it.
    pub keep_trace: bool,
}

impl Default for GaussOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            stopping: StoppingRule::Absolute,
            readout: Readout::Mid,
            keep_trace: false,
        }
    }
}

impl GaussOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_readout(mut self, readout: Readout) -> Self {
        self.readout = readout;
        self
    }

    pub fn with_stopping(mut self, stopping: StoppingRule) -> Self {
        self.stopping = stopping;
        self
    }

    pub fn with_trace(mut self, keep: bool) -> Self {
        self.keep_trace = keep;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument {
                field: "tol",
                reason: format!("must be a positive finite number, got {}", self.tol),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument {
                field: "max_iter",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    fn stops(&self, v: &[f64], d: f64) -> bool {
        match self.stopping {
            StoppingRule::Absolute => d < self.tol,
            StoppingRule::Relative => d == 0.0 || d < self.tol * Readout::Mid.read(v).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIterReached,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIterReached => "max_iter_reached",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantEstimate {
    pub value: f64,
    pub steps: usize,
    pub final_diameter: f64,
    pub status: Status,
    pub final_vector: Vec<f64>,
    pub trace: Option<IterationTrace>,
}

impl InvariantEstimate {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Iterates `M` from `v` until the stopping rule holds or `max_iter`
/// applications have been made. Running out of iterations is reported in
/// [`InvariantEstimate::status`], not as an error.
pub fn gauss_iterate(mapping: &MeanTypeMapping, v: &[f64], options: &GaussOptions) -> Result<InvariantEstimate> {
    options.validate()?;
    for spec in mapping.components() {
        check_input(spec, v, mapping.domain())?;
    }
    let mut trace = IterationTrace::start(mapping, v)?;
    let mut d = trace.last().diameter;
    let mut steps = 0;
    while !options.stops(&trace.last().vector, d) && steps < options.max_iter {
        steps += 1;
        d = trace.advance(mapping).map_err(|e| e.at_step(steps))?.diameter;
    }
    let status = if options.stops(&trace.last().vector, d) {
        Status::Converged
    } else {
        Status::MaxIterReached
    };
    let final_vector = trace.last().vector.clone();
    let keep = options.keep_trace || status == Status::MaxIterReached;
    Ok(InvariantEstimate {
        value: options.readout.read(&final_vector),
        steps,
        final_diameter: diameter(&final_vector)?,
        status,
        final_vector,
        trace: keep.then_some(trace),
    })
}

/// The invariant mean `K` of a mapping, evaluated on demand by Gauss iteration.
#[derive(Debug, Clone)]
pub struct InvariantMean {
    mapping: MeanTypeMapping,
    options: GaussOptions,
}

impl InvariantMean {
    pub fn new(mapping: MeanTypeMapping, options: GaussOptions) -> Result<Self> {
        options.validate()?;
        Ok(Self {
            mapping,
            options: GaussOptions {
                keep_trace: false,
                ..options
            },
        })
    }

    pub fn mapping(&self) -> &MeanTypeMapping {
        &self.mapping
    }

    pub fn options(&self) -> &GaussOptions {
        &self.options
    }

    pub fn with_readout(&self, readout: Readout) -> Self {
        Self {
            mapping: self.mapping.clone(),
            options: self.options.with_readout(readout),
        }
    }

    pub fn estimate(&self, v: &[f64]) -> Result<InvariantEstimate> {
        gauss_iterate(&self.mapping, v, &self.options)
    }
}

/// `invariant_mean(M, tol, max_iter)`.
pub fn invariant_mean(mapping: &MeanTypeMapping, tol: f64, max_iter: usize) -> Result<InvariantMean> {
    InvariantMean::new(
        mapping.clone(),
        GaussOptions::default().with_tol(tol).with_max_iter(max_iter),
    )
}

impl Mean for InvariantMean {
    fn arity(&self) -> usize {
        self.mapping.p()
    }

    fn eval(&self, v: &[f64]) -> Result<f64> {
        self.estimate(v).map(|e| e.value)
    }
}

fn require_samples(sample_count: usize) -> Result<()> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument {
            field: "sample_count",
            reason: "must be at least 1".into(),
        });
    }
    Ok(())
}

/// `max |K(M(v)) - K(v)|` over samples from the mapping's domain.
pub fn invariance_residual(k: &dyn Mean, mapping: &MeanTypeMapping, sample_count: usize, seed: u64) -> Result<MaxReport> {
    let sampler = Sampler::new(SampleBox::within(mapping.domain()), mapping.p(), seed);
    invariance_residual_with(k, mapping, &sampler, sample_count)
}

pub fn invariance_residual_with(
    k: &dyn Mean,
    mapping: &MeanTypeMapping,
    sampler: &Sampler,
    sample_count: usize,
) -> Result<MaxReport> {
    require_samples(sample_count)?;
    check_arities(k.arity(), mapping.p())?;
    let samples = sampler.draw(sample_count);
    Ok(max_over(&samples, |v| {
        let image = mapping.apply(v)?;
        Ok((k.eval(&image)? - k.eval(v)?).abs())
    }))
}

/// `max |K1(v) - K2(v)|` over samples from `domain^p`.
pub fn uniqueness_probe(
    k1: &dyn Mean,
    k2: &dyn Mean,
    domain: &Interval,
    p: usize,
    sample_count: usize,
    seed: u64,
) -> Result<MaxReport> {
    let sampler = Sampler::new(SampleBox::within(domain), p, seed);
    uniqueness_probe_with(k1, k2, &sampler, sample_count)
}

pub fn uniqueness_probe_with(k1: &dyn Mean, k2: &dyn Mean, sampler: &Sampler, sample_count: usize) -> Result<MaxReport> {
    require_samples(sample_count)?;
    check_arities(k1.arity(), sampler.arity())?;
    check_arities(k2.arity(), sampler.arity())?;
    let samples = sampler.draw(sample_count);
    Ok(max_over(&samples, |v| Ok((k1.eval(v)? - k2.eval(v)?).abs())))
}

fn check_arities(mean: usize, p: usize) -> Result<()> {
    if mean != p {
        return Err(Error::ArityMismatch {
            expected: p,
            actual: mean,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mean::{CatalogMean, MeanSpec};

    fn geometric2() -> CatalogMean {
        CatalogMean::new(MeanSpec::parse("geometric", 2).unwrap(), Interval::positive())
    }

    fn arithmetic2() -> CatalogMean {
        CatalogMean::new(MeanSpec::parse("arithmetic", 2).unwrap(), Interval::positive())
    }

    #[test]
    fn arithmetic_harmonic_converges_to_root_of_product() {
        let est = gauss_iterate(&MeanTypeMapping::arithmetic_harmonic(), &[2.0, 8.0], &GaussOptions::default()).unwrap();
        assert_eq!(est.status, Status::Converged);
        assert!((est.value - 4.0).abs() < 1e-12);
        assert!(est.final_diameter < 1e-12);
        assert!(est.trace.is_none());
    }

    #[test]
    fn constant_input_takes_no_steps() {
        for m in [MeanTypeMapping::agm(), MeanTypeMapping::shift_average(3).unwrap()] {
            let v = vec![2.5; m.p()];
            let est = gauss_iterate(&m, &v, &GaussOptions::default()).unwrap();
            assert_eq!(est.value, 2.5);
            assert_eq!(est.steps, 0);
            assert_eq!(est.status, Status::Converged);
        }
    }

    #[test]
    fn invalid_input_is_rejected_even_when_constant() {
        let err = gauss_iterate(&MeanTypeMapping::agm(), &[-1.0, -1.0], &GaussOptions::default()).unwrap_err();
        assert!(matches!(err, Error::DomainViolation { .. }));
        let bad_tol = GaussOptions::default().with_tol(0.0);
        assert!(gauss_iterate(&MeanTypeMapping::agm(), &[1.0, 2.0], &bad_tol).is_err());
        let bad_iter = GaussOptions::default().with_max_iter(0);
        assert!(gauss_iterate(&MeanTypeMapping::agm(), &[1.0, 2.0], &bad_iter).is_err());
    }

    #[test]
    fn projections_hit_max_iter_with_trace() {
        let m = MeanTypeMapping::projections(2).unwrap();
        let est = gauss_iterate(&m, &[0.0, 1.0], &GaussOptions::default().with_max_iter(25)).unwrap();
        assert_eq!(est.status, Status::MaxIterReached);
        assert_eq!(est.steps, 25);
        assert_eq!(est.trace.as_ref().unwrap().len(), 25);
        assert_eq!(est.value, 0.5);
    }

    #[test]
    fn readouts_bracket_the_limit() {
        let m = MeanTypeMapping::shift_average(3).unwrap();
        let v = [0.0, 1.0, 0.0];
        let opts = GaussOptions::default().with_trace(true);
        let mid = gauss_iterate(&m, &v, &opts).unwrap();
        let lo = gauss_iterate(&m, &v, &opts.with_readout(Readout::Min)).unwrap();
        let hi = gauss_iterate(&m, &v, &opts.with_readout(Readout::Max)).unwrap();
        assert!(lo.value <= mid.value && mid.value <= hi.value);
        assert!(hi.value - lo.value < 1e-12);
        // left eigenvector of the shift-average matrix: K = v1/6 + v2/3 + v3/2
        assert!((mid.value - 1.0 / 3.0).abs() < 1e-12);
        let trace = mid.trace.unwrap();
        assert_eq!(trace.len(), mid.steps);
    }

    #[test]
    fn relative_stopping() {
        let m = MeanTypeMapping::agm();
        let opts = GaussOptions::default().with_tol(1e-10).with_stopping(StoppingRule::Relative);
        let est = gauss_iterate(&m, &[1e6, 2e6], &opts).unwrap();
        assert!(est.converged());
        assert!(est.final_diameter < 1e-10 * est.value);
    }

    #[test]
    fn invariant_mean_examples() {
        let k = invariant_mean(&MeanTypeMapping::arithmetic_harmonic(), 1e-12, 10_000).unwrap();
        assert!((k.eval(&[1.0, 9.0]).unwrap() - 3.0).abs() < 1e-12);
        let agm = invariant_mean(&MeanTypeMapping::agm(), 1e-12, 10_000).unwrap();
        assert_eq!(agm.eval(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(agm.arity(), 2);
    }

    #[test]
    fn residual_examples() {
        let ah = MeanTypeMapping::arithmetic_harmonic();
        let k = invariant_mean(&ah, 1e-12, 10_000).unwrap();
        assert!(invariance_residual(&k, &ah, 200, 42).unwrap().max <= 2e-12);
        assert!(invariance_residual(&geometric2(), &ah, 200, 42).unwrap().max <= 1e-12);

        let agm = MeanTypeMapping::agm();
        let box_1_10 = Sampler::new(SampleBox::new(1.0, 10.0).unwrap(), 2, 42);
        let r = invariance_residual_with(&arithmetic2(), &agm, &box_1_10, 200).unwrap();
        assert!(r.max > 0.001);
    }

    #[test]
    fn uniqueness_examples() {
        let ah = MeanTypeMapping::arithmetic_harmonic();
        let k = invariant_mean(&ah, 1e-12, 10_000).unwrap();
        let r = uniqueness_probe(&k, &geometric2(), ah.domain(), 2, 200, 42).unwrap();
        assert!(r.max <= 1e-10);

        let b = Sampler::new(SampleBox::new(1.0, 4.0).unwrap(), 2, 42);
        let r = uniqueness_probe_with(&arithmetic2(), &geometric2(), &b, 100).unwrap();
        assert!(r.max >= 0.25);

        let three = CatalogMean::new(MeanSpec::parse("arithmetic", 3).unwrap(), Interval::reals());
        assert!(uniqueness_probe(&three, &geometric2(), &Interval::positive(), 2, 10, 1).is_err());
    }
}
