//! Mean-type mappings `M = (M_1, ..., M_p)`, their iterates, and the
//! contractivity notions built on the diameter `max(v) - min(v)`.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::mean::{eval_mean, min_max, MeanSpec};
use crate::sampling::{SampleBox, Sampler};

pub const DEFAULT_N0_CAP: usize = 1000;
/// Witnesses of non-contractivity must be at least this far from constant.
pub const WITNESS_MIN_DIAMETER: f64 = 1e-9;

/// Image of a sample and its diameters before and after.
type Shrinkage = (Vec<f64>, f64, f64);

/// `max(v) - min(v)`.
pub fn diameter(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::NonFiniteInput { index, value });
    }
    let (lo, hi) = min_max(v);
    Ok(hi - lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanTypeMapping {
    name: String,
    components: Vec<MeanSpec>,
    domain: Interval,
}

impl MeanTypeMapping {
    /// Requires `p >= 2` components of arity `p`, each of whose formulas is
    /// defined on all of `domain`.
    pub fn new(name: impl Into<String>, components: Vec<MeanSpec>, domain: Interval) -> Result<Self> {
        let p = components.len();
        if p < 2 {
            return Err(Error::InvalidSpec(format!(
                "a mean-type mapping needs p >= 2 components, got {p}"
            )));
        }
        for (index, spec) in components.iter().enumerate() {
            if spec.arity() != p {
                return Err(Error::InvalidSpec(format!(
                    "component {index} has arity {}, expected {p}",
                    spec.arity()
                )));
            }
            let natural = spec.kind().natural_domain();
            if !domain.is_subset_of(&natural) {
                return Err(Error::InvalidSpec(format!(
                    "component {index} (`{spec}`) is only defined on {natural}, not on all of {domain}"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            components,
            domain,
        })
    }

    /// Builds a mapping from canonical mean strings.
    pub fn parse<S: AsRef<str>>(name: impl Into<String>, components: &[S], domain: Interval) -> Result<Self> {
        let p = components.len();
        let specs = components
            .iter()
            .map(|c| MeanSpec::parse(c.as_ref(), p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, specs, domain)
    }

    /// Arithmetic and geometric means on `(0, inf)`; its invariant mean is the AGM.
    pub fn agm() -> Self {
        Self::parse("agm", &["arithmetic", "quasi:log"], Interval::positive()).expect("valid")
    }

    /// Arithmetic and harmonic means on `(0, inf)`; preserves the product of
    /// the coordinates, so its invariant mean is the geometric mean.
    pub fn arithmetic_harmonic() -> Self {
        Self::parse("arithmetic-harmonic", &["arithmetic", "harmonic"], Interval::positive()).expect("valid")
    }

    /// `(v_2, ..., v_p, A(v))` on the reals: the coordinates shift left by one
    /// and the arithmetic mean enters last. Weakly contractive but not
    /// contractive.
    pub fn shift_average(p: usize) -> Result<Self> {
        let mut components: Vec<String> = (2..=p).map(|i| format!("projection:{i}")).collect();
        components.push("arithmetic".into());
        Self::parse(format!("shift-average-{p}"), &components, Interval::reals())
    }

    /// `(v_1, ..., v_p)`: every vector is a fixed point.
    pub fn projections(p: usize) -> Result<Self> {
        let components: Vec<String> = (1..=p).map(|i| format!("projection:{i}")).collect();
        Self::parse(format!("projections-{p}"), &components, Interval::reals())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn p(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[MeanSpec] {
        &self.components
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    fn check_arity(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.p() {
            return Err(Error::ArityMismatch {
                expected: self.p(),
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// `M(v) = (M_1(v), ..., M_p(v))`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_arity(v)?;
        self.components
            .iter()
            .enumerate()
            .map(|(i, spec)| eval_mean(spec, v, &self.domain).map_err(|e| e.in_component(i)))
            .collect()
    }

    /// The trace `v, M(v), ..., M^n(v)`.
    pub fn iterate(&self, v: &[f64], n: usize) -> Result<IterationTrace> {
        let mut trace = IterationTrace::start(self, v)?;
        for step in 1..=n {
            trace.advance(self).map_err(|e| e.at_step(step))?;
        }
        Ok(trace)
    }

    /// `diameter(M(v)) < diameter(v)`, compared exactly.
    pub fn is_contractive_at(&self, v: &[f64]) -> Result<bool> {
        let before = diameter(v)?;
        if before == 0.0 {
            return Err(Error::ConstantVector);
        }
        let after = diameter(&self.apply(v)?)?;
        Ok(after < before)
    }

    /// Searches for a nonconstant `v` with `diameter(M(v)) >= diameter(v)`.
    pub fn probe_contractivity(&self, sample_count: usize, seed: u64) -> Result<ContractivityReport> {
        let sampler = Sampler::new(SampleBox::within(&self.domain), self.p(), seed);
        self.probe_contractivity_with(&sampler, sample_count)
    }

    pub fn probe_contractivity_with(&self, sampler: &Sampler, sample_count: usize) -> Result<ContractivityReport> {
        if sample_count == 0 {
            return Err(Error::InvalidArgument {
                field: "sample_count",
                reason: "must be at least 1".into(),
            });
        }
        let samples = sampler.draw(sample_count);
        let outcomes: Vec<Result<Option<Shrinkage>>> = samples
            .par_iter()
            .map(|v| {
                let before = diameter(v)?;
                if before <= WITNESS_MIN_DIAMETER {
                    return Ok(None);
                }
                let image = self.apply(v)?;
                let after = diameter(&image)?;
                Ok(Some((image, before, after)))
            })
            .collect();

        let mut report = ContractivityReport {
            mapping: self.name.clone(),
            samples: sample_count,
            checked: 0,
            skipped_near_constant: 0,
            errors: Vec::new(),
            witness: None,
        };
        for (sample, (v, outcome)) in samples.into_iter().zip(outcomes).enumerate() {
            match outcome {
                Err(e) => report.errors.push((sample, e.to_string())),
                Ok(None) => report.skipped_near_constant += 1,
                Ok(Some((image, before, after))) => {
                    report.checked += 1;
                    if after >= before && report.witness.is_none() {
                        report.witness = Some(ContractivityWitness {
                            sample,
                            v,
                            image,
                            diameter_before: before,
                            diameter_after: after,
                        });
                    }
                }
            }
        }
        Ok(report)
    }

    /// Smallest `n` in `1..=cap` with `diameter(M^n(v)) < diameter(v)`.
    ///
    /// Diameters never increase under a mean-type mapping, so the strict
    /// decrease persists for every later iterate.
    pub fn find_n0(&self, v: &[f64], cap: usize) -> Result<usize> {
        self.n0_search(v, cap).map(|(n, _)| n)
    }

    fn n0_search(&self, v: &[f64], cap: usize) -> Result<(usize, Vec<f64>)> {
        if cap == 0 {
            return Err(Error::InvalidArgument {
                field: "cap",
                reason: "must be at least 1".into(),
            });
        }
        let mut trace = IterationTrace::start(self, v)?;
        let initial = trace.steps[0].diameter;
        if initial == 0.0 {
            return Err(Error::ConstantVector);
        }
        for n in 1..=cap {
            let step = trace.advance(self).map_err(|e| e.at_step(n))?;
            if step.diameter < initial {
                return Ok((n, step.vector.clone()));
            }
        }
        Err(Error::NotFoundWithinCap {
            cap,
            trace: Box::new(trace),
        })
    }

    /// `M*(v) = M^{n0(v)}(v)`; constant vectors are returned unchanged.
    pub fn star_apply(&self, v: &[f64], cap: usize) -> Result<Vec<f64>> {
        self.check_arity(v)?;
        if diameter(v)? == 0.0 {
            for spec in &self.components {
                crate::mean::check_input(spec, v, &self.domain)?;
            }
            return Ok(v.to_vec());
        }
        self.n0_search(v, cap).map(|(_, w)| w)
    }
}

impl fmt::Display for MeanTypeMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "{} = ({}) on {}", self.name, parts.join(", "), self.domain)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub vector: Vec<f64>,
    pub diameter: f64,
}

/// `v, M(v), M^2(v), ...` with the diameter of each iterate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub mapping: String,
    pub steps: Vec<TraceStep>,
}

impl IterationTrace {
    pub(crate) fn start(mapping: &MeanTypeMapping, v: &[f64]) -> Result<Self> {
        mapping.check_arity(v)?;
        let d = diameter(v)?;
        Ok(Self {
            mapping: mapping.name.clone(),
            steps: vec![TraceStep {
                vector: v.to_vec(),
                diameter: d,
            }],
        })
    }

    pub(crate) fn advance(&mut self, mapping: &MeanTypeMapping) -> Result<&TraceStep> {
        let next = mapping.apply(&self.last().vector)?;
        let d = diameter(&next)?;
        self.steps.push(TraceStep {
            vector: next,
            diameter: d,
        });
        Ok(self.last())
    }

    pub fn last(&self) -> &TraceStep {
        self.steps.last().expect("a trace always holds its starting vector")
    }

    /// Number of applications of the mapping.
    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// CSV with columns `step, x1, ..., xp, diameter`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let p = self.steps[0].vector.len();
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec!["step".to_string()];
        header.extend((1..=p).map(|i| format!("x{i}")));
        header.push("diameter".into());
        out.write_record(&header).map_err(csv_error)?;
        for (k, step) in self.steps.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(step.vector.iter().map(|x| format_float(*x)));
            row.push(format_float(step.diameter));
            out.write_record(&row).map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// JSON document `{mapping, steps: [{step, x, diameter}, ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .enumerate()
            .map(|(k, s)| serde_json::json!({ "step": k, "x": s.vector, "diameter": s.diameter }))
            .collect();
        serde_json::json!({ "mapping": self.mapping, "steps": steps })
    }
}

/// Shortest text that parses back to the same `f64`.
pub(crate) fn format_float(x: f64) -> String {
    format!("{x:?}")
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractivityWitness {
    pub sample: usize,
    pub v: Vec<f64>,
    pub image: Vec<f64>,
    pub diameter_before: f64,
    pub diameter_after: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractivityReport {
    pub mapping: String,
    pub samples: usize,
    pub checked: usize,
    pub skipped_near_constant: usize,
    pub errors: Vec<(usize, String)>,
    /// First sample (by index) where the diameter did not strictly drop.
    pub witness: Option<ContractivityWitness>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContractivityVerdict {
    NoCounterexampleFound,
    Counterexample(Vec<f64>),
}

impl ContractivityReport {
    pub fn verdict(&self) -> ContractivityVerdict {
        match &self.witness {
            None => ContractivityVerdict::NoCounterexampleFound,
            Some(w) => ContractivityVerdict::Counterexample(w.v.clone()),
        }
    }
}
