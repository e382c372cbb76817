//! The `invmean` command line front end.
//!
//! Exit codes: `0` success, `1` parse/domain/usage error, `2` a negative
//! mathematical result (counterexample found, `n0` not found within the
//! cap, residual above threshold, or iteration stopped at `max_iter`).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::config::{load_mapping, DecompositionFixture};
use crate::decompose::{verify_decomposition, InvariantFunction};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::invariant::{
    gauss_iterate, invariance_residual, uniqueness_probe, GaussOptions, InvariantMean, Readout, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use crate::mapping::{format_float, MeanTypeMapping, DEFAULT_N0_CAP};
use crate::mean::{eval_mean, CatalogMean, Mean, MeanSpec};
use crate::probe::MaxReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

pub const SEED_ENV: &str = "INVMEAN_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evaluate one catalog mean (`--mean`) at `--vector`.
    MeanEval,
    /// Apply the mapping once.
    MapApply,
    /// Iterate the mapping `--steps` times and print the trace.
    MapIterate,
    /// Search sampled vectors for a failure of contractivity.
    ContractiveProbe,
    /// Smallest n with diam(M^n(v)) < diam(v).
    N0,
    /// Invariant mean K(v) by Gauss iteration.
    Invariant,
    /// max |K(M(v)) - K(v)| over samples.
    Residual,
    /// max |K1(v) - K2(v)| between two candidate invariant means.
    Uniqueness,
    /// Check F∘M = F and F = φ∘K on samples.
    Decompose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Human,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "invmean", version, about = "Invariant means of mean-type mappings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Mapping config file (TOML: p, domain, components).
    #[arg(long, global = true)]
    pub mapping: Option<PathBuf>,
    /// Comma-separated coordinates, e.g. `1,2` or `1e-3,2.5`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub vector: Option<String>,
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Upper bound for the n0 search.
    #[arg(long, global = true, default_value_t = DEFAULT_N0_CAP)]
    pub cap: usize,
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Human)]
    pub output: OutputFormat,
    /// Attach the iteration trace to `invariant` results.
    #[arg(long, global = true)]
    pub trace: bool,
    #[arg(long, global = true, default_value = "mid")]
    pub readout: String,
    /// Number of applications for `map-iterate`.
    #[arg(long, global = true, default_value_t = 10)]
    pub steps: usize,
    /// Catalog mean, e.g. `power:0.5`; used by mean-eval, residual and uniqueness.
    #[arg(long, global = true)]
    pub mean: Option<String>,
    /// Domain for `mean-eval` when no mapping is given, e.g. `(0, inf)`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Function expression for `decompose`, e.g. `product` or `square(invariant)`.
    #[arg(long, global = true)]
    pub function: Option<String>,
    /// Decomposition fixture file (overrides --mapping/--function).
    #[arg(long, global = true)]
    pub fixture: Option<PathBuf>,
}

/// Validated run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub mapping_file: Option<PathBuf>,
    pub vector: Option<Vec<f64>>,
    pub tol: f64,
    pub max_iter: usize,
    pub cap: usize,
    pub samples: usize,
    pub seed: u64,
    pub output: OutputFormat,
    pub trace: bool,
    pub readout: Readout,
    pub steps: usize,
    pub mean: Option<String>,
    pub domain: Option<Interval>,
    pub function: Option<String>,
    pub fixture: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            mapping_file: None,
            vector: None,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            cap: DEFAULT_N0_CAP,
            samples: 1000,
            seed: 42,
            output: OutputFormat::Human,
            trace: false,
            readout: Readout::Mid,
            steps: 10,
            mean: None,
            domain: None,
            function: None,
            fixture: None,
        }
    }
}

impl TryFrom<Cli> for RunConfig {
    type Error = Error;

    fn try_from(cli: Cli) -> Result<Self> {
        Ok(Self {
            command: cli.command,
            mapping_file: cli.mapping,
            vector: cli.vector.as_deref().map(parse_vector).transpose()?,
            tol: cli.tol,
            max_iter: cli.max_iter,
            cap: cli.cap,
            samples: cli.samples,
            seed: cli.seed,
            output: cli.output,
            trace: cli.trace,
            readout: cli.readout.parse()?,
            steps: cli.steps,
            mean: cli.mean,
            domain: cli.domain.as_deref().map(str::parse).transpose()?,
            function: cli.function,
            fixture: cli.fixture,
        })
    }
}

/// Parses `1,2.5,-3e-2`.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidArgument {
                    field: "vector",
                    reason: format!("`{t}` is not a finite decimal number"),
                })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl RunOutcome {
    fn done(code: i32, stdout: String) -> Self {
        Self {
            code,
            stdout,
            stderr: String::new(),
        }
    }
}

/// Runs one command. Never panics on bad input; errors become exit code 1.
pub fn run(config: &RunConfig) -> RunOutcome {
    match dispatch(config) {
        Ok(outcome) => outcome,
        Err(e) => RunOutcome {
            code: EXIT_ERROR,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

/// Parses `args` (including the program name) and runs.
pub fn run_from_args<I, T>(args: I) -> RunOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => match RunConfig::try_from(cli) {
            Ok(config) => run(&config),
            Err(e) => RunOutcome {
                code: EXIT_ERROR,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            },
        },
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                RunOutcome::done(code, text)
            } else {
                RunOutcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            }
        }
    }
}

fn require_mapping(config: &RunConfig) -> Result<MeanTypeMapping> {
    let path = config.mapping_file.as_ref().ok_or(Error::InvalidArgument {
        field: "mapping",
        reason: "this command needs --mapping <file>".into(),
    })?;
    load_mapping(path)
}

fn require_vector(config: &RunConfig, p: usize) -> Result<Vec<f64>> {
    let v = config.vector.clone().ok_or(Error::InvalidArgument {
        field: "vector",
        reason: "this command needs --vector".into(),
    })?;
    if v.len() != p {
        return Err(Error::InvalidArgument {
            field: "vector",
            reason: format!("expected {p} coordinates, got {}", v.len()),
        });
    }
    Ok(v)
}

fn gauss_options(config: &RunConfig) -> GaussOptions {
    GaussOptions::default()
        .with_tol(config.tol)
        .with_max_iter(config.max_iter)
        .with_readout(config.readout)
        .with_trace(config.trace)
}

fn render(config: &RunConfig, json_doc: Value, human: String) -> Result<String> {
    match config.output {
        OutputFormat::Human => Ok(human),
        OutputFormat::Json => Ok(format!("{}\n", serde_json::to_string_pretty(&json_doc).expect("json"))),
        OutputFormat::Csv => Err(Error::InvalidArgument {
            field: "output",
            reason: "csv output is only available for map-iterate and invariant".into(),
        }),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format_float(*x)).collect();
    format!("({})", parts.join(", "))
}

fn max_report_json(r: &MaxReport) -> Value {
    json!({
        "samples": r.samples,
        "max": r.max,
        "argmax": r.argmax.as_ref().map(|(i, v)| json!({ "sample": i, "v": v })),
        "errors": r.errors.len(),
    })
}

fn dispatch(config: &RunConfig) -> Result<RunOutcome> {
    match config.command {
        Command::MeanEval => mean_eval(config),
        Command::MapApply => {
            let m = require_mapping(config)?;
            let v = require_vector(config, m.p())?;
            let image = m.apply(&v)?;
            let doc = json!({ "mapping": m.name(), "v": v, "result": image });
            Ok(RunOutcome::done(EXIT_OK, render(config, doc, format!("{}\n", fmt_vec(&image)))?))
        }
        Command::MapIterate => {
            let m = require_mapping(config)?;
            let v = require_vector(config, m.p())?;
            let trace = m.iterate(&v, config.steps)?;
            let text = match config.output {
                OutputFormat::Csv => trace.to_csv()?,
                OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(&trace.to_json()).expect("json")),
                OutputFormat::Human => trace
                    .steps
                    .iter()
                    .enumerate()
                    .map(|(k, s)| format!("{k}\t{}\tdiameter {}\n", fmt_vec(&s.vector), format_float(s.diameter)))
                    .collect(),
            };
            Ok(RunOutcome::done(EXIT_OK, text))
        }
        Command::ContractiveProbe => {
            let m = require_mapping(config)?;
            let report = m.probe_contractivity(config.samples, config.seed)?;
            let code = if report.witness.is_some() { EXIT_NEGATIVE } else { EXIT_OK };
            let human = match &report.witness {
                None => format!(
                    "no counterexample found ({} samples checked, {} near-constant skipped, {} errors)\n",
                    report.checked,
                    report.skipped_near_constant,
                    report.errors.len()
                ),
                Some(w) => format!(
                    "counterexample v = {}: diameter {} -> {}\n",
                    fmt_vec(&w.v),
                    format_float(w.diameter_before),
                    format_float(w.diameter_after)
                ),
            };
            let doc = serde_json::to_value(&report).expect("json");
            Ok(RunOutcome::done(code, render(config, doc, human)?))
        }
        Command::N0 => {
            let m = require_mapping(config)?;
            let v = require_vector(config, m.p())?;
            match m.find_n0(&v, config.cap) {
                Ok(n) => {
                    let doc = json!({ "mapping": m.name(), "v": v, "cap": config.cap, "n0": n });
                    Ok(RunOutcome::done(EXIT_OK, render(config, doc, format!("{n}\n"))?))
                }
                Err(Error::NotFoundWithinCap { cap, trace }) => {
                    let doc = json!({
                        "mapping": m.name(), "v": v, "cap": cap, "n0": Value::Null,
                        "final_diameter": trace.last().diameter,
                    });
                    let human = format!(
                        "not found within cap {cap} (diameter stayed at {})\n",
                        format_float(trace.last().diameter)
                    );
                    Ok(RunOutcome::done(EXIT_NEGATIVE, render(config, doc, human)?))
                }
                Err(e) => Err(e),
            }
        }
        Command::Invariant => invariant(config),
        Command::Residual => {
            let m = require_mapping(config)?;
            let k = candidate_mean(config, &m, config.readout)?;
            let report = invariance_residual(k.as_ref(), &m, config.samples, config.seed)?;
            let threshold = 2.0 * config.tol;
            let code = if report.max > threshold { EXIT_NEGATIVE } else { EXIT_OK };
            let doc = json!({
                "mapping": m.name(),
                "mean": config.mean.clone().unwrap_or_else(|| "invariant".into()),
                "residual": max_report_json(&report),
                "threshold": threshold,
            });
            let human = format!("residual {:e} over {} samples\n", report.max, report.evaluated());
            Ok(RunOutcome::done(code, render(config, doc, human)?))
        }
        Command::Uniqueness => {
            let m = require_mapping(config)?;
            let k1 = InvariantMean::new(m.clone(), gauss_options(config).with_readout(Readout::Mid))?;
            let (label, k2): (String, Box<dyn Mean>) = match &config.mean {
                Some(text) => (text.clone(), Box::new(CatalogMean::new(MeanSpec::parse(text, m.p())?, *m.domain()))),
                None => {
                    let readout = if config.readout == Readout::Mid {
                        Readout::Min
                    } else {
                        config.readout
                    };
                    (format!("invariant/{readout}"), Box::new(k1.with_readout(readout)))
                }
            };
            let report = uniqueness_probe(&k1, k2.as_ref(), m.domain(), m.p(), config.samples, config.seed)?;
            let threshold = 2.0 * config.tol;
            let code = if report.max > threshold { EXIT_NEGATIVE } else { EXIT_OK };
            let doc = json!({
                "mapping": m.name(),
                "k1": "invariant/mid",
                "k2": label,
                "difference": max_report_json(&report),
                "threshold": threshold,
            });
            let human = format!("max |K1 - K2| = {:e} over {} samples\n", report.max, report.evaluated());
            Ok(RunOutcome::done(code, render(config, doc, human)?))
        }
        Command::Decompose => decompose(config),
    }
}

fn candidate_mean(config: &RunConfig, m: &MeanTypeMapping, readout: Readout) -> Result<Box<dyn Mean>> {
    Ok(match &config.mean {
        Some(text) => Box::new(CatalogMean::new(MeanSpec::parse(text, m.p())?, *m.domain())),
        None => Box::new(InvariantMean::new(m.clone(), gauss_options(config).with_readout(readout))?),
    })
}

fn mean_eval(config: &RunConfig) -> Result<RunOutcome> {
    let text = config.mean.as_ref().ok_or(Error::InvalidArgument {
        field: "mean",
        reason: "mean-eval needs --mean <spec>".into(),
    })?;
    let v = config.vector.clone().ok_or(Error::InvalidArgument {
        field: "vector",
        reason: "mean-eval needs --vector".into(),
    })?;
    let domain = match (&config.mapping_file, config.domain) {
        (Some(path), _) => *load_mapping(path)?.domain(),
        (None, Some(d)) => d,
        (None, None) => Interval::reals(),
    };
    let spec = MeanSpec::parse(text, v.len())?;
    let value = eval_mean(&spec, &v, &domain)?;
    let doc = json!({ "mean": spec.to_string(), "v": v, "domain": domain.to_string(), "value": value });
    Ok(RunOutcome::done(EXIT_OK, render(config, doc, format!("{}\n", format_float(value)))?))
}

fn invariant(config: &RunConfig) -> Result<RunOutcome> {
    let m = require_mapping(config)?;
    let v = require_vector(config, m.p())?;
    let mut options = gauss_options(config);
    if config.output == OutputFormat::Csv {
        options.keep_trace = true;
    }
    let est = gauss_iterate(&m, &v, &options)?;
    let code = if est.converged() { EXIT_OK } else { EXIT_NEGATIVE };
    if config.output == OutputFormat::Csv {
        let trace = est.trace.as_ref().expect("trace kept for csv");
        return Ok(RunOutcome::done(code, trace.to_csv()?));
    }
    let mut doc = json!({
        "mapping": m.name(),
        "v": v,
        "tol": config.tol,
        "max_iter": config.max_iter,
        "value": est.value,
        "steps": est.steps,
        "final_diameter": est.final_diameter,
        "status": est.status.to_string(),
    });
    if config.trace {
        if let Some(trace) = &est.trace {
            doc["trace"] = trace.to_json();
        }
    }
    let human = format!(
        "value {}\nsteps {}\nfinal_diameter {:e}\nstatus {}\n",
        format_float(est.value),
        est.steps,
        est.final_diameter,
        est.status
    );
    Ok(RunOutcome::done(code, render(config, doc, human)?))
}

fn decompose(config: &RunConfig) -> Result<RunOutcome> {
    let (name, function, mapping, lipschitz) = match &config.fixture {
        Some(path) => {
            let f = DecompositionFixture::load(path)?;
            (f.name, f.function, f.mapping, f.lipschitz)
        }
        None => {
            let m = require_mapping(config)?;
            let function = config.function.clone().ok_or(Error::InvalidArgument {
                field: "function",
                reason: "decompose needs --function <expr> or --fixture <file>".into(),
            })?;
            (function.clone(), function, m, None)
        }
    };
    let options = gauss_options(config).with_trace(false);
    let f = InvariantFunction::parse(&function, &mapping, options)?;
    let report = verify_decomposition(&name, &f, &mapping, &options, config.samples, config.seed)?;
    let negative = report.hypothesis_violated() || report.max_iter_reached > 0;
    let code = if negative { EXIT_NEGATIVE } else { EXIT_OK };
    let mut doc = serde_json::to_value(&report).expect("json");
    if let Some(l) = lipschitz {
        doc["lipschitz"] = json!(l);
    }
    let mut human = format!(
        "fixture {}\ninvariance_residual {:e}\ndecomposition_residual {:e}\nK steps min {} max {} mean {:.2}\n",
        report.fixture,
        report.invariance_residual,
        report.decomposition_residual,
        report.k_steps.min,
        report.k_steps.max,
        report.k_steps.mean
    );
    for w in &report.warnings {
        human.push_str(&format!("warning: {w}\n"));
    }
    Ok(RunOutcome::done(code, render(config, doc, human)?))
}
