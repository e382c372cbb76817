//! Exit criteria. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any fails.

mod common;

use std::time::Instant;

use common::{agm_by_quadrature, fixture};
use invariant_means::cli::{run_from_args, EXIT_NEGATIVE};
use invariant_means::invariant::uniqueness_probe_with;
use invariant_means::decompose::{check_invariance_with, verify_decomposition_with};
use invariant_means::{
    diameter, gauss_iterate, invariant_mean, load_mapping, CatalogMean, Error, GaussOptions, Generator, Interval,
    InvariantFunction, InvariantMean, MeanKind, MeanSpec, MeanTypeMapping, Readout, SampleBox, Sampler, Status,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;
const TOL: f64 = 1e-12;
const MAX_ITER: usize = 10_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

/// 1. AGM(1, 2) against the elliptic-integral quadrature oracle, within 1e-10.
fn agm_oracle() -> Outcome {
    let est = gauss_iterate(&MeanTypeMapping::agm(), &[1.0, 2.0], &GaussOptions::default().with_tol(TOL)).map_err(err)?;
    let oracle = agm_by_quadrature(1.0, 2.0);
    let gap = (est.value - oracle).abs();
    check(
        est.status == Status::Converged && gap <= 1e-10,
        format!("value {:.17} oracle {oracle:.17} |diff| {gap:.1e} steps {}", est.value, est.steps),
    )
}

/// 2. K of arithmetic-harmonic equals sqrt(xy) within 1e-10 on 100 pairs in [0.5, 100]^2.
fn arithmetic_harmonic_identity() -> Outcome {
    let k = invariant_mean(&MeanTypeMapping::arithmetic_harmonic(), TOL, MAX_ITER).map_err(err)?;
    let pairs = Sampler::new(SampleBox::new(0.5, 100.0).map_err(err)?, 2, SEED).uniform_only().draw(100);
    let mut worst = 0.0f64;
    for v in &pairs {
        worst = worst.max((invariant_means::Mean::eval(&k, v).map_err(err)? - (v[0] * v[1]).sqrt()).abs());
    }
    check(worst <= 1e-10, format!("max |K - sqrt(xy)| = {worst:.1e} over {} pairs", pairs.len()))
}

fn random_kind(rng: &mut ChaCha8Rng, p: usize) -> MeanKind {
    match rng.random_range(0..13) {
        0 => MeanKind::Arithmetic,
        1 => MeanKind::Geometric,
        2 => MeanKind::Harmonic,
        3 => MeanKind::Power(rng.random_range(-5.0..5.0)),
        4 => MeanKind::QuasiArithmetic(Generator::Identity),
        5 => MeanKind::QuasiArithmetic(Generator::Log),
        6 => MeanKind::QuasiArithmetic(Generator::Exp),
        7 => MeanKind::QuasiArithmetic(Generator::Power(rng.random_range(0.2..4.0))),
        8 => MeanKind::Median,
        9 => MeanKind::Min,
        10 => MeanKind::Max,
        11 => MeanKind::Projection(rng.random_range(1..=p)),
        _ => {
            let raw: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let head: f64 = w[..p - 1].iter().sum();
            w[p - 1] = (1.0 - head).max(0.0);
            MeanKind::WeightedArithmetic(w)
        }
    }
}

/// 3. diameter(M(v)) <= diameter(v) + 1e-12 over 10^4 random (mapping, vector) pairs drawn from the whole catalog.
fn diameter_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut violations = 0;
    let mut kinds_seen = std::collections::BTreeSet::new();
    for _ in 0..10_000 {
        let p = rng.random_range(2..=5);
        let specs: Vec<MeanSpec> = (0..p)
            .map(|_| {
                let kind = random_kind(&mut rng, p);
                kinds_seen.insert(kind.to_string().split(':').next().unwrap().to_string());
                MeanSpec::new(kind, p)
            })
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let m = MeanTypeMapping::new("random", specs, Interval::positive()).map_err(err)?;
        let v: Vec<f64> = (0..p).map(|_| rng.random_range(0.01..100.0)).collect();
        let image = m.apply(&v).map_err(err)?;
        if diameter(&image).map_err(err)? > diameter(&v).map_err(err)? + 1e-12 {
            violations += 1;
        }
    }
    check(
        violations == 0 && kinds_seen.len() == 10,
        format!("{violations} violations over 10000 samples, {} catalog families exercised", kinds_seen.len()),
    )
}

/// 4. Readouts mid/min/max agree within 2 tol on a weakly contractive mapping;
///    invariant_mean(arithmetic-harmonic) matches the geometric mean within 1e-10.
fn uniqueness() -> Outcome {
    let shift = MeanTypeMapping::shift_average(3).map_err(err)?;
    let mid = InvariantMean::new(shift.clone(), GaussOptions::default().with_tol(TOL)).map_err(err)?;
    let sampler = Sampler::new(SampleBox::within(shift.domain()), 3, SEED);
    let mut readout_gap = 0.0f64;
    for r in [Readout::Min, Readout::Max] {
        let other = mid.with_readout(r);
        let report = uniqueness_probe_with(&mid, &other, &sampler, 100).map_err(err)?;
        if !report.errors.is_empty() {
            return Err(format!("{} evaluation errors", report.errors.len()));
        }
        readout_gap = readout_gap.max(report.max);
    }
    let ah = MeanTypeMapping::arithmetic_harmonic();
    let k = invariant_mean(&ah, TOL, MAX_ITER).map_err(err)?;
    let g = CatalogMean::new(MeanSpec::parse("geometric", 2).map_err(err)?, Interval::positive());
    let ah_sampler = Sampler::new(SampleBox::within(ah.domain()), 2, SEED);
    let closed_form_gap = uniqueness_probe_with(&k, &g, &ah_sampler, 100).map_err(err)?.max;
    check(
        readout_gap <= 2.0 * TOL && closed_form_gap <= 1e-10,
        format!("readout spread {readout_gap:.1e} (<= {:.0e}), |K_AH - G| {closed_form_gap:.1e}", 2.0 * TOL),
    )
}

/// 5. n0 of shift-average-3 at (0,1,0) is 2; n0 <= 10 on 100 nonconstant
///    samples; the mapping is not contractive at some sample.
fn weak_contractivity() -> Outcome {
    let m = MeanTypeMapping::shift_average(3).map_err(err)?;
    let pinned = m.find_n0(&[0.0, 1.0, 0.0], 10).map_err(err)?;
    let samples = Sampler::new(SampleBox::within(m.domain()), 3, SEED).draw(100);
    let mut worst_n0 = 0;
    let mut not_contractive = 0;
    for v in samples.iter().filter(|v| diameter(v).unwrap() > 0.0) {
        worst_n0 = worst_n0.max(m.find_n0(v, 10).map_err(err)?);
        if !m.is_contractive_at(v).map_err(err)? {
            not_contractive += 1;
        }
    }
    check(
        pinned == 2 && worst_n0 <= 10 && not_contractive >= 1,
        format!("n0(0,1,0) = {pinned}, max n0 = {worst_n0}, not contractive at {not_contractive}/100"),
    )
}

/// 6. M* strictly decreases the diameter wherever n0 is found; 10^3 samples.
fn star_contractivity() -> Outcome {
    let mut violations = 0;
    let mut succeeded = 0;
    for (m, seed) in [(MeanTypeMapping::shift_average(3), SEED), (MeanTypeMapping::shift_average(5), SEED + 1)] {
        let m = m.map_err(err)?;
        let samples = Sampler::new(SampleBox::within(m.domain()), m.p(), seed).draw(500);
        for v in &samples {
            if diameter(v).unwrap() == 0.0 {
                continue;
            }
            match m.star_apply(v, 1000) {
                Ok(w) => {
                    succeeded += 1;
                    if diameter(&w).unwrap() >= diameter(v).unwrap() {
                        violations += 1;
                    }
                }
                Err(Error::NotFoundWithinCap { .. }) => {}
                Err(e) => return Err(err(e)),
            }
        }
    }
    check(
        violations == 0 && succeeded > 0,
        format!("{violations} violations over 1000 samples ({succeeded} with n0 found)"),
    )
}

/// 7. F = xy under arithmetic-harmonic: invariance <= 1e-12 and
///    decomposition <= 1e-9 on 100 samples. F = x under AGM: invariance
///    >= 0.01 and the CLI exits with the negative-result code.
fn decomposition() -> Outcome {
    let ah = MeanTypeMapping::arithmetic_harmonic();
    let opts = GaussOptions::default().with_tol(TOL);
    let product = InvariantFunction::parse("product", &ah, opts).map_err(err)?;
    let sampler = Sampler::new(SampleBox::within(ah.domain()), 2, SEED);
    let report = verify_decomposition_with("product", &product, &ah, &opts, &sampler, 100).map_err(err)?;

    let agm = MeanTypeMapping::agm();
    let first = InvariantFunction::parse("coord:1", &agm, opts).map_err(err)?;
    let agm_sampler = Sampler::new(SampleBox::new(1.0, 10.0).map_err(err)?, 2, SEED);
    let non_invariant = check_invariance_with(&first, &agm, &agm_sampler, 100).map_err(err)?.max;

    let cli = run_from_args([
        "invmean",
        "decompose",
        "--mapping",
        fixture("agm.toml").to_str().unwrap(),
        "--function",
        "coord:1",
        "--samples",
        "100",
    ]);
    check(
        report.invariance_residual <= 1e-12
            && report.decomposition_residual <= 1e-9
            && report.errors.is_empty()
            && non_invariant >= 0.01
            && cli.code == EXIT_NEGATIVE,
        format!(
            "xy: invariance {:.1e}, decomposition {:.1e}; x under AGM: invariance {non_invariant:.3}, cli exit {}",
            report.invariance_residual, report.decomposition_residual, cli.code
        ),
    )
}

/// 8. Every weakly contractive fixture converges within 10^4 iterations at
///    tol 1e-12 from 100 seeded vectors; the projection fixture reports
///    max_iter_reached without error.
fn convergence() -> Outcome {
    let fixtures = [
        "agm.toml",
        "arithmetic-harmonic.toml",
        "shift3.toml",
        "shift4.toml",
        "agh3.toml",
        "power-pair.toml",
        "log-mean-exp.toml",
        "weighted-min.toml",
        "median-mix.toml",
    ];
    let opts = GaussOptions::default().with_tol(TOL).with_max_iter(MAX_ITER);
    let mut failures = Vec::new();
    let mut max_steps = 0;
    for name in fixtures {
        let m = load_mapping(fixture(name)).map_err(err)?;
        for v in Sampler::new(SampleBox::within(m.domain()), m.p(), SEED).draw(100) {
            let est = gauss_iterate(&m, &v, &opts).map_err(|e| format!("{name}: {e}"))?;
            max_steps = max_steps.max(est.steps);
            if est.status != Status::Converged {
                failures.push(name);
                break;
            }
        }
    }
    let proj = load_mapping(fixture("projections.toml")).map_err(err)?;
    let stuck = gauss_iterate(&proj, &[0.0, 1.0], &opts).map_err(err)?;
    check(
        failures.is_empty() && stuck.status == Status::MaxIterReached && stuck.trace.is_some(),
        format!(
            "{} fixtures x 100 vectors converged (max {max_steps} steps); not converged: {failures:?}; projections: {}",
            fixtures.len(),
            stuck.status
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 AGM elliptic-integral oracle", agm_oracle),
        ("2 arithmetic-harmonic = sqrt(xy)", arithmetic_harmonic_identity),
        ("3 diameter monotonicity", diameter_monotonicity),
        ("4 uniqueness of the invariant mean", uniqueness),
        ("5 weak contractivity / n0", weak_contractivity),
        ("6 M* contractivity", star_contractivity),
        ("7 F = phi o K decomposition", decomposition),
        ("8 convergence of Gauss iteration", convergence),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, criterion) in criteria {
        match criterion() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed in {:.2?}", criteria.len() - failed, criteria.len(), start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
