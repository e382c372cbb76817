// Invariant functions factor through the invariant mean: F = φ ∘ K with
// φ(x) = F(x, ..., x).
//
// cargo run --example functional_equation

use invariant_means::{
    diagonal_restriction, verify_decomposition, GaussOptions, InvariantFunction, MeanTypeMapping, Result,
};

fn main() -> Result<()> {
    let opts = GaussOptions::default();
    let cases = [
        (MeanTypeMapping::arithmetic_harmonic(), "product"),
        (MeanTypeMapping::arithmetic_harmonic(), "log(sum)"),
        (MeanTypeMapping::agm(), "square(invariant)"),
        (MeanTypeMapping::shift_average(3)?, "affine:3,-1(invariant)"),
        (MeanTypeMapping::agm(), "coord:1"),
    ];
    for (m, text) in cases {
        let f = InvariantFunction::parse(text, &m, opts)?;
        let phi = diagonal_restriction(&f);
        let report = verify_decomposition(text, &f, &m, &opts, 200, 42)?;
        println!(
            "{:<24} under {:<20} φ(2) = {:<8.4} invariance {:.1e}  decomposition {:.1e}",
            text,
            m.name(),
            phi.eval(2.0)?,
            report.invariance_residual,
            report.decomposition_residual
        );
        for w in &report.warnings {
            println!("    warning: {w}");
        }
    }
    Ok(())
}
