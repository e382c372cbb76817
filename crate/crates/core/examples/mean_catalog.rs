// Evaluate catalog means from their text form and probe internality.
//
// cargo run --example mean_catalog

use invariant_means::{eval_mean, internality_probe, Interval, MeanSpec, Result};

fn main() -> Result<()> {
    let v = [2.0, 8.0];
    let domain = Interval::positive();
    for text in [
        "arithmetic",
        "geometric",
        "harmonic",
        "power:0",
        "power:2",
        "quasi:exp",
        "quasi:power:3",
        "median",
        "min",
        "max",
        "projection:2",
        "weighted:0.3,0.7",
    ] {
        let spec = MeanSpec::parse(text, v.len())?;
        println!("{text:>18}  M(2, 8) = {:.6}", eval_mean(&spec, &v, &domain)?);
    }

    let unit = Interval::closed(0.0, 1.0)?;
    for text in ["arithmetic", "median", "weighted:1,0,0", "harmonic"] {
        let spec = MeanSpec::parse(text, 3)?;
        let report = internality_probe(&spec, &unit, 1000, 42)?;
        println!(
            "internality of {text} on [0,1]^3: {} violations, {} samples outside the natural domain",
            report.violation_count(),
            report.errors.len()
        );
    }
    Ok(())
}
