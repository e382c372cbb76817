// Two routes to the same invariant mean: different readouts of the
// converged iterate, and a closed form.
//
// cargo run --example uniqueness

use invariant_means::{
    invariance_residual, invariant_mean, uniqueness_probe, CatalogMean, GaussOptions, InvariantMean, MeanSpec,
    MeanTypeMapping, Readout, Result,
};

fn main() -> Result<()> {
    let shift = MeanTypeMapping::shift_average(3)?;
    let mid = InvariantMean::new(shift.clone(), GaussOptions::default())?;
    for r in [Readout::Min, Readout::Max, Readout::First] {
        let report = uniqueness_probe(&mid, &mid.with_readout(r), shift.domain(), 3, 200, 42)?;
        println!("{}: max |K_mid - K_{r}| = {:e}", shift.name(), report.max);
    }

    let ah = MeanTypeMapping::arithmetic_harmonic();
    let k = invariant_mean(&ah, 1e-12, 10_000)?;
    let geometric = CatalogMean::new(MeanSpec::parse("geometric", 2)?, *ah.domain());
    let arithmetic = CatalogMean::new(MeanSpec::parse("arithmetic", 2)?, *ah.domain());
    println!("{}: max |K - G| = {:e}", ah.name(), uniqueness_probe(&k, &geometric, ah.domain(), 2, 200, 42)?.max);
    println!("  residual of K:          {:e}", invariance_residual(&k, &ah, 200, 42)?.max);
    println!("  residual of geometric:  {:e}", invariance_residual(&geometric, &ah, 200, 42)?.max);
    println!("  residual of arithmetic: {:e}", invariance_residual(&arithmetic, &ah, 200, 42)?.max);
    Ok(())
}
