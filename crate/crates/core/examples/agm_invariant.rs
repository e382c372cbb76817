// Gauss iteration for the arithmetic-geometric and arithmetic-harmonic means.
//
// cargo run --example agm_invariant

use invariant_means::{gauss_iterate, GaussOptions, MeanTypeMapping, Result};

fn main() -> Result<()> {
    let opts = GaussOptions::default().with_trace(true);

    let agm = MeanTypeMapping::agm();
    let est = gauss_iterate(&agm, &[1.0, 2.0], &opts)?;
    println!("{agm}");
    for (k, step) in est.trace.as_ref().expect("trace requested").steps.iter().enumerate() {
        println!("  step {k}: {:?}  diameter {:e}", step.vector, step.diameter);
    }
    println!("  AGM(1, 2) = {:.16} after {} steps ({})", est.value, est.steps, est.status);

    let ah = MeanTypeMapping::arithmetic_harmonic();
    let est = gauss_iterate(&ah, &[2.0, 8.0], &opts)?;
    println!("{ah}");
    println!("  K(2, 8) = {:.16}; sqrt(2 * 8) = 4", est.value);
    Ok(())
}
