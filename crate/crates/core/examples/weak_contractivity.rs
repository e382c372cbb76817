// A mapping that is weakly contractive but not contractive: n0(v), the
// derived mapping M*, and a sampled contractivity probe.
//
// cargo run --example weak_contractivity

use invariant_means::{ContractivityVerdict, MeanTypeMapping, Result};

fn main() -> Result<()> {
    let m = MeanTypeMapping::shift_average(3)?;
    let v = [0.0, 1.0, 0.0];
    println!("{m}");

    let trace = m.iterate(&v, 3)?;
    for (k, step) in trace.steps.iter().enumerate() {
        println!("  M^{k}(v) = {:?}  diameter {:.6}", step.vector, step.diameter);
    }
    println!("  contractive at v: {}", m.is_contractive_at(&v)?);
    println!("  n0(v) = {}", m.find_n0(&v, 1000)?);
    println!("  M*(v) = {:?}", m.star_apply(&v, 1000)?);

    match m.probe_contractivity(1000, 42)?.verdict() {
        ContractivityVerdict::Counterexample(w) => println!("  probe: not contractive at {w:?}"),
        ContractivityVerdict::NoCounterexampleFound => println!("  probe: no counterexample"),
    }

    let agm = MeanTypeMapping::agm();
    println!("{agm}: probe verdict {:?}", agm.probe_contractivity(1000, 42)?.verdict());
    Ok(())
}
