// Load a mapping config and export an iteration trace as CSV and JSON.
//
// cargo run --example trace_export [path/to/mapping.toml] [v1,v2,...]

use invariant_means::cli::parse_vector;
use invariant_means::{load_mapping, Result};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/shift3.toml").to_string());
    let m = load_mapping(&path)?;
    let v = match args.next() {
        Some(text) => parse_vector(&text)?,
        None => (0..m.p()).map(|i| (i % 2) as f64).collect(),
    };
    let trace = m.iterate(&v, 8)?;
    print!("{}", trace.to_csv()?);
    println!("{}", serde_json::to_string(&trace.to_json()).expect("json"));
    Ok(())
}
