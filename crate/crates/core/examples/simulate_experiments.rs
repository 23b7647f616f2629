// Run both bundled experiment configs for n = 3..6 and print the error
// tables.
//
//     cargo run --release --example simulate_experiments

use ntcwla::config::{load_json, SimConfigDoc};
use ntcwla::simulator::{run_batch, ErrorSummary};
use std::error::Error;

type Row = (String, Option<usize>, ErrorSummary);

pub fn run_example() -> Result<Vec<Row>, Box<dyn Error>> {
    let mut rows = Vec::new();
    for name in ["experiment1", "experiment2"] {
        let path = format!("{}/configs/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let doc: SimConfigDoc = load_json(&path, &[])?;
        let configs = doc.to_configs()?;
        println!("{name}");
        println!(
            "{:>5} {:>6} {:>9} {:>9} {:>9} {:>8}",
            "n", "steps", "mean", "rmse", "max", "skipped"
        );
        for (cfg, outcome) in configs.iter().zip(run_batch(&configs)) {
            let outcome = outcome?;
            let s = outcome.summary;
            println!(
                "{:>5} {:>6} {:>9.3} {:>9.3} {:>9.3} {:>8}",
                cfg.n_cap.map_or("all".into(), |n| n.to_string()),
                outcome.steps.len(),
                s.mean_cm,
                s.rmse_cm,
                s.max_cm,
                s.skipped
            );
            rows.push((name.to_string(), cfg.n_cap, s));
        }
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
