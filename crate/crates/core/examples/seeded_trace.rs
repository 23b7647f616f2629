// Simulate the default 3x3 grid experiment with a fixed seed and print a few
// steps of the trace.
//
//     cargo run --example seeded_trace

use ntcwla::simulator::{run_trace, SimConfig, SimOutcome};
use std::error::Error;

pub fn run_example() -> Result<SimOutcome, Box<dyn Error>> {
    let mut cfg = SimConfig::grid_experiment(42);
    cfg.n_cap = Some(5);
    let outcome = run_trace(&cfg)?;
    for s in outcome.steps.iter().step_by(5) {
        match s.estimate {
            Some(est) => println!(
                "t={:>5.1}s true {} est {} err {:.2} cm (ann {})",
                s.time_s,
                s.true_position,
                est,
                s.error_cm.unwrap_or_default(),
                s.ann
            ),
            None => println!("t={:>5.1}s true {} skipped", s.time_s, s.true_position),
        }
    }
    let s = outcome.summary;
    println!(
        "mean {:.2} cm, rmse {:.2} cm, max {:.2} cm",
        s.mean_cm, s.rmse_cm, s.max_cm
    );
    Ok(outcome)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
