// Replay a recorded packet log against a beacon layout.
//
//     cargo run --example replay_packets

use ntcwla::config::{load_json, LayoutDoc};
use ntcwla::io::{open, read_params_json, PeriodResultLine};
use ntcwla::replay::{parse_replay_csv, run_replay};
use std::error::Error;

pub fn run_example() -> Result<Vec<PeriodResultLine>, Box<dyn Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let layout = load_json::<LayoutDoc>(format!("{dir}/replay_layout.json"), &[])?.to_layout()?;
    let params = read_params_json(open(format!("{dir}/params.json"))?)?;
    let events = parse_replay_csv(open(format!("{dir}/packets.csv"))?)?;
    let lines = run_replay(&events, &layout, &params)?;
    for l in &lines {
        match (l.estimate, &l.skipped) {
            (Some([x, y]), _) => println!(
                "period {}: ({x:.1}, {y:.1}) from beacons {:?}",
                l.period, l.beacons
            ),
            (None, reason) => println!(
                "period {}: skipped, {}",
                l.period,
                reason.as_deref().unwrap_or("")
            ),
        }
    }
    Ok(lines)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
