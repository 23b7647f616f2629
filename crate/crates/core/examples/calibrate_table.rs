// Fit the path-loss formula from the bundled calibration data and print the
// candidate table.
//
//     cargo run --example calibrate_table

use ntcwla::calibration::{calibrate, load_calibration_csv, CalibrationReport};
use std::error::Error;

pub fn run_example() -> Result<CalibrationReport, Box<dyn Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/calibration.csv");
    let loaded = load_calibration_csv(path, -70.0)?;
    println!(
        "{} samples, {} below the floor",
        loaded.samples.len(),
        loaded.dropped
    );
    let report = calibrate(&loaded.samples)?;
    print!("{}", report.render_table());
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
