// Drive the localization period controller through a healthy stretch, a
// shortage and a recovery.
//
//     cargo run --example period_controller

use ntcwla::period::{PeriodCheck, PeriodConfig, PeriodController};
use std::error::Error;

pub fn run_example() -> Result<Vec<PeriodCheck>, Box<dyn Error>> {
    let mut controller = PeriodController::new(PeriodConfig::default())?;
    let phases = [
        ("healthy", 7usize, 30usize),
        ("shortage", 2, 20),
        ("mild", 4, 10),
        ("recovered", 8, 30),
    ];
    for (label, am, periods) in phases {
        for _ in 0..periods {
            if let Some(check) = controller.on_period(am) {
                println!(
                    "{label:>9} am={am}: check {} m={} n={} -> {} ms",
                    check.check_index, check.m_count, check.n_count, check.period_ms
                );
            }
        }
    }
    Ok(controller.checks().to_vec())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
