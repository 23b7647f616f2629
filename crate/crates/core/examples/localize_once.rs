// Localize a node from five beacons with slightly wrong distances, showing
// every triple's reference coordinate and the effect of the 20 cm filter.
//
//     cargo run --example localize_once

use ntcwla::prelude::*;
use std::collections::HashMap;
use std::error::Error;

pub fn run_example() -> Result<LocalizationResult, Box<dyn Error>> {
    let truth = Point2D::new(35.0, 60.0);
    let area = TestArea::new(Point2D::new(0.0, 0.0), Point2D::new(100.0, 100.0))?;
    let beacons = [
        (1, Point2D::new(0.0, 0.0), 1.04),
        (2, Point2D::new(100.0, 0.0), 0.97),
        (3, Point2D::new(100.0, 100.0), 1.02),
        (4, Point2D::new(0.0, 100.0), 0.95),
        (5, Point2D::new(50.0, 50.0), 1.08),
    ];
    let mut positions = HashMap::new();
    let mut reliable = Vec::new();
    for (id, pos, scale) in beacons {
        positions.insert(BeaconId(id), pos);
        reliable.push(ReliableBeacon {
            id: BeaconId(id),
            measured_distance_cm: pos.distance(&truth) * scale,
            current_rssi_dbm: -40.0,
        });
    }

    let result = localize(&reliable, &positions, &area, &LocalizerConfig::default())?;
    for r in &result.references {
        println!(
            "triple {:?}: {:?} at {} (mr {:.1} cm)",
            r.triple.map(|b| b.0),
            r.class,
            r.point,
            r.mr_cm
        );
    }
    println!(
        "{} triples, {} references, {} kept by the filter",
        result.n_triples, result.n_references, result.n_after_filter
    );
    println!(
        "first pass {} -> estimate {}",
        result.first_pass, result.estimate
    );
    println!("error {:.2} cm", result.estimate.distance(&truth));
    Ok(result)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
