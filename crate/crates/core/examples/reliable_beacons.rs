// Feed packets into the per-beacon history and pick the reliable beacons.
//
//     cargo run --example reliable_beacons

use ntcwla::calibration::PathLossParams;
use ntcwla::pipeline::{
    current_rssi, history_weights, select_reliable, BeaconId, PipelineConfig, ReliableBeacon,
    RssiHistoryStore,
};
use std::error::Error;

pub fn run_example() -> Result<Vec<ReliableBeacon>, Box<dyn Error>> {
    let cfg = PipelineConfig {
        max_reliable: Some(3),
        ..PipelineConfig::default()
    };
    let params = PathLossParams::new(-11.355, 7.163)?;
    let ids: Vec<BeaconId> = (1..=5).map(BeaconId).collect();
    let mut store = RssiHistoryStore::new(ids.iter().copied(), &cfg)?;

    println!(
        "history weights for rpn {}: {:?}",
        cfg.rpn,
        history_weights(cfg.rpn)
    );

    // beacon 5 is too weak to ever be stored, beacon 4 never fills its history
    let readings: [(u32, [f64; 5]); 5] = [
        (1, [-41.0, -42.0, -40.5, -43.0, -41.5]),
        (2, [-48.0, -47.0, -49.5, -46.0, -48.5]),
        (3, [-52.0, -53.5, -50.0, -51.0, -54.0]),
        (4, [-38.0, -75.0, -39.0, -80.0, -37.5]),
        (5, [-72.0, -71.0, -73.0, -74.0, -71.5]),
    ];
    for round in 0..5 {
        for (id, values) in &readings {
            store.ingest_packet(BeaconId(*id), values[round])?;
        }
    }
    for id in &ids {
        let hist = store.history(*id)?;
        let current = if store.is_full(*id)? {
            format!("{:.3} dBm", current_rssi(&hist, cfg.rpn)?)
        } else {
            "history not full".into()
        };
        println!("beacon {id}: {hist:?} -> {current}");
    }

    let reliable = select_reliable(&store, &params, &cfg);
    for b in &reliable {
        println!(
            "reliable {}: rssi {:.2} dBm, distance {:.1} cm",
            b.id, b.current_rssi_dbm, b.measured_distance_cm
        );
    }
    Ok(reliable)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
