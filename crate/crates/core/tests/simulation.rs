use ntcwla::geometry::Point2D;
use ntcwla::pipeline::BeaconId;
use ntcwla::simulator::{generate_rssi, run_batch, run_trace, ChannelModel, SimConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quiet_five_beacons() -> SimConfig {
    let mut cfg = SimConfig::grid_experiment(0);
    cfg.beacons = [
        (0.0, 50.0),
        (50.0, 0.0),
        (100.0, 50.0),
        (50.0, 100.0),
        (0.0, 100.0),
    ]
    .into_iter()
    .enumerate()
    .map(|(i, (x, y))| (BeaconId(i as u32 + 1), Point2D::new(x, y)))
    .collect();
    cfg.channel.noise_std_dbm = 0.0;
    cfg.channel.zeta_std_dbm = 0.0;
    cfg
}

#[test]
fn channel_hand_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let ch = ChannelModel {
        d0_cm: 10.0,
        p_d0_dbm: -20.0,
        eta: 2.0,
        zeta_mean_dbm: 0.0,
        zeta_std_dbm: 0.0,
        noise_std_dbm: 0.0,
    };
    assert_eq!(generate_rssi(10.0, &ch, &mut rng).unwrap(), -20.0);
    assert!((generate_rssi(100.0, &ch, &mut rng).unwrap() + 40.0).abs() < 1e-12);
    assert!(generate_rssi(0.0, &ch, &mut rng).is_err());
}

#[test]
fn zero_noise_every_step_exact() {
    let out = run_trace(&quiet_five_beacons()).unwrap();
    assert!(!out.steps.is_empty());
    for s in &out.steps {
        let e = s.error_cm.expect("every step localizes");
        assert!(e < 1e-3, "t={} error {e}", s.time_s);
    }
}

#[test]
fn batch_matches_sequential() {
    let configs: Vec<SimConfig> = (0..6)
        .map(|seed| {
            let mut c = SimConfig::grid_experiment(seed);
            c.n_cap = Some(3 + seed as usize % 4);
            c
        })
        .collect();
    let batch = run_batch(&configs);
    for (cfg, b) in configs.iter().zip(batch) {
        assert_eq!(run_trace(cfg).unwrap(), b.unwrap());
    }
}

#[test]
fn more_noise_more_error() {
    let mean_at = |sigma: f64| -> Vec<f64> {
        let configs: Vec<SimConfig> = (0..100)
            .map(|seed| {
                let mut c = SimConfig::grid_experiment(seed);
                c.channel.noise_std_dbm = sigma;
                c.n_cap = Some(5);
                c
            })
            .collect();
        run_batch(&configs)
            .into_iter()
            .map(|r| r.unwrap().summary.mean_cm)
            .collect()
    };
    let (low, high) = (mean_at(1.0), mean_at(4.0));
    let violations = low.iter().zip(&high).filter(|(l, h)| h < l).count();
    assert!(
        violations <= 5,
        "{violations} of 100 seeds had less error at 4 dB"
    );
}

#[test]
fn ann_respects_cap() {
    for cap in 3..=6 {
        let mut cfg = SimConfig::grid_experiment(9);
        cfg.channel.noise_std_dbm = 1.0;
        cfg.n_cap = Some(cap);
        let out = run_trace(&cfg).unwrap();
        assert!(out.steps.iter().all(|s| s.ann <= cap));
        let at_cap = out.steps.iter().filter(|s| s.ann == cap).count();
        assert!(
            at_cap as f64 >= 0.9 * out.steps.len() as f64,
            "cap {cap}: {at_cap}/{}",
            out.steps.len()
        );
    }
}

#[test]
fn square_trace_runs_all_caps() {
    let mut cfg = SimConfig::grid_experiment(3);
    cfg.trace.kind = ntcwla::simulator::TraceKind::SquarePerimeter {
        min: Point2D::new(20.0, 20.0),
        max: Point2D::new(80.0, 80.0),
    };
    let configs: Vec<SimConfig> = (3..=6)
        .map(|n| SimConfig {
            n_cap: Some(n),
            ..cfg.clone()
        })
        .collect();
    for r in run_batch(&configs) {
        let out = r.unwrap();
        assert!(out.summary.localized > 0);
        assert!(out.summary.mean_cm.is_finite());
    }
}
