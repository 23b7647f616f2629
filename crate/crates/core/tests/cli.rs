use ntcwla::calibration::{calibrate, read_calibration_csv, rssi_to_distance, PathLossParams};
use ntcwla::cli::main_with_args;
use ntcwla::config::{load_json, SimConfigDoc};
use ntcwla::geometry::{Point2D, TestArea};
use ntcwla::io::{read_period_lines, read_steps_csv};
use ntcwla::localizer::{localize, LocalizerConfig};
use ntcwla::pipeline::{history_weights, BeaconId, ReliableBeacon};
use ntcwla::simulator::run_trace;
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

const MANIFEST: &str = env!("CARGO_MANIFEST_DIR");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn ntcwla(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with_args(
        std::iter::once("ntcwla").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn bundled(rel: &str) -> PathBuf {
    Path::new(MANIFEST).join(rel)
}

#[test]
fn calibrate_recovers_noiseless_line() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cal.csv");
    let (p1, p2) = (-11.355, 7.163);
    let mut text = String::from("distance_cm,rssi_dbm\n");
    for i in 0..12 {
        let d = 10.0 * 1.25f64.powi(i);
        for _ in 0..3 {
            text.push_str(&format!("{d},{}\n", p1 * d.ln() + p2));
        }
    }
    fs::write(&csv, text).unwrap();
    let out = dir.path().join("params.json");
    let r = ntcwla(&["calibrate", "--csv", s(&csv), "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!((v["p1"].as_f64().unwrap() - p1).abs() < 1e-6);
    assert!((v["p2"].as_f64().unwrap() - p2).abs() < 1e-6);
}

#[test]
fn calibrate_averages_distinct_extremes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cal.csv");
    let ys = [
        -29.0, -28.9, -31.5, -34.7, -37.3, -39.3, -41.1, -42.6, -35.9,
    ];
    let mut text = String::from("distance_cm,rssi_dbm\n");
    for (i, y) in ys.iter().enumerate() {
        text.push_str(&format!("{},{y}\n", 10 * (i + 1)));
    }
    fs::write(&csv, &text).unwrap();
    let out = dir.path().join("params.json");
    let r = ntcwla(&["calibrate", "--csv", s(&csv), "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);

    // exhaustive scan over the candidate table
    let report = calibrate(
        &read_calibration_csv(text.as_bytes(), -70.0)
            .unwrap()
            .samples,
    )
    .unwrap();
    let c = &report.candidates;
    let j = (0..c.len())
        .min_by(|&a, &b| c[a].p1.total_cmp(&c[b].p1))
        .unwrap();
    let m = (0..c.len())
        .max_by(|&a, &b| c[a].p2.total_cmp(&c[b].p2).then(b.cmp(&a)))
        .unwrap();
    assert_ne!(j, m);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["p1"].as_f64().unwrap(), (c[j].p1 + c[m].p1) / 2.0);
    assert_eq!(v["p2"].as_f64().unwrap(), (c[j].p2 + c[m].p2) / 2.0);
    assert_eq!(v["smooth_p1"].as_u64().unwrap() as usize, c[j].smooth);
    assert_eq!(v["smooth_p2"].as_u64().unwrap() as usize, c[m].smooth);
}

#[test]
fn calibrate_table_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("params.json");
    let r = ntcwla(&[
        "calibrate",
        "--csv",
        s(&bundled("data/calibration.csv")),
        "--out",
        s(&out),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("actual(cm)"));
    assert!(r.stdout.contains("smooth=1"));
    assert!(r.stdout.contains("measured error (cm)"));
    for d in ["10.00", "150.00"] {
        assert!(
            r.stdout.lines().any(|l| l.trim_start().starts_with(d)),
            "{d}"
        );
    }
}

#[test]
fn calibrate_errors_name_line() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    fs::write(&csv, "distance_cm,rssi_dbm\n10,-20\n20,loud\n").unwrap();
    let r = ntcwla(&[
        "calibrate",
        "--csv",
        s(&csv),
        "--out",
        s(&dir.path().join("p.json")),
    ]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("line 3"), "{}", r.stderr);

    let r = ntcwla(&[
        "calibrate",
        "--csv",
        "/nonexistent.csv",
        "--out",
        "/tmp/x.json",
    ]);
    assert_eq!(r.code, 1);
}

fn simulate(config: &Path, out: &Path, extra: &[&str]) -> Run {
    let mut args = vec!["simulate", "--config", s(config), "--out-dir", s(out)];
    args.extend_from_slice(extra);
    ntcwla(&args)
}

#[test]
fn bundled_experiments_give_four_runs() {
    for name in ["experiment1", "experiment2"] {
        let dir = tempfile::tempdir().unwrap();
        let r = simulate(&bundled(&format!("configs/{name}.json")), dir.path(), &[]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
                .unwrap();
        let runs = summary["runs"].as_array().unwrap();
        let caps: Vec<u64> = runs.iter().map(|r| r["n_cap"].as_u64().unwrap()).collect();
        assert_eq!(caps, vec![3, 4, 5, 6]);
        for run in runs {
            assert!(run["summary"]["mean_cm"].as_f64().unwrap() > 0.0);
            assert!(dir
                .path()
                .join(run["steps_file"].as_str().unwrap())
                .exists());
        }
    }
}

#[test]
fn simulate_same_seed_same_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = bundled("configs/experiment1.json");
    assert_eq!(simulate(&cfg, a.path(), &["--seed", "1"]).code, 0);
    assert_eq!(simulate(&cfg, b.path(), &["--seed", "1"]).code, 0);
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 9);
    for n in names {
        assert_eq!(
            fs::read(a.path().join(&n)).unwrap(),
            fs::read(b.path().join(&n)).unwrap(),
            "{n:?}"
        );
    }

    let c = tempfile::tempdir().unwrap();
    assert_eq!(simulate(&cfg, c.path(), &["--seed", "2"]).code, 0);
    assert_ne!(
        fs::read(a.path().join("steps_n5.csv")).unwrap(),
        fs::read(c.path().join("steps_n5.csv")).unwrap()
    );
}

#[test]
fn steps_csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = bundled("configs/experiment2.json");
    assert_eq!(
        simulate(&cfg_path, dir.path(), &["--set", "n_cap_sweep=[4]"]).code,
        0
    );
    let doc: SimConfigDoc = load_json(&cfg_path, &["n_cap_sweep=[4]".into()]).unwrap();
    let expected = run_trace(&doc.to_configs().unwrap()[0]).unwrap();
    let back = read_steps_csv(fs::File::open(dir.path().join("steps_n4.csv")).unwrap()).unwrap();
    assert_eq!(back, expected.steps);

    let r = ntcwla(&["report", "--input", s(&dir.path().join("steps_n4.csv"))]);
    assert_eq!(r.code, 0);
    assert!(r
        .stdout
        .contains(&format!("mean_cm {:.3}", expected.summary.mean_cm)));
    let r = ntcwla(&["report", "--input", s(&dir.path().join("summary.json"))]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("experiment2"));
}

#[test]
fn simulate_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled("configs/experiment1.json");
    let r = simulate(&cfg, dir.path(), &["--set", "trace.speed_cm_per_s=-3"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("trace.speed_cm_per_s"), "{}", r.stderr);
    let r = simulate(&cfg, dir.path(), &["--set", "pipeline.rpn=\"five\""]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("pipeline.rpn"), "{}", r.stderr);
    let r = simulate(&cfg, dir.path(), &["--set", "oops"]);
    assert_eq!(r.code, 1);
    let r = simulate(Path::new("/nonexistent.json"), dir.path(), &[]);
    assert_eq!(r.code, 1);
}

#[test]
fn simulate_runtime_error_code() {
    let dir = tempfile::tempdir().unwrap();
    // every reading falls below the storage threshold
    let r = simulate(
        &bundled("configs/experiment1.json"),
        dir.path(),
        &["--set", "pipeline.mr=10", "--set", "pipeline.rr=20"],
    );
    assert_eq!(r.code, 2, "{}", r.stderr);
}

const LAYOUT: &str = r#"{
  "position_unit": "cm",
  "beacons": [
    {"id": 1, "x": 0, "y": 0}, {"id": 2, "x": 100, "y": 0}, {"id": 3, "x": 100, "y": 100},
    {"id": 4, "x": 0, "y": 100}, {"id": 5, "x": 50, "y": 50}
  ],
  "area": {"min": [0, 0], "max": [100, 100]}
}"#;

struct ReplayFixture {
    dir: tempfile::TempDir,
}

impl ReplayFixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("layout.json"), LAYOUT).unwrap();
        fs::write(
            dir.path().join("params.json"),
            r#"{"p1": -11.355, "p2": 7.163}"#,
        )
        .unwrap();
        Self { dir }
    }

    fn run(&self, packets: &str) -> (Run, PathBuf) {
        let p = self.dir.path();
        fs::write(p.join("packets.csv"), packets).unwrap();
        let out = p.join("out.jsonl");
        let _ = fs::remove_file(&out);
        let r = ntcwla(&[
            "replay",
            "--packets",
            s(&p.join("packets.csv")),
            "--params",
            s(&p.join("params.json")),
            "--config",
            s(&p.join("layout.json")),
            "--out",
            s(&out),
        ]);
        (r, out)
    }
}

#[test]
fn replay_one_period_matches_manual_pipeline() {
    let fx = ReplayFixture::new();
    let readings: [[f64; 5]; 5] = [
        [-41.2, -40.8, -42.0, -41.5, -40.9],
        [-47.3, -46.8, -48.1, -47.7, -47.0],
        [-50.2, -51.0, -49.8, -50.6, -50.1],
        [-45.5, -44.9, -46.2, -45.0, -45.8],
        [-30.1, -29.5, -30.8, -30.0, -29.9],
    ];
    let mut text = String::from("seq,beacon_id,rssi_dbm\n");
    let mut seq = 0;
    for k in 0..5 {
        for (b, row) in readings.iter().enumerate() {
            seq += 1;
            text.push_str(&format!("{seq},{},{}\n", b + 1, row[k]));
        }
    }
    text.push_str(&format!("{},PERIOD,-\n", seq + 1));
    let (r, out) = fx.run(&text);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines = read_period_lines(std::io::BufReader::new(fs::File::open(&out).unwrap())).unwrap();
    assert_eq!(lines.len(), 1);

    // the same rows pushed through the pipeline by hand
    let params = PathLossParams::new(-11.355, 7.163).unwrap();
    let w = history_weights(5);
    let positions: HashMap<BeaconId, Point2D> = [
        (0.0, 0.0),
        (100.0, 0.0),
        (100.0, 100.0),
        (0.0, 100.0),
        (50.0, 50.0),
    ]
    .iter()
    .enumerate()
    .map(|(i, &(x, y))| (BeaconId(i as u32 + 1), Point2D::new(x, y)))
    .collect();
    let reliable: Vec<ReliableBeacon> = readings
        .iter()
        .enumerate()
        .map(|(b, row)| {
            let current: f64 = row.iter().zip(&w).map(|(v, w)| v * w).sum();
            ReliableBeacon {
                id: BeaconId(b as u32 + 1),
                measured_distance_cm: rssi_to_distance(&params, current),
                current_rssi_dbm: current,
            }
        })
        .collect();
    let area = TestArea::new(Point2D::new(0.0, 0.0), Point2D::new(100.0, 100.0)).unwrap();
    let expected = localize(&reliable, &positions, &area, &LocalizerConfig::default()).unwrap();
    let [x, y] = lines[0].estimate.unwrap();
    assert!((x - expected.estimate.x).abs() < 1e-9 && (y - expected.estimate.y).abs() < 1e-9);
    assert_eq!(lines[0].n_triples, 10);
    assert_eq!(lines[0].beacons, vec![1, 2, 3, 4, 5]);

    let r = ntcwla(&["report", "--input", s(&out)]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("localized 1"));
}

#[test]
fn replay_skips_thin_periods() {
    let fx = ReplayFixture::new();
    let mut text = String::new();
    for seq in 1..=10 {
        text.push_str(&format!("{seq},{},-40\n", 1 + seq % 2));
    }
    text.push_str("11,PERIOD,-\n");
    let (r, out) = fx.run(&text);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines = read_period_lines(std::io::BufReader::new(fs::File::open(&out).unwrap())).unwrap();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].estimate.is_none());
    assert!(lines[0].skipped.is_some());
}

#[test]
fn replay_rejects_bad_input() {
    let fx = ReplayFixture::new();
    let (r, _) = fx.run("");
    assert_eq!(r.code, 1);
    let (r, _) = fx.run("1,9,-40\n");
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("unknown beacon"), "{}", r.stderr);
    let (r, _) = fx.run("1,1,-40\n2,1\n");
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("line 2"), "{}", r.stderr);
}

#[test]
fn binary_runs() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_ntcwla"))
        .args(["report", "--input", "/nonexistent.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_ntcwla"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let help = String::from_utf8(out.stdout).unwrap();
    for cmd in ["calibrate", "simulate", "replay", "report"] {
        assert!(help.contains(cmd));
    }
}
