use ntcwla::geometry::{Point2D, TripleClass};

macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/",
                stringify!($name),
                ".rs"
            ));
        }
    };
}

example!(calibrate_table);
example!(reliable_beacons);
example!(geometry_cases);
example!(localize_once);
example!(period_controller);
example!(simulate_experiments);
example!(replay_packets);
example!(seeded_trace);

#[test]
fn calibrate_table_runs() {
    let report = calibrate_table::run_example().expect("calibrate_table");
    assert_eq!(report.bins.len(), 15);
    assert!(report.selected.p1 < 0.0);
    let c = report
        .candidates
        .iter()
        .find(|c| c.smooth == report.selected.smooth_p1)
        .unwrap();
    assert_eq!(c.p1, report.selected.p1);
}

#[test]
fn reliable_beacons_runs() {
    let reliable = reliable_beacons::run_example().expect("reliable_beacons");
    let ids: Vec<u32> = reliable.iter().map(|b| b.id.0).collect();
    assert_eq!(ids, vec![1, 2, 3]);
}

#[test]
fn geometry_cases_runs() {
    let cases = geometry_cases::run_example().expect("geometry_cases");
    let classes: Vec<TripleClass> = cases.iter().map(|c| c.0).collect();
    assert_eq!(
        classes,
        vec![
            TripleClass::CommonPoint,
            TripleClass::Region,
            TripleClass::Line,
            TripleClass::TwoOnly,
            TripleClass::NoIntersection
        ]
    );
    assert_eq!(cases[0].1, Some(Point2D::new(1.0, 0.0)));
}

#[test]
fn localize_once_runs() {
    let res = localize_once::run_example().expect("localize_once");
    assert_eq!(res.n_triples, 10);
    assert!(res.estimate.distance(&Point2D::new(35.0, 60.0)) < 10.0);
}

#[test]
fn period_controller_runs() {
    let checks = period_controller::run_example().expect("period_controller");
    assert_eq!(checks.len(), 9);
    assert_eq!(checks[2].period_ms, 400);
    assert!(checks[4].period_ms > checks[2].period_ms);
}

#[test]
fn simulate_experiments_runs() {
    let rows = simulate_experiments::run_example().expect("simulate_experiments");
    assert_eq!(rows.len(), 8);
    let caps: Vec<Option<usize>> = rows.iter().take(4).map(|r| r.1).collect();
    assert_eq!(caps, vec![Some(3), Some(4), Some(5), Some(6)]);
}

#[test]
fn replay_packets_runs() {
    let lines = replay_packets::run_example().expect("replay_packets");
    assert_eq!(lines.len(), 4);
    assert!(lines[0].skipped.is_some());
    assert!(lines[1..].iter().all(|l| l.estimate.is_some()));
}

#[test]
fn seeded_trace_runs() {
    let a = seeded_trace::run_example().expect("seeded_trace");
    let b = seeded_trace::run_example().expect("seeded_trace");
    assert_eq!(a.steps, b.steps);
}
