//! Seeded simulation of a mobile node moving among fixed beacons.
//!
//! Readings come from the log-distance channel
//! `P(d) = P(d0) - 10 * eta * log10(d / d0) - zeta - noise` and are pushed
//! through the same pipeline and localizer a deployment would use. The node
//! is treated as stationary within one localization period.

use crate::calibration::PathLossParams;
use crate::geometry::{Point2D, TestArea};
use crate::localizer::{localize, LocalizeError, LocalizerConfig};
use crate::period::{PeriodCheck, PeriodConfig, PeriodController, PeriodError};
use crate::pipeline::{
    qualifying_beacons, select_reliable, BeaconId, PipelineConfig, PipelineError, RssiHistoryStore,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Links shorter than this are evaluated at this distance, so a node sitting
/// on top of a beacon still gets a finite reading.
pub const MIN_LINK_DISTANCE_CM: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("{path}: {message}")]
    InvalidConfig { path: String, message: String },
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("no step produced an estimate")]
    AllSkipped,
    #[error("no steps to summarize")]
    NoSteps,
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error(transparent)]
    Localize(#[from] LocalizeError),
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> SimError {
    SimError::InvalidConfig {
        path: path.into(),
        message: message.into(),
    }
}

/// Log-distance path-loss channel with Gaussian environment offset and
/// per-packet noise. Distances in cm, powers in dBm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelModel {
    pub d0_cm: f64,
    pub p_d0_dbm: f64,
    pub eta: f64,
    pub zeta_mean_dbm: f64,
    pub zeta_std_dbm: f64,
    pub noise_std_dbm: f64,
}

impl Default for ChannelModel {
    /// Roughly the desk-scale channel of a 2.4 GHz 802.15.4 radio: its
    /// matched parameters are about `p1 = -11.355`, `p2 = 7.163`.
    fn default() -> Self {
        Self {
            d0_cm: 10.0,
            p_d0_dbm: -18.98,
            eta: 2.6146,
            zeta_mean_dbm: 0.0,
            zeta_std_dbm: 0.0,
            noise_std_dbm: 2.0,
        }
    }
}

impl ChannelModel {
    pub fn validate(&self) -> Result<(), SimError> {
        let finite = [
            self.d0_cm,
            self.p_d0_dbm,
            self.eta,
            self.zeta_mean_dbm,
            self.zeta_std_dbm,
            self.noise_std_dbm,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("channel", "all values must be finite"));
        }
        if !(self.d0_cm > 0.0) {
            return Err(invalid("channel.d0_cm", "must be positive"));
        }
        if !(self.eta > 0.0) {
            return Err(invalid("channel.eta", "must be positive"));
        }
        if self.zeta_std_dbm < 0.0 {
            return Err(invalid("channel.zeta_std_dbm", "must be non-negative"));
        }
        if self.noise_std_dbm < 0.0 {
            return Err(invalid("channel.noise_std_dbm", "must be non-negative"));
        }
        Ok(())
    }

    /// Noise-free reading at `distance_cm`.
    pub fn mean_rssi(&self, distance_cm: f64) -> f64 {
        self.p_d0_dbm - 10.0 * self.eta * (distance_cm / self.d0_cm).log10() - self.zeta_mean_dbm
    }

    /// Parameters whose inverse formula undoes [`ChannelModel::mean_rssi`].
    pub fn matched_params(&self) -> PathLossParams {
        PathLossParams {
            p1: -10.0 * self.eta / std::f64::consts::LN_10,
            p2: self.p_d0_dbm + 10.0 * self.eta * self.d0_cm.log10() - self.zeta_mean_dbm,
        }
    }
}

/// Draw one reading. Consumes the same amount of randomness whatever the
/// standard deviations are.
pub fn generate_rssi(
    distance_cm: f64,
    channel: &ChannelModel,
    rng: &mut impl rand::Rng,
) -> Result<f64, SimError> {
    if !(distance_cm > 0.0) {
        return Err(SimError::NonPositiveDistance(distance_cm));
    }
    let zeta = Normal::new(channel.zeta_mean_dbm, channel.zeta_std_dbm)
        .map_err(|e| invalid("channel.zeta_std_dbm", e.to_string()))?
        .sample(rng);
    let noise = Normal::new(0.0, channel.noise_std_dbm)
        .map_err(|e| invalid("channel.noise_std_dbm", e.to_string()))?
        .sample(rng);
    Ok(
        channel.p_d0_dbm
            - 10.0 * channel.eta * (distance_cm / channel.d0_cm).log10()
            - zeta
            - noise,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceKind {
    LinearDiagonal {
        start: Point2D,
        end: Point2D,
    },
    /// Counter-clockwise around the rectangle, starting at `min`.
    SquarePerimeter {
        min: Point2D,
        max: Point2D,
    },
    Waypoints {
        points: Vec<Point2D>,
    },
}

/// Path of the mobile node, positions in cm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSpec {
    #[serde(flatten)]
    pub kind: TraceKind,
    pub speed_cm_per_s: f64,
    /// Number of traversals; fractional values stop part way.
    #[serde(default = "one")]
    pub loops: f64,
}

fn one() -> f64 {
    1.0
}

impl TraceSpec {
    pub fn waypoints(&self) -> Vec<Point2D> {
        match &self.kind {
            TraceKind::LinearDiagonal { start, end } => vec![*start, *end],
            TraceKind::SquarePerimeter { min, max } => vec![
                *min,
                Point2D::new(max.x, min.y),
                *max,
                Point2D::new(min.x, max.y),
                *min,
            ],
            TraceKind::Waypoints { points } => points.clone(),
        }
    }

    pub fn length_cm(&self) -> f64 {
        self.waypoints()
            .windows(2)
            .map(|w| w[0].distance(&w[1]))
            .sum()
    }

    pub fn duration_s(&self) -> f64 {
        self.length_cm() * self.loops / self.speed_cm_per_s
    }

    /// Position after `time_s` seconds; restarts from the first waypoint
    /// after each traversal and stays at the final point once done.
    pub fn position_at(&self, time_s: f64) -> Point2D {
        let points = self.waypoints();
        let length = self.length_cm();
        if points.len() == 1 || length <= 0.0 {
            return points[0];
        }
        let total = length * self.loops;
        let travelled = (self.speed_cm_per_s * time_s).clamp(0.0, total);
        let mut s = if travelled >= total {
            match total % length {
                r if r > 0.0 => r,
                _ => length,
            }
        } else {
            travelled % length
        };
        for w in points.windows(2) {
            let seg = w[0].distance(&w[1]);
            if s <= seg {
                let f = if seg > 0.0 { s / seg } else { 0.0 };
                return Point2D::new(
                    w[0].x + (w[1].x - w[0].x) * f,
                    w[0].y + (w[1].y - w[0].y) * f,
                );
            }
            s -= seg;
        }
        *points.last().expect("nonempty")
    }

    fn validate(&self, area: &TestArea) -> Result<(), SimError> {
        if !(self.speed_cm_per_s > 0.0 && self.speed_cm_per_s.is_finite()) {
            return Err(invalid("trace.speed_cm_per_s", "must be positive"));
        }
        if !(self.loops > 0.0 && self.loops.is_finite()) {
            return Err(invalid("trace.loops", "must be positive"));
        }
        let points = self.waypoints();
        if points.is_empty() {
            return Err(invalid("trace.points", "needs at least one waypoint"));
        }
        if let Some(i) = points.iter().position(|p| !area.contains(p)) {
            return Err(invalid(
                format!("trace.waypoints[{i}]"),
                "outside the test area",
            ));
        }
        Ok(())
    }
}

/// Everything one simulated run needs. Positions in cm.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub beacons: Vec<(BeaconId, Point2D)>,
    pub area: TestArea,
    pub channel: ChannelModel,
    pub trace: TraceSpec,
    pub pipeline: PipelineConfig,
    pub localizer: LocalizerConfig,
    pub period: PeriodConfig,
    pub packets_per_beacon_per_period: usize,
    pub rng_seed: u64,
    /// Cap on reliable beacons per period; overrides `pipeline.max_reliable`.
    pub n_cap: Option<usize>,
    /// Parameters used to turn readings into distances; defaults to the
    /// channel's matched parameters.
    pub params: Option<PathLossParams>,
    pub max_steps: Option<usize>,
}

impl SimConfig {
    /// Default experiment geometry: 3x3 beacon grid over a 100 cm square and
    /// a diagonal from (10, 10) to (90, 90).
    pub fn grid_experiment(seed: u64) -> Self {
        let mut beacons = Vec::new();
        for (row, y) in [0.0, 50.0, 100.0].into_iter().enumerate() {
            for (col, x) in [0.0, 50.0, 100.0].into_iter().enumerate() {
                beacons.push((BeaconId((row * 3 + col + 1) as u32), Point2D::new(x, y)));
            }
        }
        Self {
            beacons,
            area: TestArea {
                min: Point2D::new(0.0, 0.0),
                max: Point2D::new(100.0, 100.0),
            },
            channel: ChannelModel::default(),
            trace: TraceSpec {
                kind: TraceKind::LinearDiagonal {
                    start: Point2D::new(10.0, 10.0),
                    end: Point2D::new(90.0, 90.0),
                },
                speed_cm_per_s: 5.0,
                loops: 1.0,
            },
            pipeline: PipelineConfig::default(),
            localizer: LocalizerConfig::default(),
            period: PeriodConfig::default(),
            packets_per_beacon_per_period: 5,
            rng_seed: seed,
            n_cap: None,
            params: None,
            max_steps: None,
        }
    }

    pub fn effective_pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            max_reliable: self.n_cap.or(self.pipeline.max_reliable),
            ..self.pipeline
        }
    }

    pub fn effective_params(&self) -> PathLossParams {
        self.params.unwrap_or_else(|| self.channel.matched_params())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.beacons.len() < 3 {
            return Err(invalid("beacons", "need at least 3 beacons"));
        }
        for (i, (id, p)) in self.beacons.iter().enumerate() {
            if !p.is_finite() {
                return Err(invalid(format!("beacons[{i}]"), "position must be finite"));
            }
            for (j, (other_id, q)) in self.beacons.iter().enumerate().skip(i + 1) {
                if id == other_id {
                    return Err(invalid(
                        format!("beacons[{j}].id"),
                        format!("duplicate id {id}"),
                    ));
                }
                if p == q {
                    return Err(invalid(
                        format!("beacons[{j}]"),
                        format!("same position as beacons[{i}]"),
                    ));
                }
            }
        }
        TestArea::new(self.area.min, self.area.max).map_err(|e| invalid("area", e.to_string()))?;
        self.channel.validate()?;
        self.trace.validate(&self.area)?;
        self.effective_pipeline()
            .validate()
            .map_err(|e| invalid("pipeline", e.to_string()))?;
        self.localizer
            .validate()
            .map_err(|e| invalid("localizer", e.to_string()))?;
        self.period
            .validate()
            .map_err(|e| invalid("period", e.to_string()))?;
        if self.packets_per_beacon_per_period == 0 {
            return Err(invalid(
                "packets_per_beacon_per_period",
                "must be at least 1",
            ));
        }
        if let Some(p) = &self.params {
            PathLossParams::new(p.p1, p.p2).map_err(|e| invalid("params", e.to_string()))?;
        }
        if self.max_steps == Some(0) {
            return Err(invalid("max_steps", "must be at least 1"));
        }
        Ok(())
    }
}

/// One localization period of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub time_s: f64,
    pub true_position: Point2D,
    pub estimate: Option<Point2D>,
    pub error_cm: Option<f64>,
    pub ann: usize,
    pub n_triples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub mean_cm: f64,
    pub rmse_cm: f64,
    pub max_cm: f64,
    pub localized: usize,
    pub skipped: usize,
}

pub fn error_stats(records: &[StepRecord]) -> Result<ErrorSummary, SimError> {
    if records.is_empty() {
        return Err(SimError::NoSteps);
    }
    let errors: Vec<f64> = records.iter().filter_map(|r| r.error_cm).collect();
    if errors.is_empty() {
        return Err(SimError::AllSkipped);
    }
    let n = errors.len() as f64;
    Ok(ErrorSummary {
        mean_cm: errors.iter().sum::<f64>() / n,
        rmse_cm: (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt(),
        max_cm: errors.iter().copied().fold(0.0, f64::max),
        localized: errors.len(),
        skipped: records.len() - errors.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub steps: Vec<StepRecord>,
    pub summary: ErrorSummary,
    pub period_checks: Vec<PeriodCheck>,
}

/// Run one trace. Identical configs give bit-identical outcomes.
pub fn run_trace(cfg: &SimConfig) -> Result<SimOutcome, SimError> {
    cfg.validate()?;
    let pipeline = cfg.effective_pipeline();
    let params = cfg.effective_params();
    let positions: HashMap<BeaconId, Point2D> = cfg.beacons.iter().copied().collect();
    let mut store = RssiHistoryStore::new(cfg.beacons.iter().map(|b| b.0), &pipeline)?;
    let mut controller = PeriodController::new(cfg.period)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    let duration_ms = cfg.trace.duration_s() * 1000.0;
    let mut now_ms: u64 = 0;
    let mut steps = Vec::new();
    loop {
        now_ms += controller.period_ms();
        if now_ms as f64 > duration_ms || cfg.max_steps.is_some_and(|m| steps.len() >= m) {
            break;
        }
        let time_s = now_ms as f64 / 1000.0;
        let truth = cfg.trace.position_at(time_s);

        for _ in 0..cfg.packets_per_beacon_per_period {
            for (id, pos) in &cfg.beacons {
                let d = pos.distance(&truth).max(MIN_LINK_DISTANCE_CM);
                let rssi = generate_rssi(d, &cfg.channel, &mut rng)?;
                store.ingest_packet(*id, rssi)?;
            }
        }

        let am = qualifying_beacons(&store, &params, &pipeline).len();
        let reliable = select_reliable(&store, &params, &pipeline);
        let ann = reliable.len();
        let step = match localize(&reliable, &positions, &cfg.area, &cfg.localizer) {
            Ok(res) => StepRecord {
                time_s,
                true_position: truth,
                estimate: Some(res.estimate),
                error_cm: Some(res.estimate.distance(&truth)),
                ann,
                n_triples: res.n_triples,
            },
            Err(LocalizeError::TooFewBeacons { .. }) | Err(LocalizeError::NoReferences) => {
                StepRecord {
                    time_s,
                    true_position: truth,
                    estimate: None,
                    error_cm: None,
                    ann,
                    n_triples: if ann >= 3 {
                        ann * (ann - 1) * (ann - 2) / 6
                    } else {
                        0
                    },
                }
            }
            Err(e) => return Err(e.into()),
        };
        steps.push(step);
        controller.on_period(am);
    }

    if steps.is_empty() {
        return Err(SimError::NoSteps);
    }
    let summary = error_stats(&steps)?;
    Ok(SimOutcome {
        steps,
        summary,
        period_checks: controller.checks().to_vec(),
    })
}

/// Run independent configs on all available cores. Results keep the input
/// order.
pub fn run_batch(configs: &[SimConfig]) -> Vec<Result<SimOutcome, SimError>> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(configs.len().max(1));
    let chunk = configs.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(run_trace).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}
