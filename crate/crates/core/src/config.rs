//! JSON documents for simulation and replay configs.
//!
//! Beacon, area and trace positions are given in `position_unit` (meters by
//! default) and converted to cm. Speeds are always cm/s and channel values
//! are cm/dBm.
//!
//! ```json
//! {
//!   "name": "experiment1",
//!   "position_unit": "m",
//!   "beacons": [{ "id": 1, "x": 0.0, "y": 0.0 }],
//!   "area": { "min": [0.0, 0.0], "max": [1.0, 1.0] },
//!   "trace": { "kind": "linear_diagonal", "start": [0.1, 0.1], "end": [0.9, 0.9],
//!              "speed_cm_per_s": 5.0, "loops": 1 },
//!   "channel": { "d0_cm": 10.0, "p_d0_dbm": -18.98, "eta": 2.6146, "noise_std_dbm": 2.0 },
//!   "pipeline": { "rpn": 5, "mr": -70.0, "rr": -55.0 },
//!   "localizer": { "filter_threshold_cm": 20.0 },
//!   "period": { "initial_period_ms": 1000 },
//!   "packets_per_beacon_per_period": 5,
//!   "rng_seed": 1,
//!   "n_cap_sweep": [3, 4, 5, 6]
//! }
//! ```
//!
//! Omitted sections fall back to their defaults. `n_cap` runs a single
//! cap; `n_cap_sweep` runs one simulation per listed cap.

use crate::calibration::PathLossParams;
use crate::geometry::{Point2D, TestArea};
use crate::localizer::LocalizerConfig;
use crate::period::PeriodConfig;
use crate::pipeline::{BeaconId, PipelineConfig};
use crate::simulator::{ChannelModel, SimConfig, SimError, TraceKind, TraceSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {message}")]
    Json { path: String, message: String },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("override `{0}` must look like key.path=value")]
    Override(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionUnit {
    #[default]
    M,
    Cm,
}

impl PositionUnit {
    fn to_cm(self, v: [f64; 2]) -> Point2D {
        let k = match self {
            PositionUnit::M => 100.0,
            PositionUnit::Cm => 1.0,
        };
        Point2D::new(v[0] * k, v[1] * k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeaconDoc {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaDoc {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

/// Beacon layout and the localization settings shared by `simulate` and
/// `replay`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutDoc {
    #[serde(default)]
    pub position_unit: PositionUnit,
    pub beacons: Vec<BeaconDoc>,
    pub area: AreaDoc,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub localizer: LocalizerConfig,
}

/// Beacon positions, test area and settings in cm.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub beacons: Vec<(BeaconId, Point2D)>,
    pub area: TestArea,
    pub pipeline: PipelineConfig,
    pub localizer: LocalizerConfig,
}

impl Layout {
    pub fn positions(&self) -> HashMap<BeaconId, Point2D> {
        self.beacons.iter().copied().collect()
    }
}

impl LayoutDoc {
    pub fn to_layout(&self) -> Result<Layout, ConfigError> {
        let unit = self.position_unit;
        let area = TestArea::new(unit.to_cm(self.area.min), unit.to_cm(self.area.max))
            .map_err(|e| field("area", e))?;
        let beacons: Vec<(BeaconId, Point2D)> = self
            .beacons
            .iter()
            .map(|b| (BeaconId(b.id), unit.to_cm([b.x, b.y])))
            .collect();
        for (i, (id, p)) in beacons.iter().enumerate() {
            if let Some(j) = beacons[..i].iter().position(|(other, _)| other == id) {
                return Err(field(
                    format!("beacons[{i}].id"),
                    format!("duplicate of beacons[{j}]"),
                ));
            }
            if let Some(j) = beacons[..i].iter().position(|(_, q)| q == p) {
                return Err(field(
                    format!("beacons[{i}]"),
                    format!("same position as beacons[{j}]"),
                ));
            }
        }
        self.pipeline.validate().map_err(|e| field("pipeline", e))?;
        self.localizer
            .validate()
            .map_err(|e| field("localizer", e))?;
        Ok(Layout {
            beacons,
            area,
            pipeline: self.pipeline,
            localizer: self.localizer,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceKindDoc {
    LinearDiagonal { start: [f64; 2], end: [f64; 2] },
    SquarePerimeter { min: [f64; 2], max: [f64; 2] },
    Waypoints { points: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDoc {
    #[serde(flatten)]
    pub kind: TraceKindDoc,
    pub speed_cm_per_s: f64,
    #[serde(default = "one")]
    pub loops: f64,
}

fn one() -> f64 {
    1.0
}

fn five() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfigDoc {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub position_unit: PositionUnit,
    pub beacons: Vec<BeaconDoc>,
    pub area: AreaDoc,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub localizer: LocalizerConfig,
    #[serde(default)]
    pub channel: ChannelModel,
    pub trace: TraceDoc,
    #[serde(default)]
    pub period: PeriodConfig,
    #[serde(default = "five")]
    pub packets_per_beacon_per_period: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub n_cap: Option<usize>,
    #[serde(default)]
    pub n_cap_sweep: Vec<usize>,
    #[serde(default)]
    pub params: Option<PathLossParams>,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

fn field(name: impl Into<String>, e: impl ToString) -> ConfigError {
    ConfigError::Field {
        field: name.into(),
        message: e.to_string(),
    }
}

impl From<SimError> for ConfigError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig { path, message } => ConfigError::Field {
                field: path,
                message,
            },
            other => field("config", other),
        }
    }
}

impl SimConfigDoc {
    pub fn layout(&self) -> LayoutDoc {
        LayoutDoc {
            position_unit: self.position_unit,
            beacons: self.beacons.clone(),
            area: self.area.clone(),
            pipeline: self.pipeline,
            localizer: self.localizer,
        }
    }

    /// One validated config per entry of `n_cap_sweep`, or a single config
    /// using `n_cap` when the sweep is empty.
    pub fn to_configs(&self) -> Result<Vec<SimConfig>, ConfigError> {
        let caps: Vec<Option<usize>> = if self.n_cap_sweep.is_empty() {
            vec![self.n_cap]
        } else {
            self.n_cap_sweep.iter().map(|&n| Some(n)).collect()
        };
        caps.into_iter().map(|cap| self.to_config(cap)).collect()
    }

    pub fn to_config(&self, n_cap: Option<usize>) -> Result<SimConfig, ConfigError> {
        let layout = self.layout().to_layout()?;
        let unit = self.position_unit;
        let kind = match &self.trace.kind {
            TraceKindDoc::LinearDiagonal { start, end } => TraceKind::LinearDiagonal {
                start: unit.to_cm(*start),
                end: unit.to_cm(*end),
            },
            TraceKindDoc::SquarePerimeter { min, max } => TraceKind::SquarePerimeter {
                min: unit.to_cm(*min),
                max: unit.to_cm(*max),
            },
            TraceKindDoc::Waypoints { points } => TraceKind::Waypoints {
                points: points.iter().map(|p| unit.to_cm(*p)).collect(),
            },
        };
        let cfg = SimConfig {
            beacons: layout.beacons,
            area: layout.area,
            channel: self.channel,
            trace: TraceSpec {
                kind,
                speed_cm_per_s: self.trace.speed_cm_per_s,
                loops: self.trace.loops,
            },
            pipeline: layout.pipeline,
            localizer: layout.localizer,
            period: self.period,
            packets_per_beacon_per_period: self.packets_per_beacon_per_period,
            rng_seed: self.rng_seed,
            n_cap,
            params: self.params,
            max_steps: self.max_steps,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Set `key.path=value` in a JSON tree. The value is parsed as JSON and
/// taken as a string when that fails. Numeric segments index arrays.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec
        .split_once('=')
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| ConfigError::Override(spec.to_string()))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let segments: Vec<&str> = key.split('.').collect();
    let mut node = root;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        node = match node {
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| ConfigError::Override(spec.to_string()))?;
                items
                    .get_mut(idx)
                    .ok_or_else(|| ConfigError::Override(spec.to_string()))?
            }
            Value::Object(map) => map
                .entry(seg.to_string())
                .or_insert_with(|| Value::Object(Default::default())),
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut()
                    .expect("just set")
                    .entry(seg.to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            _ => return Err(ConfigError::Override(spec.to_string())),
        };
        if last {
            *node = value;
            return Ok(());
        }
    }
    Ok(())
}

/// Read a JSON document, apply overrides, and deserialize it with field
/// paths in error messages.
pub fn load_json<T: DeserializeOwned>(
    path: impl AsRef<Path>,
    overrides: &[String],
) -> Result<T, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_json(&text, &path.display().to_string(), overrides)
}

pub fn parse_json<T: DeserializeOwned>(
    text: &str,
    origin: &str,
    overrides: &[String],
) -> Result<T, ConfigError> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Json {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        field(
            if path == "." {
                origin.to_string()
            } else {
                path
            },
            e.into_inner(),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    const DOC: &str = r#"{
        "beacons": [{"id": 1, "x": 0.0, "y": 0.0}, {"id": 2, "x": 1.0, "y": 0.0},
                    {"id": 3, "x": 0.5, "y": 1.0}],
        "area": {"min": [0, 0], "max": [1, 1]},
        "trace": {"kind": "linear_diagonal", "start": [0.1, 0.1], "end": [0.9, 0.9],
                  "speed_cm_per_s": 10}
    }"#;

    #[test]
    fn meters_become_cm() {
        let doc: SimConfigDoc = parse_json(DOC, "doc", &[]).unwrap();
        let cfg = doc.to_config(None).unwrap();
        assert_eq!(cfg.beacons[1].1, Point2D::new(100.0, 0.0));
        assert_eq!(cfg.area.max, Point2D::new(100.0, 100.0));
        match cfg.trace.kind {
            TraceKind::LinearDiagonal { start, .. } => assert!((start.x - 10.0).abs() < 1e-12),
            _ => unreachable!(),
        }
        assert_eq!(cfg.pipeline, PipelineConfig::default());
        assert_eq!(cfg.packets_per_beacon_per_period, 5);
    }

    #[test]
    fn overrides_set_nested_values() {
        let doc: SimConfigDoc = parse_json(
            DOC,
            "doc",
            &[
                "pipeline.rpn=3".into(),
                "n_cap_sweep=[3,4]".into(),
                "beacons.2.y=0.9".into(),
            ],
        )
        .unwrap();
        assert_eq!(doc.pipeline.rpn, 3);
        assert_eq!(doc.beacons[2].y, 0.9);
        let cfgs = doc.to_configs().unwrap();
        assert_eq!(
            cfgs.iter().map(|c| c.n_cap).collect::<Vec<_>>(),
            vec![Some(3), Some(4)]
        );

        let mut v = json!({"a": 1});
        assert!(apply_override(&mut v, "novalue").is_err());
        assert!(apply_override(&mut v, "a.b=2").is_err());
        apply_override(&mut v, "name=exp").unwrap();
        assert_eq!(v["name"], "exp");
    }

    #[test]
    fn errors_carry_field_paths() {
        let err =
            parse_json::<SimConfigDoc>(DOC, "doc", &["pipeline.rpn=\"x\"".into()]).unwrap_err();
        assert!(err.to_string().starts_with("pipeline.rpn"), "{err}");

        let doc: SimConfigDoc = parse_json(
            DOC,
            "doc",
            &["beacons.2.x=0.0".into(), "beacons.2.y=0.0".into()],
        )
        .unwrap();
        let err = doc.to_config(None).unwrap_err();
        assert!(err.to_string().starts_with("beacons[2]"), "{err}");

        let doc: SimConfigDoc =
            parse_json(DOC, "doc", &["trace.speed_cm_per_s=-1".into()]).unwrap();
        let err = doc.to_config(None).unwrap_err();
        assert!(err.to_string().starts_with("trace.speed_cm_per_s"), "{err}");

        assert!(matches!(
            parse_json::<SimConfigDoc>("{", "doc", &[]),
            Err(ConfigError::Json { .. })
        ));
    }
}
