//! Readers and writers for the exported file formats.
//!
//! | file | format |
//! |------|--------|
//! | fitted parameters | JSON `{"p1", "p2", "smooth_p1", "smooth_p2"}` |
//! | simulation steps | CSV `time_s,true_x_cm,true_y_cm,est_x_cm,est_y_cm,error_cm,ann,n_triples` |
//! | period trace | CSV `check_index,period_ms,m_count,n_count` |
//! | per-period estimates | JSON lines, see [`PeriodResultLine`] |
//! | run summary | JSON, see [`SimulationSummary`] |

use crate::calibration::{PathLossParams, SelectedParams};
use crate::geometry::Point2D;
use crate::localizer::LocalizationResult;
use crate::period::PeriodCheck;
use crate::simulator::{ErrorSummary, StepRecord};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Read, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Invalid { line: u64, message: String },
}

pub fn open(path: impl AsRef<Path>) -> Result<std::fs::File, IoError> {
    let path = path.as_ref();
    std::fs::File::open(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn create(path: impl AsRef<Path>) -> Result<std::fs::File, IoError> {
    let path = path.as_ref();
    std::fs::File::create(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_params_json(w: impl Write, params: &SelectedParams) -> Result<(), IoError> {
    serde_json::to_writer_pretty(w, params)?;
    Ok(())
}

/// Accepts the full export or a bare `{"p1", "p2"}` object.
pub fn read_params_json(r: impl Read) -> Result<PathLossParams, IoError> {
    let p: PathLossParams = serde_json::from_reader(r)?;
    PathLossParams::new(p.p1, p.p2).map_err(|e| IoError::Invalid {
        line: 0,
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct StepRow {
    time_s: f64,
    true_x_cm: f64,
    true_y_cm: f64,
    est_x_cm: Option<f64>,
    est_y_cm: Option<f64>,
    error_cm: Option<f64>,
    ann: usize,
    n_triples: usize,
}

impl From<&StepRecord> for StepRow {
    fn from(s: &StepRecord) -> Self {
        Self {
            time_s: s.time_s,
            true_x_cm: s.true_position.x,
            true_y_cm: s.true_position.y,
            est_x_cm: s.estimate.map(|p| p.x),
            est_y_cm: s.estimate.map(|p| p.y),
            error_cm: s.error_cm,
            ann: s.ann,
            n_triples: s.n_triples,
        }
    }
}

pub fn write_steps_csv(w: impl Write, steps: &[StepRecord]) -> Result<(), IoError> {
    let mut wtr = csv::Writer::from_writer(w);
    for s in steps {
        wtr.serialize(StepRow::from(s))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_steps_csv(r: impl Read) -> Result<Vec<StepRecord>, IoError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rdr.deserialize::<StepRow>() {
        let row = row?;
        let estimate = match (row.est_x_cm, row.est_y_cm) {
            (Some(x), Some(y)) => Some(Point2D::new(x, y)),
            (None, None) => None,
            _ => {
                return Err(IoError::Invalid {
                    line: out.len() as u64 + 2,
                    message: "estimate needs both coordinates".into(),
                })
            }
        };
        out.push(StepRecord {
            time_s: row.time_s,
            true_position: Point2D::new(row.true_x_cm, row.true_y_cm),
            estimate,
            error_cm: row.error_cm,
            ann: row.ann,
            n_triples: row.n_triples,
        });
    }
    Ok(out)
}

pub fn write_period_trace_csv(w: impl Write, checks: &[PeriodCheck]) -> Result<(), IoError> {
    let mut wtr = csv::Writer::from_writer(w);
    // serialize() only emits a header with the first row
    if checks.is_empty() {
        wtr.write_record(["check_index", "period_ms", "m_count", "n_count"])?;
    }
    for c in checks {
        wtr.serialize(c)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_period_trace_csv(r: impl Read) -> Result<Vec<PeriodCheck>, IoError> {
    Ok(csv::Reader::from_reader(r)
        .deserialize()
        .collect::<Result<_, _>>()?)
}

/// One period of `replay` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodResultLine {
    pub period: usize,
    pub estimate: Option<[f64; 2]>,
    pub ann: usize,
    pub n_triples: usize,
    pub n_references: usize,
    pub n_after_filter: usize,
    pub beacons: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl PeriodResultLine {
    pub fn localized(period: usize, res: &LocalizationResult) -> Self {
        Self {
            period,
            estimate: Some([res.estimate.x, res.estimate.y]),
            ann: res.beacons_used.len(),
            n_triples: res.n_triples,
            n_references: res.n_references,
            n_after_filter: res.n_after_filter,
            beacons: res.beacons_used.iter().map(|b| b.0).collect(),
            skipped: None,
        }
    }

    pub fn skipped(period: usize, beacons: Vec<u32>, n_triples: usize, reason: String) -> Self {
        Self {
            period,
            estimate: None,
            ann: beacons.len(),
            n_triples,
            n_references: 0,
            n_after_filter: 0,
            beacons,
            skipped: Some(reason),
        }
    }
}

pub fn write_period_lines(mut w: impl Write, lines: &[PeriodResultLine]) -> Result<(), IoError> {
    for l in lines {
        serde_json::to_writer(&mut w, l)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_period_lines(r: impl BufRead) -> Result<Vec<PeriodResultLine>, IoError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| IoError::Invalid {
            line: i as u64 + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Summary of one simulated run inside [`SimulationSummary`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n_cap: Option<usize>,
    pub rng_seed: u64,
    pub steps: usize,
    pub steps_file: String,
    pub period_trace_file: String,
    pub summary: ErrorSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub name: Option<String>,
    pub runs: Vec<RunSummary>,
}
