//! Offline replay of recorded packets.
//!
//! Input is CSV `seq,beacon_id,rssi_dbm` in arrival order; a row
//! `seq,PERIOD,-` closes a localization period. Packets after the last
//! marker form a final period.

use crate::calibration::PathLossParams;
use crate::config::Layout;
use crate::io::PeriodResultLine;
use crate::localizer::{localize, LocalizeError};
use crate::pipeline::{select_reliable, BeaconId, PipelineError, RssiHistoryStore};
use std::io::Read;

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: unknown beacon {id}")]
    UnknownBeacon { line: u64, id: BeaconId },
    #[error("replay file has no packets")]
    Empty,
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Localize(#[from] LocalizeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReplayEvent {
    Packet {
        seq: u64,
        line: u64,
        beacon: BeaconId,
        rssi_dbm: f64,
    },
    PeriodEnd {
        seq: u64,
    },
}

pub fn parse_replay_csv(r: impl Read) -> Result<Vec<ReplayEvent>, ReplayError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(r);
    let mut events = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| ReplayError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| ReplayError::Malformed { line, message };
        if record.len() != 3 {
            return Err(bad(format!("expected 3 fields, got {}", record.len())));
        }
        if line == 1 && &record[0] == "seq" {
            continue;
        }
        let seq: u64 = record[0]
            .parse()
            .map_err(|_| bad(format!("bad seq `{}`", &record[0])))?;
        if &record[1] == "PERIOD" {
            events.push(ReplayEvent::PeriodEnd { seq });
            continue;
        }
        let beacon = record[1]
            .parse()
            .map(BeaconId)
            .map_err(|_| bad(format!("bad beacon id `{}`", &record[1])))?;
        let rssi_dbm: f64 = record[2]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| bad(format!("bad rssi `{}`", &record[2])))?;
        events.push(ReplayEvent::Packet {
            seq,
            line,
            beacon,
            rssi_dbm,
        });
    }
    if !events
        .iter()
        .any(|e| matches!(e, ReplayEvent::Packet { .. }))
    {
        return Err(ReplayError::Empty);
    }
    Ok(events)
}

/// Feed events through the pipeline and localizer, one output line per period.
pub fn run_replay(
    events: &[ReplayEvent],
    layout: &Layout,
    params: &PathLossParams,
) -> Result<Vec<PeriodResultLine>, ReplayError> {
    let mut store = RssiHistoryStore::new(layout.beacons.iter().map(|b| b.0), &layout.pipeline)?;
    let positions = layout.positions();
    let mut out = Vec::new();
    let mut pending = false;

    let close = |store: &RssiHistoryStore, out: &mut Vec<PeriodResultLine>| {
        let period = out.len();
        let reliable = select_reliable(store, params, &layout.pipeline);
        let line = match localize(&reliable, &positions, &layout.area, &layout.localizer) {
            Ok(res) => PeriodResultLine::localized(period, &res),
            Err(e @ (LocalizeError::TooFewBeacons { .. } | LocalizeError::NoReferences)) => {
                let ann = reliable.len();
                let mut ids: Vec<u32> = reliable.iter().map(|b| b.id.0).collect();
                ids.sort_unstable();
                let n_triples = if ann >= 3 {
                    ann * (ann - 1) * (ann - 2) / 6
                } else {
                    0
                };
                PeriodResultLine::skipped(period, ids, n_triples, e.to_string())
            }
            Err(e) => return Err(e),
        };
        out.push(line);
        Ok(())
    };

    for ev in events {
        match *ev {
            ReplayEvent::Packet {
                line,
                beacon,
                rssi_dbm,
                ..
            } => {
                store.ingest_packet(beacon, rssi_dbm).map_err(|e| match e {
                    PipelineError::UnknownBeacon(id) => ReplayError::UnknownBeacon { line, id },
                    other => other.into(),
                })?;
                pending = true;
            }
            ReplayEvent::PeriodEnd { .. } => {
                close(&store, &mut out)?;
                pending = false;
            }
        }
    }
    if pending {
        close(&store, &mut out)?;
    }
    Ok(out)
}
