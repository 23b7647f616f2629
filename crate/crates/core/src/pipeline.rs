//! Per-beacon RSSI storage, weighted current RSSI and reliable-beacon
//! selection.

use crate::calibration::PathLossParams;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;

/// Beacon identifier as it appears on the air and in replay files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BeaconId(pub u32);

impl fmt::Display for BeaconId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("rpn must be at least 1")]
    ZeroRpn,
    #[error("rr ({rr} dBm) must be greater than mr ({mr} dBm)")]
    ThresholdOrder { mr: f64, rr: f64 },
    #[error("max_reliable must be at least 1")]
    ZeroCap,
    #[error("unknown beacon {0}")]
    UnknownBeacon(BeaconId),
    #[error("beacon {0} registered twice")]
    DuplicateBeacon(BeaconId),
    #[error("history holds {len} readings, rpn is {rpn}")]
    HistoryNotFull { len: usize, rpn: usize },
}

/// Thresholds and window size of the RSSI pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Packets kept per beacon.
    pub rpn: usize,
    /// Readings at or below this are never stored (dBm).
    pub mr: f64,
    /// Current RSSI must exceed this for a beacon to be reliable (dBm).
    pub rr: f64,
    /// Keep at most this many reliable beacons (strongest first).
    pub max_reliable: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            rpn: 5,
            mr: -70.0,
            rr: -55.0,
            max_reliable: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.rpn == 0 {
            return Err(PipelineError::ZeroRpn);
        }
        if !(self.rr > self.mr) {
            return Err(PipelineError::ThresholdOrder {
                mr: self.mr,
                rr: self.rr,
            });
        }
        if self.max_reliable == Some(0) {
            return Err(PipelineError::ZeroCap);
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct BeaconHistory {
    id: BeaconId,
    readings: VecDeque<f64>,
    full: bool,
}

/// Fixed-capacity FIFO of recent readings for every registered beacon.
///
/// Beacons keep the order they were registered in; that order is the
/// discovery order used when reporting reliable beacons.
#[derive(Debug, Clone)]
pub struct RssiHistoryStore {
    rpn: usize,
    mr: f64,
    beacons: Vec<BeaconHistory>,
}

impl RssiHistoryStore {
    pub fn new(
        ids: impl IntoIterator<Item = BeaconId>,
        cfg: &PipelineConfig,
    ) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let mut beacons: Vec<BeaconHistory> = Vec::new();
        for id in ids {
            if beacons.iter().any(|b| b.id == id) {
                return Err(PipelineError::DuplicateBeacon(id));
            }
            beacons.push(BeaconHistory {
                id,
                readings: VecDeque::with_capacity(cfg.rpn),
                full: false,
            });
        }
        Ok(Self {
            rpn: cfg.rpn,
            mr: cfg.mr,
            beacons,
        })
    }

    /// Number of registered beacons.
    pub fn beacon_count(&self) -> usize {
        self.beacons.len()
    }

    pub fn rpn(&self) -> usize {
        self.rpn
    }

    pub fn ids(&self) -> impl Iterator<Item = BeaconId> + '_ {
        self.beacons.iter().map(|b| b.id)
    }

    fn slot(&self, id: BeaconId) -> Result<usize, PipelineError> {
        self.beacons
            .iter()
            .position(|b| b.id == id)
            .ok_or(PipelineError::UnknownBeacon(id))
    }

    /// Store one reading. Returns whether it passed the storage threshold.
    pub fn ingest_packet(&mut self, id: BeaconId, rssi_dbm: f64) -> Result<bool, PipelineError> {
        let slot = self.slot(id)?;
        if !(rssi_dbm > self.mr) {
            return Ok(false);
        }
        let rpn = self.rpn;
        let beacon = &mut self.beacons[slot];
        if beacon.readings.len() == rpn {
            beacon.readings.pop_front();
        }
        beacon.readings.push_back(rssi_dbm);
        if beacon.readings.len() == rpn {
            beacon.full = true;
        }
        Ok(true)
    }

    /// Readings of `id`, oldest first.
    pub fn history(&self, id: BeaconId) -> Result<Vec<f64>, PipelineError> {
        let slot = self.slot(id)?;
        Ok(self.beacons[slot].readings.iter().copied().collect())
    }

    pub fn is_full(&self, id: BeaconId) -> Result<bool, PipelineError> {
        Ok(self.beacons[self.slot(id)?].full)
    }
}

/// Weight of each history slot, oldest first: `1/2^(rpn-1)` for the oldest
/// and `1/2^(rpn-j)` for slot `j >= 1`. The weights sum to one.
pub fn history_weights(rpn: usize) -> Vec<f64> {
    (0..rpn)
        .map(|j| {
            let exp = if j == 0 { rpn - 1 } else { rpn - j };
            0.5f64.powi(exp as i32)
        })
        .collect()
}

/// Weighted current RSSI of a full history (oldest first).
pub fn current_rssi(history: &[f64], rpn: usize) -> Result<f64, PipelineError> {
    if rpn == 0 {
        return Err(PipelineError::ZeroRpn);
    }
    if history.len() != rpn {
        return Err(PipelineError::HistoryNotFull {
            len: history.len(),
            rpn,
        });
    }
    Ok(history
        .iter()
        .zip(history_weights(rpn))
        .map(|(r, w)| r * w)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliableBeacon {
    pub id: BeaconId,
    pub measured_distance_cm: f64,
    pub current_rssi_dbm: f64,
}

/// Every beacon with a full history whose current RSSI exceeds `rr`, in
/// discovery order. Ignores `max_reliable`.
pub fn qualifying_beacons(
    store: &RssiHistoryStore,
    params: &PathLossParams,
    cfg: &PipelineConfig,
) -> Vec<ReliableBeacon> {
    store
        .beacons
        .iter()
        .filter(|b| b.full)
        .filter_map(|b| {
            let history: Vec<f64> = b.readings.iter().copied().collect();
            let rssi = current_rssi(&history, store.rpn).ok()?;
            (rssi > cfg.rr).then(|| ReliableBeacon {
                id: b.id,
                measured_distance_cm: params.rssi_to_distance(rssi),
                current_rssi_dbm: rssi,
            })
        })
        .collect()
}

/// Reliable beacons for this period. When more than `max_reliable` qualify,
/// only the strongest are kept; the result stays in discovery order.
pub fn select_reliable(
    store: &RssiHistoryStore,
    params: &PathLossParams,
    cfg: &PipelineConfig,
) -> Vec<ReliableBeacon> {
    let qualifying = qualifying_beacons(store, params, cfg);
    match cfg.max_reliable {
        Some(cap) if qualifying.len() > cap => {
            let mut order: Vec<usize> = (0..qualifying.len()).collect();
            order.sort_by(|&a, &b| {
                qualifying[b]
                    .current_rssi_dbm
                    .total_cmp(&qualifying[a].current_rssi_dbm)
                    .then(a.cmp(&b))
            });
            order.truncate(cap);
            order.sort_unstable();
            order.into_iter().map(|i| qualifying[i]).collect()
        }
        _ => qualifying,
    }
}
