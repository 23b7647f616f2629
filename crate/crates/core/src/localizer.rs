//! N-times trilateral centroid with weights.
//!
//! Every 3-combination of the reliable beacons yields at most one reference
//! coordinate. References are weighted by the reciprocal of their triple's
//! smallest measured distance, averaged once, filtered against that first
//! average and averaged again over the survivors.

use crate::geometry::{
    triple_reference, Circle, GeometryError, Point2D, TestArea, TripleClass, TripleRelations,
    DEFAULT_EPS,
};
use crate::pipeline::{BeaconId, ReliableBeacon};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LocalizeError {
    #[error("localization skipped this period: {ann} reliable beacons, need {min}")]
    TooFewBeacons { ann: usize, min: usize },
    #[error("no triple produced a reference coordinate")]
    NoReferences,
    #[error("no position known for beacon {0}")]
    UnknownBeacon(BeaconId),
    #[error("beacons {0} and {1} share a position")]
    DuplicatePosition(BeaconId, BeaconId),
    #[error("reference weights need mr > 0, got {0}")]
    NonPositiveMr(f64),
    #[error("{refs} references but {weights} weights")]
    LengthMismatch { refs: usize, weights: usize },
    #[error("weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),
    #[error("no references to filter")]
    EmptyReferences,
    #[error("filter threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("min_reliable must be at least 3, got {0}")]
    InvalidMinReliable(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalizerConfig {
    /// References farther than this from the first-pass estimate are dropped (cm).
    pub filter_threshold_cm: f64,
    pub min_reliable: usize,
    /// Geometric tolerance for tangency and common-point tests (cm).
    pub eps: f64,
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        Self {
            filter_threshold_cm: 20.0,
            min_reliable: 3,
            eps: DEFAULT_EPS,
        }
    }
}

impl LocalizerConfig {
    pub fn validate(&self) -> Result<(), LocalizeError> {
        if !(self.filter_threshold_cm > 0.0) {
            return Err(LocalizeError::InvalidThreshold(self.filter_threshold_cm));
        }
        if self.min_reliable < 3 {
            return Err(LocalizeError::InvalidMinReliable(self.min_reliable));
        }
        Ok(())
    }
}

/// One triple's candidate position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCoordinate {
    pub point: Point2D,
    /// Smallest measured distance of the triple (cm).
    pub mr_cm: f64,
    pub triple: [BeaconId; 3],
    pub class: TripleClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationResult {
    pub estimate: Point2D,
    /// Weighted average of all references, before filtering.
    pub first_pass: Point2D,
    pub n_triples: usize,
    pub n_references: usize,
    pub n_after_filter: usize,
    pub beacons_used: Vec<BeaconId>,
    pub references: Vec<ReferenceCoordinate>,
}

/// `weight_i = (1/mr_i) / sum_k (1/mr_k)`.
pub fn reference_weights(refs: &[ReferenceCoordinate]) -> Result<Vec<f64>, LocalizeError> {
    if refs.is_empty() {
        return Err(LocalizeError::EmptyReferences);
    }
    if let Some(bad) = refs.iter().find(|r| !(r.mr_cm > 0.0)) {
        return Err(LocalizeError::NonPositiveMr(bad.mr_cm));
    }
    let total: f64 = refs.iter().map(|r| 1.0 / r.mr_cm).sum();
    Ok(refs.iter().map(|r| (1.0 / r.mr_cm) / total).collect())
}

pub fn weighted_position(
    refs: &[ReferenceCoordinate],
    weights: &[f64],
) -> Result<Point2D, LocalizeError> {
    if refs.len() != weights.len() {
        return Err(LocalizeError::LengthMismatch {
            refs: refs.len(),
            weights: weights.len(),
        });
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(LocalizeError::WeightsNotNormalized(sum));
    }
    Ok(refs
        .iter()
        .zip(weights)
        .fold(Point2D::default(), |acc, (r, w)| {
            Point2D::new(acc.x + r.point.x * w, acc.y + r.point.y * w)
        }))
}

/// Keep references within `threshold_cm` of `anchor`. If none are, keep the
/// single closest one.
pub fn filter_references(
    refs: &[ReferenceCoordinate],
    anchor: &Point2D,
    threshold_cm: f64,
) -> Result<Vec<ReferenceCoordinate>, LocalizeError> {
    if !(threshold_cm > 0.0) {
        return Err(LocalizeError::InvalidThreshold(threshold_cm));
    }
    let kept: Vec<ReferenceCoordinate> = refs
        .iter()
        .filter(|r| r.point.distance(anchor) <= threshold_cm)
        .copied()
        .collect();
    if !kept.is_empty() {
        return Ok(kept);
    }
    refs.iter()
        .min_by(|a, b| {
            a.point
                .distance(anchor)
                .total_cmp(&b.point.distance(anchor))
        })
        .map(|r| vec![*r])
        .ok_or(LocalizeError::EmptyReferences)
}

/// All `i < j < k` index triples in lexicographic order.
pub fn triple_indices(n: usize) -> impl Iterator<Item = [usize; 3]> {
    (0..n).flat_map(move |i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| [i, j, k])))
}

/// Locate the mobile node from this period's reliable beacons.
///
/// Beacons are put in id order before triples are enumerated, so the
/// result does not depend on the order of `reliable`.
pub fn localize(
    reliable: &[ReliableBeacon],
    beacon_positions: &HashMap<BeaconId, Point2D>,
    area: &TestArea,
    cfg: &LocalizerConfig,
) -> Result<LocalizationResult, LocalizeError> {
    cfg.validate()?;
    let ann = reliable.len();
    if ann < cfg.min_reliable {
        return Err(LocalizeError::TooFewBeacons {
            ann,
            min: cfg.min_reliable,
        });
    }

    let mut beacons = reliable.to_vec();
    beacons.sort_by_key(|b| b.id);
    let mut circles = Vec::with_capacity(ann);
    for b in &beacons {
        let center = *beacon_positions
            .get(&b.id)
            .ok_or(LocalizeError::UnknownBeacon(b.id))?;
        circles.push(Circle::new(center, b.measured_distance_cm)?);
    }
    for i in 0..ann {
        for j in i + 1..ann {
            if circles[i].center == circles[j].center {
                return Err(LocalizeError::DuplicatePosition(
                    beacons[i].id,
                    beacons[j].id,
                ));
            }
        }
    }

    let mut n_triples = 0;
    let mut references = Vec::new();
    for [i, j, k] in triple_indices(ann) {
        n_triples += 1;
        let triple = [circles[i], circles[j], circles[k]];
        let rel = TripleRelations::compute(&triple, cfg.eps);
        if let Some(r) = triple_reference(&triple, &rel, area, cfg.eps) {
            references.push(ReferenceCoordinate {
                point: r.point,
                mr_cm: r.mr_cm,
                triple: [beacons[i].id, beacons[j].id, beacons[k].id],
                class: r.class,
            });
        }
    }
    if references.is_empty() {
        return Err(LocalizeError::NoReferences);
    }

    let first_pass = weighted_position(&references, &reference_weights(&references)?)?;
    let kept = filter_references(&references, &first_pass, cfg.filter_threshold_cm)?;
    let estimate = weighted_position(&kept, &reference_weights(&kept)?)?;

    Ok(LocalizationResult {
        estimate,
        first_pass,
        n_triples,
        n_references: references.len(),
        n_after_filter: kept.len(),
        beacons_used: beacons.iter().map(|b| b.id).collect(),
        references,
    })
}
