//! RSSI-based localization for wireless sensor networks using the N-times
//! trilateral centroid weighted method.
//!
//! The crate covers the whole chain from field calibration to a position
//! estimate:
//!
//! - [`calibration`]: fit `rssi = p1 * ln(d) + p2` from `(distance, rssi)`
//!   data with a smoothing sweep and pick the final parameters.
//! - [`pipeline`]: per-beacon RSSI history, weighted current RSSI and
//!   reliable-beacon selection.
//! - [`geometry`]: circle intersections and the per-triple reference
//!   coordinate.
//! - [`localizer`]: run every beacon triple, weight, filter and fuse.
//! - [`period`]: adapt the localization period to beacon availability.
//! - [`simulator`]: seeded log-distance channel and mobile traces that drive
//!   the full chain.
//! - [`config`], [`io`], [`replay`] and [`cli`]: file formats and the
//!   command-line front end.
//!
//! ```
//! use ntcwla::prelude::*;
//! use std::collections::HashMap;
//!
//! let truth = Point2D::new(40.0, 55.0);
//! let beacons = [(0.0, 50.0), (50.0, 0.0), (100.0, 50.0), (50.0, 100.0)];
//! let mut positions = HashMap::new();
//! let mut reliable = Vec::new();
//! for (i, (x, y)) in beacons.into_iter().enumerate() {
//!     let id = BeaconId(i as u32);
//!     let p = Point2D::new(x, y);
//!     positions.insert(id, p);
//!     reliable.push(ReliableBeacon {
//!         id,
//!         measured_distance_cm: p.distance(&truth),
//!         current_rssi_dbm: -40.0,
//!     });
//! }
//! let area = TestArea::new(Point2D::new(0.0, 0.0), Point2D::new(100.0, 100.0)).unwrap();
//! let result = localize(&reliable, &positions, &area, &LocalizerConfig::default()).unwrap();
//! assert_eq!(result.n_triples, 4);
//! assert!(result.estimate.distance(&truth) < 1e-6);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod cli;
pub mod config;
pub mod geometry;
pub mod io;
pub mod localizer;
pub mod period;
pub mod pipeline;
pub mod replay;
pub mod simulator;

pub mod prelude {
    pub use crate::calibration::{
        calibrate, fit_candidate, rssi_to_distance, select_params, CalibrationSample, FitCandidate,
        PathLossParams, SelectedParams,
    };
    pub use crate::geometry::{
        circle_pair, classify_triple, triple_reference, Circle, PairRelation, Point2D, TestArea,
        TripleClass, TripleRelations,
    };
    pub use crate::localizer::{
        filter_references, localize, reference_weights, weighted_position, LocalizationResult,
        LocalizerConfig, ReferenceCoordinate,
    };
    pub use crate::period::{PeriodConfig, PeriodController, PeriodState};
    pub use crate::pipeline::{
        current_rssi, select_reliable, BeaconId, PipelineConfig, ReliableBeacon, RssiHistoryStore,
    };
    pub use crate::simulator::{
        error_stats, generate_rssi, run_trace, ChannelModel, SimConfig, StepRecord, TraceKind,
        TraceSpec,
    };
}
