//! Empirical RSSI -> distance formula.
//!
//! Field data is a list of `(distance, rssi)` pairs. Weak readings are
//! dropped, the rest are averaged per distance, smoothed with a centered
//! moving window and fitted with `rssi = p1 * ln(d) + p2`. Sweeping the
//! window width over every odd value up to the bin count yields a set of
//! candidates; [`select_params`] reduces them to one [`PathLossParams`].

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum CalibrationError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },
    #[error("empty result: no calibration samples above {mr_floor} dBm")]
    EmptyResult { mr_floor: f64 },
    #[error("no samples to bin")]
    NoSamples,
    #[error("smooth must be odd and in 1..={bins}, got {smooth}")]
    InvalidSmooth { smooth: usize, bins: usize },
    #[error("need at least 2 distinct distances to fit, got {0}")]
    TooFewBins(usize),
    #[error("all distances are equal; the fit is degenerate")]
    DegenerateSpread,
    #[error("fitted slope p1 = {0} is not negative")]
    NonNegativeSlope(f64),
    #[error("no fit candidates")]
    NoCandidates,
    #[error("invalid path-loss parameters p1 = {p1}, p2 = {p2}")]
    InvalidParams { p1: f64, p2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub distance_cm: f64,
    pub rssi_dbm: f64,
}

/// Samples kept by [`load_calibration_csv`] plus the count of rows removed
/// by the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSamples {
    pub samples: Vec<CalibrationSample>,
    pub dropped: usize,
}

/// Read `distance_cm,rssi_dbm` rows and keep those strictly above `mr_floor`.
pub fn load_calibration_csv(
    path: impl AsRef<Path>,
    mr_floor: f64,
) -> Result<LoadedSamples, CalibrationError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| CalibrationError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_calibration_csv(file, mr_floor)
}

pub fn read_calibration_csv(
    reader: impl std::io::Read,
    mr_floor: f64,
) -> Result<LoadedSamples, CalibrationError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let malformed = |line: u64, message: String| CalibrationError::MalformedRow { line, message };
    let headers = rdr
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .clone();
    let mut samples = Vec::new();
    let mut dropped = 0;
    for record in rdr.records() {
        let record =
            record.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let sample: CalibrationSample = record
            .deserialize(Some(&headers))
            .map_err(|e| malformed(line, e.to_string()))?;
        if !(sample.distance_cm > 0.0 && sample.distance_cm.is_finite()) {
            return Err(malformed(
                line,
                format!("distance must be positive, got {}", sample.distance_cm),
            ));
        }
        if !sample.rssi_dbm.is_finite() {
            return Err(malformed(line, "rssi must be finite".into()));
        }
        if sample.rssi_dbm > mr_floor {
            samples.push(sample);
        } else {
            dropped += 1;
        }
    }
    if samples.is_empty() {
        return Err(CalibrationError::EmptyResult { mr_floor });
    }
    Ok(LoadedSamples { samples, dropped })
}

/// Mean RSSI observed at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBin {
    pub distance_cm: f64,
    pub mean_rssi_dbm: f64,
    pub sample_count: usize,
}

pub fn bin_by_distance(
    samples: &[CalibrationSample],
) -> Result<Vec<DistanceBin>, CalibrationError> {
    if samples.is_empty() {
        return Err(CalibrationError::NoSamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.distance_cm.total_cmp(&b.distance_cm));

    let mut bins: Vec<DistanceBin> = Vec::new();
    let mut sum = 0.0;
    for s in sorted {
        match bins.last_mut() {
            Some(bin) if bin.distance_cm == s.distance_cm => {
                bin.sample_count += 1;
                sum += s.rssi_dbm;
                bin.mean_rssi_dbm = sum / bin.sample_count as f64;
            }
            _ => {
                sum = s.rssi_dbm;
                bins.push(DistanceBin {
                    distance_cm: s.distance_cm,
                    mean_rssi_dbm: s.rssi_dbm,
                    sample_count: 1,
                });
            }
        }
    }
    Ok(bins)
}

fn check_smooth(smooth: usize, bins: usize) -> Result<(), CalibrationError> {
    if smooth == 0 || smooth.is_multiple_of(2) || smooth > bins {
        return Err(CalibrationError::InvalidSmooth { smooth, bins });
    }
    Ok(())
}

/// Centered moving average of width `smooth` over the bin means. Near the
/// ends the window is clipped to the bins that exist.
pub fn smooth_bins(
    bins: &[DistanceBin],
    smooth: usize,
) -> Result<Vec<DistanceBin>, CalibrationError> {
    check_smooth(smooth, bins.len())?;
    let half = smooth / 2;
    let n = bins.len();
    Ok((0..n)
        .map(|i| {
            let window = &bins[i.saturating_sub(half)..(i + half + 1).min(n)];
            let mean = window.iter().map(|b| b.mean_rssi_dbm).sum::<f64>() / window.len() as f64;
            DistanceBin {
                mean_rssi_dbm: mean,
                ..bins[i]
            }
        })
        .collect())
}

/// One `(smooth, p1, p2)` row of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitCandidate {
    pub smooth: usize,
    pub p1: f64,
    pub p2: f64,
}

/// Smooth the bins, then least-squares fit `rssi = p1 * ln(d) + p2`.
pub fn fit_candidate(
    bins: &[DistanceBin],
    smooth: usize,
) -> Result<FitCandidate, CalibrationError> {
    if bins.len() < 2 {
        return Err(CalibrationError::TooFewBins(bins.len()));
    }
    let smoothed = smooth_bins(bins, smooth)?;
    let xs: Vec<f64> = smoothed.iter().map(|b| b.distance_cm.ln()).collect();
    let ys: Vec<f64> = smoothed.iter().map(|b| b.mean_rssi_dbm).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(CalibrationError::DegenerateSpread);
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let p1 = sxy / sxx;
    let p2 = mean_y - p1 * mean_x;
    if !(p1 < 0.0) {
        return Err(CalibrationError::NonNegativeSlope(p1));
    }
    Ok(FitCandidate { smooth, p1, p2 })
}

/// Parameters of `d = exp((rssi - p2) / p1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    pub p1: f64,
    pub p2: f64,
}

impl PathLossParams {
    pub fn new(p1: f64, p2: f64) -> Result<Self, CalibrationError> {
        if !(p1 < 0.0 && p1.is_finite() && p2.is_finite()) {
            return Err(CalibrationError::InvalidParams { p1, p2 });
        }
        Ok(Self { p1, p2 })
    }

    /// Distance in cm for a reading in dBm.
    pub fn rssi_to_distance(&self, rssi_dbm: f64) -> f64 {
        rssi_to_distance(self, rssi_dbm)
    }

    /// Expected reading at `distance_cm`.
    pub fn distance_to_rssi(&self, distance_cm: f64) -> f64 {
        self.p1 * distance_cm.ln() + self.p2
    }
}

pub fn rssi_to_distance(params: &PathLossParams, rssi_dbm: f64) -> f64 {
    ((rssi_dbm - params.p2) / params.p1).exp()
}

/// Selected parameters and the smooth values the minimal `p1` and maximal
/// `p2` came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectedParams {
    pub p1: f64,
    pub p2: f64,
    pub smooth_p1: usize,
    pub smooth_p2: usize,
}

impl SelectedParams {
    pub fn params(&self) -> PathLossParams {
        PathLossParams {
            p1: self.p1,
            p2: self.p2,
        }
    }
}

/// Take the candidate with minimal `p1` and the one with maximal `p2`; use it
/// directly when they coincide, otherwise average the two componentwise.
/// Ties go to the smaller `smooth`.
pub fn select_params(candidates: &[FitCandidate]) -> Result<SelectedParams, CalibrationError> {
    let by_smooth = |a: &FitCandidate, b: &FitCandidate| a.smooth.cmp(&b.smooth);
    let min_p1 = candidates
        .iter()
        .min_by(|a, b| a.p1.total_cmp(&b.p1).then(by_smooth(a, b)))
        .ok_or(CalibrationError::NoCandidates)?;
    let max_p2 = candidates
        .iter()
        .min_by(|a, b| b.p2.total_cmp(&a.p2).then(by_smooth(a, b)))
        .ok_or(CalibrationError::NoCandidates)?;

    let (p1, p2) = if std::ptr::eq(min_p1, max_p2) {
        (min_p1.p1, min_p1.p2)
    } else {
        ((min_p1.p1 + max_p2.p1) / 2.0, (min_p1.p2 + max_p2.p2) / 2.0)
    };
    PathLossParams::new(p1, p2)?;
    Ok(SelectedParams {
        p1,
        p2,
        smooth_p1: min_p1.smooth,
        smooth_p2: max_p2.smooth,
    })
}

/// Full sweep over the bins of a data set.
#[derive(Debug, Clone)]
pub struct CalibrationReport {
    pub bins: Vec<DistanceBin>,
    pub candidates: Vec<FitCandidate>,
    /// Smooth values whose fit failed (e.g. flattened to a non-negative slope).
    pub rejected: Vec<(usize, String)>,
    pub selected: SelectedParams,
}

/// Fit every odd smooth value up to the bin count and select parameters.
pub fn calibrate(samples: &[CalibrationSample]) -> Result<CalibrationReport, CalibrationError> {
    let bins = bin_by_distance(samples)?;
    if bins.len() < 2 {
        return Err(CalibrationError::TooFewBins(bins.len()));
    }
    let mut candidates = Vec::new();
    let mut rejected = Vec::new();
    for smooth in (1..=bins.len()).step_by(2) {
        match fit_candidate(&bins, smooth) {
            Ok(c) => candidates.push(c),
            Err(e @ CalibrationError::NonNegativeSlope(_)) => {
                rejected.push((smooth, e.to_string()))
            }
            Err(e) => return Err(e),
        }
    }
    let selected = select_params(&candidates)?;
    Ok(CalibrationReport {
        bins,
        candidates,
        rejected,
        selected,
    })
}

impl CalibrationReport {
    /// Actual distance vs. distance measured with each candidate (and the
    /// selected parameters), followed by the matching error table.
    pub fn render_table(&self) -> String {
        let mut columns: Vec<(String, PathLossParams)> = self
            .candidates
            .iter()
            .map(|c| {
                (
                    format!("smooth={}", c.smooth),
                    PathLossParams { p1: c.p1, p2: c.p2 },
                )
            })
            .collect();
        columns.push(("selected".into(), self.selected.params()));

        let mut out = String::new();
        let header = |out: &mut String, title: &str| {
            let _ = writeln!(out, "{title}");
            let _ = write!(out, "{:>12}", "actual(cm)");
            for (name, _) in &columns {
                let _ = write!(out, "{name:>12}");
            }
            let _ = writeln!(out);
            let _ = write!(out, "{:>12}", "");
            for (_, p) in &columns {
                let _ = write!(out, "{:>12}", format!("p1={:.4}", p.p1));
            }
            let _ = writeln!(out);
            let _ = write!(out, "{:>12}", "");
            for (_, p) in &columns {
                let _ = write!(out, "{:>12}", format!("p2={:.4}", p.p2));
            }
            let _ = writeln!(out);
        };

        header(&mut out, "measured distance (cm)");
        for bin in &self.bins {
            let _ = write!(out, "{:>12.2}", bin.distance_cm);
            for (_, p) in &columns {
                let _ = write!(out, "{:>12.2}", p.rssi_to_distance(bin.mean_rssi_dbm));
            }
            let _ = writeln!(out);
        }
        let _ = writeln!(out);
        header(&mut out, "measured error (cm)");
        for bin in &self.bins {
            let _ = write!(out, "{:>12.2}", bin.distance_cm);
            for (_, p) in &columns {
                let err = p.rssi_to_distance(bin.mean_rssi_dbm) - bin.distance_cm;
                let _ = write!(out, "{err:>12.2}");
            }
            let _ = writeln!(out);
        }
        let _ = writeln!(
            out,
            "\nselected: p1 = {} (smooth {}), p2 = {} (smooth {})",
            self.selected.p1, self.selected.smooth_p1, self.selected.p2, self.selected.smooth_p2
        );
        out
    }
}
