//! Localization-period controller.
//!
//! Each period reports how many reliable beacons it saw (`am`). Every
//! `check_every` periods the controller looks at how often `am` fell below
//! the two floors and lengthens the period by a large or a small step, or
//! shortens it when no shortage was seen at all.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PeriodError {
    #[error("m_floor ({m}) must be below n_floor ({n})")]
    FloorOrder { m: usize, n: usize },
    #[error("steps must satisfy x_step_ms > y_step_ms > 0 (got {x}, {y})")]
    StepOrder { x: u64, y: u64 },
    #[error("period bounds must satisfy min <= initial <= max (got {min}, {initial}, {max})")]
    Bounds { min: u64, initial: u64, max: u64 },
    #[error("check_every must be at least 1")]
    ZeroCheckInterval,
    #[error("adjust needs {need} recorded periods, have {have}")]
    NotDue { need: usize, have: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeriodConfig {
    /// Severe-shortage floor on reliable beacons.
    pub m_floor: usize,
    /// Mild-shortage floor on reliable beacons.
    pub n_floor: usize,
    /// Severe shortages tolerated per check.
    pub x_limit: usize,
    /// Mild shortages tolerated per check.
    pub y_limit: usize,
    pub x_step_ms: u64,
    pub y_step_ms: u64,
    pub check_every: usize,
    pub min_period_ms: u64,
    pub max_period_ms: u64,
    pub initial_period_ms: u64,
}

impl Default for PeriodConfig {
    fn default() -> Self {
        Self {
            m_floor: 3,
            n_floor: 5,
            x_limit: 2,
            y_limit: 4,
            x_step_ms: 500,
            y_step_ms: 200,
            check_every: 10,
            min_period_ms: 200,
            max_period_ms: 5000,
            initial_period_ms: 1000,
        }
    }
}

impl PeriodConfig {
    pub fn validate(&self) -> Result<(), PeriodError> {
        if self.m_floor >= self.n_floor {
            return Err(PeriodError::FloorOrder {
                m: self.m_floor,
                n: self.n_floor,
            });
        }
        if !(self.x_step_ms > self.y_step_ms && self.y_step_ms > 0) {
            return Err(PeriodError::StepOrder {
                x: self.x_step_ms,
                y: self.y_step_ms,
            });
        }
        if !(self.min_period_ms <= self.initial_period_ms
            && self.initial_period_ms <= self.max_period_ms)
        {
            return Err(PeriodError::Bounds {
                min: self.min_period_ms,
                initial: self.initial_period_ms,
                max: self.max_period_ms,
            });
        }
        if self.check_every == 0 {
            return Err(PeriodError::ZeroCheckInterval);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodState {
    pub period_ms: u64,
    /// Periods with `am < m_floor` since the last check.
    pub m_count: usize,
    /// Periods with `am < n_floor` since the last check.
    pub n_count: usize,
    pub periods_seen: usize,
}

impl PeriodState {
    pub fn new(cfg: &PeriodConfig) -> Self {
        Self {
            period_ms: cfg.initial_period_ms,
            m_count: 0,
            n_count: 0,
            periods_seen: 0,
        }
    }

    pub fn record_period(&mut self, am: usize, cfg: &PeriodConfig) {
        self.periods_seen += 1;
        if am < cfg.n_floor {
            self.n_count += 1;
            if am < cfg.m_floor {
                self.m_count += 1;
            }
        }
    }

    pub fn adjust(&mut self, cfg: &PeriodConfig) -> Result<(), PeriodError> {
        if self.periods_seen < cfg.check_every {
            return Err(PeriodError::NotDue {
                need: cfg.check_every,
                have: self.periods_seen,
            });
        }
        let period = if self.m_count > cfg.x_limit {
            self.period_ms.saturating_add(cfg.x_step_ms)
        } else if self.n_count > cfg.y_limit {
            self.period_ms.saturating_add(cfg.y_step_ms)
        } else if self.m_count == 0 && self.n_count == 0 {
            self.period_ms.saturating_sub(cfg.y_step_ms)
        } else {
            self.period_ms
        };
        self.period_ms = period.clamp(cfg.min_period_ms, cfg.max_period_ms);
        self.m_count = 0;
        self.n_count = 0;
        self.periods_seen = 0;
        Ok(())
    }
}

/// Row of the period trace export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodCheck {
    pub check_index: usize,
    pub period_ms: u64,
    pub m_count: usize,
    pub n_count: usize,
}

/// [`PeriodState`] that adjusts itself whenever a check is due and keeps a
/// log of every check.
#[derive(Debug, Clone)]
pub struct PeriodController {
    cfg: PeriodConfig,
    state: PeriodState,
    checks: Vec<PeriodCheck>,
}

impl PeriodController {
    pub fn new(cfg: PeriodConfig) -> Result<Self, PeriodError> {
        cfg.validate()?;
        Ok(Self {
            state: PeriodState::new(&cfg),
            cfg,
            checks: Vec::new(),
        })
    }

    pub fn period_ms(&self) -> u64 {
        self.state.period_ms
    }

    pub fn state(&self) -> &PeriodState {
        &self.state
    }

    /// Record one period. Returns the check row if this triggered a check;
    /// the row carries the counters seen by the check and the new period.
    pub fn on_period(&mut self, am: usize) -> Option<PeriodCheck> {
        self.state.record_period(am, &self.cfg);
        if self.state.periods_seen < self.cfg.check_every {
            return None;
        }
        let (m_count, n_count) = (self.state.m_count, self.state.n_count);
        self.state.adjust(&self.cfg).expect("check is due");
        let row = PeriodCheck {
            check_index: self.checks.len(),
            period_ms: self.state.period_ms,
            m_count,
            n_count,
        };
        self.checks.push(row);
        Some(row)
    }

    pub fn checks(&self) -> &[PeriodCheck] {
        &self.checks
    }
}
