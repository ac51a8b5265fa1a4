//! Rolling time windows over a possession.
//!
//! Window `k` (1-based) covers the closed interval `[(k-1)·τ, (k-1)·τ + δ]`
//! in possession-relative time. A possession of length `L` yields
//! `⌊(L − δ)/τ⌋ + 1` windows, or none when `L < δ`.

use serde::Serialize;
use thiserror::Error;

use crate::ingest::{Dataset, Millis, PassEvent, Possession};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct WindowParams {
    delta: Millis,
    tau: Millis,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("window step ({tau} s) must be positive and shorter than the window duration ({delta} s)")]
    Ordering { delta: f64, tau: f64 },
}

impl WindowParams {
    pub const DEFAULT_DELTA_S: f64 = 6.0;
    pub const DEFAULT_TAU_S: f64 = 0.25;

    /// Seconds are rounded to the nearest millisecond.
    pub fn new(delta_s: f64, tau_s: f64) -> Result<Self, ParamsError> {
        Self::from_millis(Millis::from_secs_f64(delta_s), Millis::from_secs_f64(tau_s))
            .map_err(|_| ParamsError::Ordering { delta: delta_s, tau: tau_s })
    }

    pub fn from_millis(delta: Millis, tau: Millis) -> Result<Self, ParamsError> {
        if tau.0 <= 0 || tau >= delta {
            return Err(ParamsError::Ordering { delta: delta.as_secs_f64(), tau: tau.as_secs_f64() });
        }
        Ok(WindowParams { delta, tau })
    }

    pub fn delta(&self) -> Millis {
        self.delta
    }

    pub fn tau(&self) -> Millis {
        self.tau
    }
}

impl Default for WindowParams {
    fn default() -> Self {
        WindowParams { delta: Millis(6_000), tau: Millis(250) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow<'a> {
    /// 1-based.
    pub index: usize,
    /// Possession-relative.
    pub start: Millis,
    pub end: Millis,
    /// Offset of `events[0]` within the possession's event list.
    pub first_event: usize,
    pub events: &'a [PassEvent],
}

pub fn window_count(length: Millis, params: &WindowParams) -> usize {
    if length < params.delta {
        0
    } else {
        ((length.0 - params.delta.0) / params.tau.0) as usize + 1
    }
}

/// Windows of one possession. Events must be sorted by time.
pub fn windows_of<'a>(possession: &'a Possession, params: &WindowParams) -> Vec<TimeWindow<'a>> {
    let n = window_count(possession.duration(), params);
    let events = &possession.events[..];
    let rel = |e: &PassEvent| e.time.0 - possession.start.0;
    let mut out = Vec::with_capacity(n);
    let (mut lo, mut hi) = (0usize, 0usize);
    for k in 0..n {
        let start = k as i64 * params.tau.0;
        let end = start + params.delta.0;
        while lo < events.len() && rel(&events[lo]) < start {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi < events.len() && rel(&events[hi]) <= end {
            hi += 1;
        }
        out.push(TimeWindow {
            index: k + 1,
            start: Millis(start),
            end: Millis(end),
            first_event: lo,
            events: &events[lo..hi],
        });
    }
    out
}

/// Share of possessions long enough to produce at least one window.
/// `None` for an empty dataset.
pub fn retained_fraction(dataset: &Dataset, params: &WindowParams) -> Option<f64> {
    let total = dataset.n_possessions();
    if total == 0 {
        return None;
    }
    let kept = dataset.possessions().filter(|p| p.duration() >= params.delta).count();
    Some(kept as f64 / total as f64)
}

/// A window step where more than one pass left or entered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepViolation {
    /// Index of the earlier window of the pair.
    pub window: usize,
    pub dropped: usize,
    pub appended: usize,
}

/// Checks the one-in/one-out premise between consecutive windows, which holds
/// whenever consecutive passes are at least τ apart.
pub fn step_violations(windows: &[TimeWindow<'_>]) -> Vec<StepViolation> {
    let mut out = Vec::new();
    for pair in windows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let dropped = b.first_event - a.first_event;
        let appended = (b.first_event + b.events.len()).saturating_sub(a.first_event + a.events.len());
        if dropped > 1 || appended > 1 {
            out.push(StepViolation { window: a.index, dropped, appended });
        }
    }
    out
}
