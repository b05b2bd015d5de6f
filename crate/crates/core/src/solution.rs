//! Result types shared by the incremental solver and the baselines.

use serde::{Deserialize, Serialize};

use crate::inner::StopReason;

/// Why a full solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStopReason {
    /// Certified gap fell below the threshold.
    GapBelowThreshold,
    /// `|gap(t-2) - gap(t)| <= zeta`.
    GapChangeBelowZeta,
    /// The gap rose on three consecutive iterations.
    GapIncreasing,
    /// The outer loop would repeat an identical step forever.
    Stalled,
    MaxIterations,
    MaxOuter,
}

impl SolveStopReason {
    /// `false` only when an iteration cap ended the run.
    pub fn is_converged(self) -> bool {
        !matches!(self, Self::MaxIterations | Self::MaxOuter)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::GapBelowThreshold => "gap_below_threshold",
            Self::GapChangeBelowZeta => "gap_change_below_zeta",
            Self::GapIncreasing => "gap_increasing",
            Self::Stalled => "stalled",
            Self::MaxIterations => "max_iterations",
            Self::MaxOuter => "max_outer",
        }
    }
}

impl From<StopReason> for SolveStopReason {
    fn from(r: StopReason) -> Self {
        match r {
            StopReason::GapLeqEps => Self::GapBelowThreshold,
            StopReason::GapChangeLeqZeta => Self::GapChangeBelowZeta,
            StopReason::GapIncreasing => Self::GapIncreasing,
            StopReason::MaxIters => Self::MaxIterations,
        }
    }
}

/// Phase of the outer loop a trace step belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Features were added to the active set after this step.
    Include,
    /// Inclusion ended at this step: the whole reservoir is certified inactive.
    Screen,
    /// Inclusion is over; the sub-problem is being driven to the threshold.
    Pursue,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Include => "include",
            Self::Screen => "screen",
            Self::Pursue => "pursue",
        }
    }
}

/// One row of the outer (or baseline) trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterTraceStep {
    pub step: usize,
    pub stage: Stage,
    pub active_size: usize,
    pub reservoir_size: usize,
    /// Features discarded by screening so far.
    pub screened_count: usize,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub radius: f64,
    /// Seconds since the solve started.
    pub wall_time: f64,
    pub inner_iterations: usize,
    /// Dual iterate at this step; recorded only in diagnostics mode.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<Vec<f64>>,
}

/// A feature removed by the screening rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenEvent {
    pub step: usize,
    pub feature: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub support: Vec<usize>,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub radius: f64,
    pub stop_reason: SolveStopReason,
    pub outer_steps: usize,
    pub inner_iterations: usize,
    /// Sum over iterations of the number of coordinates the primal step visits.
    pub coordinate_touches: u64,
    pub trace: Vec<OuterTraceStep>,
    pub screened: Vec<ScreenEvent>,
}

pub fn support_of(beta: &[f64]) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect()
}
