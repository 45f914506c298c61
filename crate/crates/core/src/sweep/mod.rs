//! Experiment orchestration: one-factor and full-grid hyper-parameter plans,
//! a resumable executor with per-stage wall-clock accounting, and
//! multi-objective (time, Elo) Pareto analysis.

mod exec;
mod pareto;
mod plan;
mod timing;

pub use exec::{execute, write_results_table, RunResult, SweepManifest, SweepStatus};
pub use pareto::{pareto_flags, pareto_front};
pub use plan::{plan_correlation_grid, plan_table1_sweep, PlannedSetting, SweepMode, SweepPlan};
pub use timing::{
    classify, time_report, StageTimings, TimeClass, TimeTableRow, DEFAULT_SENSITIVITY_RATIO,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep plan: {0}")]
    InvalidPlan(String),
    #[error("sweep directory holds a different plan: {0}")]
    PlanMismatch(String),
    #[error(transparent)]
    Selfplay(#[from] crate::selfplay::SelfplayError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest encoding error: {0}")]
    Json(#[from] serde_json::Error),
}
