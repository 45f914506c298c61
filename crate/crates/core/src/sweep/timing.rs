//! Per-stage wall-clock accounting and the per-parameter time table.

use super::exec::RunResult;
use crate::selfplay::{IterationReport, IterationTiming};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Per-iteration stage timings of one run plus the run totals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub iterations: Vec<IterationTiming>,
}

impl StageTimings {
    pub fn from_reports(reports: &[IterationReport]) -> StageTimings {
        StageTimings {
            iterations: reports.iter().map(|r| r.timing).collect(),
        }
    }

    pub fn selfplay_secs(&self) -> f64 {
        self.iterations.iter().map(|t| t.selfplay_secs).sum()
    }

    pub fn training_secs(&self) -> f64 {
        self.iterations.iter().map(|t| t.training_secs).sum()
    }

    pub fn arena_secs(&self) -> f64 {
        self.iterations.iter().map(|t| t.arena_secs).sum()
    }

    /// Measured wall-clock total over the iteration loop.
    pub fn total_secs(&self) -> f64 {
        self.iterations.iter().map(|t| t.iteration_secs).sum()
    }

    /// Sum of the three stage totals; matches [`Self::total_secs`] up to loop
    /// scaffolding.
    pub fn stage_sum_secs(&self) -> f64 {
        self.selfplay_secs() + self.training_secs() + self.arena_secs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeClass {
    TimeSensitive,
    TimeFriendly,
}

impl TimeClass {
    pub fn name(&self) -> &'static str {
        match self {
            TimeClass::TimeSensitive => "time-sensitive",
            TimeClass::TimeFriendly => "time-friendly",
        }
    }
}

/// One parameter's row of the time table: run time at the smallest and
/// largest swept values and at the default, with the sensitivity class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTableRow {
    pub param: String,
    pub min_value: f64,
    pub min_secs: f64,
    pub default_secs: f64,
    pub max_value: f64,
    pub max_secs: f64,
    /// Largest observed run time over the smallest, across the three values.
    pub ratio: f64,
    pub class: TimeClass,
}

pub const DEFAULT_SENSITIVITY_RATIO: f64 = 1.25;

/// Classifies observed run times: time-sensitive iff the largest exceeds the
/// smallest by more than `threshold_ratio`.
pub fn classify(times: &[f64], threshold_ratio: f64) -> TimeClass {
    let max = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = times.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return TimeClass::TimeFriendly;
    }
    if max / min > threshold_ratio {
        TimeClass::TimeSensitive
    } else {
        TimeClass::TimeFriendly
    }
}

/// Builds the per-parameter time table from one-factor sweep results.
/// Repetitions of the same (parameter, value) are averaged; the base run
/// supplies the default-value time for every row.
pub fn time_report(results: &[RunResult], threshold_ratio: f64) -> Vec<TimeTableRow> {
    let base_times: Vec<f64> = results
        .iter()
        .filter(|r| r.swept.is_empty())
        .map(|r| r.timings.total_secs())
        .collect();
    let default_secs = mean(&base_times);

    // (param -> value -> run times)
    let mut by_axis: BTreeMap<&str, BTreeMap<u64, (f64, Vec<f64>)>> = BTreeMap::new();
    for result in results {
        if result.swept.len() != 1 {
            continue;
        }
        let (name, value) = (&result.swept[0].0, result.swept[0].1);
        let entry = by_axis
            .entry(name.as_str())
            .or_default()
            .entry(value.to_bits())
            .or_insert((value, Vec::new()));
        entry.1.push(result.timings.total_secs());
    }

    let mut rows = Vec::new();
    for (param, values) in by_axis {
        let mut points: Vec<(f64, f64)> = values
            .values()
            .map(|(value, times)| (*value, mean(times)))
            .collect();
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let (min_value, min_secs) = points[0];
        let (max_value, max_secs) = *points.last().unwrap();
        let mut observed: Vec<f64> = points.iter().map(|&(_, t)| t).collect();
        if !base_times.is_empty() {
            observed.push(default_secs);
        }
        let lo = observed.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = observed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        rows.push(TimeTableRow {
            param: param.to_string(),
            min_value,
            min_secs,
            default_secs,
            max_value,
            max_secs,
            ratio: if lo > 0.0 { hi / lo } else { f64::INFINITY },
            class: classify(&observed, threshold_ratio),
        });
    }
    rows
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}
