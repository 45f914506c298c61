//! Sweep execution: a bounded worker pool over (setting, seed) jobs, a
//! resumable manifest, and the results table.

use super::plan::{PlannedSetting, SweepPlan};
use super::timing::StageTimings;
use super::SweepError;
use crate::config::HyperParams;
use crate::games::GameSpec;
use crate::selfplay::{train_full, RunOptions};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStatus {
    Pending,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestEntry {
    run_id: String,
    setting_index: usize,
    repetition: usize,
    seed: u64,
    dir: PathBuf,
    status: SweepStatus,
    #[serde(default)]
    error: Option<String>,
    /// Monotonic completion stamp (for resume-idempotence checks).
    #[serde(default)]
    completed_stamp: Option<u64>,
}

/// `sweep.json`: the plan, the game, and per-run status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub game: String,
    pub size: u8,
    pub plan: SweepPlan,
    entries: Vec<ManifestEntry>,
}

impl SweepManifest {
    pub fn completed_runs(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.status == SweepStatus::Done)
            .count()
    }

    pub fn failed_runs(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .filter(|e| e.status == SweepStatus::Failed)
            .map(|e| (e.run_id.clone(), e.error.clone().unwrap_or_default()))
            .collect()
    }

    pub fn completion_stamps(&self) -> Vec<(String, Option<u64>)> {
        self.entries
            .iter()
            .map(|e| (e.run_id.clone(), e.completed_stamp))
            .collect()
    }
}

/// Result of one completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run_id: String,
    pub setting_index: usize,
    pub repetition: usize,
    /// Axes on which the setting differs from the plan base.
    pub swept: Vec<(String, f64)>,
    pub params: HyperParams,
    pub seed: u64,
    pub run_dir: PathBuf,
    pub checkpoint: PathBuf,
    pub timings: StageTimings,
    pub final_loss: f64,
    /// Tournament Elo, filled after a separate evaluation.
    #[serde(default)]
    pub elo: Option<f64>,
}

fn run_id(setting: usize, repetition: usize) -> String {
    format!("s{setting:03}_r{repetition:02}")
}

/// Runs every (setting, seed) pair of the plan under `out_dir`, `parallelism`
/// workers wide. Completed runs are detected through the manifest and
/// skipped on re-execution; failed runs are recorded and do not stop the
/// sweep. Returns the results of all completed runs in job order.
pub fn execute(
    plan: &SweepPlan,
    spec: GameSpec,
    out_dir: &Path,
    parallelism: usize,
) -> Result<Vec<RunResult>, SweepError> {
    plan.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let manifest_path = out_dir.join("sweep.json");
    let settings = plan.settings();

    let mut manifest = if manifest_path.exists() {
        let existing: SweepManifest =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)?;
        if existing.plan != *plan || existing.game != spec.kind.name() || existing.size != spec.size
        {
            return Err(SweepError::PlanMismatch(format!(
                "{} holds a different plan",
                manifest_path.display()
            )));
        }
        existing
    } else {
        let entries = settings
            .iter()
            .enumerate()
            .flat_map(|(si, _)| {
                plan.seeds.iter().enumerate().map(move |(ri, &seed)| ManifestEntry {
                    run_id: run_id(si, ri),
                    setting_index: si,
                    repetition: ri,
                    seed,
                    dir: PathBuf::from("runs").join(run_id(si, ri)),
                    status: SweepStatus::Pending,
                    error: None,
                    completed_stamp: None,
                })
            })
            .collect();
        let manifest = SweepManifest {
            game: spec.kind.name().to_string(),
            size: spec.size,
            plan: plan.clone(),
            entries,
        };
        write_manifest(&manifest_path, &manifest)?;
        manifest
    };

    // Jobs still to run.
    let todo: Vec<usize> = manifest
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.status != SweepStatus::Done)
        .map(|(i, _)| i)
        .collect();

    let stamp_base = manifest
        .entries
        .iter()
        .filter_map(|e| e.completed_stamp)
        .max()
        .unwrap_or(0);
    let stamp_counter = AtomicUsize::new(1);
    let shared = Mutex::new((&mut manifest, Vec::<(usize, Result<RunResult, String>)>::new()));
    let cursor = AtomicUsize::new(0);
    let workers = parallelism.max(1).min(todo.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let slot = cursor.fetch_add(1, Ordering::Relaxed);
                if slot >= todo.len() {
                    break;
                }
                let entry_idx = todo[slot];
                let (setting_index, repetition, seed, rel_dir, id) = {
                    let guard = shared.lock().unwrap();
                    let e = &guard.0.entries[entry_idx];
                    (
                        e.setting_index,
                        e.repetition,
                        e.seed,
                        e.dir.clone(),
                        e.run_id.clone(),
                    )
                };
                let setting = &settings[setting_index];
                let result = run_one(spec, setting, seed, &out_dir.join(&rel_dir), &id,
                    setting_index, repetition);
                let mut guard = shared.lock().unwrap();
                let (manifest, results) = &mut *guard;
                match &result {
                    Ok(run_result) => {
                        manifest.entries[entry_idx].status = SweepStatus::Done;
                        manifest.entries[entry_idx].error = None;
                        manifest.entries[entry_idx].completed_stamp =
                            Some(stamp_base + stamp_counter.fetch_add(1, Ordering::Relaxed) as u64);
                        let result_path = out_dir.join(&rel_dir).join("run_result.json");
                        if let Ok(json) = serde_json::to_string_pretty(run_result) {
                            let _ = std::fs::write(result_path, json);
                        }
                    }
                    Err(message) => {
                        manifest.entries[entry_idx].status = SweepStatus::Failed;
                        manifest.entries[entry_idx].error = Some(message.clone());
                    }
                }
                let _ = write_manifest(&manifest_path, manifest);
                results.push((entry_idx, result.map_err(|e| e)));
            });
        }
    });

    // Collect results for every Done entry, loading previously completed
    // runs from their persisted result files.
    let mut out = Vec::new();
    for entry in &manifest.entries {
        if entry.status != SweepStatus::Done {
            continue;
        }
        let result_path = out_dir.join(&entry.dir).join("run_result.json");
        let result: RunResult = serde_json::from_str(&std::fs::read_to_string(&result_path)?)?;
        out.push(result);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    spec: GameSpec,
    setting: &PlannedSetting,
    seed: u64,
    dir: &Path,
    id: &str,
    setting_index: usize,
    repetition: usize,
) -> Result<RunResult, String> {
    let opts = RunOptions::new(dir);
    let outcome = train_full(spec, &setting.params, seed, &opts).map_err(|e| e.to_string())?;
    let timings = StageTimings::from_reports(&outcome.reports);
    let final_loss = outcome
        .reports
        .last()
        .and_then(|r| r.epoch_losses.last())
        .map(|l| l.total)
        .unwrap_or(f64::NAN);
    Ok(RunResult {
        run_id: id.to_string(),
        setting_index,
        repetition,
        swept: setting.swept.clone(),
        params: setting.params.clone(),
        seed,
        run_dir: dir.to_path_buf(),
        checkpoint: dir.join(crate::selfplay::BEST_CHECKPOINT),
        timings,
        final_loss,
        elo: None,
    })
}

fn write_manifest(path: &Path, manifest: &SweepManifest) -> Result<(), SweepError> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, serde_json::to_string_pretty(manifest)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Results table CSV: one row per run with the twelve parameters, seed,
/// stage times, total time, final loss and the Elo placeholder.
pub fn write_results_table<W: Write>(results: &[RunResult], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["run".to_string(), "seed".to_string()];
    header.extend(HyperParams::SWEEP_KEYS.iter().map(|s| s.to_string()));
    header.extend(
        [
            "selfplay_secs",
            "training_secs",
            "arena_secs",
            "total_secs",
            "final_loss",
            "elo",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    w.write_record(&header)?;
    for r in results {
        let mut row = vec![r.run_id.clone(), r.seed.to_string()];
        for key in HyperParams::SWEEP_KEYS {
            row.push(format_param(r.params.numeric_value(key).unwrap()));
        }
        row.push(format!("{:.3}", r.timings.selfplay_secs()));
        row.push(format!("{:.3}", r.timings.training_secs()));
        row.push(format!("{:.3}", r.timings.arena_secs()));
        row.push(format!("{:.3}", r.timings.total_secs()));
        row.push(format!("{:.6}", r.final_loss));
        row.push(r.elo.map(|e| format!("{e:.2}")).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn format_param(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}
