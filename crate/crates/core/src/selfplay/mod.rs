//! The three-stage training pipeline: self-play episode generation, network
//! training on the replay buffer, and arena comparison with model
//! accept/reject gating (or automatic acceptance when the arena is cut off).

mod agent;
mod buffer;
mod pipeline;

pub use agent::{play_match, play_single_game, Agent, MatchTally, MctsAgent, RandomAgent};
pub use buffer::{BufferSlot, ReplayBuffer};
pub use pipeline::{
    arena, evaluate_vs_random, gate_accepts, run_episode, run_iteration, train_full,
    IterationContext, RunManifest, RunOptions, TrainOutcome, BEST_CHECKPOINT,
};

use crate::games::GameError;
use crate::mcts::MctsError;
use crate::net::{CheckpointError, EpochLoss, NetError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SelfplayError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Mcts(#[from] MctsError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("metrics/manifest encoding error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("run directory holds a different configuration: {0}")]
    ManifestMismatch(String),
    #[error("replay buffer file corrupt: {0}")]
    BufferFormat(String),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

/// One training example: the encoded position, the search policy target and
/// the final game outcome from the perspective of the player to move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub input: Vec<f32>,
    pub pi: Vec<f32>,
    pub z: f32,
}

/// Arena tally from the challenger's point of view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaTally {
    pub wins: u64,
    pub draws: u64,
    pub losses: u64,
    /// Per-game challenger scores (1, 0.5, 0) in play order; used by the
    /// incremental Elo track.
    #[serde(skip)]
    pub game_scores: Vec<f64>,
}

impl ArenaTally {
    pub fn games(&self) -> u64 {
        self.wins + self.draws + self.losses
    }
}

/// Elo ratings after an iteration's arena games.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EloPair {
    pub incumbent: f64,
    pub challenger: f64,
}

/// Wall-clock seconds of one iteration, split by pipeline stage. Stage
/// persistence (example buffer, checkpoints, metrics) is attributed to the
/// stage that produced the data, so the three stages account for the whole
/// iteration up to loop scaffolding.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IterationTiming {
    pub selfplay_secs: f64,
    pub training_secs: f64,
    pub arena_secs: f64,
    pub iteration_secs: f64,
}

/// Everything recorded about one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub iteration: u64,
    pub examples_generated: usize,
    pub buffer_examples: usize,
    pub epoch_losses: Vec<EpochLoss>,
    pub arena: Option<ArenaTally>,
    pub accepted: bool,
    pub elo: Option<EloPair>,
    pub timing: IterationTiming,
}

/// The deterministic slice of an [`IterationReport`], written to the metrics
/// stream. Wall-clock timings live in a sidecar file so that two runs with
/// the same seed produce byte-identical metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub iteration: u64,
    pub examples_generated: usize,
    pub buffer_examples: usize,
    pub epoch_losses: Vec<EpochLoss>,
    pub arena: Option<ArenaTally>,
    pub accepted: bool,
    pub elo: Option<EloPair>,
}

impl From<&IterationReport> for MetricsRecord {
    fn from(r: &IterationReport) -> Self {
        MetricsRecord {
            iteration: r.iteration,
            examples_generated: r.examples_generated,
            buffer_examples: r.buffer_examples,
            epoch_losses: r.epoch_losses.clone(),
            arena: r.arena.clone(),
            accepted: r.accepted,
            elo: r.elo,
        }
    }
}

/// Sidecar record holding one iteration's stage timings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub iteration: u64,
    #[serde(flatten)]
    pub timing: IterationTiming,
}

/// Deterministic seed derivation for the pipeline's independent random
/// streams (SplitMix64 over the master seed and stream coordinates).
pub(crate) fn derive_seed(master: u64, a: u64, b: u64, tag: u64) -> u64 {
    let mut x = master
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(a.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(b.wrapping_mul(0x94D0_49BB_1331_11EB))
        .wrapping_add(tag);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}
