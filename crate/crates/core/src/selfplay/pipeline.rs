//! The iteration loop: episode generation, training on the buffer window,
//! arena gating, checkpointing, metrics and resume.

use super::agent::{play_match, MctsAgent};
use super::buffer::ReplayBuffer;
use super::{
    derive_seed, ArenaTally, EloPair, IterationReport, IterationTiming, MetricsRecord,
    SelfplayError, TimingRecord, TrainingExample,
};
use crate::config::HyperParams;
use crate::games::{GameKind, GameSpec, GameState};
use crate::mcts::{self, SearchConfig};
use crate::net::{
    load_checkpoint_for_spec, save_checkpoint_file, Architecture, CheckpointMeta, Network,
    TrainConfig,
};
use crate::rating::EloTrack;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

pub const BEST_CHECKPOINT: &str = "best.ckpt";
const SEED_INIT: u64 = 1;
const SEED_EPISODE: u64 = 2;
const SEED_TRAIN: u64 = 3;
const SEED_ARENA: u64 = 4;

/// Arena acceptance: the challenger must win more than fraction `u` of the
/// decisive games; draws are excluded and an all-draw arena rejects.
pub fn gate_accepts(wins: u64, losses: u64, update_threshold: f64) -> bool {
    let decisive = wins + losses;
    if decisive == 0 {
        return false;
    }
    wins as f64 / decisive as f64 > update_threshold
}

/// Plays one self-play game: per step, search produces the policy target,
/// the step-threshold rule selects the move, and on termination every stored
/// example is labeled with the final outcome from the perspective of its
/// player to move. Symmetry augmentation expands each ply into one example
/// per board symmetry when enabled.
pub fn run_episode(
    net: &Network<f32>,
    spec: GameSpec,
    params: &HyperParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<TrainingExample>, SelfplayError> {
    let search_cfg = SearchConfig::from_params(params);
    let mut state = GameState::initial(spec);
    let mut recorded: Vec<(GameState, Vec<f32>)> = Vec::new();
    let mut step = 0usize;
    while !state.is_terminal() {
        let pi = mcts::search(&state, net, &search_cfg)?;
        recorded.push((state.clone(), pi.clone()));
        let action = mcts::select_action(&pi, step, params.t_prime as usize, rng);
        state = state.apply(action)?;
        step += 1;
    }
    let outcome = state.outcome();
    let mut examples = Vec::new();
    for (position, pi) in recorded {
        let z = outcome.value_for(position.to_move());
        if params.augment_symmetries {
            for (sym_state, sym_pi) in position.symmetries(&pi) {
                examples.push(TrainingExample {
                    input: sym_state.encode(),
                    pi: sym_pi,
                    z,
                });
            }
        } else {
            examples.push(TrainingExample {
                input: position.encode(),
                pi,
                z,
            });
        }
    }
    Ok(examples)
}

/// Plays `params.arena_games` games between the newly trained challenger and
/// the incumbent, both moving by greedy MCTS. Colors alternate game by game
/// (the challenger takes P1 in ceil(n/2) games).
pub fn arena(
    challenger: &Network<f32>,
    incumbent: &Network<f32>,
    spec: GameSpec,
    params: &HyperParams,
    base_seed: u64,
) -> Result<ArenaTally, SelfplayError> {
    let search_cfg = SearchConfig::from_params(params);
    let chal = MctsAgent::new(Arc::new(challenger.clone()), search_cfg);
    let inc = MctsAgent::new(Arc::new(incumbent.clone()), search_cfg);
    let start = GameState::initial(spec);
    let tally = play_match(&chal, &inc, &start, params.arena_games, base_seed)?;
    Ok(ArenaTally {
        wins: tally.wins,
        draws: tally.draws,
        losses: tally.losses,
        game_scores: tally.game_scores,
    })
}

/// Inputs describing one iteration of the pipeline.
pub struct IterationContext<'a> {
    pub spec: GameSpec,
    pub params: &'a HyperParams,
    pub master_seed: u64,
    /// 1-based iteration index.
    pub iteration: u64,
    /// Episode-level concurrency; results are merged by episode index so the
    /// generated examples do not depend on the level.
    pub parallelism: usize,
}

/// One pipeline iteration: E episodes appended to the buffer, training a
/// copy of `best` on the buffer window, and the arena gate (automatic
/// acceptance when the arena is disabled). Returns the surviving model.
/// A failed iteration propagates its error and leaves `best` untouched.
pub fn run_iteration(
    best: &Network<f32>,
    buffer: &mut ReplayBuffer,
    ctx: &IterationContext<'_>,
    track: &mut EloTrack,
) -> Result<(Network<f32>, IterationReport), SelfplayError> {
    let params = ctx.params;
    let iter = ctx.iteration;
    let iter_timer = Instant::now();

    // Stage 1: self-play.
    let stage_timer = Instant::now();
    let episodes = generate_episodes(best, ctx)?;
    let examples_generated: usize = episodes.iter().map(Vec::len).sum();
    buffer.push_iteration(iter, episodes.into_iter().flatten().collect());
    let selfplay_secs = stage_timer.elapsed().as_secs_f64();

    // Stage 2: training.
    let stage_timer = Instant::now();
    let training_set = buffer.training_set();
    let mut candidate = best.clone();
    let mut train_rng = ChaCha8Rng::seed_from_u64(derive_seed(ctx.master_seed, iter, 0, SEED_TRAIN));
    let epoch_losses = crate::net::train_epochs(
        &mut candidate,
        &training_set,
        &TrainConfig::from_params(params),
        params.loss_target(),
        &mut train_rng,
    )?;
    let training_secs = stage_timer.elapsed().as_secs_f64();

    // Stage 3: arena comparison, or automatic acceptance when cut off.
    let stage_timer = Instant::now();
    let (new_best, arena_result, accepted, elo) = if params.arena_enabled {
        let tally = arena(
            &candidate,
            best,
            ctx.spec,
            params,
            derive_seed(ctx.master_seed, iter, 0, SEED_ARENA),
        )?;
        let accepted = gate_accepts(tally.wins, tally.losses, params.update_threshold);
        let (incumbent, challenger) = track.on_iteration(&tally.game_scores, accepted);
        let winner = if accepted { candidate } else { best.clone() };
        (
            winner,
            Some(tally),
            accepted,
            Some(EloPair {
                incumbent,
                challenger,
            }),
        )
    } else {
        (candidate, None, true, None)
    };
    let arena_secs = stage_timer.elapsed().as_secs_f64();

    let report = IterationReport {
        iteration: iter,
        examples_generated,
        buffer_examples: buffer.training_set().len(),
        epoch_losses,
        arena: arena_result,
        accepted,
        elo,
        timing: IterationTiming {
            selfplay_secs,
            training_secs,
            arena_secs,
            iteration_secs: iter_timer.elapsed().as_secs_f64(),
        },
    };
    Ok((new_best, report))
}

fn generate_episodes(
    net: &Network<f32>,
    ctx: &IterationContext<'_>,
) -> Result<Vec<Vec<TrainingExample>>, SelfplayError> {
    let episodes = ctx.params.episodes;
    let episode_rng = |e: u64| {
        ChaCha8Rng::seed_from_u64(derive_seed(ctx.master_seed, ctx.iteration, e, SEED_EPISODE))
    };
    if ctx.parallelism <= 1 {
        let mut out = Vec::with_capacity(episodes as usize);
        for e in 0..episodes {
            out.push(run_episode(net, ctx.spec, ctx.params, &mut episode_rng(e))?);
        }
        return Ok(out);
    }
    let workers = ctx.parallelism.min(episodes as usize).max(1);
    let next = std::sync::atomic::AtomicU64::new(0);
    let results: Vec<std::sync::Mutex<Option<Result<Vec<TrainingExample>, SelfplayError>>>> =
        (0..episodes).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let e = next.fetch_add(1, Ordering::Relaxed);
                if e >= episodes {
                    break;
                }
                let result = run_episode(net, ctx.spec, ctx.params, &mut episode_rng(e));
                *results[e as usize].lock().unwrap() = Some(result);
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("episode worker completed"))
        .collect()
}

/// Execution options for [`train_full`].
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub parallelism: usize,
    pub arch: Architecture,
    /// Checked between iterations; when set, the run stops after the current
    /// iteration, leaving a resumable state.
    pub interrupt: Option<Arc<AtomicBool>>,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> RunOptions {
        RunOptions {
            out_dir: out_dir.into(),
            parallelism: 1,
            arch: Architecture::default(),
            interrupt: None,
        }
    }
}

/// `run.json`: the full run configuration plus completion state, written
/// after every iteration so a killed run resumes from the last completed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub game: GameKind,
    pub size: u8,
    pub params: HyperParams,
    pub seed: u64,
    pub channels: usize,
    pub hidden: usize,
    pub parallelism: usize,
    pub completed_iterations: u64,
    pub finished: bool,
    /// Current rating of the best model on the incremental training track.
    pub elo_best: f64,
}

pub struct TrainOutcome {
    pub best: Network<f32>,
    pub reports: Vec<IterationReport>,
    pub checkpoints: Vec<PathBuf>,
    pub interrupted: bool,
}

fn checkpoint_name(spec: GameSpec, iteration: u64) -> String {
    format!("{}_{}_iter{}.ckpt", spec.kind.name(), spec.size, iteration)
}

/// Runs `params.iterations` pipeline iterations, persisting a checkpoint per
/// accepted model, a `best.ckpt`, a JSON-lines metrics stream, a timing
/// sidecar, the replay buffer and the run manifest. Interrupted or killed
/// runs resume from the last completed iteration.
pub fn train_full(
    spec: GameSpec,
    params: &HyperParams,
    seed: u64,
    opts: &RunOptions,
) -> Result<TrainOutcome, SelfplayError> {
    params.validate()?;
    let dir = &opts.out_dir;
    std::fs::create_dir_all(dir)?;
    let manifest_path = dir.join("run.json");
    let metrics_path = dir.join("metrics.jsonl");
    let timings_path = dir.join("timings.jsonl");
    let buffer_path = dir.join("buffer.bin");

    let mut manifest = RunManifest {
        game: spec.kind,
        size: spec.size,
        params: params.clone(),
        seed,
        channels: opts.arch.channels,
        hidden: opts.arch.hidden,
        parallelism: opts.parallelism,
        completed_iterations: 0,
        finished: false,
        elo_best: EloTrack::INITIAL_RATING,
    };

    let mut best: Network<f32>;
    let mut buffer;
    let mut track = EloTrack::new(EloTrack::DEFAULT_K);
    let mut reports: Vec<IterationReport> = Vec::new();
    let mut checkpoints: Vec<PathBuf> = Vec::new();

    if manifest_path.exists() {
        let existing: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)?;
        let mut incoming = manifest.clone();
        incoming.parallelism = existing.parallelism;
        incoming.completed_iterations = existing.completed_iterations;
        incoming.finished = existing.finished;
        incoming.elo_best = existing.elo_best;
        if incoming != existing {
            return Err(SelfplayError::ManifestMismatch(format!(
                "{} was created with different settings",
                manifest_path.display()
            )));
        }
        manifest = existing;
        track = EloTrack::with_rating(EloTrack::DEFAULT_K, manifest.elo_best);
        if manifest.completed_iterations > 0 {
            reports = reload_reports(&metrics_path, &timings_path, manifest.completed_iterations)?;
            // A kill between the checkpoint write and the manifest update can
            // leave best.ckpt ahead of the manifest, so resume from the last
            // accepted iteration's own checkpoint instead.
            let last_accepted = reports.iter().rev().find(|r| r.accepted).map(|r| r.iteration);
            best = match last_accepted {
                Some(k) => {
                    let path = dir.join(checkpoint_name(spec, k));
                    load_checkpoint_for_spec(&std::fs::read(path)?, spec)?.0
                }
                None => Network::init(spec, opts.arch, derive_seed(seed, 0, 0, SEED_INIT)),
            };
            buffer = if buffer_path.exists() {
                ReplayBuffer::load(&buffer_path, params.retrain_window)?
            } else {
                ReplayBuffer::new(params.retrain_window)
            };
            buffer.retain_up_to(manifest.completed_iterations);
            checkpoints = existing_checkpoints(dir, spec, manifest.completed_iterations);
        } else {
            best = Network::init(spec, opts.arch, derive_seed(seed, 0, 0, SEED_INIT));
            buffer = ReplayBuffer::new(params.retrain_window);
        }
        truncate_jsonl(&metrics_path, manifest.completed_iterations as usize)?;
        truncate_jsonl(&timings_path, manifest.completed_iterations as usize)?;
    } else {
        best = Network::init(spec, opts.arch, derive_seed(seed, 0, 0, SEED_INIT));
        buffer = ReplayBuffer::new(params.retrain_window);
        write_manifest(&manifest_path, &manifest)?;
        std::fs::write(&metrics_path, "")?;
        std::fs::write(&timings_path, "")?;
    }

    let mut interrupted = false;
    for iteration in manifest.completed_iterations + 1..=params.iterations {
        if let Some(flag) = &opts.interrupt {
            if flag.load(Ordering::SeqCst) {
                interrupted = true;
                break;
            }
        }
        let ctx = IterationContext {
            spec,
            params,
            master_seed: seed,
            iteration,
            parallelism: opts.parallelism,
        };
        let body_timer = Instant::now();
        let (new_best, mut report) = run_iteration(&best, &mut buffer, &ctx, &mut track)?;
        best = new_best;

        // Persist stage artifacts; the time is attributed to the producing
        // stage so stage times account for the whole iteration.
        let persist_timer = Instant::now();
        buffer.save(&buffer_path)?;
        report.timing.selfplay_secs += persist_timer.elapsed().as_secs_f64();

        let persist_timer = Instant::now();
        if report.accepted {
            let meta = CheckpointMeta::for_network(&best, Some(iteration), Some(params.clone()));
            let iter_path = dir.join(checkpoint_name(spec, iteration));
            save_checkpoint_file(&best, &meta, &iter_path)?;
            save_checkpoint_file(&best, &meta, &dir.join(BEST_CHECKPOINT))?;
            checkpoints.push(iter_path);
        }
        append_jsonl(&metrics_path, &MetricsRecord::from(&report))?;
        manifest.completed_iterations = iteration;
        manifest.finished = iteration == params.iterations;
        manifest.elo_best = track.best_rating();
        write_manifest(&manifest_path, &manifest)?;
        let persist_secs = persist_timer.elapsed().as_secs_f64();
        if params.arena_enabled {
            report.timing.arena_secs += persist_secs;
        } else {
            report.timing.training_secs += persist_secs;
        }
        report.timing.iteration_secs = body_timer.elapsed().as_secs_f64();

        append_jsonl(
            &timings_path,
            &TimingRecord {
                iteration,
                timing: report.timing,
            },
        )?;
        reports.push(report);
    }

    if manifest.completed_iterations == 0 {
        // Nothing ran (interrupted immediately); still persist a best model
        // so the directory is usable.
        let meta = CheckpointMeta::for_network(&best, None, Some(params.clone()));
        save_checkpoint_file(&best, &meta, &dir.join(BEST_CHECKPOINT))?;
    }

    Ok(TrainOutcome {
        best,
        reports,
        checkpoints,
        interrupted,
    })
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), SelfplayError> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, serde_json::to_string_pretty(manifest)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn append_jsonl<T: Serialize>(path: &Path, record: &T) -> Result<(), SelfplayError> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    writeln!(file, "{}", serde_json::to_string(record)?)?;
    Ok(())
}

/// Keeps the first `lines` lines, dropping a partial record from a killed run.
fn truncate_jsonl(path: &Path, lines: usize) -> Result<(), SelfplayError> {
    if !path.exists() {
        std::fs::write(path, "")?;
        return Ok(());
    }
    let content = std::fs::read_to_string(path)?;
    let kept: Vec<&str> = content.lines().take(lines).collect();
    let mut out = kept.join("\n");
    if !out.is_empty() {
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn reload_reports(
    metrics_path: &Path,
    timings_path: &Path,
    completed: u64,
) -> Result<Vec<IterationReport>, SelfplayError> {
    let metrics = std::fs::read_to_string(metrics_path).unwrap_or_default();
    let timings = std::fs::read_to_string(timings_path).unwrap_or_default();
    let timing_by_iter: std::collections::HashMap<u64, IterationTiming> = timings
        .lines()
        .filter_map(|l| serde_json::from_str::<TimingRecord>(l).ok())
        .map(|t| (t.iteration, t.timing))
        .collect();
    let mut reports = Vec::new();
    for line in metrics.lines().take(completed as usize) {
        let record: MetricsRecord = serde_json::from_str(line)?;
        let timing = timing_by_iter
            .get(&record.iteration)
            .copied()
            .unwrap_or_default();
        reports.push(IterationReport {
            iteration: record.iteration,
            examples_generated: record.examples_generated,
            buffer_examples: record.buffer_examples,
            epoch_losses: record.epoch_losses,
            arena: record.arena,
            accepted: record.accepted,
            elo: record.elo,
            timing,
        });
    }
    Ok(reports)
}

fn existing_checkpoints(dir: &Path, spec: GameSpec, completed: u64) -> Vec<PathBuf> {
    (1..=completed)
        .map(|i| dir.join(checkpoint_name(spec, i)))
        .filter(|p| p.exists())
        .collect()
}

/// Convenience evaluation: plays `games` games of the model (greedy MCTS)
/// against the uniform-random player with alternating colors and returns the
/// model's tally.
pub fn evaluate_vs_random(
    net: &Network<f32>,
    spec: GameSpec,
    search: SearchConfig,
    games: u64,
    seed: u64,
) -> Result<super::MatchTally, SelfplayError> {
    let model = MctsAgent::new(Arc::new(net.clone()), search);
    let random = super::RandomAgent;
    let start = GameState::initial(spec);
    play_match(&model, &random, &start, games, seed)
}
