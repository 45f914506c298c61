use crate::runconfig::{output_root, parse_set, CliError, RunConfig};
use crate::{EXIT_INTERRUPTED, EXIT_OK};
use clap::Args;
use smallzero_core::selfplay::{train_full, RunOptions};
use std::path::PathBuf;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

#[derive(Args)]
pub struct TrainArgs {
    /// Game to train on: othello, connect4 or gobang.
    #[arg(long)]
    pub game: Option<String>,
    /// Board size (5 or 6).
    #[arg(long)]
    pub size: Option<u8>,
    /// Flat key=value configuration file applied before other flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Hyper-parameter override, repeatable: --set I=10 --set loss_target=sum
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run directory (defaults under the output root).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Episode-level concurrency.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

pub fn run(args: TrainArgs, interrupt: Arc<AtomicBool>) -> Result<i32, CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &args.config {
        config.load_file(path)?;
    }
    if let Some(game) = &args.game {
        config.set("game", game)?;
    }
    if let Some(size) = args.size {
        config.set("size", &size.to_string())?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(parallelism) = args.parallelism {
        config.parallelism = parallelism;
    }
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    for set in &args.sets {
        let (key, value) = parse_set(set)?;
        config.set(&key, &value)?;
    }
    config.params.validate()?;
    let spec = config.spec()?;

    let run_dir = match &config.out {
        Some(path) => path.clone(),
        None => output_root(None).join(format!(
            "train-{}{}-seed{}",
            spec.kind.name(),
            spec.size,
            config.seed
        )),
    };

    let mut opts = RunOptions::new(&run_dir);
    opts.parallelism = config.parallelism.max(1);
    opts.interrupt = Some(interrupt);
    let outcome = train_full(spec, &config.params, config.seed, &opts)
        .map_err(|e| CliError::Invalid(e.to_string()))?;

    if let Some(last) = outcome.reports.last() {
        let loss = last.epoch_losses.last().map(|l| l.total).unwrap_or(f64::NAN);
        println!(
            "completed {} iteration(s); last loss {loss:.4}; best model {}",
            outcome.reports.len(),
            run_dir.join("best.ckpt").display()
        );
    }
    println!("run directory: {}", run_dir.display());
    if outcome.interrupted {
        eprintln!("interrupted; resume by re-running the same command");
        return Ok(EXIT_INTERRUPTED);
    }
    Ok(EXIT_OK)
}
