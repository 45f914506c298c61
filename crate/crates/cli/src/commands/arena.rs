use crate::runconfig::CliError;
use crate::EXIT_OK;
use clap::Args;
use smallzero_core::config::HyperParams;
use smallzero_core::net::load_checkpoint_file;
use smallzero_core::selfplay::{arena, gate_accepts};
use std::path::PathBuf;

#[derive(Args)]
pub struct ArenaArgs {
    /// Checkpoint of the challenger model.
    #[arg(long)]
    pub challenger: PathBuf,
    /// Checkpoint of the incumbent model.
    #[arg(long)]
    pub incumbent: PathBuf,
    /// Games to play (colors alternate; the challenger opens).
    #[arg(long, default_value_t = 40)]
    pub games: u64,
    /// MCTS simulations per move.
    #[arg(long, default_value_t = 100)]
    pub sims: u64,
    /// Exploration constant.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Acceptance threshold on the decisive-game win fraction.
    #[arg(long, default_value_t = 0.6)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: ArenaArgs) -> Result<i32, CliError> {
    let (challenger, _) = load_checkpoint_file(&args.challenger)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", args.challenger.display())))?;
    let (incumbent, _) = load_checkpoint_file(&args.incumbent)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", args.incumbent.display())))?;
    if challenger.spec() != incumbent.spec() {
        return Err(CliError::Invalid(format!(
            "checkpoints are for different games: {:?} vs {:?}",
            challenger.spec(),
            incumbent.spec()
        )));
    }
    let mut params = HyperParams::default();
    params.arena_games = args.games;
    params.simulations = args.sims;
    params.exploration = args.c;
    params.update_threshold = args.threshold;
    params.validate()?;

    let tally = arena(&challenger, &incumbent, challenger.spec(), &params, args.seed)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let accepted = gate_accepts(tally.wins, tally.losses, params.update_threshold);
    println!(
        "challenger {} vs incumbent {}: +{} ={} -{} over {} games",
        args.challenger.display(),
        args.incumbent.display(),
        tally.wins,
        tally.draws,
        tally.losses,
        tally.games()
    );
    println!(
        "challenger {} (win fraction threshold {})",
        if accepted { "ACCEPTED" } else { "REJECTED" },
        params.update_threshold
    );
    Ok(EXIT_OK)
}
