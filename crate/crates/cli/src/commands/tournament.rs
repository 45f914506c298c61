use super::load_player;
use crate::runconfig::{io_err, output_root, CliError};
use crate::{EXIT_BAD_INPUT, EXIT_OK};
use clap::Args;
use smallzero_core::games::{GameSpec, GameState};
use smallzero_core::mcts::SearchConfig;
use smallzero_core::rating::{fit_mle_elo, round_robin, write_match_log, write_rating_report};
use smallzero_core::selfplay::{Agent, MctsAgent, RandomAgent};
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Args)]
pub struct TournamentArgs {
    /// Checkpoint files.
    pub checkpoints: Vec<PathBuf>,
    /// Directory scanned for *.ckpt files (recursively).
    #[arg(long)]
    pub dir: Option<PathBuf>,
    /// Round-robin rounds.
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
    /// Games per pair within each round.
    #[arg(long, default_value_t = 1)]
    pub games_per_pair: usize,
    /// Add the seedable uniform-random player.
    #[arg(long)]
    pub include_random: bool,
    /// MCTS simulations per move for checkpoint players.
    #[arg(long, default_value_t = 100)]
    pub sims: u64,
    /// Exploration constant.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for matches.csv and ratings.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Concurrent games.
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
}

fn collect_checkpoints(args: &TournamentArgs) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = args.checkpoints.clone();
    if let Some(dir) = &args.dir {
        let mut stack = vec![dir.clone()];
        while let Some(current) = stack.pop() {
            let entries = std::fs::read_dir(&current).map_err(|e| io_err(&current, e))?;
            for entry in entries {
                let path = entry.map_err(|e| io_err(&current, e))?.path();
                if path.is_dir() {
                    stack.push(path);
                } else if path.extension().is_some_and(|e| e == "ckpt") {
                    // One entry per model; the iteration checkpoints would
                    // duplicate best.ckpt.
                    if path.file_name().is_some_and(|n| n == "best.ckpt")
                        || !path.to_string_lossy().contains("_iter")
                    {
                        paths.push(path);
                    }
                }
            }
        }
        paths.sort();
    }
    Ok(paths)
}

pub fn run(args: TournamentArgs) -> Result<i32, CliError> {
    let paths = collect_checkpoints(&args)?;
    let mut players: Vec<(String, Box<dyn Agent>)> = Vec::new();
    let mut spec: Option<GameSpec> = None;
    let mut offenders = Vec::new();
    let mut ids = std::collections::HashSet::new();
    for path in &paths {
        let (mut id, net, net_spec) = load_player(path)?;
        match spec {
            None => spec = Some(net_spec),
            Some(expected) if expected != net_spec => {
                offenders.push(format!("{} ({net_spec:?})", path.display()));
                continue;
            }
            _ => {}
        }
        while !ids.insert(id.clone()) {
            id.push('+');
        }
        players.push((
            id,
            Box::new(MctsAgent::new(
                Arc::new(net),
                SearchConfig::new(args.sims as usize, args.c as f32),
            )),
        ));
    }
    if !offenders.is_empty() {
        eprintln!("checkpoints for a different game/size than the first one:");
        for offender in offenders {
            eprintln!("  {offender}");
        }
        return Ok(EXIT_BAD_INPUT);
    }
    if args.include_random {
        players.push(("random".to_string(), Box::new(RandomAgent)));
    }
    if players.len() < 2 {
        eprintln!(
            "a tournament needs at least 2 players, got {} (use --include-random or pass more checkpoints)",
            players.len()
        );
        return Ok(EXIT_BAD_INPUT);
    }
    let Some(spec) = spec.or_else(|| {
        // Random-only tournaments have no checkpoint to infer the game from.
        None
    }) else {
        eprintln!("no checkpoints given; the game cannot be inferred");
        return Ok(EXIT_BAD_INPUT);
    };

    let pairs = players.len() * (players.len() - 1) / 2;
    println!(
        "{} players, {} pairs, {} game(s) per pair",
        players.len(),
        pairs,
        args.rounds * args.games_per_pair
    );

    let start = GameState::initial(spec);
    let records = round_robin(
        &players,
        &start,
        args.rounds,
        args.games_per_pair,
        args.seed,
        args.parallelism.max(1),
    )
    .map_err(|e| CliError::Invalid(e.to_string()))?;

    let ids: Vec<String> = players.iter().map(|(id, _)| id.clone()).collect();
    let table = fit_mle_elo(&ids, &records).map_err(|e| CliError::Invalid(e.to_string()))?;

    let out_dir = match &args.out {
        Some(path) => path.clone(),
        None => output_root(None).join("tournament"),
    };
    std::fs::create_dir_all(&out_dir).map_err(|e| io_err(&out_dir, e))?;
    let matches_path = out_dir.join("matches.csv");
    write_match_log(
        &records,
        std::fs::File::create(&matches_path).map_err(|e| io_err(&matches_path, e))?,
    )
    .map_err(|e| CliError::Invalid(e.to_string()))?;
    let ratings_path = out_dir.join("ratings.csv");
    write_rating_report(
        &table,
        &records,
        std::fs::File::create(&ratings_path).map_err(|e| io_err(&ratings_path, e))?,
    )
    .map_err(|e| CliError::Invalid(e.to_string()))?;

    println!("{} games played; ratings:", records.len());
    for (player, elo) in table.sorted_desc() {
        println!("  {elo:8.1}  {player}");
    }
    println!("match log: {}", matches_path.display());
    println!("ratings:   {}", ratings_path.display());
    Ok(EXIT_OK)
}
