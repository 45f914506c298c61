//! `smallzero`: train self-play models on small board games, sweep
//! hyper-parameters, pit checkpoints against each other and produce
//! plot-ready report tables.
//!
//! Exit codes: 0 success, 2 invalid configuration or input, 130 interrupted
//! (the partial run state is resumable).

mod commands;
mod runconfig;

use clap::{Parser, Subcommand};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "smallzero", version, about = "Self-play training on small board games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full self-play training pipeline for one configuration.
    Train(commands::train::TrainArgs),
    /// Execute a hyper-parameter sweep (one-factor table, correlation grid
    /// or a custom plan file).
    Sweep(commands::sweep::SweepArgs),
    /// Pit a challenger checkpoint against an incumbent.
    Arena(commands::arena::ArenaArgs),
    /// Round-robin tournament over checkpoints with a rating fit.
    Tournament(commands::tournament::TournamentArgs),
    /// Aggregate metrics, sweep results and ratings into plot-ready CSVs.
    Report(commands::report::ReportArgs),
}

static INTERRUPTED: AtomicBool = AtomicBool::new(false);

extern "C" fn on_sigint(_: libc::c_int) {
    INTERRUPTED.store(true, Ordering::SeqCst);
}

fn install_sigint_handler() -> Arc<AtomicBool> {
    unsafe {
        libc::signal(libc::SIGINT, on_sigint as libc::sighandler_t);
    }
    // Bridge the static flag into the Arc the pipeline polls.
    let flag = Arc::new(AtomicBool::new(false));
    let poll = flag.clone();
    std::thread::spawn(move || loop {
        if INTERRUPTED.load(Ordering::SeqCst) {
            poll.store(true, Ordering::SeqCst);
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(50));
    });
    flag
}

pub(crate) const EXIT_OK: i32 = 0;
pub(crate) const EXIT_BAD_INPUT: i32 = 2;
pub(crate) const EXIT_INTERRUPTED: i32 = 130;

fn main() {
    let cli = Cli::parse();
    let interrupt = install_sigint_handler();
    let result = match cli.command {
        Command::Train(args) => commands::train::run(args, interrupt),
        Command::Sweep(args) => commands::sweep::run(args),
        Command::Arena(args) => commands::arena::run(args),
        Command::Tournament(args) => commands::tournament::run(args),
        Command::Report(args) => commands::report::run(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(EXIT_BAD_INPUT);
        }
    }
}
