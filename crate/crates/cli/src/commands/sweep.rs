use crate::runconfig::{io_err, output_root, CliError};
use crate::EXIT_OK;
use clap::Args;
use smallzero_core::games::{GameKind, GameSpec};
use smallzero_core::sweep::{
    execute, plan_correlation_grid, plan_table1_sweep, write_results_table, SweepPlan,
};
use std::path::PathBuf;

#[derive(Args)]
pub struct SweepArgs {
    /// Plan selector: table1, correlation, or custom (with --plan).
    pub plan: String,
    /// Custom plan JSON file (for the `custom` selector).
    #[arg(long)]
    pub plan_file: Option<PathBuf>,
    #[arg(long)]
    pub game: String,
    #[arg(long)]
    pub size: u8,
    /// Scale budgets down for desk-scale experiments.
    #[arg(long)]
    pub desk_scale: bool,
    /// Repetitions per setting (seeds are seed_base..seed_base+reps).
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,
    /// Sweep directory (defaults under the output root).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Concurrent runs.
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    /// Write the plan and manifest without executing any run.
    #[arg(long)]
    pub dry_run: bool,
}

pub fn run(args: SweepArgs) -> Result<i32, CliError> {
    let game = GameKind::parse(&args.game).ok_or(CliError::UnknownGame(args.game.clone()))?;
    let spec = GameSpec::new(game, args.size).map_err(|e| CliError::Invalid(e.to_string()))?;

    let mut plan = match args.plan.as_str() {
        "table1" => plan_table1_sweep(),
        "correlation" => plan_correlation_grid(),
        "custom" => {
            let path = args.plan_file.as_ref().ok_or_else(|| {
                CliError::Invalid("the custom selector needs --plan-file <FILE>".to_string())
            })?;
            let json = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            SweepPlan::from_json(&json).map_err(|e| CliError::Invalid(e.to_string()))?
        }
        other => {
            return Err(CliError::Invalid(format!(
                "unknown plan `{other}` (expected table1, correlation or custom)"
            )))
        }
    };
    if args.desk_scale {
        plan = plan.desk_scale();
    }
    if let Some(reps) = args.repetitions {
        plan.repetitions = reps;
        plan.seeds = (0..reps as u64).map(|i| args.seed_base + i).collect();
    } else if args.seed_base != 0 {
        plan.seeds = (0..plan.repetitions as u64).map(|i| args.seed_base + i).collect();
    }
    plan.validate().map_err(|e| CliError::Invalid(e.to_string()))?;

    let settings = plan.settings().len();
    let total_runs = settings * plan.repetitions;
    println!(
        "{} settings x {} repetition(s) = {} run(s) scheduled for {} {}x{}",
        settings,
        plan.repetitions,
        total_runs,
        spec.kind.name(),
        spec.size,
        spec.size
    );

    let out_dir = match &args.out {
        Some(path) => path.clone(),
        None => output_root(None).join(format!("sweep-{}-{}{}", args.plan, spec.kind.name(), spec.size)),
    };

    if args.dry_run {
        std::fs::create_dir_all(&out_dir).map_err(|e| io_err(&out_dir, e))?;
        let plan_path = out_dir.join("plan.json");
        std::fs::write(
            &plan_path,
            serde_json::to_string_pretty(&plan).expect("plan serializes"),
        )
        .map_err(|e| io_err(&plan_path, e))?;
        println!("dry run: plan written to {}", plan_path.display());
        return Ok(EXIT_OK);
    }

    let results = execute(&plan, spec, &out_dir, args.parallelism.max(1))
        .map_err(|e| CliError::Invalid(e.to_string()))?;

    let csv_path = out_dir.join("results.csv");
    let file = std::fs::File::create(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    write_results_table(&results, file).map_err(|e| CliError::Invalid(e.to_string()))?;
    println!("{} run(s) complete; results in {}", results.len(), csv_path.display());

    let manifest: smallzero_core::sweep::SweepManifest = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("sweep.json")).map_err(|e| io_err(&out_dir, e))?,
    )
    .map_err(|e| CliError::Invalid(e.to_string()))?;
    for (run, message) in manifest.failed_runs() {
        eprintln!("run {run} failed: {message}");
    }
    Ok(EXIT_OK)
}
