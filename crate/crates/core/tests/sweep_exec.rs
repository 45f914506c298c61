//! Sweep executor behavior at desk scale: manifests, resume idempotence,
//! stage-time accounting and the Pareto filter against its oracle.

mod common;

use common::pareto_flags_oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallzero_core::config::HyperParams;
use smallzero_core::games::{GameKind, GameSpec};
use smallzero_core::sweep::{
    execute, pareto_flags, pareto_front, time_report, write_results_table, SweepMode, SweepPlan,
    DEFAULT_SENSITIVITY_RATIO,
};

fn tiny_base() -> HyperParams {
    let mut p = HyperParams::default();
    for (k, v) in [
        ("I", "1"),
        ("E", "2"),
        ("m", "4"),
        ("rs", "2"),
        ("ep", "1"),
        ("bs", "32"),
        ("n", "2"),
        ("T_prime", "4"),
    ] {
        p.set_key(k, v).unwrap();
    }
    p.set_key("arena_enabled", "false").unwrap();
    p
}

fn tiny_plan() -> SweepPlan {
    SweepPlan {
        base: tiny_base(),
        axes: vec![("E".to_string(), vec![2.0, 4.0])],
        mode: SweepMode::OneFactor,
        repetitions: 1,
        seeds: vec![11],
    }
}

#[test]
fn execute_runs_and_resumes_idempotently() {
    let spec = GameSpec::new(GameKind::ConnectFour, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let plan = tiny_plan();
    let results = execute(&plan, spec, dir.path(), 2).unwrap();
    // Base setting plus the non-default E value.
    assert_eq!(results.len(), 2);
    for r in &results {
        assert!(r.checkpoint.exists());
        assert!(r.final_loss.is_finite());
        assert!(r.timings.total_secs() > 0.0);
    }

    let manifest: smallzero_core::sweep::SweepManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap())
            .unwrap();
    let stamps_before = manifest.completion_stamps();

    // Re-execution finds everything done and runs nothing.
    let again = execute(&plan, spec, dir.path(), 2).unwrap();
    assert_eq!(again.len(), 2);
    let manifest: smallzero_core::sweep::SweepManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap())
            .unwrap();
    assert_eq!(manifest.completion_stamps(), stamps_before);

    // A different plan in the same directory is rejected.
    let mut other = tiny_plan();
    other.seeds = vec![99];
    assert!(execute(&other, spec, dir.path(), 1).is_err());
}

#[test]
fn stage_times_account_for_the_total() {
    let spec = GameSpec::new(GameKind::ConnectFour, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut base = tiny_base();
    base.set_key("E", "4").unwrap();
    base.set_key("m", "12").unwrap();
    base.set_key("I", "2").unwrap();
    base.set_key("arena_enabled", "true").unwrap();
    base.set_key("n", "2").unwrap();
    let plan = SweepPlan {
        base,
        axes: vec![],
        mode: SweepMode::OneFactor,
        repetitions: 1,
        seeds: vec![5],
    };
    let results = execute(&plan, spec, dir.path(), 1).unwrap();
    let t = &results[0].timings;
    let total = t.total_secs();
    let parts = t.stage_sum_secs();
    assert!(
        (total - parts).abs() < 0.01 * total,
        "stage times {parts:.4}s vs total {total:.4}s"
    );
    assert!(t.selfplay_secs() > 0.0 && t.training_secs() > 0.0 && t.arena_secs() > 0.0);
}

#[test]
fn more_simulations_cost_more_selfplay_time() {
    let spec = GameSpec::new(GameKind::ConnectFour, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut base = tiny_base();
    base.set_key("E", "4").unwrap();
    base.set_key("m", "25").unwrap();
    let plan = SweepPlan {
        base,
        axes: vec![("m".to_string(), vec![25.0, 50.0])],
        mode: SweepMode::OneFactor,
        repetitions: 1,
        seeds: vec![3],
    };
    let results = execute(&plan, spec, dir.path(), 1).unwrap();
    let time_at = |m: u64| {
        results
            .iter()
            .find(|r| r.params.simulations == m)
            .unwrap()
            .timings
            .selfplay_secs()
    };
    assert!(
        time_at(50) > time_at(25),
        "doubling m must increase self-play time: {} vs {}",
        time_at(50),
        time_at(25)
    );
}

#[test]
fn failed_runs_are_recorded_and_do_not_stop_the_sweep() {
    let spec = GameSpec::new(GameKind::ConnectFour, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let plan = tiny_plan();
    // Make the second run directory unusable (a file where the run dir
    // should be) so that run fails while the others complete.
    std::fs::create_dir_all(dir.path().join("runs")).unwrap();
    std::fs::write(dir.path().join("runs").join("s001_r00"), b"blocker").unwrap();
    let results = execute(&plan, spec, dir.path(), 1).unwrap();
    assert_eq!(results.len(), 1, "one run fails, one completes");
    let manifest: smallzero_core::sweep::SweepManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap())
            .unwrap();
    let failed = manifest.failed_runs();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].0, "s001_r00");
}

#[test]
fn results_table_has_stable_columns() {
    let spec = GameSpec::new(GameKind::ConnectFour, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let results = execute(&tiny_plan(), spec, dir.path(), 2).unwrap();
    let mut csv = Vec::new();
    write_results_table(&results, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with(
        "run,seed,I,E,T_prime,m,c,rs,ep,bs,lr,d,n,u,selfplay_secs,training_secs,arena_secs,total_secs,final_loss,elo\n"
    ));
    assert_eq!(text.lines().count(), 1 + results.len());
}

#[test]
fn one_factor_time_report_classifies_episode_count() {
    let spec = GameSpec::new(GameKind::ConnectFour, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut base = tiny_base();
    base.set_key("E", "4").unwrap();
    base.set_key("m", "12").unwrap();
    let plan = SweepPlan {
        base,
        axes: vec![("E".to_string(), vec![2.0, 4.0, 12.0])],
        mode: SweepMode::OneFactor,
        repetitions: 1,
        seeds: vec![8],
    };
    let results = execute(&plan, spec, dir.path(), 1).unwrap();
    let rows = time_report(&results, DEFAULT_SENSITIVITY_RATIO);
    let row = rows.iter().find(|r| r.param == "E").unwrap();
    assert_eq!(row.min_value, 2.0);
    assert_eq!(row.max_value, 12.0);
    assert!(row.max_secs > row.min_secs, "6x the episodes must cost more");
    assert_eq!(row.class, smallzero_core::sweep::TimeClass::TimeSensitive);
}

#[test]
fn pareto_matches_oracle_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for _ in 0..300 {
        let n = rng.random_range(0..80);
        let points: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                (
                    rng.random_range(0..500) as f64 / 7.0,
                    900.0 + rng.random_range(0..500) as f64,
                )
            })
            .collect();
        assert_eq!(pareto_flags(&points), pareto_flags_oracle(&points));
        // The front is sorted by time and contains no dominated point.
        let front = pareto_front(&points);
        for pair in front.windows(2) {
            assert!(pair[0].0 <= pair[1].0);
        }
    }
}
