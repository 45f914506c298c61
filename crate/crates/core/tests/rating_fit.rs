//! Rating-fit statistics: recovery of known gaps from synthetic data and
//! scheduler arithmetic at moderate scale.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallzero_core::games::GameKind;
use smallzero_core::rating::{expected_score, fit_mle_elo, MatchRecord};

fn synthetic_records(
    r_a: f64,
    r_b: f64,
    games: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<MatchRecord> {
    let p_a = expected_score(r_a, r_b);
    (0..games)
        .map(|i| MatchRecord {
            pair_index: 0,
            round: 0,
            game: i,
            player_a: "a".to_string(),
            player_b: "b".to_string(),
            score_a: if rng.random::<f64>() < p_a { 1.0 } else { 0.0 },
            game_kind: GameKind::Othello,
            seed: i as u64,
            moves: 30,
        })
        .collect()
}

#[test]
fn fit_recovers_synthetic_gaps() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for gap in [0.0, 100.0, 200.0, 400.0] {
        let records = synthetic_records(1200.0 + gap, 1200.0, 2000, &mut rng);
        let table = fit_mle_elo(&["a".to_string(), "b".to_string()], &records).unwrap();
        let fitted = table.get("a").unwrap() - table.get("b").unwrap();
        assert!(
            (fitted - gap).abs() <= 25.0,
            "true gap {gap}, fitted {fitted:.1}"
        );
    }
}

#[test]
fn fit_is_invariant_to_which_side_is_listed_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut records = synthetic_records(1300.0, 1100.0, 400, &mut rng);
    let table_ab = fit_mle_elo(&["a".to_string(), "b".to_string()], &records).unwrap();
    // Swap the roles in every record.
    for r in &mut records {
        std::mem::swap(&mut r.player_a, &mut r.player_b);
        r.score_a = 1.0 - r.score_a;
    }
    let table_ba = fit_mle_elo(&["a".to_string(), "b".to_string()], &records).unwrap();
    assert!((table_ab.get("a").unwrap() - table_ba.get("a").unwrap()).abs() < 1e-6);
}

#[test]
fn multi_player_fit_orders_by_strength() {
    // Four players with true ratings 1150, 1050, 950, 850 in a full round
    // robin; the fitted order must match the true order.
    let truth = [("p0", 1150.0), ("p1", 1050.0), ("p2", 950.0), ("p3", 850.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut records = Vec::new();
    let mut pair = 0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let p_i = expected_score(truth[i].1, truth[j].1);
            for g in 0..600 {
                records.push(MatchRecord {
                    pair_index: pair,
                    round: 0,
                    game: g,
                    player_a: truth[i].0.to_string(),
                    player_b: truth[j].0.to_string(),
                    score_a: if rng.random::<f64>() < p_i { 1.0 } else { 0.0 },
                    game_kind: GameKind::Gobang,
                    seed: g as u64,
                    moves: 12,
                });
            }
            pair += 1;
        }
    }
    let ids: Vec<String> = truth.iter().map(|(n, _)| n.to_string()).collect();
    let table = fit_mle_elo(&ids, &records).unwrap();
    let sorted = table.sorted_desc();
    let order: Vec<&str> = sorted.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(order, vec!["p0", "p1", "p2", "p3"]);
    // Gap recovery within tolerance on the extremes.
    let spread = table.get("p0").unwrap() - table.get("p3").unwrap();
    assert!((spread - 300.0).abs() < 40.0, "spread {spread:.1}");
}
