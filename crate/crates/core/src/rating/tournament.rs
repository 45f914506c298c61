//! Round-robin scheduling and the tournament CSV formats.

use super::{EloTable, MatchRecord};
use crate::games::{GameState, Player};
use crate::selfplay::{derive_seed, play_single_game, Agent, SelfplayError};
use std::collections::BTreeMap;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Plays every unordered pair for `rounds` rounds with
/// `games_per_pair_per_round` games each; colors alternate within a pair's
/// games. Total records = C(players, 2) * rounds * games_per_pair_per_round,
/// merged in schedule order regardless of `parallelism`.
pub fn round_robin(
    players: &[(String, Box<dyn Agent>)],
    start: &GameState,
    rounds: usize,
    games_per_pair_per_round: usize,
    base_seed: u64,
    parallelism: usize,
) -> Result<Vec<MatchRecord>, SelfplayError> {
    assert!(players.len() >= 2, "a round robin needs at least 2 players");
    struct Job {
        pair_index: usize,
        a: usize,
        b: usize,
        round: usize,
        game: usize,
        seed: u64,
        a_is_p1: bool,
    }
    let mut jobs = Vec::new();
    let mut pair_index = 0usize;
    for a in 0..players.len() {
        for b in (a + 1)..players.len() {
            for round in 0..rounds {
                for game in 0..games_per_pair_per_round {
                    let ordinal = (round * games_per_pair_per_round + game) as u64;
                    jobs.push(Job {
                        pair_index,
                        a,
                        b,
                        round,
                        game,
                        seed: derive_seed(base_seed, pair_index as u64, ordinal, 0xB2),
                        a_is_p1: ordinal % 2 == 0,
                    });
                }
            }
            pair_index += 1;
        }
    }

    let game_kind = start.spec().kind;
    let play = |job: &Job| -> Result<MatchRecord, SelfplayError> {
        let (id_a, agent_a) = &players[job.a];
        let (id_b, agent_b) = &players[job.b];
        let (p1, p2): (&dyn Agent, &dyn Agent) = if job.a_is_p1 {
            (agent_a.as_ref(), agent_b.as_ref())
        } else {
            (agent_b.as_ref(), agent_a.as_ref())
        };
        let (outcome, moves) = play_single_game(p1, p2, start, job.seed)?;
        let a_player = if job.a_is_p1 { Player::P1 } else { Player::P2 };
        let score_a = match outcome.value_for(a_player) {
            v if v > 0.0 => 1.0,
            v if v < 0.0 => 0.0,
            _ => 0.5,
        };
        Ok(MatchRecord {
            pair_index: job.pair_index,
            round: job.round,
            game: job.game,
            player_a: id_a.clone(),
            player_b: id_b.clone(),
            score_a,
            game_kind,
            seed: job.seed,
            moves,
        })
    };

    if parallelism <= 1 {
        return jobs.iter().map(play).collect();
    }
    let slots: Vec<Mutex<Option<Result<MatchRecord, SelfplayError>>>> =
        jobs.iter().map(|_| Mutex::new(None)).collect();
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..parallelism.min(jobs.len()) {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                *slots[i].lock().unwrap() = Some(play(&jobs[i]));
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("job completed"))
        .collect()
}

/// Match log CSV: `pair_index,round,game,player_a,player_b,score_a,seed`.
pub fn write_match_log<W: Write>(records: &[MatchRecord], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["pair_index", "round", "game", "player_a", "player_b", "score_a", "seed"])?;
    for r in records {
        w.write_record([
            r.pair_index.to_string(),
            r.round.to_string(),
            r.game.to_string(),
            r.player_a.clone(),
            r.player_b.clone(),
            r.score_a.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Rating report CSV: `player,games,wins,draws,losses,elo`, sorted by Elo
/// descending.
pub fn write_rating_report<W: Write>(
    table: &EloTable,
    records: &[MatchRecord],
    writer: W,
) -> csv::Result<()> {
    #[derive(Default, Clone)]
    struct Line {
        games: u64,
        wins: u64,
        draws: u64,
        losses: u64,
    }
    let mut stats: BTreeMap<&str, Line> = BTreeMap::new();
    for r in records {
        let a = stats.entry(r.player_a.as_str()).or_default();
        a.games += 1;
        match r.score_a {
            s if s == 1.0 => a.wins += 1,
            s if s == 0.0 => a.losses += 1,
            _ => a.draws += 1,
        }
        let b = stats.entry(r.player_b.as_str()).or_default();
        b.games += 1;
        match r.score_a {
            s if s == 1.0 => b.losses += 1,
            s if s == 0.0 => b.wins += 1,
            _ => b.draws += 1,
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["player", "games", "wins", "draws", "losses", "elo"])?;
    for (player, elo) in table.sorted_desc() {
        let line = stats.get(player.as_str()).cloned().unwrap_or_default();
        w.write_record([
            player.clone(),
            line.games.to_string(),
            line.wins.to_string(),
            line.draws.to_string(),
            line.losses.to_string(),
            format!("{elo:.2}"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{GameKind, GameSpec};
    use crate::rating::fit_mle_elo;
    use crate::selfplay::RandomAgent;

    fn stub_players(n: usize) -> Vec<(String, Box<dyn Agent>)> {
        (0..n)
            .map(|i| (format!("p{i:02}"), Box::new(RandomAgent) as Box<dyn Agent>))
            .collect()
    }

    #[test]
    fn smallest_tournament_is_one_record() {
        let start = GameState::initial(GameSpec::new(GameKind::ConnectFour, 5).unwrap());
        let records = round_robin(&stub_players(2), &start, 1, 1, 7, 1).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].pair_index, 0);
    }

    #[test]
    fn record_counts_match_closed_form() {
        let start = GameState::initial(GameSpec::new(GameKind::ConnectFour, 5).unwrap());
        // 5 players, 3 rounds, 2 games per pair per round: C(5,2) = 10 pairs.
        let records = round_robin(&stub_players(5), &start, 3, 2, 7, 1).unwrap();
        assert_eq!(records.len(), 10 * 3 * 2);
        // Colors alternate within each pair across its scheduled games.
        let pair0: Vec<&MatchRecord> = records.iter().filter(|r| r.pair_index == 0).collect();
        assert_eq!(pair0.len(), 6);
        assert!(pair0.iter().all(|r| r.player_a == "p00" && r.player_b == "p01"));
    }

    #[test]
    fn parallel_execution_preserves_schedule_order() {
        let start = GameState::initial(GameSpec::new(GameKind::ConnectFour, 5).unwrap());
        let sequential = round_robin(&stub_players(4), &start, 2, 2, 99, 1).unwrap();
        let parallel = round_robin(&stub_players(4), &start, 2, 2, 99, 4).unwrap();
        assert_eq!(sequential, parallel);
    }

    #[test]
    fn csv_outputs_have_stable_headers() {
        let start = GameState::initial(GameSpec::new(GameKind::ConnectFour, 5).unwrap());
        let players = stub_players(3);
        let records = round_robin(&players, &start, 2, 1, 3, 1).unwrap();
        let ids: Vec<String> = players.iter().map(|(id, _)| id.clone()).collect();
        let table = fit_mle_elo(&ids, &records).unwrap();

        let mut log = Vec::new();
        write_match_log(&records, &mut log).unwrap();
        let log = String::from_utf8(log).unwrap();
        assert!(log.starts_with("pair_index,round,game,player_a,player_b,score_a,seed\n"));
        assert_eq!(log.lines().count(), 1 + records.len());

        let mut report = Vec::new();
        write_rating_report(&table, &records, &mut report).unwrap();
        let report = String::from_utf8(report).unwrap();
        assert!(report.starts_with("player,games,wins,draws,losses,elo\n"));
        assert_eq!(report.lines().count(), 1 + 3);
        // Sorted by Elo descending.
        let elos: Vec<f64> = report
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect();
        assert!(elos.windows(2).all(|w| w[0] >= w[1]));
    }
}
