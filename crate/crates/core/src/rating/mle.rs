//! Maximum-likelihood Elo over a body of match results.
//!
//! Ratings are fitted under the logistic pairwise model by
//! minorization-maximization on Bradley-Terry strengths
//! (`gamma = 10^(R/400)`), with draws counted as half a win plus half a
//! loss. One virtual drawn game is added between every pair that actually
//! played, a conjugate-style smoothing prior that keeps ratings finite on
//! perfect scores. The fitted table is anchored to mean rating 1000.

use super::{EloTable, MatchRecord, RatingError};
use std::collections::BTreeMap;

const MAX_SWEEPS: usize = 200_000;
const TOLERANCE_ELO: f64 = 1e-6;

pub fn fit_mle_elo(players: &[String], records: &[MatchRecord]) -> Result<EloTable, RatingError> {
    if players.is_empty() {
        return Err(RatingError::NoPlayers);
    }
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, p) in players.iter().enumerate() {
        if index.insert(p.as_str(), i).is_some() {
            return Err(RatingError::DuplicatePlayer(p.clone()));
        }
    }
    let n = players.len();

    // Effective wins w[i][j] of i over j and games per pair.
    let mut wins = vec![vec![0.0f64; n]; n];
    let mut games = vec![vec![0.0f64; n]; n];
    for record in records {
        let a = *index
            .get(record.player_a.as_str())
            .ok_or_else(|| RatingError::UnknownPlayer(record.player_a.clone()))?;
        let b = *index
            .get(record.player_b.as_str())
            .ok_or_else(|| RatingError::UnknownPlayer(record.player_b.clone()))?;
        if a == b {
            return Err(RatingError::SelfMatch(record.player_a.clone()));
        }
        if ![1.0, 0.5, 0.0].contains(&record.score_a) {
            return Err(RatingError::InvalidScore(record.score_a));
        }
        wins[a][b] += record.score_a;
        wins[b][a] += 1.0 - record.score_a;
        games[a][b] += 1.0;
        games[b][a] += 1.0;
    }

    if n == 1 {
        let mut ratings = BTreeMap::new();
        ratings.insert(players[0].clone(), 1000.0);
        return Ok(EloTable::from_ratings(ratings));
    }

    check_connected(players, &games)?;

    // Smoothing prior: one virtual draw on every played pair.
    for i in 0..n {
        for j in (i + 1)..n {
            if games[i][j] > 0.0 {
                games[i][j] += 1.0;
                games[j][i] += 1.0;
                wins[i][j] += 0.5;
                wins[j][i] += 0.5;
            }
        }
    }

    let total_wins: Vec<f64> = (0..n).map(|i| wins[i].iter().sum()).collect();
    let mut gamma = vec![1.0f64; n];
    let mut elo = vec![0.0f64; n];
    for sweep in 0..MAX_SWEEPS {
        // Minorization-maximization update on the strengths.
        let mut next = vec![0.0f64; n];
        for i in 0..n {
            let mut denom = 0.0;
            for j in 0..n {
                if games[i][j] > 0.0 {
                    denom += games[i][j] / (gamma[i] + gamma[j]);
                }
            }
            next[i] = total_wins[i] / denom;
        }
        // Renormalize to geometric mean 1 to pin the gauge freedom.
        let log_mean = next.iter().map(|g| g.ln()).sum::<f64>() / n as f64;
        for g in &mut next {
            *g = (g.ln() - log_mean).exp();
        }
        gamma = next;

        let new_elo: Vec<f64> = gamma.iter().map(|g| 400.0 * g.log10()).collect();
        let max_change = new_elo
            .iter()
            .zip(&elo)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        elo = new_elo;
        if sweep > 0 && max_change < TOLERANCE_ELO {
            let mean = elo.iter().sum::<f64>() / n as f64;
            let ratings = players
                .iter()
                .zip(&elo)
                .map(|(p, r)| (p.clone(), r - mean + 1000.0))
                .collect();
            return Ok(EloTable::from_ratings(ratings));
        }
    }
    Err(RatingError::NonConvergence)
}

fn check_connected(players: &[String], games: &[Vec<f64>]) -> Result<(), RatingError> {
    let n = players.len();
    let mut component = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = count;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if games[i][j] > 0.0 && component[j] == usize::MAX {
                    component[j] = count;
                    stack.push(j);
                }
            }
        }
        count += 1;
    }
    if count > 1 {
        let mut groups: Vec<Vec<&str>> = vec![Vec::new(); count];
        for (i, &c) in component.iter().enumerate() {
            groups[c].push(players[i].as_str());
        }
        let description = groups
            .iter()
            .map(|g| format!("[{}]", g.join(", ")))
            .collect::<Vec<_>>()
            .join(" ");
        return Err(RatingError::Disconnected(description));
    }
    Ok(())
}
