//! Strength measurement: the incremental Elo track used during training and
//! a maximum-likelihood Elo fit over round-robin tournament results.

mod mle;
mod tournament;

pub use mle::fit_mle_elo;
pub use tournament::{round_robin, write_match_log, write_rating_report};

use crate::games::GameKind;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RatingError {
    #[error("no players supplied")]
    NoPlayers,
    #[error("duplicate player id `{0}`")]
    DuplicatePlayer(String),
    #[error("match record references unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("match record pits `{0}` against itself")]
    SelfMatch(String),
    #[error("score {0} is not one of 1, 0.5, 0")]
    InvalidScore(f64),
    #[error("match graph is disconnected; components: {0}")]
    Disconnected(String),
    #[error("rating fit did not converge")]
    NonConvergence,
}

/// Expected score of player A against player B under the logistic Elo model:
/// `1 / (1 + 10^((R_B - R_A) / 400))`. Antisymmetric:
/// `expected_score(a, b) + expected_score(b, a) == 1`.
pub fn expected_score(r_a: f64, r_b: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((r_b - r_a) / 400.0))
}

/// Incremental Elo update `R_A + K * (S_A - E_A)`; the change is bounded by
/// `K` in absolute value.
pub fn incremental_update(r_a: f64, e_a: f64, s_a: f64, k: f64) -> f64 {
    r_a + k * (s_a - e_a)
}

/// One tournament game result. `score_a` is player A's score: 1 win, 0.5
/// draw, 0 loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub pair_index: usize,
    pub round: usize,
    pub game: usize,
    pub player_a: String,
    pub player_b: String,
    pub score_a: f64,
    pub game_kind: GameKind,
    pub seed: u64,
    pub moves: u32,
}

/// Fitted ratings, anchored so the mean is 1000.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EloTable {
    ratings: BTreeMap<String, f64>,
}

impl EloTable {
    pub(crate) fn from_ratings(ratings: BTreeMap<String, f64>) -> EloTable {
        EloTable { ratings }
    }

    pub fn get(&self, player: &str) -> Option<f64> {
        self.ratings.get(player).copied()
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, f64)> {
        self.ratings.iter().map(|(k, &v)| (k, v))
    }

    /// Players sorted by rating, strongest first (ties by id for stability).
    pub fn sorted_desc(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self.ratings.iter().map(|(k, &v)| (k.clone(), v)).collect();
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        out
    }
}

/// Incremental Elo over the arena games of each training iteration.
///
/// The challenger starts each iteration at the current best model's rating
/// (it is a fine-tuned copy of it); both ratings evolve per game by the
/// incremental update; the accepted model's rating carries forward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EloTrack {
    k: f64,
    best: f64,
}

impl EloTrack {
    pub const INITIAL_RATING: f64 = 1000.0;
    pub const DEFAULT_K: f64 = 32.0;

    pub fn new(k: f64) -> EloTrack {
        EloTrack {
            k,
            best: Self::INITIAL_RATING,
        }
    }

    pub fn with_rating(k: f64, rating: f64) -> EloTrack {
        EloTrack { k, best: rating }
    }

    pub fn best_rating(&self) -> f64 {
        self.best
    }

    /// Feeds one iteration's arena games (challenger scores in play order)
    /// through the update rule. Returns (incumbent, challenger) ratings after
    /// the games; the winner of the gate inherits its rating as the new best.
    pub fn on_iteration(&mut self, challenger_scores: &[f64], accepted: bool) -> (f64, f64) {
        let mut challenger = self.best;
        let mut incumbent = self.best;
        for &score in challenger_scores {
            let expected = expected_score(challenger, incumbent);
            let updated_challenger = incremental_update(challenger, expected, score, self.k);
            incumbent = incremental_update(incumbent, 1.0 - expected, 1.0 - score, self.k);
            challenger = updated_challenger;
        }
        self.best = if accepted { challenger } else { incumbent };
        (incumbent, challenger)
    }
}
