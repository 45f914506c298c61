//! Playing agents: the search-backed model player and the seedable
//! uniform-random player, plus match runners shared by the arena, model
//! evaluation and tournaments.

use super::SelfplayError;
use crate::games::{GameState, Outcome, Player};
use crate::mcts::{self, SearchConfig};
use crate::net::Network;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// A move-selection policy. Implementations must be safe to call from
/// concurrent games; any randomness comes from the per-game rng passed in.
pub trait Agent: Send + Sync {
    fn select_move(&self, state: &GameState, rng: &mut ChaCha8Rng) -> Result<usize, SelfplayError>;
}

/// Plays the argmax of the MCTS policy (greedy, deterministic).
pub struct MctsAgent {
    net: Arc<Network<f32>>,
    config: SearchConfig,
}

impl MctsAgent {
    pub fn new(net: Arc<Network<f32>>, config: SearchConfig) -> MctsAgent {
        MctsAgent { net, config }
    }

    pub fn network(&self) -> &Network<f32> {
        &self.net
    }
}

impl Agent for MctsAgent {
    fn select_move(&self, state: &GameState, _rng: &mut ChaCha8Rng) -> Result<usize, SelfplayError> {
        let pi = mcts::search(state, &self.net, &self.config)?;
        Ok(mcts::argmax_tie_lowest(&pi))
    }
}

/// Uniform over the legal actions.
pub struct RandomAgent;

impl Agent for RandomAgent {
    fn select_move(&self, state: &GameState, rng: &mut ChaCha8Rng) -> Result<usize, SelfplayError> {
        let actions = state.legal_action_indices()?;
        Ok(actions[rng.random_range(0..actions.len())])
    }
}

/// Plays one game to termination; `p1` moves first. Returns the outcome and
/// the number of plies played.
pub fn play_single_game(
    p1: &dyn Agent,
    p2: &dyn Agent,
    start: &GameState,
    seed: u64,
) -> Result<(Outcome, u32), SelfplayError> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = start.clone();
    let mut moves = 0u32;
    loop {
        let outcome = state.outcome();
        if outcome.is_terminal() {
            return Ok((outcome, moves));
        }
        let agent = match state.to_move() {
            Player::P1 => p1,
            Player::P2 => p2,
        };
        let action = agent.select_move(&state, &mut rng)?;
        state = state.apply(action)?;
        moves += 1;
    }
}

/// Match results from agent A's point of view.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchTally {
    pub wins: u64,
    pub draws: u64,
    pub losses: u64,
    /// Per-game scores for A (1, 0.5, 0) in play order.
    pub game_scores: Vec<f64>,
}

impl MatchTally {
    fn record(&mut self, score: f64) {
        match score {
            s if s == 1.0 => self.wins += 1,
            s if s == 0.0 => self.losses += 1,
            _ => self.draws += 1,
        }
        self.game_scores.push(score);
    }
}

/// Plays `games` games between A and B with colors alternating game by game:
/// A takes P1 in even-indexed games, so A plays ceil(games/2) times as P1.
/// Game seeds are paired across the color swap, so two deterministic agents
/// produce a tally symmetric under color exchange.
pub fn play_match(
    a: &dyn Agent,
    b: &dyn Agent,
    start: &GameState,
    games: u64,
    base_seed: u64,
) -> Result<MatchTally, SelfplayError> {
    let mut tally = MatchTally::default();
    for game in 0..games {
        let seed = super::derive_seed(base_seed, game / 2, 0, 0xA1);
        let a_is_p1 = game % 2 == 0;
        let (outcome, _) = if a_is_p1 {
            play_single_game(a, b, start, seed)?
        } else {
            play_single_game(b, a, start, seed)?
        };
        let a_player = if a_is_p1 { Player::P1 } else { Player::P2 };
        let score = match outcome.value_for(a_player) {
            v if v > 0.0 => 1.0,
            v if v < 0.0 => 0.0,
            _ => 0.5,
        };
        tally.record(score);
    }
    Ok(tally)
}
