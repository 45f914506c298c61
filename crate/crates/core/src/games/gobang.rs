//! Gobang rules: free placement on empty cells, win length 4.
//!
//! An unbroken chain of four stones horizontally, vertically or diagonally
//! wins (longer chains count too); a full board without one is a draw.

use super::{find_run_winner, GameState, Outcome, Player};

pub(super) fn legal_mask(state: &GameState) -> Vec<bool> {
    state.cells().iter().map(|c| c.is_none()).collect()
}

pub(super) fn apply(state: &mut GameState, action: usize) {
    debug_assert!(state.cells()[action].is_none());
    state.set_cell(action, Some(state.to_move()));
}

pub(super) fn outcome(state: &GameState) -> Outcome {
    let win_length = state.spec().win_length().unwrap();
    if let Some(winner) = find_run_winner(state, win_length) {
        return match winner {
            Player::P1 => Outcome::P1Wins,
            Player::P2 => Outcome::P2Wins,
        };
    }
    if state.cells().iter().all(|c| c.is_some()) {
        Outcome::Draw
    } else {
        Outcome::Ongoing
    }
}
