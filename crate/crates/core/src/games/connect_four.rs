//! Connect Four rules on a square board, win length 4.
//!
//! Actions are column indices; a piece occupies the lowest empty row of its
//! column (row 0 is the bottom). First run of four in any direction wins; a
//! full board without a run is a draw.

use super::{find_run_winner, GameState, Outcome, Player};

/// Lowest empty row of `col`, if any.
fn drop_row(state: &GameState, col: usize) -> Option<usize> {
    (0..state.spec().size()).find(|&row| state.cell(row, col).is_none())
}

pub(super) fn legal_mask(state: &GameState) -> Vec<bool> {
    (0..state.spec().size())
        .map(|col| drop_row(state, col).is_some())
        .collect()
}

pub(super) fn apply(state: &mut GameState, action: usize) {
    let row = drop_row(state, action).expect("apply called on a full column");
    let idx = row * state.spec().size() + action;
    state.set_cell(idx, Some(state.to_move()));
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
