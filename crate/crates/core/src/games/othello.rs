//! Othello rules.
//!
//! A placement is legal iff it flips at least one opponent piece along a
//! straight line bounded by the placed piece and another own piece. A player
//! with no flipping placement must play the explicit pass action (index
//! `size * size`). The game ends when neither player has a flipping
//! placement; the higher piece count wins, equal counts draw.

use super::{GameState, Outcome, Player};

const DIRS: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Cells flipped by `player` placing at (row, col); empty if the placement
/// does not flip anything (and is therefore illegal).
fn flips_at(state: &GameState, player: Player, row: usize, col: usize) -> Vec<usize> {
    let s = state.spec().size() as isize;
    if state.cell(row, col).is_some() {
        return Vec::new();
    }
    let mut flips = Vec::new();
    for (dr, dc) in DIRS {
        let mut line = Vec::new();
        let (mut r, mut c) = (row as isize + dr, col as isize + dc);
        while r >= 0 && r < s && c >= 0 && c < s {
            match state.cell(r as usize, c as usize) {
                Some(p) if p == player.opponent() => line.push((r * s + c) as usize),
                Some(_) => {
                    flips.extend_from_slice(&line);
                    break;
                }
                None => break,
            }
            r += dr;
            c += dc;
        }
    }
    flips
}

fn has_placement(state: &GameState, player: Player) -> bool {
    let s = state.spec().size();
    (0..s).any(|row| (0..s).any(|col| !flips_at(state, player, row, col).is_empty()))
}

pub(super) fn legal_mask(state: &GameState) -> Vec<bool> {
    let s = state.spec().size();
    let mut mask = vec![false; state.spec().action_space_size()];
    let mut any = false;
    for row in 0..s {
        for col in 0..s {
            if !flips_at(state, state.to_move(), row, col).is_empty() {
                mask[row * s + col] = true;
                any = true;
            }
        }
    }
    // Pass is legal exactly when no placement flips.
    mask[s * s] = !any;
    mask
}

pub(super) fn apply(state: &mut GameState, action: usize) {
    let s = state.spec().size();
    if action == s * s {
        return; // pass
    }
    let player = state.to_move();
    let (row, col) = (action / s, action % s);
    let flips = flips_at(state, player, row, col);
    debug_assert!(!flips.is_empty(), "apply called with a non-flipping placement");
    state.set_cell(action, Some(player));
    for idx in flips {
        state.set_cell(idx, Some(player));
    }
}

pub(super) fn outcome(state: &GameState) -> Outcome {
    if has_placement(state, state.to_move()) || has_placement(state, state.to_move().opponent()) {
        return Outcome::Ongoing;
    }
    let p1 = state.piece_count(Player::P1);
    let p2 = state.piece_count(Player::P2);
    match p1.cmp(&p2) {
        std::cmp::Ordering::Greater => Outcome::P1Wins,
        std::cmp::Ordering::Less => Outcome::P2Wins,
        std::cmp::Ordering::Equal => Outcome::Draw,
    }
}
