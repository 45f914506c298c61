//! Test oracles independent of the library's rule implementations: a
//! straightforward re-derivation of move legality and outcomes from the game
//! definitions, a memoized negamax solver, tactical position generators and
//! a quadratic Pareto filter.

#![allow(dead_code)]

use rand::prelude::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smallzero_core::games::{GameKind, GameSpec, GameState, Outcome, Player};
use smallzero_core::selfplay::{Agent, SelfplayError};
use std::collections::HashMap;

fn cell(state: &GameState, r: isize, c: isize) -> Option<Option<Player>> {
    let s = state.spec().size() as isize;
    if r < 0 || r >= s || c < 0 || c >= s {
        return None;
    }
    Some(state.cell(r as usize, c as usize))
}

/// Oracle: all lines of `len` cells on the board (every start cell, every
/// direction), used to re-derive run detection from first principles.
fn lines(size: usize, len: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let s = size as isize;
    for r in 0..s {
        for c in 0..s {
            for (dr, dc) in [(0isize, 1isize), (1, 0), (1, 1), (1, -1)] {
                let (er, ec) = (r + dr * (len as isize - 1), c + dc * (len as isize - 1));
                if er < 0 || er >= s || ec < 0 || ec >= s {
                    continue;
                }
                out.push(
                    (0..len as isize)
                        .map(|k| ((r + dr * k) as usize, (c + dc * k) as usize))
                        .collect(),
                );
            }
        }
    }
    out
}

fn run_winner_oracle(state: &GameState, len: usize) -> Option<Player> {
    for line in lines(state.spec().size(), len) {
        if let Some(p) = state.cell(line[0].0, line[0].1) {
            if line.iter().all(|&(r, c)| state.cell(r, c) == Some(p)) {
                return Some(p);
            }
        }
    }
    None
}

fn othello_flips_oracle(state: &GameState, player: Player, r: usize, c: usize) -> usize {
    if state.cell(r, c).is_some() {
        return 0;
    }
    let mut flips = 0;
    for dr in -1isize..=1 {
        for dc in -1isize..=1 {
            if dr == 0 && dc == 0 {
                continue;
            }
            let mut k = 1;
            let mut seen = 0;
            loop {
                match cell(state, r as isize + dr * k, c as isize + dc * k) {
                    Some(Some(p)) if p == player.opponent() => seen += 1,
                    Some(Some(_)) => {
                        flips += seen;
                        break;
                    }
                    _ => break,
                }
                k += 1;
            }
        }
    }
    flips
}

fn othello_has_move_oracle(state: &GameState, player: Player) -> bool {
    let s = state.spec().size();
    (0..s).any(|r| (0..s).any(|c| othello_flips_oracle(state, player, r, c) > 0))
}

/// Independent legality oracle over the whole action space.
pub fn legal_mask_oracle(state: &GameState) -> Vec<bool> {
    let spec = state.spec();
    let s = spec.size();
    match spec.kind {
        GameKind::Othello => {
            let mut mask = vec![false; spec.action_space_size()];
            let mut any = false;
            for r in 0..s {
                for c in 0..s {
                    if othello_flips_oracle(state, state.to_move(), r, c) > 0 {
                        mask[r * s + c] = true;
                        any = true;
                    }
                }
            }
            mask[s * s] = !any;
            mask
        }
        GameKind::ConnectFour => (0..s)
            .map(|col| (0..s).any(|row| state.cell(row, col).is_none()))
            .collect(),
        GameKind::Gobang => (0..spec.cell_count())
            .map(|i| state.cells()[i].is_none())
            .collect(),
    }
}

/// Independent outcome oracle.
pub fn outcome_oracle(state: &GameState) -> Outcome {
    let spec = state.spec();
    match spec.kind {
        GameKind::Othello => {
            if othello_has_move_oracle(state, Player::P1) || othello_has_move_oracle(state, Player::P2)
            {
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
        GameKind::ConnectFour | GameKind::Gobang => {
            match run_winner_oracle(state, spec.win_length().unwrap()) {
                Some(Player::P1) => Outcome::P1Wins,
                Some(Player::P2) => Outcome::P2Wins,
                None => {
                    if state.cells().iter().all(|c| c.is_some()) {
                        Outcome::Draw
                    } else {
                        Outcome::Ongoing
                    }
                }
            }
        }
    }
}

/// Random-playout position stream (includes terminal positions).
pub fn random_positions(spec: GameSpec, seed: u64, count: usize) -> Vec<GameState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    'outer: loop {
        let mut state = GameState::initial(spec);
        loop {
            out.push(state.clone());
            if out.len() >= count {
                break 'outer;
            }
            if state.is_terminal() {
                break;
            }
            let actions = state.legal_action_indices().unwrap();
            state = state.apply(*actions.choose(&mut rng).unwrap()).unwrap();
        }
    }
    out
}

/// Memoized negamax over full game trees. Value is from the perspective of
/// the player to move: +1 win, 0 draw, -1 loss.
pub struct Minimax {
    memo: HashMap<(Vec<Option<Player>>, Player), i8>,
}

impl Minimax {
    pub fn new() -> Minimax {
        Minimax {
            memo: HashMap::new(),
        }
    }

    pub fn value(&mut self, state: &GameState) -> i8 {
        let outcome = state.outcome();
        if outcome.is_terminal() {
            return outcome.value_for(state.to_move()) as i8;
        }
        let key = (state.cells().to_vec(), state.to_move());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let mut best = -2i8;
        for action in state.legal_action_indices().unwrap() {
            let v = -self.value(&state.apply(action).unwrap());
            if v > best {
                best = v;
                if best == 1 {
                    break;
                }
            }
        }
        self.memo.insert(key, best);
        best
    }

    /// One of the optimal moves (lowest index among maximizers).
    pub fn best_move(&mut self, state: &GameState) -> usize {
        let mut best_action = usize::MAX;
        let mut best = -2i8;
        for action in state.legal_action_indices().unwrap() {
            let v = -self.value(&state.apply(action).unwrap());
            if v > best {
                best = v;
                best_action = action;
            }
        }
        best_action
    }

    /// Depth-limited check that the side to move has an immediate win.
    pub fn winning_moves(&mut self, state: &GameState) -> Vec<usize> {
        state
            .legal_action_indices()
            .unwrap()
            .into_iter()
            .filter(|&a| {
                let next = state.apply(a).unwrap();
                next.outcome().value_for(state.to_move()) > 0.0
            })
            .collect()
    }
}

/// Plays optimally via full negamax; usable as a tournament/arena agent.
pub struct MinimaxAgent {
    solver: std::sync::Mutex<Minimax>,
}

impl MinimaxAgent {
    pub fn new() -> MinimaxAgent {
        MinimaxAgent {
            solver: std::sync::Mutex::new(Minimax::new()),
        }
    }
}

impl Agent for MinimaxAgent {
    fn select_move(&self, state: &GameState, _rng: &mut ChaCha8Rng) -> Result<usize, SelfplayError> {
        Ok(self.solver.lock().unwrap().best_move(state))
    }
}

/// Positions with at least one immediate winning move for the side to move,
/// sampled from random playouts and verified against the negamax oracle.
pub fn win_in_one_positions(spec: GameSpec, seed: u64, count: usize) -> Vec<(GameState, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut solver = Minimax::new();
    let mut out = Vec::new();
    while out.len() < count {
        let mut state = GameState::initial(spec);
        while !state.is_terminal() {
            let wins = solver.winning_moves(&state);
            if !wins.is_empty() {
                out.push((state.clone(), wins));
                break;
            }
            let actions = state.legal_action_indices().unwrap();
            state = state.apply(*actions.choose(&mut rng).unwrap()).unwrap();
        }
    }
    out
}

/// Quadratic non-dominated filter used as the Pareto oracle.
pub fn pareto_flags_oracle(points: &[(f64, f64)]) -> Vec<bool> {
    points
        .iter()
        .map(|&(t, e)| {
            !points
                .iter()
                .any(|&(ot, oe)| ot <= t && oe >= e && (ot < t || oe > e))
        })
        .collect()
}
