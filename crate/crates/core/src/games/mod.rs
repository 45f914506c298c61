//! Rule engines for Othello, Connect Four and Gobang at 5x5 and 6x6 board
//! sizes, behind one `GameSpec`/`GameState` interface.
//!
//! States are immutable values: every operation is a pure function, so states
//! can be shared freely across concurrent searches and episodes.
//!
//! Action notation (integer indices):
//! - Othello: cell index `row * size + col` (row-major), pass = `size * size`.
//! - Connect Four: column index, `0..size`. Row 0 is the bottom row.
//! - Gobang: cell index `row * size + col`.

mod connect_four;
mod gobang;
mod othello;
pub mod symmetry;

pub use symmetry::Transform;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid board size {0}: supported sizes are 5 and 6")]
    InvalidBoardSize(u8),
    #[error("illegal action {action} for {game} in state:\n{board}")]
    IllegalAction {
        action: usize,
        game: GameKind,
        board: String,
    },
    #[error("operation requires a non-terminal state")]
    TerminalState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    Othello,
    ConnectFour,
    Gobang,
}

impl GameKind {
    /// Stable name used in CLI arguments, checkpoint files and CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            GameKind::Othello => "othello",
            GameKind::ConnectFour => "connect4",
            GameKind::Gobang => "gobang",
        }
    }

    pub fn parse(s: &str) -> Option<GameKind> {
        match s {
            "othello" => Some(GameKind::Othello),
            "connect4" | "connect_four" | "connectfour" => Some(GameKind::ConnectFour),
            "gobang" | "gomoku" => Some(GameKind::Gobang),
            _ => None,
        }
    }
}

impl std::fmt::Display for GameKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    P1,
    P2,
}

impl Player {
    pub fn opponent(&self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }
}

/// Result status of a position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    P1Wins,
    P2Wins,
    Draw,
    Ongoing,
}

impl Outcome {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, Outcome::Ongoing)
    }

    /// Game value from `player`'s perspective: +1 win, -1 loss, 0 draw.
    ///
    /// Zero-sum by construction: `value_for(p) == -value_for(p.opponent())`.
    pub fn value_for(&self, player: Player) -> f32 {
        match (self, player) {
            (Outcome::P1Wins, Player::P1) | (Outcome::P2Wins, Player::P2) => 1.0,
            (Outcome::P1Wins, Player::P2) | (Outcome::P2Wins, Player::P1) => -1.0,
            _ => 0.0,
        }
    }
}

/// Which game is played and at which board size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameSpec {
    pub kind: GameKind,
    pub size: u8,
}

impl GameSpec {
    pub fn new(kind: GameKind, size: u8) -> Result<GameSpec, GameError> {
        if size != 5 && size != 6 {
            return Err(GameError::InvalidBoardSize(size));
        }
        Ok(GameSpec { kind, size })
    }

    pub fn size(&self) -> usize {
        self.size as usize
    }

    pub fn cell_count(&self) -> usize {
        self.size() * self.size()
    }

    /// Length of policy vectors and action masks.
    ///
    /// Othello: one action per cell plus the explicit pass action.
    /// Connect Four: one action per column. Gobang: one action per cell.
    pub fn action_space_size(&self) -> usize {
        match self.kind {
            GameKind::Othello => self.cell_count() + 1,
            GameKind::ConnectFour => self.size(),
            GameKind::Gobang => self.cell_count(),
        }
    }

    /// Run length required to win; Othello is decided by piece count instead.
    pub fn win_length(&self) -> Option<usize> {
        match self.kind {
            GameKind::Othello => None,
            GameKind::ConnectFour | GameKind::Gobang => Some(4),
        }
    }

    /// Index of the Othello pass action.
    pub fn pass_action(&self) -> Option<usize> {
        match self.kind {
            GameKind::Othello => Some(self.cell_count()),
            _ => None,
        }
    }

    /// Number of board symmetries used for data augmentation.
    pub fn symmetry_count(&self) -> usize {
        match self.kind {
            // Gravity leaves only the horizontal mirror.
            GameKind::ConnectFour => 2,
            _ => 8,
        }
    }
}

/// An immutable board position plus the player to move.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameState {
    spec: GameSpec,
    cells: Vec<Option<Player>>,
    to_move: Player,
}

impl GameState {
    /// Canonical start position: Othello gets the central four-piece diamond,
    /// Connect Four and Gobang start empty. P1 moves first.
    pub fn initial(spec: GameSpec) -> GameState {
        let mut cells = vec![None; spec.cell_count()];
        if spec.kind == GameKind::Othello {
            let s = spec.size();
            let (lo, hi) = (s / 2 - 1, s / 2);
            cells[lo * s + hi] = Some(Player::P1);
            cells[hi * s + lo] = Some(Player::P1);
            cells[lo * s + lo] = Some(Player::P2);
            cells[hi * s + hi] = Some(Player::P2);
        }
        GameState {
            spec,
            cells,
            to_move: Player::P1,
        }
    }

    /// Builds a state directly from cell contents. Intended for tests and
    /// position setup; no reachability check is performed.
    pub fn from_cells(
        spec: GameSpec,
        cells: Vec<Option<Player>>,
        to_move: Player,
    ) -> Result<GameState, GameError> {
        assert_eq!(cells.len(), spec.cell_count(), "cell vector length mismatch");
        Ok(GameState {
            spec,
            cells,
            to_move,
        })
    }

    pub fn spec(&self) -> GameSpec {
        self.spec
    }

    pub fn to_move(&self) -> Player {
        self.to_move
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<Player> {
        self.cells[row * self.spec.size() + col]
    }

    pub fn cells(&self) -> &[Option<Player>] {
        &self.cells
    }

    pub fn piece_count(&self, player: Player) -> usize {
        self.cells.iter().filter(|c| **c == Some(player)).count()
    }

    /// Boolean mask over the action space: `mask[a]` is true iff action `a`
    /// is legal for the player to move.
    ///
    /// Must not be called on a terminal state.
    pub fn legal_actions(&self) -> Result<Vec<bool>, GameError> {
        if self.outcome().is_terminal() {
            return Err(GameError::TerminalState);
        }
        Ok(match self.spec.kind {
            GameKind::Othello => othello::legal_mask(self),
            GameKind::ConnectFour => connect_four::legal_mask(self),
            GameKind::Gobang => gobang::legal_mask(self),
        })
    }

    /// Indices of the legal actions, ascending.
    pub fn legal_action_indices(&self) -> Result<Vec<usize>, GameError> {
        Ok(self
            .legal_actions()?
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.then_some(i))
            .collect())
    }

    /// Applies a legal action, returning the successor state. The input state
    /// is unchanged; the player to move alternates (an Othello player without
    /// a flipping placement moves by playing the explicit pass action).
    pub fn apply(&self, action: usize) -> Result<GameState, GameError> {
        let legal = self.legal_actions()?;
        if action >= legal.len() || !legal[action] {
            return Err(GameError::IllegalAction {
                action,
                game: self.spec.kind,
                board: self.render(),
            });
        }
        let mut next = self.clone();
        match self.spec.kind {
            GameKind::Othello => othello::apply(&mut next, action),
            GameKind::ConnectFour => connect_four::apply(&mut next, action),
            GameKind::Gobang => gobang::apply(&mut next, action),
        }
        next.to_move = self.to_move.opponent();
        Ok(next)
    }

    /// Resolves the position: a win for either player, a draw, or ongoing.
    pub fn outcome(&self) -> Outcome {
        match self.spec.kind {
            GameKind::Othello => othello::outcome(self),
            GameKind::ConnectFour => connect_four::outcome(self),
            GameKind::Gobang => gobang::outcome(self),
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome().is_terminal()
    }

    /// Network input encoding: three planes of `size * size` values, in order
    /// P1 pieces, P2 pieces, side-to-move (all ones when P1 is to move, all
    /// zeros otherwise). Deterministic.
    pub fn encode(&self) -> Vec<f32> {
        let n = self.spec.cell_count();
        let mut planes = vec![0.0; 3 * n];
        for (i, cell) in self.cells.iter().enumerate() {
            match cell {
                Some(Player::P1) => planes[i] = 1.0,
                Some(Player::P2) => planes[n + i] = 1.0,
                None => {}
            }
        }
        if self.to_move == Player::P1 {
            planes[2 * n..].fill(1.0);
        }
        planes
    }

    /// All symmetry-equivalent (state, policy) pairs, identity first.
    ///
    /// Othello and Gobang use the 8 dihedral transforms; Connect Four keeps
    /// only identity and the horizontal mirror since gravity breaks the rest.
    /// The policy vector is permuted consistently with the cells (the Othello
    /// pass entry is a fixed point).
    pub fn symmetries(&self, policy: &[f32]) -> Vec<(GameState, Vec<f32>)> {
        assert_eq!(
            policy.len(),
            self.spec.action_space_size(),
            "policy length must match the action space"
        );
        symmetry::transforms_for(self.spec.kind)
            .iter()
            .map(|t| {
                (
                    symmetry::apply_to_state(*t, self),
                    symmetry::apply_to_policy(*t, self.spec, policy),
                )
            })
            .collect()
    }

    /// One character per cell, one row per line. Row `size-1` is printed
    /// first so Connect Four reads with gravity pointing down. `x` is P1,
    /// `o` is P2, `.` is empty; the trailer names the side to move.
    pub fn render(&self) -> String {
        let s = self.spec.size();
        let mut out = String::new();
        for row in (0..s).rev() {
            for col in 0..s {
                out.push(match self.cell(row, col) {
                    Some(Player::P1) => 'x',
                    Some(Player::P2) => 'o',
                    None => '.',
                });
            }
            out.push('\n');
        }
        out.push_str(match self.to_move {
            Player::P1 => "x to move",
            Player::P2 => "o to move",
        });
        out
    }

    pub(crate) fn set_cell(&mut self, idx: usize, value: Option<Player>) {
        self.cells[idx] = value;
    }
}

/// Scans for a `win_length` run (horizontal, vertical or diagonal) of either
/// player. Shared by Connect Four and Gobang.
pub(crate) fn find_run_winner(state: &GameState, win_length: usize) -> Option<Player> {
    let s = state.spec().size() as isize;
    let dirs: [(isize, isize); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];
    for row in 0..s {
        for col in 0..s {
            let Some(player) = state.cell(row as usize, col as usize) else {
                continue;
            };
            for (dr, dc) in dirs {
                let end_r = row + dr * (win_length as isize - 1);
                let end_c = col + dc * (win_length as isize - 1);
                if end_r < 0 || end_r >= s || end_c < 0 || end_c >= s {
                    continue;
                }
                if (1..win_length as isize)
                    .all(|k| state.cell((row + dr * k) as usize, (col + dc * k) as usize) == Some(player))
                {
                    return Some(player);
                }
            }
        }
    }
    None
}
