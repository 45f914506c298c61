//! Board symmetries used for training-data augmentation.
//!
//! The square board has the dihedral group of order 8: four rotations,
//! optionally preceded by a horizontal mirror. Connect Four only admits the
//! identity and the mirror because gravity distinguishes rows.

use super::{GameKind, GameSpec, GameState};

/// `mirror` is applied first (columns reversed), then `rotations` quarter
/// turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transform {
    pub rotations: u8,
    pub mirror: bool,
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        rotations: 0,
        mirror: false,
    };

    pub const MIRROR: Transform = Transform {
        rotations: 0,
        mirror: true,
    };

    /// All eight dihedral transforms, identity first.
    pub fn dihedral() -> [Transform; 8] {
        let mut out = [Transform::IDENTITY; 8];
        for (i, t) in out.iter_mut().enumerate() {
            t.rotations = (i % 4) as u8;
            t.mirror = i >= 4;
        }
        out
    }

    /// Destination of cell (row, col) on a `size`-sized board.
    pub fn map_cell(&self, size: usize, row: usize, col: usize) -> (usize, usize) {
        let (mut r, mut c) = (row, col);
        if self.mirror {
            c = size - 1 - c;
        }
        for _ in 0..self.rotations {
            let (nr, nc) = (c, size - 1 - r);
            r = nr;
            c = nc;
        }
        (r, c)
    }

    /// The transform undoing this one. Pure rotations invert by rotating the
    /// rest of the way round; mirrored transforms are reflections and
    /// therefore self-inverse.
    pub fn inverse(&self) -> Transform {
        if self.mirror {
            *self
        } else {
            Transform {
                rotations: (4 - self.rotations) % 4,
                mirror: false,
            }
        }
    }
}

pub(super) fn transforms_for(kind: GameKind) -> Vec<Transform> {
    match kind {
        GameKind::ConnectFour => vec![Transform::IDENTITY, Transform::MIRROR],
        _ => Transform::dihedral().to_vec(),
    }
}

pub fn apply_to_state(t: Transform, state: &GameState) -> GameState {
    let spec = state.spec();
    let size = spec.size();
    let mut cells = vec![None; spec.cell_count()];
    for row in 0..size {
        for col in 0..size {
            let (r, c) = t.map_cell(size, row, col);
            cells[r * size + c] = state.cell(row, col);
        }
    }
    GameState::from_cells(spec, cells, state.to_move()).unwrap()
}

pub fn apply_to_policy(t: Transform, spec: GameSpec, policy: &[f32]) -> Vec<f32> {
    let size = spec.size();
    let mut out = vec![0.0; policy.len()];
    match spec.kind {
        GameKind::ConnectFour => {
            assert_eq!(t.rotations, 0, "Connect Four admits only the mirror");
            for col in 0..size {
                let (_, c) = t.map_cell(size, 0, col);
                out[c] = policy[col];
            }
        }
        GameKind::Othello | GameKind::Gobang => {
            for row in 0..size {
                for col in 0..size {
                    let (r, c) = t.map_cell(size, row, col);
                    out[r * size + c] = policy[row * size + col];
                }
            }
            if let Some(pass) = spec.pass_action() {
                out[pass] = policy[pass];
            }
        }
    }
    out
}
