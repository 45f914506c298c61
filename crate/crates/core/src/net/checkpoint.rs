//! Versioned binary checkpoints.
//!
//! Byte layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SZCK"
//! 4       4     format version (u32), currently 1
//! 8       1     game kind: 0 = othello, 1 = connect4, 2 = gobang
//! 9       1     board size
//! 10      2     reserved, zero
//! 12      4     metadata length L (u32)
//! 16      L     metadata, UTF-8 JSON (see [`CheckpointMeta`])
//! ..      4     array count (u32)
//! ```
//!
//! followed by each named array:
//!
//! ```text
//! 2             name length (u16), then the UTF-8 name
//! 1             number of dimensions (u8)
//! 4 * ndim      dimension sizes (u32 each)
//! 4 * len       array data, f32 little-endian, C order
//! ```
//!
//! Arrays appear in a fixed order (conv/batch-norm blocks, hidden layer,
//! heads) but are matched by name on load, so field order is not load-bearing
//! for interoperability.

use super::{Architecture, Network};
use crate::config::HyperParams;
use crate::games::{GameKind, GameSpec};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SZCK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint format version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint truncated at byte {0}")]
    Truncated(usize),
    #[error("unknown game kind byte {0}")]
    UnknownGameKind(u8),
    #[error("invalid board size {0}")]
    InvalidBoardSize(u8),
    #[error("metadata error: {0}")]
    Metadata(String),
    #[error("checkpoint contains unknown array `{0}`")]
    UnknownArray(String),
    #[error("checkpoint is missing array `{0}`")]
    MissingArray(String),
    #[error("shape mismatch for array `{name}`: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("checkpoint is for {found:?}, expected {expected:?}")]
    SpecMismatch { expected: GameSpec, found: GameSpec },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// JSON metadata stored inside each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub game: GameKind,
    pub size: u8,
    pub channels: usize,
    pub hidden: usize,
    #[serde(default)]
    pub iteration: Option<u64>,
    #[serde(default)]
    pub params: Option<HyperParams>,
}

impl CheckpointMeta {
    pub fn for_network(
        net: &Network<f32>,
        iteration: Option<u64>,
        params: Option<HyperParams>,
    ) -> CheckpointMeta {
        CheckpointMeta {
            game: net.spec().kind,
            size: net.spec().size,
            channels: net.arch().channels,
            hidden: net.arch().hidden,
            iteration,
            params,
        }
    }
}

fn kind_byte(kind: GameKind) -> u8 {
    match kind {
        GameKind::Othello => 0,
        GameKind::ConnectFour => 1,
        GameKind::Gobang => 2,
    }
}

fn kind_from_byte(b: u8) -> Result<GameKind, CheckpointError> {
    match b {
        0 => Ok(GameKind::Othello),
        1 => Ok(GameKind::ConnectFour),
        2 => Ok(GameKind::Gobang),
        other => Err(CheckpointError::UnknownGameKind(other)),
    }
}

pub fn save_checkpoint(net: &Network<f32>, meta: &CheckpointMeta) -> Vec<u8> {
    debug_assert_eq!(meta.game, net.spec().kind);
    debug_assert_eq!(meta.size, net.spec().size);
    let meta_json = serde_json::to_vec(meta).expect("metadata serializes");
    let arrays = net.all_arrays();

    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.push(kind_byte(net.spec().kind));
    out.push(net.spec().size);
    out.extend_from_slice(&[0u8, 0u8]);
    out.extend_from_slice(&(meta_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta_json);
    out.extend_from_slice(&(arrays.len() as u32).to_le_bytes());
    for (name, view) in arrays {
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.push(view.ndim() as u8);
        for &d in view.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in view.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn save_checkpoint_file(
    net: &Network<f32>,
    meta: &CheckpointMeta,
    path: &Path,
) -> Result<(), CheckpointError> {
    std::fs::write(path, save_checkpoint(net, meta))?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.bytes.len() {
            return Err(CheckpointError::Truncated(self.pos));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CheckpointError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn load_checkpoint(bytes: &[u8]) -> Result<(Network<f32>, CheckpointMeta), CheckpointError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let kind = kind_from_byte(r.u8()?)?;
    let size = r.u8()?;
    r.take(2)?;
    let spec = GameSpec::new(kind, size).map_err(|_| CheckpointError::InvalidBoardSize(size))?;

    let meta_len = r.u32()? as usize;
    let meta: CheckpointMeta = serde_json::from_slice(r.take(meta_len)?)
        .map_err(|e| CheckpointError::Metadata(e.to_string()))?;
    if meta.game != kind || meta.size != size {
        return Err(CheckpointError::Metadata(
            "metadata game spec disagrees with header".to_string(),
        ));
    }
    let arch = Architecture {
        channels: meta.channels,
        hidden: meta.hidden,
    };

    let mut net: Network<f32> = Network::zeroed(spec, arch);
    let array_count = r.u32()? as usize;
    let mut filled: Vec<&'static str> = Vec::new();
    for _ in 0..array_count {
        let name_len = r.u16()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| CheckpointError::Metadata("array name is not UTF-8".to_string()))?
            .to_string();
        let ndim = r.u8()? as usize;
        let mut dims = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            dims.push(r.u32()? as usize);
        }
        let len: usize = dims.iter().product();
        let data = r.take(4 * len)?;
        let mut targets = net.all_arrays_mut();
        let (target_name, view) = targets
            .iter_mut()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| CheckpointError::UnknownArray(name.clone()))?;
        if view.shape() != dims.as_slice() {
            return Err(CheckpointError::ShapeMismatch {
                name,
                expected: view.shape().to_vec(),
                found: dims,
            });
        }
        let slice = view.as_slice_mut().expect("owned arrays are contiguous");
        for (i, v) in slice.iter_mut().enumerate() {
            *v = f32::from_le_bytes(data[4 * i..4 * i + 4].try_into().unwrap());
        }
        filled.push(target_name);
    }
    for (name, _) in net.all_arrays() {
        if !filled.contains(&name) {
            return Err(CheckpointError::MissingArray(name.to_string()));
        }
    }
    Ok((net, meta))
}

/// Loads a checkpoint and verifies it matches the expected game spec,
/// e.g. before using it in a run or tournament configured for that game.
pub fn load_checkpoint_for_spec(
    bytes: &[u8],
    expected: GameSpec,
) -> Result<(Network<f32>, CheckpointMeta), CheckpointError> {
    let (net, meta) = load_checkpoint(bytes)?;
    if net.spec() != expected {
        return Err(CheckpointError::SpecMismatch {
            expected,
            found: net.spec(),
        });
    }
    Ok((net, meta))
}

pub fn load_checkpoint_file(path: &Path) -> Result<(Network<f32>, CheckpointMeta), CheckpointError> {
    let bytes = std::fs::read(path)?;
    load_checkpoint(&bytes)
}
