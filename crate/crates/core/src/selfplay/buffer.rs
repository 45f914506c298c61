//! Replay buffer holding one example list per self-play iteration.

use super::{SelfplayError, TrainingExample};
use std::collections::VecDeque;
use std::path::Path;

const BUFFER_MAGIC: &[u8; 4] = b"SZBF";
const BUFFER_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct BufferSlot {
    pub iteration: u64,
    pub examples: Vec<TrainingExample>,
}

/// Capacity is `max(retrain_window, 40)` iteration slots; slots older than
/// that are evicted. The training set is the concatenation of the most
/// recent `min(retrain_window, available)` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    slots: VecDeque<BufferSlot>,
    capacity: usize,
    window: usize,
}

impl ReplayBuffer {
    pub fn new(retrain_window: u64) -> ReplayBuffer {
        let window = retrain_window.max(1) as usize;
        ReplayBuffer {
            slots: VecDeque::new(),
            capacity: window.max(40),
            window,
        }
    }

    pub fn push_iteration(&mut self, iteration: u64, examples: Vec<TrainingExample>) {
        self.slots.push_back(BufferSlot {
            iteration,
            examples,
        });
        while self.slots.len() > self.capacity {
            self.slots.pop_front();
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Drops slots newer than `iteration` (stale state from a killed run).
    pub fn retain_up_to(&mut self, iteration: u64) {
        self.slots.retain(|s| s.iteration <= iteration);
    }

    pub fn slots(&self) -> impl Iterator<Item = &BufferSlot> {
        self.slots.iter()
    }

    /// Iterations currently inside the training window, newest last.
    pub fn window_iterations(&self) -> Vec<u64> {
        let skip = self.slots.len().saturating_sub(self.window);
        self.slots.iter().skip(skip).map(|s| s.iteration).collect()
    }

    /// Concatenated examples of the training window.
    pub fn training_set(&self) -> Vec<TrainingExample> {
        let skip = self.slots.len().saturating_sub(self.window);
        self.slots
            .iter()
            .skip(skip)
            .flat_map(|s| s.examples.iter().cloned())
            .collect()
    }

    pub fn total_examples(&self) -> usize {
        self.slots.iter().map(|s| s.examples.len()).sum()
    }

    pub fn save(&self, path: &Path) -> Result<(), SelfplayError> {
        let mut out = Vec::new();
        out.extend_from_slice(BUFFER_MAGIC);
        out.extend_from_slice(&BUFFER_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.window as u32).to_le_bytes());
        out.extend_from_slice(&(self.slots.len() as u32).to_le_bytes());
        for slot in &self.slots {
            out.extend_from_slice(&slot.iteration.to_le_bytes());
            out.extend_from_slice(&(slot.examples.len() as u32).to_le_bytes());
            for ex in &slot.examples {
                out.extend_from_slice(&(ex.input.len() as u32).to_le_bytes());
                out.extend_from_slice(&(ex.pi.len() as u32).to_le_bytes());
                for v in &ex.input {
                    out.extend_from_slice(&v.to_le_bytes());
                }
                for v in &ex.pi {
                    out.extend_from_slice(&v.to_le_bytes());
                }
                out.extend_from_slice(&ex.z.to_le_bytes());
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path, retrain_window: u64) -> Result<ReplayBuffer, SelfplayError> {
        let bytes = std::fs::read(path)?;
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8], SelfplayError> {
            if *pos + n > bytes.len() {
                return Err(SelfplayError::BufferFormat(format!(
                    "truncated at byte {pos}",
                    pos = *pos
                )));
            }
            let s = &bytes[*pos..*pos + n];
            *pos += n;
            Ok(s)
        };
        let u32_at = |pos: &mut usize| -> Result<u32, SelfplayError> {
            Ok(u32::from_le_bytes(take(pos, 4)?.try_into().unwrap()))
        };
        if take(&mut pos, 4)? != BUFFER_MAGIC {
            return Err(SelfplayError::BufferFormat("bad magic".to_string()));
        }
        let version = u32_at(&mut pos)?;
        if version != BUFFER_VERSION {
            return Err(SelfplayError::BufferFormat(format!(
                "unsupported version {version}"
            )));
        }
        let _stored_window = u32_at(&mut pos)?;
        let slot_count = u32_at(&mut pos)? as usize;
        let mut buffer = ReplayBuffer::new(retrain_window);
        for _ in 0..slot_count {
            let iteration = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
            let example_count = u32_at(&mut pos)? as usize;
            let mut examples = Vec::with_capacity(example_count);
            for _ in 0..example_count {
                let input_len = u32_at(&mut pos)? as usize;
                let pi_len = u32_at(&mut pos)? as usize;
                let mut input = Vec::with_capacity(input_len);
                for i in 0..input_len {
                    let b = take(&mut pos, 4)?;
                    input.push(f32::from_le_bytes(b.try_into().unwrap()));
                    let _ = i;
                }
                let mut pi = Vec::with_capacity(pi_len);
                for _ in 0..pi_len {
                    let b = take(&mut pos, 4)?;
                    pi.push(f32::from_le_bytes(b.try_into().unwrap()));
                }
                let z = f32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
                examples.push(TrainingExample { input, pi, z });
            }
            buffer.push_iteration(iteration, examples);
        }
        Ok(buffer)
    }
}
