//! Self-play reinforcement-learning framework for small board games.
//!
//! The pipeline iterates three stages: self-play episode generation guided by
//! MCTS, network training on a replay buffer, and an arena comparison that
//! gates model acceptance. Strength is measured by an incremental Elo track
//! during training and a maximum-likelihood Elo fit over round-robin
//! tournaments. A sweep layer runs one-factor and full-grid hyper-parameter
//! studies with per-stage wall-clock accounting and Pareto analysis of
//! (time, Elo) trade-offs.

pub mod config;
pub mod games;
pub mod mcts;
pub mod net;
pub mod rating;
pub mod selfplay;
pub mod sweep;

pub use config::HyperParams;
pub use games::{GameKind, GameSpec, GameState, Outcome, Player};
pub use net::{LossTarget, Network};
