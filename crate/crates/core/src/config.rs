//! Run configuration: the twelve named training hyper-parameters plus the
//! loss-target selector and pipeline switches.
//!
//! Serialized manifests and config files use the short symbol names
//! (`I`, `E`, `T_prime`, `m`, `c`, `rs`, `ep`, `bs`, `lr`, `d`, `n`, `u`) so
//! experiment records stay legible against the sweep tables.

use crate::net::{LossKind, LossTarget};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for key `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperParams {
    /// Self-play iterations (outer loop).
    #[serde(rename = "I")]
    pub iterations: u64,
    /// Self-play episodes per iteration.
    #[serde(rename = "E")]
    pub episodes: u64,
    /// Step threshold: moves with index below it are sampled from the search
    /// policy, later moves are played greedily.
    #[serde(rename = "T_prime")]
    pub t_prime: u64,
    /// MCTS simulations per move.
    #[serde(rename = "m")]
    pub simulations: u64,
    /// Exploration constant in tree selection.
    #[serde(rename = "c")]
    pub exploration: f64,
    /// Retrain window: how many recent iterations of examples to train on.
    #[serde(rename = "rs")]
    pub retrain_window: u64,
    /// Training epochs per iteration.
    #[serde(rename = "ep")]
    pub epochs: u64,
    /// Minibatch size.
    #[serde(rename = "bs")]
    pub batch_size: u64,
    /// Learning rate.
    #[serde(rename = "lr")]
    pub learning_rate: f64,
    /// Dropout probability.
    #[serde(rename = "d")]
    pub dropout: f64,
    /// Arena comparison games per iteration.
    #[serde(rename = "n")]
    pub arena_games: u64,
    /// Arena update threshold: the challenger must win more than this
    /// fraction of decisive games to be accepted.
    #[serde(rename = "u")]
    pub update_threshold: f64,
    pub loss_target: LossKind,
    pub lambda: f64,
    /// When false, every newly trained model is accepted without arena games.
    pub arena_enabled: bool,
    /// Symmetry augmentation of generated examples.
    pub augment_symmetries: bool,
}

impl Default for HyperParams {
    /// The default sweep-table values.
    fn default() -> Self {
        HyperParams {
            iterations: 100,
            episodes: 50,
            t_prime: 15,
            simulations: 100,
            exploration: 1.0,
            retrain_window: 20,
            epochs: 10,
            batch_size: 64,
            learning_rate: 0.005,
            dropout: 0.3,
            arena_games: 40,
            update_threshold: 0.6,
            loss_target: LossKind::Sum,
            lambda: 0.5,
            arena_enabled: true,
            augment_symmetries: true,
        }
    }
}

impl HyperParams {
    pub const KEYS: [&'static str; 16] = [
        "I",
        "E",
        "T_prime",
        "m",
        "c",
        "rs",
        "ep",
        "bs",
        "lr",
        "d",
        "n",
        "u",
        "loss_target",
        "lambda",
        "arena_enabled",
        "augment_symmetries",
    ];

    /// The twelve swept numeric parameters, in table order.
    pub const SWEEP_KEYS: [&'static str; 12] = [
        "I", "E", "T_prime", "m", "c", "rs", "ep", "bs", "lr", "d", "n", "u",
    ];

    pub fn loss_target(&self) -> LossTarget {
        LossTarget {
            kind: self.loss_target,
            lambda: self.lambda,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("I", self.iterations),
            ("E", self.episodes),
            ("m", self.simulations),
            ("rs", self.retrain_window),
            ("ep", self.epochs),
            ("bs", self.batch_size),
            ("n", self.arena_games),
        ];
        for (key, value) in positive {
            if value < 1 {
                return Err(invalid(key, &value.to_string(), "must be >= 1"));
            }
        }
        if self.learning_rate <= 0.0 {
            return Err(invalid("lr", &self.learning_rate.to_string(), "must be > 0"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(invalid("d", &self.dropout.to_string(), "must be in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.update_threshold) {
            return Err(invalid("u", &self.update_threshold.to_string(), "must be in [0, 1]"));
        }
        if self.exploration < 0.0 {
            return Err(invalid("c", &self.exploration.to_string(), "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(invalid("lambda", &self.lambda.to_string(), "must be in [0, 1]"));
        }
        Ok(())
    }

    /// Applies one `key=value` override using the symbol names.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "I" => self.iterations = parse_num(key, value)?,
            "E" => self.episodes = parse_num(key, value)?,
            "T_prime" => self.t_prime = parse_num(key, value)?,
            "m" => self.simulations = parse_num(key, value)?,
            "c" => self.exploration = parse_num(key, value)?,
            "rs" => self.retrain_window = parse_num(key, value)?,
            "ep" => self.epochs = parse_num(key, value)?,
            "bs" => self.batch_size = parse_num(key, value)?,
            "lr" => self.learning_rate = parse_num(key, value)?,
            "d" => self.dropout = parse_num(key, value)?,
            "n" => self.arena_games = parse_num(key, value)?,
            "u" => self.update_threshold = parse_num(key, value)?,
            "lambda" => self.lambda = parse_num(key, value)?,
            "loss_target" => {
                let (kind, lambda) = parse_loss_target(value)
                    .ok_or_else(|| invalid(key, value, "expected policy_only, value_only, sum, product or weighted(x)"))?;
                self.loss_target = kind;
                if let Some(l) = lambda {
                    self.lambda = l;
                }
            }
            "arena_enabled" => self.arena_enabled = parse_bool(key, value)?,
            "augment_symmetries" => self.augment_symmetries = parse_bool(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Reads one named numeric parameter (the sweep axes).
    pub fn numeric_value(&self, key: &str) -> Option<f64> {
        Some(match key {
            "I" => self.iterations as f64,
            "E" => self.episodes as f64,
            "T_prime" => self.t_prime as f64,
            "m" => self.simulations as f64,
            "c" => self.exploration,
            "rs" => self.retrain_window as f64,
            "ep" => self.epochs as f64,
            "bs" => self.batch_size as f64,
            "lr" => self.learning_rate,
            "d" => self.dropout,
            "n" => self.arena_games as f64,
            "u" => self.update_threshold,
            _ => return None,
        })
    }

    /// Sets one named numeric parameter (the sweep axes). Integer-valued
    /// parameters reject fractional values.
    pub fn set_numeric(&mut self, key: &str, value: f64) -> Result<(), ConfigError> {
        let as_int = |key: &str| -> Result<u64, ConfigError> {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(invalid(key, &value.to_string(), "must be a non-negative integer"));
            }
            Ok(value as u64)
        };
        match key {
            "I" => self.iterations = as_int(key)?,
            "E" => self.episodes = as_int(key)?,
            "T_prime" => self.t_prime = as_int(key)?,
            "m" => self.simulations = as_int(key)?,
            "c" => self.exploration = value,
            "rs" => self.retrain_window = as_int(key)?,
            "ep" => self.epochs = as_int(key)?,
            "bs" => self.batch_size = as_int(key)?,
            "lr" => self.learning_rate = value,
            "d" => self.dropout = value,
            "n" => self.arena_games = as_int(key)?,
            "u" => self.update_threshold = value,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Scales the expensive budgets down for desk-scale experiments while
    /// preserving the ordering of every swept value: I and E divided by 10,
    /// m and n divided by 4, everything else untouched.
    pub fn desk_scale(&self) -> HyperParams {
        let div = |v: u64, by: u64| v.div_ceil(by).max(1);
        HyperParams {
            iterations: div(self.iterations, 10),
            episodes: div(self.episodes, 10),
            simulations: div(self.simulations, 4),
            arena_games: div(self.arena_games, 4),
            ..self.clone()
        }
    }
}

fn invalid(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| invalid(key, value, "not a valid number"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(invalid(key, value, "expected true or false")),
    }
}

/// Parses a loss-target name, optionally carrying an inline weight as in
/// `weighted(0.3)`.
pub fn parse_loss_target(value: &str) -> Option<(LossKind, Option<f64>)> {
    match value {
        "policy_only" => return Some((LossKind::PolicyOnly, None)),
        "value_only" => return Some((LossKind::ValueOnly, None)),
        "sum" => return Some((LossKind::Sum, None)),
        "product" => return Some((LossKind::Product, None)),
        "weighted" | "weighted_sum" => return Some((LossKind::WeightedSum, None)),
        _ => {}
    }
    let inner = value
        .strip_prefix("weighted(")
        .or_else(|| value.strip_prefix("weighted_sum("))?
        .strip_suffix(')')?;
    inner
        .parse::<f64>()
        .ok()
        .map(|l| (LossKind::WeightedSum, Some(l)))
}
