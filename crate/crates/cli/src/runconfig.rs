//! Run configuration assembly: defaults, then the flat key=value config
//! file, then command-line overrides. Unknown keys are rejected.

use smallzero_core::config::{ConfigError, HyperParams};
use smallzero_core::games::{GameKind, GameSpec};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{file}:{line}: expected `key = value`, found `{text}`")]
    ConfigSyntax {
        file: String,
        line: usize,
        text: String,
    },
    #[error("unknown game `{0}` (expected othello, connect4 or gobang)")]
    UnknownGame(String),
    #[error("{0}")]
    Invalid(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Everything a training run needs. Mirrors the pipeline's `run.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub game: GameKind,
    pub size: u8,
    pub params: HyperParams,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub parallelism: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            game: GameKind::ConnectFour,
            size: 5,
            params: HyperParams::default(),
            seed: 0,
            out: None,
            parallelism: 1,
        }
    }
}

impl RunConfig {
    pub fn spec(&self) -> Result<GameSpec, CliError> {
        GameSpec::new(self.game, self.size).map_err(|e| CliError::Invalid(e.to_string()))
    }

    /// Applies one `key=value` entry; accepts the run-level keys plus every
    /// hyper-parameter key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "game" => {
                self.game = GameKind::parse(value)
                    .ok_or_else(|| CliError::UnknownGame(value.to_string()))?;
            }
            "size" => {
                self.size = value
                    .parse()
                    .map_err(|_| CliError::Invalid(format!("invalid size `{value}`")))?;
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| CliError::Invalid(format!("invalid seed `{value}`")))?;
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "parallelism" => {
                self.parallelism = value
                    .parse()
                    .map_err(|_| CliError::Invalid(format!("invalid parallelism `{value}`")))?;
            }
            _ => self.params.set_key(key, value)?,
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::ConfigSyntax {
                    file: path.display().to_string(),
                    line: idx + 1,
                    text: raw.to_string(),
                });
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }
}

/// Parses a `KEY=VALUE` command-line override.
pub fn parse_set(arg: &str) -> Result<(String, String), CliError> {
    arg.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| CliError::Invalid(format!("--set expects key=value, got `{arg}`")))
}

/// Output root: `--out` wins, then `$SMALLZERO_OUT`, then `./runs`.
pub fn output_root(explicit: Option<&Path>) -> PathBuf {
    if let Some(path) = explicit {
        return path.to_path_buf();
    }
    if let Ok(env_root) = std::env::var("SMALLZERO_OUT") {
        if !env_root.is_empty() {
            return PathBuf::from(env_root);
        }
    }
    PathBuf::from("runs")
}
