pub mod arena;
pub mod report;
pub mod sweep;
pub mod tournament;
pub mod train;

use crate::runconfig::CliError;
use smallzero_core::games::GameSpec;
use smallzero_core::net::{load_checkpoint_file, Network};
use std::path::Path;

/// Loads a checkpoint and derives the player id used in tournament tables:
/// the file stem, or the parent directory's name for the generic `best.ckpt`
/// files a sweep produces.
pub(crate) fn load_player(path: &Path) -> Result<(String, Network<f32>, GameSpec), CliError> {
    let (net, _meta) = load_checkpoint_file(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| path.display().to_string());
    let id = if stem == "best" {
        path.parent()
            .and_then(|p| p.file_name())
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or(stem)
    } else {
        stem
    };
    let spec = net.spec();
    Ok((id, net, spec))
}
