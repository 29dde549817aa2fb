use std::path::Path;

use crate::commands::ensure_dir;
use crate::CliError;

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    ensure_dir(path)?;
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
