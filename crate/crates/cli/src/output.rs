//! File helpers: reads with path context, writes that never leave partial
//! output behind (temp file in the target directory, then rename).

use std::io::Write;
use std::path::Path;

use crate::error::CliError;

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::file(format!("{}: {e}", path.display())))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let context = |e: &dyn std::fmt::Display| CliError::file(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::Builder::new()
        .prefix(".sleep-pe.")
        .tempfile_in(dir)
        .map_err(|e| context(&e))?;
    tmp.write_all(bytes).map_err(|e| context(&e))?;
    tmp.persist(path).map_err(|e| context(&e.error))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
