use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// Output directory used when neither `--out` nor `QSFLOW_OUT` is given.
pub const DEFAULT_OUT_DIR: &str = "qsflow-out";

pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("QSFLOW_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename, so a
/// reader never sees a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let target = dir.join(name);
    let wrap = |source| CliError::Write {
        path: target.clone(),
        source,
    };
    fs::create_dir_all(dir).map_err(wrap)?;
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(wrap)?;
    fs::rename(&tmp, &target).map_err(wrap)?;
    Ok(target)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("output types serialize");
    bytes.push(b'\n');
    write_atomic(dir, name, &bytes)
}
