use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::OUT_DIR_ENV;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] lpp_lab::Error),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("encoding failed: {0}")]
    Encode(String),
}

pub type CliResult<T> = Result<T, CliError>;

/// `explicit`, else `$LPP_LAB_OUT_DIR/default_name`, else `./default_name`.
pub fn resolve(explicit: Option<&Path>, default_name: &str) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")).join(default_name)
        }
    }
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    }
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io { path: path.into(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Encode(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|source| CliError::Io { path: path.into(), source })
}

/// Writes a header and rows of already formatted cells.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let enc = |e: csv::Error| CliError::Encode(e.to_string());
    w.write_record(header).map_err(enc)?;
    for r in rows {
        w.write_record(r).map_err(enc)?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.into(), source })
}

/// 17 significant digits, so CSV and JSON carry the same values.
pub fn num(v: f64) -> String {
    lpp_lab::asymptotics::fmt_f64(v)
}
