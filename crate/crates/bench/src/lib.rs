//! Experiment orchestration for the PINN/PIKAN comparison: architecture
//! grids, seeded sweeps, persisted runs, result tables and loss curves.

pub mod config;
pub mod curves;
pub mod report;
pub mod suite;
pub mod tables;

pub use config::{ArchRow, Mode, Overrides, SuiteConfig};
pub use report::{build_records, ResultRecord};
pub use suite::{run_suite, RunRecord};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Bad command-line or config input: unknown problem, method, key.
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] pikan_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `bytes` next to `path` and renames it into place, so a killed
/// sweep never leaves a truncated run file behind.
pub(crate) fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}
