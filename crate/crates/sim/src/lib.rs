//! Config files, presets, sweeps and output formats for `urllc-core`.

use std::path::{Path, PathBuf};

pub mod config;
pub mod experiment;
pub mod export;
pub mod presets;

pub use config::{ConfigErrors, ConfigFile, FieldError, Resolved};
pub use experiment::{run_experiment, Experiment, Manifest, RunOptions};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{0}")]
    Config(#[from] ConfigErrors),
    #[error("cannot access {}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("simulation failed: {0}")]
    Run(String),
}

impl SimError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        SimError::Io { path: path.to_path_buf(), source }
    }
}
