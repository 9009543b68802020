//! Configuration-driven experiment runner for the `ising-ge` library.

pub mod commands;
pub mod config;
pub mod figures;
pub mod output;

use std::path::{Path, PathBuf};

/// Names the worker-count variable.
pub const THREADS_ENV: &str = "ISING_GE_THREADS";
/// Names the deterministic-reduction flag.
pub const DETERMINISTIC_ENV: &str = "ISING_GE_DETERMINISTIC";

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] ising_ge::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl AppError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        AppError::Io { path: path.to_path_buf(), source }
    }
}

/// Worker settings read from the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workers {
    pub threads: usize,
    pub deterministic: bool,
}

impl Workers {
    pub fn from_env() -> Result<Self, AppError> {
        let threads = match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .parse::<usize>()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| AppError::Usage(format!("{THREADS_ENV}={v} is not a positive integer")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let deterministic = std::env::var(DETERMINISTIC_ENV)
            .map(|v| !matches!(v.as_str(), "" | "0" | "false" | "no"))
            .unwrap_or(false);
        Ok(Self { threads, deterministic })
    }

    /// Installs the global worker pool. With the deterministic flag set the
    /// pool is pinned to one worker.
    pub fn install(&self) -> usize {
        let threads = if self.deterministic { 1 } else { self.threads };
        // Only the first call in a process takes effect.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        rayon::current_num_threads()
    }
}
