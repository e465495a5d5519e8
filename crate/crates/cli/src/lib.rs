//! CSV front end over `kmshadow-core`: density, error-rate and capacity
//! tables, figure presets and a self-test.

pub mod commands;
pub mod config;
pub mod preset;
pub mod table;

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use commands::{cmd_ber, cmd_capacity, cmd_pdf, cmd_selftest, cmd_ser, run};
pub use config::{RunConfig, Settings};
pub use table::Table;

/// Names the default output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "KMSHADOW_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Pdf,
    Ser,
    Ber,
    Capacity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Pdf => "pdf",
            Command::Ser => "ser",
            Command::Ber => "ber",
            Command::Capacity => "capacity",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        [Command::Pdf, Command::Ser, Command::Ber, Command::Capacity]
            .into_iter()
            .find(|c| c.name() == name)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Model(#[from] kmshadow_core::Error),
    #[error("config file {}: {source}", path.display())]
    Config {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("self-test failed")]
    SelfTest,
}

impl CliError {
    /// 2 for numerical failures, 1 for everything the caller can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_convergence() => EXIT_CONVERGENCE,
            CliError::SelfTest => EXIT_CONVERGENCE,
            _ => EXIT_VALIDATION,
        }
    }
}

/// Where a table goes: `--out`, else `$KMSHADOW_OUT_DIR/<stem>.csv`, else stdout.
pub fn output_target(explicit: Option<&Path>, out_dir: Option<&Path>, stem: &str) -> Option<PathBuf> {
    match (explicit, out_dir) {
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(dir)) => Some(dir.join(format!("{stem}.csv"))),
        (None, None) => None,
    }
}

pub fn write_table(table: &Table, target: Option<&Path>) -> Result<(), CliError> {
    let csv = table.to_csv();
    match target {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
                    path: parent.to_path_buf(),
                    source,
                })?;
            }
            std::fs::write(path, csv).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
        None => std::io::stdout()
            .lock()
            .write_all(csv.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`. Sequential builds ignore the count.
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> Result<T, CliError>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(format!("cannot start {n} threads: {e}")))?;
        return Ok(pool.install(f));
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(f())
}
