//! I/O and orchestration around the model core: CSV and GeoJSON ingestion,
//! result export, the travel-time matrix client, run configuration, and the
//! batch CLI.

use thiserror::Error;

pub mod app;
pub mod columns;
pub mod config;
pub mod csv_io;
pub mod export;
pub mod geojson_io;
pub mod ors;
pub mod runlog;

pub use app::run;
pub use columns::ColumnSpec;
pub use ors::{OrsClient, TravelTimeMatrix};
pub use runlog::RunLog;

/// CLI-level errors, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad command line; exit 64.
    #[error("{0}")]
    Usage(String),

    /// Invalid inputs or model preconditions; exit 2.
    #[error("{0}")]
    Validation(String),

    /// Filesystem or network failure; exit 3.
    #[error("{0}")]
    Io(String),

    /// A fit did not converge and --strict was given; exit 4.
    #[error("fit did not converge (running with --strict)")]
    NonConvergence,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::NonConvergence => 4,
        }
    }
}

impl From<marketflow_core::Error> for CliError {
    fn from(e: marketflow_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}
