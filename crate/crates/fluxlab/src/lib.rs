//! Batch driver for `fluxlab-core`: named verification suites, perturbation
//! sequences, JSON configuration and CSV/JSON reports.

pub mod config;
pub mod report;
pub mod sequence;
pub mod suites;

pub use config::{load_config, ExperimentConfig, Tolerances};
pub use report::{emit_report, Format, Relation, Row, SuiteReport};
pub use sequence::{build_perturbation_sequence, perturbation_hamiltonian};
pub use suites::{registry, resolve, run_suite, Suite};

use fluxlab_core::FluxError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("unknown suite `{name}`; registered suites: {known}")]
    UnknownSuite { name: String, known: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("report error: {0}")]
    Report(String),
    #[error(transparent)]
    Core(#[from] FluxError),
}

impl Error {
    fn invalid(field: &str, message: impl Into<String>) -> Self {
        Error::Invalid { field: field.into(), message: message.into() }
    }

    fn csv(e: csv::Error) -> Self {
        Error::Report(e.to_string())
    }
}

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/quickstart.md")]
    pub mod quickstart {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    pub mod configuration {}
    #[doc = include_str!("../../../book/src/reports.md")]
    pub mod reports {}
}
