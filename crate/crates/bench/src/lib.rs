//! Experiment harness, file formats and command-line front end for
//! `utilsearch-core`.

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod config;
pub mod experiment;
pub mod formats;
pub mod seeds;
pub mod summary;

pub use experiment::{run_experiment, ExperimentReport, ReportRow};
pub use summary::{summarize, Summary};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("configuration: {0}")]
    Config(String),
    #[error("incomplete report: {0}")]
    IncompleteReport(String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Puzzle(#[from] utilsearch_core::PuzzleError),
    #[error(transparent)]
    Solver(#[from] utilsearch_core::SolverError),
    #[error(transparent)]
    Minimin(#[from] utilsearch_core::MiniminError),
    #[error(transparent)]
    Mau(#[from] utilsearch_core::MauError),
    #[error(transparent)]
    Model(#[from] utilsearch_core::ModelError),
    #[error(transparent)]
    Select(#[from] utilsearch_core::SelectError),
    #[error("experiment aborted: {source}")]
    Aborted { partial: Box<ExperimentReport>, source: Box<Error> },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Error {
        Error::Io { path: path.to_path_buf(), source }
    }

    /// 1 for bad input the user can fix on the command line, 2 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Toml(_) | Error::Puzzle(_) => 1,
            Error::Aborted { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
