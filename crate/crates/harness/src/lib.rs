//! Experiment driver for the spectral / two-layer-network laboratory:
//! study configuration, parallel grid execution, rate fitting, byte-stable
//! result emission, and the command-line interface.

pub mod cli;
pub mod config;
pub mod emit;
pub mod fit;
pub mod study;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] ritz_core::CoreError),
}

pub use config::{ProblemGenerator, StudyConfig, StudyKind, TrainOverrides};
pub use fit::{fit_rate, Axis, RateFit};
pub use study::{run_study, run_study_with_threads, Row, StudyResult};
