//! Convergence studies for Laplace–Beltrami eigenpairs on top of
//! `lb-spectra-core`: TOML configuration, parallel assembly, rate fits and
//! CSV/JSON/OFF/MatrixMarket output.

pub mod config;
pub mod io;
pub mod parallel;
pub mod presets;
pub mod rate;
pub mod study;

pub use config::{ConfigError, Study, StudyConfig};
pub use study::{run_study, run_study_on, write_outputs, StudyReport, StudyRow};
