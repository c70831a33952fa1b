//! Validation harness for `tcac-core`: bundled cable and measurement
//! fixtures, relative-difference reports and the named end-to-end studies
//! behind the `tcac` command-line tool.

pub mod compare;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod measurement;
pub mod report;
pub mod study;

pub use compare::{compare, CompareOptions, ComparisonReport, ComputedSeries};
pub use config::StudyConfig;
pub use error::BenchError;
pub use measurement::MeasurementSeries;
pub use report::{write_bundle, OutputFormat, ReportBundle};
pub use study::{dry_run, run_study, Study};
