//! Configuration-driven experiment runner: configs, corpora, suites and reports.

pub mod config;
pub mod corpus;
pub mod report;
pub mod suites;

pub use config::ExperimentConfig;
pub use corpus::{generate_corpus, CorpusKind, CorpusMember};
pub use report::{CheckRecord, Condition, ExperimentReport, RecordBuilder, Table, SCHEMA_VERSION};
pub use suites::{run_suite, Suite, SUITES};
