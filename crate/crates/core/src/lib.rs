//! Generates mock-based unit tests from recorded production invocations.
//!
//! The pipeline is: [`ingest`] trace files against a catalog, [`correlate`]
//! mock calls with their parent invocations, [`select`] which invocations to
//! use, [`plan_tests`] for each, then render plans through a
//! [`TargetProfile`]. [`report`] classifies executed tests and builds
//! mutation kill matrices.

pub mod codegen;
pub mod ingest;
pub mod model;
pub mod report;
pub mod synthesis;

pub use codegen::{display_name, emit_bundle, render, Manifest, RenderedTest, TargetProfile};
pub use ingest::{
    correlate, ingest, load_catalog, load_catalog_with, select, CorrelatedInvocation, Correlation,
    IngestOptions, IngestSummary, SelectionPolicy, TraceStore,
};
pub use model::{values_equal, CandidateCatalog, ValueSnapshot};
pub use report::{aggregate, classify, kill_matrix, KillMatrix, TestRunResult};
pub use synthesis::{plan_tests, OracleKind, PlanOutcome, TestPlan};
