//! The `rickgen` command: `validate`, `generate` and `report`.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use rickgen_core::ingest::{Exclusion, Orphan, Selection};
use rickgen_core::model::BlobStore;
use rickgen_core::report::{load_mutation_dir, load_results, render_summary_table};
use rickgen_core::{
    aggregate, correlate, emit_bundle, ingest, kill_matrix, load_catalog_with, plan_tests, select, IngestOptions,
    IngestSummary, Manifest, OracleKind, PlanOutcome, SelectionPolicy, TargetProfile, TestPlan,
};
use serde::Serialize;

use crate::config::{PartialConfig, RunConfig};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Findings = 1,
    Fatal = 2,
    Empty = 3,
}

#[derive(Debug, Parser)]
#[command(name = "rickgen", version, about = "Generate mock-based tests from recorded production invocations")]
pub struct Cli {
    /// JSON file with defaults for generate and validate options.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a catalog and trace files without generating anything.
    Validate(InputArgs),
    /// Generate tests and a manifest from a catalog and traces.
    Generate(GenerateArgs),
    /// Summarize test results and, optionally, mutation runs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Trace file (JSON Lines). Repeatable.
    #[arg(long = "trace")]
    pub traces: Vec<PathBuf>,
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    #[arg(long)]
    pub min_loc: Option<u32>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// first, all, or nth:N
    #[arg(long)]
    pub selection: Option<SelectionPolicy>,
    /// Comma-separated subset of OO,PO,CO.
    #[arg(long, value_delimiter = ',')]
    pub oracles: Option<Vec<OracleKind>>,
    /// Profile file, or the id of a built-in profile.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Treat any invalid trace record as fatal.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Test results (JSON Lines).
    #[arg(long)]
    pub results: PathBuf,
    /// Directory with baseline.jsonl and mutants/<id>.jsonl.
    #[arg(long)]
    pub mutations: Option<PathBuf>,
    /// Manifest of the generated bundle, for the per-MUT table columns.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value = "rick-report")]
    pub out: PathBuf,
}

impl InputArgs {
    fn partial(&self) -> PartialConfig {
        PartialConfig {
            catalog_path: self.catalog.clone(),
            trace_paths: (!self.traces.is_empty()).then(|| self.traces.clone()),
            snapshot_dir: self.snapshots.clone(),
            min_loc: self.min_loc,
            ..Default::default()
        }
    }
}

impl GenerateArgs {
    fn partial(&self) -> PartialConfig {
        PartialConfig {
            selection: self.selection,
            oracle_kinds: self.oracles.clone(),
            profile_path: self.profile.clone(),
            out_dir: self.out.clone(),
            strict: self.strict.then_some(true),
            ..self.input.partial()
        }
    }
}

fn resolve(flags: PartialConfig, config: Option<&Path>) -> Result<RunConfig> {
    let file = match config {
        Some(p) => PartialConfig::load(p)?,
        None => PartialConfig::default(),
    };
    RunConfig::resolve(flags.over(file))
}

/// Runs the parsed command and returns its exit code. Errors are printed to
/// standard error.
pub fn run(cli: Cli) -> Exit {
    let result = match &cli.command {
        Command::Validate(a) => resolve(a.partial(), cli.config.as_deref()).and_then(|c| cmd_validate(&c)),
        Command::Generate(a) => resolve(a.partial(), cli.config.as_deref()).and_then(|c| cmd_generate(&c)),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            Exit::Fatal
        }
    }
}

pub fn cmd_validate(c: &RunConfig) -> Result<Exit> {
    let catalog = match load_catalog_with(&c.catalog_path, c.min_loc) {
        Ok(cat) => cat,
        Err(rickgen_core::ingest::IngestError::InvalidCatalog { path, violations }) => {
            for v in &violations {
                println!("{}: {v}", path.display());
            }
            println!("{} violation(s)", violations.len());
            return Ok(Exit::Findings);
        }
        Err(e) => return Err(e.into()),
    };
    let store = ingest(&c.trace_paths, &c.snapshot_dir, &catalog, &IngestOptions { strict: false })?;
    for f in store.findings() {
        println!("{f}");
    }
    let s = store.summary();
    println!(
        "{} MUT(s), {} record(s) in {} file(s): {} violation(s)",
        catalog.entries.len(),
        s.records,
        s.files,
        store.findings().len()
    );
    Ok(if store.findings().is_empty() { Exit::Success } else { Exit::Findings })
}

#[derive(Serialize)]
struct PlanReport<'a> {
    config: &'a RunConfig,
    selection_policy: String,
    excluded: &'a [Exclusion],
    selection_warnings: &'a [String],
    orphans: &'a [Orphan],
    skipped: Vec<Skipped>,
    plans: &'a [TestPlan],
}

#[derive(Serialize)]
struct Skipped {
    mut_id: String,
    invocation_id: String,
    reason: String,
}

#[derive(Serialize)]
struct IngestReport<'a> {
    summary: &'a IngestSummary,
    findings: Vec<String>,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, format!("{text}\n")).with_context(|| format!("cannot write {}", path.display()))
}

fn load_profile(spec: &str) -> Result<TargetProfile> {
    if Path::new(spec).is_file() {
        return Ok(TargetProfile::load(spec)?);
    }
    TargetProfile::builtin(spec).ok_or_else(|| {
        let ids: Vec<_> = TargetProfile::builtin_ids().collect();
        anyhow!("profile {spec:?} is neither a file nor a built-in profile ({})", ids.join(", "))
    })
}

/// Ingest, correlate, select, plan and emit. Returns the manifest alongside
/// the exit code.
pub fn generate(c: &RunConfig) -> Result<(Exit, Manifest)> {
    let profile = load_profile(&c.profile_path)?;
    let catalog = load_catalog_with(&c.catalog_path, c.min_loc)?;
    let store = ingest(&c.trace_paths, &c.snapshot_dir, &catalog, &IngestOptions { strict: c.strict })?;
    log::info!("ingested {} record(s) from {} file(s)", store.summary().records, store.summary().files);

    let correlation = correlate(&store);
    let Selection { selected, excluded, warnings } = select(&correlation.invocations, c.selection);

    let outcomes: Vec<(String, String, PlanOutcome)> = selected
        .par_iter()
        .map(|inv| {
            let entry = catalog.entry(inv.mut_id()).expect("ingested invocations name catalog MUTs");
            (inv.mut_id().to_string(), inv.id().to_string(), plan_tests(inv, entry))
        })
        .collect();
    let mut plans = Vec::new();
    let mut skipped = Vec::new();
    for (mut_id, invocation_id, outcome) in outcomes {
        match outcome {
            PlanOutcome::Planned(p) => {
                for w in &p.warnings {
                    log::warn!("{mut_id} ({invocation_id}): {w}");
                }
                plans.push(p);
            }
            PlanOutcome::Skipped(reason) => {
                log::info!("{mut_id} ({invocation_id}) skipped: {reason}");
                skipped.push(Skipped { mut_id, invocation_id, reason: reason.to_string() });
            }
        }
    }
    plans.sort_by(|a, b| (&a.mut_id, &a.invocation_id).cmp(&(&b.mut_id, &b.invocation_id)));

    let blobs = BlobStore::new(&c.snapshot_dir);
    let manifest = emit_bundle(&plans, &profile, &blobs, &c.out_dir, &c.oracle_kinds)?;
    write_json(
        &c.out_dir.join("ingest-summary.json"),
        &IngestReport { summary: store.summary(), findings: store.findings().iter().map(|f| f.to_string()).collect() },
    )?;
    write_json(
        &c.out_dir.join("plans.json"),
        &PlanReport {
            config: c,
            selection_policy: c.selection.to_string(),
            excluded: &excluded,
            selection_warnings: &warnings,
            orphans: &correlation.orphans,
            skipped,
            plans: &plans,
        },
    )?;
    let code = if manifest.tests.is_empty() { Exit::Empty } else { Exit::Success };
    Ok((code, manifest))
}

pub fn cmd_generate(c: &RunConfig) -> Result<Exit> {
    let (code, manifest) = generate(c)?;
    println!(
        "{} test(s) for {} MUT(s) in {} file(s) under {}",
        manifest.tests.len(),
        manifest.muts.len(),
        manifest.files.len(),
        c.out_dir.display()
    );
    if code == Exit::Empty {
        eprintln!("nothing to generate");
    }
    Ok(code)
}

pub fn cmd_report(a: &ReportArgs) -> Result<Exit> {
    let results = load_results(&a.results)?;
    let manifest = a.manifest.as_ref().map(Manifest::load).transpose()?;
    let summary = aggregate(&results);
    write_json(&a.out.join("summary.json"), &summary)?;
    print!("{}", render_summary_table(&summary, manifest.as_ref()));

    if let Some(dir) = &a.mutations {
        let (baseline, mutants) = load_mutation_dir(dir)?;
        let matrix = kill_matrix(&baseline, &mutants)?;
        write_json(&a.out.join("kill-matrix.json"), &matrix)?;
        println!();
        print!("{}", matrix.render_table());
    }
    Ok(Exit::Success)
}
