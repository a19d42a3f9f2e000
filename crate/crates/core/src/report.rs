//! Classifies executed tests and measures which oracles detect mutants.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codegen::Manifest;
use crate::synthesis::OracleKind;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("mutant {mutant} ran test {test_name} of {mut_id}, which is not in the baseline")]
    UnknownTest { mutant: String, mut_id: String, test_name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RunStatus {
    Pass,
    OracleFail,
    RuntimeError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorPhase {
    Arrange,
    Act,
    Assert,
}

/// One execution of one generated test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestRunResult {
    pub test_name: String,
    pub mut_id: String,
    pub oracle_kind: OracleKind,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_phase: Option<ErrorPhase>,
    #[serde(default)]
    pub message: String,
    /// Groups results in the per-project breakdown.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub project: Option<String>,
}

impl TestRunResult {
    fn check(&self) -> Result<(), String> {
        if self.status == RunStatus::RuntimeError && self.error_phase.is_none() {
            return Err(format!("{}: RUNTIME_ERROR without error_phase", self.test_name));
        }
        Ok(())
    }

    fn key(&self) -> (&str, &str) {
        (&self.mut_id, &self.test_name)
    }
}

/// Reads a JSON Lines file of results. Blank lines are skipped.
pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<TestRunResult>, ReportError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ReportError::Io { path: path.into(), source })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| ReportError::Parse { path: path.into(), line: i + 1, message };
        let r: TestRunResult = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        r.check().map_err(parse_err)?;
        out.push(r);
    }
    Ok(out)
}

/// Results per mutant id.
pub type MutantRuns = BTreeMap<String, Vec<TestRunResult>>;

/// Reads `baseline.jsonl` and every `mutants/<id>.jsonl` under `dir`.
pub fn load_mutation_dir(dir: impl AsRef<Path>) -> Result<(Vec<TestRunResult>, MutantRuns), ReportError> {
    let dir = dir.as_ref();
    let baseline = load_results(dir.join("baseline.jsonl"))?;
    let mutants_dir = dir.join("mutants");
    let entries = fs::read_dir(&mutants_dir).map_err(|source| ReportError::Io { path: mutants_dir.clone(), source })?;
    let mut mutants = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|source| ReportError::Io { path: mutants_dir.clone(), source })?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
            continue;
        }
        let Some(id) = path.file_stem().and_then(|s| s.to_str()) else { continue };
        mutants.insert(id.to_string(), load_results(&path)?);
    }
    Ok((baseline, mutants))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    SuccessfullyMimic,
    IncompletelyMimic,
    UnhandledMutBehavior,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::SuccessfullyMimic => "SUCCESSFULLY_MIMIC",
            Outcome::IncompletelyMimic => "INCOMPLETELY_MIMIC",
            Outcome::UnhandledMutBehavior => "UNHANDLED_MUT_BEHAVIOR",
        })
    }
}

pub fn classify(result: &TestRunResult) -> Outcome {
    match result.status {
        RunStatus::Pass => Outcome::SuccessfullyMimic,
        RunStatus::OracleFail => Outcome::IncompletelyMimic,
        RunStatus::RuntimeError => Outcome::UnhandledMutBehavior,
    }
}

/// `Some("fixture failure")` for runtime errors raised while arranging.
pub fn sub_reason(result: &TestRunResult) -> Option<&'static str> {
    (result.status == RunStatus::RuntimeError && result.error_phase == Some(ErrorPhase::Arrange))
        .then_some("fixture failure")
}

/// Outcome counts. `merge` is associative and commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub tests: usize,
    pub successfully_mimic: usize,
    pub incompletely_mimic: usize,
    pub unhandled_mut_behavior: usize,
    /// Subset of `unhandled_mut_behavior`.
    pub fixture_failures: usize,
}

impl Tally {
    pub fn add(&mut self, r: &TestRunResult) {
        self.tests += 1;
        match classify(r) {
            Outcome::SuccessfullyMimic => self.successfully_mimic += 1,
            Outcome::IncompletelyMimic => self.incompletely_mimic += 1,
            Outcome::UnhandledMutBehavior => self.unhandled_mut_behavior += 1,
        }
        if sub_reason(r).is_some() {
            self.fixture_failures += 1;
        }
    }

    pub fn merge(self, o: Tally) -> Tally {
        Tally {
            tests: self.tests + o.tests,
            successfully_mimic: self.successfully_mimic + o.successfully_mimic,
            incompletely_mimic: self.incompletely_mimic + o.incompletely_mimic,
            unhandled_mut_behavior: self.unhandled_mut_behavior + o.unhandled_mut_behavior,
            fixture_failures: self.fixture_failures + o.fixture_failures,
        }
    }

    pub fn percentages(&self) -> Percentages {
        Percentages {
            successfully_mimic: pct(self.successfully_mimic, self.tests),
            incompletely_mimic: pct(self.incompletely_mimic, self.tests),
            unhandled_mut_behavior: pct(self.unhandled_mut_behavior, self.tests),
        }
    }
}

/// `part / whole` as a percentage rounded to one decimal; 0 when `whole` is 0.
pub fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        return 0.0;
    }
    (part as f64 * 1000.0 / whole as f64).round() / 10.0
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Percentages {
    pub successfully_mimic: f64,
    pub incompletely_mimic: f64,
    pub unhandled_mut_behavior: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    #[serde(flatten)]
    pub counts: Tally,
    pub percentages: Percentages,
}

impl From<Tally> for Breakdown {
    fn from(counts: Tally) -> Self {
        Self { percentages: counts.percentages(), counts }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MutRollup {
    pub mut_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub project: Option<String>,
    #[serde(flatten)]
    pub counts: Tally,
    pub passing_oracles: Vec<OracleKind>,
}

impl MutRollup {
    pub fn has_passing_test(&self) -> bool {
        self.counts.successfully_mimic > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlakyTest {
    pub mut_id: String,
    pub test_name: String,
    pub statuses: Vec<RunStatus>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: Breakdown,
    pub projects: BTreeMap<String, Breakdown>,
    pub muts: Vec<MutRollup>,
    pub mut_count: usize,
    pub muts_with_passing_test: usize,
    pub muts_with_passing_test_pct: f64,
    /// Tests whose reruns disagree. They are not counted in any outcome.
    pub flaky: Vec<FlakyTest>,
}

/// Folds reruns of the same test (same `mut_id` and `test_name`) into one
/// result, setting aside tests whose reruns disagree.
fn fold_reruns(results: &[TestRunResult]) -> (Vec<&TestRunResult>, Vec<FlakyTest>) {
    let mut groups: BTreeMap<(&str, &str), Vec<&TestRunResult>> = BTreeMap::new();
    for r in results {
        groups.entry(r.key()).or_default().push(r);
    }
    let mut stable = Vec::new();
    let mut flaky = Vec::new();
    for ((mut_id, test_name), runs) in groups {
        if runs.iter().all(|r| r.status == runs[0].status) {
            stable.push(runs[0]);
        } else {
            flaky.push(FlakyTest {
                mut_id: mut_id.into(),
                test_name: test_name.into(),
                statuses: runs.iter().map(|r| r.status).collect(),
            });
        }
    }
    (stable, flaky)
}

pub fn aggregate(results: &[TestRunResult]) -> Summary {
    let (stable, flaky) = fold_reruns(results);
    let mut total = Tally::default();
    let mut projects: BTreeMap<String, Tally> = BTreeMap::new();
    let mut muts: BTreeMap<&str, MutRollup> = BTreeMap::new();
    for r in stable {
        total.add(r);
        if let Some(p) = &r.project {
            projects.entry(p.clone()).or_default().add(r);
        }
        let m = muts.entry(&r.mut_id).or_insert_with(|| MutRollup {
            mut_id: r.mut_id.clone(),
            project: r.project.clone(),
            ..Default::default()
        });
        m.counts.add(r);
        if r.status == RunStatus::Pass && !m.passing_oracles.contains(&r.oracle_kind) {
            m.passing_oracles.push(r.oracle_kind);
            m.passing_oracles.sort();
        }
    }
    let muts: Vec<MutRollup> = muts.into_values().collect();
    let with_pass = muts.iter().filter(|m| m.has_passing_test()).count();
    Summary {
        total: total.into(),
        projects: projects.into_iter().map(|(k, v)| (k, v.into())).collect(),
        mut_count: muts.len(),
        muts_with_passing_test: with_pass,
        muts_with_passing_test_pct: pct(with_pass, muts.len()),
        muts,
        flaky,
    }
}

/// Per-MUT table with generation statistics from `manifest` when given.
pub fn render_summary_table(summary: &Summary, manifest: Option<&Manifest>) -> String {
    let stats: BTreeMap<&str, &crate::codegen::MutStats> =
        manifest.map(|m| m.muts.iter().map(|s| (s.mut_id.as_str(), s)).collect()).unwrap_or_default();
    let headers = ["MUT", "#TESTS", "#STUBS", "#PO_STMNTS", "#CO_STMNTS", "MIMIC", "INCOMPLETE", "UNHANDLED"];
    let mut rows: Vec<[String; 8]> = Vec::new();
    for m in &summary.muts {
        let s = stats.get(m.mut_id.as_str());
        let stat = |f: fn(&crate::codegen::MutStats) -> usize| s.map_or("-".to_string(), |s| f(s).to_string());
        rows.push([
            m.mut_id.clone(),
            m.counts.tests.to_string(),
            stat(|s| s.stubs),
            stat(|s| s.po_statements),
            stat(|s| s.co_statements),
            m.counts.successfully_mimic.to_string(),
            m.counts.incompletely_mimic.to_string(),
            m.counts.unhandled_mut_behavior.to_string(),
        ]);
    }
    let mut widths = headers.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        let mut parts = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            parts.push(if i == 0 { format!("{c:<w$}", w = widths[i]) } else { format!("{c:>w$}", w = widths[i]) });
        }
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut out, &headers);
    for row in &rows {
        line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    let t = &summary.total;
    let _ = writeln!(
        out,
        "\n{} tests: {} successfully mimic ({:.1}%), {} incompletely mimic ({:.1}%), {} unhandled ({:.1}%, {} fixture failures)",
        t.counts.tests,
        t.counts.successfully_mimic,
        t.percentages.successfully_mimic,
        t.counts.incompletely_mimic,
        t.percentages.incompletely_mimic,
        t.counts.unhandled_mut_behavior,
        t.percentages.unhandled_mut_behavior,
        t.counts.fixture_failures,
    );
    let _ = writeln!(
        out,
        "{} of {} MUTs have a passing test ({:.1}%)",
        summary.muts_with_passing_test, summary.mut_count, summary.muts_with_passing_test_pct
    );
    if !summary.flaky.is_empty() {
        let _ = writeln!(out, "{} flaky tests not counted above", summary.flaky.len());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillRow {
    pub mutant: String,
    pub oo: bool,
    pub po: bool,
    pub co: bool,
}

impl KillRow {
    pub fn killed_by(&self, kind: OracleKind) -> bool {
        match kind {
            OracleKind::OO => self.oo,
            OracleKind::PO => self.po,
            OracleKind::CO => self.co,
        }
    }

    fn set(&mut self, kind: OracleKind) {
        match kind {
            OracleKind::OO => self.oo = true,
            OracleKind::PO => self.po = true,
            OracleKind::CO => self.co = true,
        }
    }

    pub fn killers(&self) -> Vec<OracleKind> {
        OracleKind::ALL.into_iter().filter(|k| self.killed_by(*k)).collect()
    }
}

/// Mutants killed by exactly one combination of oracles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionCell {
    pub oracles: Vec<OracleKind>,
    pub count: usize,
    pub mutants: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillMatrix {
    pub rows: Vec<KillRow>,
    /// The seven non-empty subsets of {OO, PO, CO}, singletons first.
    pub partition: Vec<PartitionCell>,
    pub survivors: Vec<String>,
}

fn subsets() -> Vec<Vec<OracleKind>> {
    use OracleKind::*;
    vec![vec![OO], vec![PO], vec![CO], vec![OO, PO], vec![OO, CO], vec![PO, CO], vec![OO, PO, CO]]
}

impl KillMatrix {
    pub fn killed(&self, kind: OracleKind) -> BTreeSet<&str> {
        self.rows.iter().filter(|r| r.killed_by(kind)).map(|r| r.mutant.as_str()).collect()
    }

    pub fn killed_total(&self) -> usize {
        self.rows.len() - self.survivors.len()
    }

    pub fn cell(&self, oracles: &[OracleKind]) -> Option<&PartitionCell> {
        self.partition.iter().find(|c| c.oracles == oracles)
    }

    pub fn render_table(&self) -> String {
        let width = self.rows.iter().map(|r| r.mutant.len()).max().unwrap_or(0).max("MUTANT".len());
        let mut out = format!("{:<width$}  OO  PO  CO\n", "MUTANT");
        let mark = |b: bool| if b { "x" } else { "." };
        for r in &self.rows {
            let _ = writeln!(out, "{:<width$}  {:>2}  {:>2}  {:>2}", r.mutant, mark(r.oo), mark(r.po), mark(r.co));
        }
        out.push('\n');
        for c in &self.partition {
            let name: Vec<String> = c.oracles.iter().map(|k| k.to_string()).collect();
            let _ = writeln!(out, "only {:<9} {:>4}  {}", name.join("+"), c.count, c.mutants.join(" "));
        }
        let _ = writeln!(out, "survivors      {:>4}  {}", self.survivors.len(), self.survivors.join(" "));
        out
    }
}

/// Orders ids so that embedded numbers compare by value: `m2` before `m10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for (x, y) in ca.iter().zip(&cb) {
        let ord = match (x, y) {
            ((true, x), (true, y)) => {
                let (x, y) = (x.trim_start_matches('0'), y.trim_start_matches('0'));
                x.len().cmp(&y.len()).then_with(|| x.cmp(y))
            }
            ((_, x), (_, y)) => x.cmp(y),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len()).then_with(|| a.cmp(b))
}

/// A mutant is killed by oracle K when some K test that passed on the
/// baseline fails on the mutant. Baseline tests with any non-passing run are
/// not considered.
pub fn kill_matrix(
    baseline: &[TestRunResult],
    mutants: &BTreeMap<String, Vec<TestRunResult>>,
) -> Result<KillMatrix, ReportError> {
    let mut known: BTreeMap<(&str, &str), bool> = BTreeMap::new();
    for r in baseline {
        let passing = known.entry(r.key()).or_insert(true);
        *passing &= r.status == RunStatus::Pass;
    }

    let mut ids: Vec<&String> = mutants.keys().collect();
    ids.sort_by(|a, b| natural_cmp(a, b));
    let mut rows = Vec::with_capacity(ids.len());
    for id in ids {
        let mut row = KillRow { mutant: id.clone(), oo: false, po: false, co: false };
        for r in &mutants[id] {
            match known.get(&r.key()) {
                None => {
                    return Err(ReportError::UnknownTest {
                        mutant: id.clone(),
                        mut_id: r.mut_id.clone(),
                        test_name: r.test_name.clone(),
                    })
                }
                Some(true) if r.status != RunStatus::Pass => row.set(r.oracle_kind),
                Some(_) => {}
            }
        }
        rows.push(row);
    }

    let partition = subsets()
        .into_iter()
        .map(|oracles| {
            let mutants: Vec<String> =
                rows.iter().filter(|r| r.killers() == oracles).map(|r| r.mutant.clone()).collect();
            PartitionCell { count: mutants.len(), oracles, mutants }
        })
        .collect();
    let survivors = rows.iter().filter(|r| r.killers().is_empty()).map(|r| r.mutant.clone()).collect();
    Ok(KillMatrix { rows, partition, survivors })
}
