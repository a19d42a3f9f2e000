//! Loading catalogs and trace files, correlating mock calls with their
//! parent invocations, and choosing which invocations become tests.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_record, BlobStore, CandidateCatalog, InvocationRecord, MockCallRecord, SnapshotError,
    TraceRecord, ValueSnapshot, Violation, ViolationKind, DEFAULT_MIN_LOC,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{}: catalog invariant violated: {}", path.display(), join(violations))]
    InvalidCatalog { path: PathBuf, violations: Vec<Violation> },
    #[error("{location}: {violation}")]
    Strict { location: Location, violation: Violation },
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<CandidateCatalog, IngestError> {
    load_catalog_with(path, DEFAULT_MIN_LOC)
}

/// Parses a catalog document and checks its invariants against `min_loc`.
pub fn load_catalog_with(path: impl AsRef<Path>, min_loc: u32) -> Result<CandidateCatalog, IngestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.into(), source })?;
    let catalog: CandidateCatalog = serde_json::from_str(&text).map_err(|e| IngestError::Parse {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let violations = catalog.check(min_loc);
    if !violations.is_empty() {
        return Err(IngestError::InvalidCatalog { path: path.into(), violations });
    }
    Ok(catalog)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub file: PathBuf,
    pub line: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file.display(), self.line)
    }
}

/// A problem found while ingesting; never fatal outside strict mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub location: Option<Location>,
    pub violation: Violation,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{loc}: {}", self.violation),
            None => write!(f, "{}", self.violation),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// Turn any record-level violation into an error.
    pub strict: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub files: usize,
    pub records: usize,
    pub invocation_records: usize,
    pub mockcall_records: usize,
    pub malformed_lines: usize,
    pub invalid_records: usize,
    pub duplicate_records: usize,
    pub incomplete_invocations: usize,
    pub orphan_calls: usize,
    pub opaque_state_invocations: usize,
}

/// Validated records, indexed by invocation id and MUT id. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct TraceStore {
    invocations: Vec<InvocationRecord>,
    incomplete: Vec<InvocationRecord>,
    calls: Vec<MockCallRecord>,
    by_id: HashMap<String, usize>,
    by_mut: BTreeMap<String, Vec<usize>>,
    findings: Vec<Finding>,
    summary: IngestSummary,
}

impl TraceStore {
    /// Completed, valid invocations in ingest order.
    pub fn invocations(&self) -> &[InvocationRecord] {
        &self.invocations
    }

    /// Invocations whose MUT did not complete; excluded from correlation.
    pub fn incomplete(&self) -> &[InvocationRecord] {
        &self.incomplete
    }

    pub fn calls(&self) -> &[MockCallRecord] {
        &self.calls
    }

    pub fn invocation(&self, id: &str) -> Option<&InvocationRecord> {
        self.by_id.get(id).map(|&i| &self.invocations[i])
    }

    pub fn invocations_of<'a>(&'a self, mut_id: &str) -> impl Iterator<Item = &'a InvocationRecord> + 'a {
        self.by_mut.get(mut_id).into_iter().flatten().map(|&i| &self.invocations[i])
    }

    pub fn findings(&self) -> &[Finding] {
        &self.findings
    }

    pub fn summary(&self) -> &IngestSummary {
        &self.summary
    }
}

struct ScannedLine {
    line: usize,
    record: Result<TraceRecord, Vec<Violation>>,
}

fn scan_file(path: &Path, catalog: &CandidateCatalog, blobs: &BlobStore) -> Result<Vec<ScannedLine>, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.into(), source })?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line = idx + 1;
        let mut record: TraceRecord = match serde_json::from_str(raw) {
            Ok(r) => r,
            Err(e) => {
                let v = Violation::new(ViolationKind::Malformed, format!("line {line}"), e.to_string());
                out.push(ScannedLine { line, record: Err(vec![v]) });
                continue;
            }
        };
        let subject = record.subject();
        let mut violations = validate_record(&record, catalog);
        for snap in record.snapshots_mut() {
            if let ValueSnapshot::Blob(blob) = snap {
                match blobs.read(blob) {
                    Ok(bytes) => {
                        if bytes.len() as u64 != blob.byte_size {
                            violations.push(Violation::new(
                                ViolationKind::BlobSizeMismatch,
                                subject.clone(),
                                format!("{} has {} bytes, record says {}", blob.path, bytes.len(), blob.byte_size),
                            ));
                        }
                        blob.sha256 = Some(hex_sha256(&bytes));
                    }
                    Err(e @ (SnapshotError::BlobUnreadable { .. } | SnapshotError::BlobPathOutside(_))) => {
                        violations.push(Violation::new(ViolationKind::BlobUnreadable, subject.clone(), e.to_string()));
                    }
                }
            }
        }
        let record = if violations.is_empty() { Ok(record) } else { Err(violations) };
        out.push(ScannedLine { line, record });
    }
    Ok(out)
}

fn hex_sha256(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

/// Reads, validates and indexes trace files. Files are scanned in parallel;
/// records are merged in the order the paths were given.
pub fn ingest<P: AsRef<Path> + Sync>(
    paths: &[P],
    snapshot_dir: impl AsRef<Path>,
    catalog: &CandidateCatalog,
    options: &IngestOptions,
) -> Result<TraceStore, IngestError> {
    let blobs = BlobStore::new(snapshot_dir.as_ref());
    let scanned: Vec<(PathBuf, Vec<ScannedLine>)> = paths
        .par_iter()
        .map(|p| scan_file(p.as_ref(), catalog, &blobs).map(|lines| (p.as_ref().to_path_buf(), lines)))
        .collect::<Result<_, _>>()?;

    let mut store = TraceStore::default();
    store.summary.files = paths.len();
    let mut seen_invocations = HashSet::new();
    let mut seen_calls = HashSet::new();
    let mut call_locations = Vec::new();

    let fail = |store: &mut TraceStore, location: Location, violation: Violation| -> Result<(), IngestError> {
        if options.strict {
            return Err(IngestError::Strict { location, violation });
        }
        log::warn!("{location}: {violation}");
        store.findings.push(Finding { location: Some(location), violation });
        Ok(())
    };

    for (file, lines) in scanned {
        for ScannedLine { line, record } in lines {
            store.summary.records += 1;
            let location = Location { file: file.clone(), line };
            let record = match record {
                Ok(r) => r,
                Err(violations) => {
                    if violations.iter().any(|v| v.kind == ViolationKind::Malformed) {
                        store.summary.malformed_lines += 1;
                    } else {
                        store.summary.invalid_records += 1;
                    }
                    for v in violations {
                        fail(&mut store, location.clone(), v)?;
                    }
                    continue;
                }
            };
            match record {
                TraceRecord::Invocation(inv) => {
                    store.summary.invocation_records += 1;
                    if !seen_invocations.insert(inv.invocation_id.clone()) {
                        store.summary.duplicate_records += 1;
                        let v = Violation::new(
                            ViolationKind::DuplicateId,
                            format!("invocation {}", inv.invocation_id),
                            "invocation_id already seen",
                        );
                        fail(&mut store, location, v)?;
                        continue;
                    }
                    if !inv.completed {
                        store.summary.incomplete_invocations += 1;
                        store.incomplete.push(inv);
                        continue;
                    }
                    if inv.has_opaque_state() {
                        store.summary.opaque_state_invocations += 1;
                    }
                    let idx = store.invocations.len();
                    store.by_id.insert(inv.invocation_id.clone(), idx);
                    store.by_mut.entry(inv.mut_id.clone()).or_default().push(idx);
                    store.invocations.push(inv);
                }
                TraceRecord::MockCall(call) => {
                    store.summary.mockcall_records += 1;
                    if !seen_calls.insert((call.parent_id.clone(), call.seq)) {
                        store.summary.duplicate_records += 1;
                        let v = Violation::new(
                            ViolationKind::DuplicateId,
                            format!("mockcall {}#{}", call.parent_id, call.seq),
                            "(parent_id, seq) already seen",
                        );
                        fail(&mut store, location, v)?;
                        continue;
                    }
                    call_locations.push(location);
                    store.calls.push(call);
                }
            }
        }
    }

    let mut seqs: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for c in &store.calls {
        seqs.entry(c.parent_id.as_str()).or_default().push(c.seq);
    }
    let mut gaps = Vec::new();
    for (parent, mut s) in seqs {
        s.sort_unstable();
        if s.iter().enumerate().any(|(i, &v)| v != i as u64) {
            gaps.push(Violation::new(
                ViolationKind::SeqGap,
                format!("invocation {parent}"),
                format!("mockcall seq values {s:?} are not contiguous from 0"),
            ));
        }
    }
    for v in gaps {
        if options.strict {
            return Err(IngestError::Strict { location: Location { file: PathBuf::new(), line: 0 }, violation: v });
        }
        store.findings.push(Finding { location: None, violation: v });
    }

    for (call, loc) in store.calls.iter().zip(call_locations) {
        if !store.by_id.contains_key(&call.parent_id) {
            store.summary.orphan_calls += 1;
            store.findings.push(Finding {
                location: Some(loc),
                violation: Violation::new(
                    ViolationKind::OrphanMockcall,
                    format!("mockcall {}#{}", call.parent_id, call.seq),
                    "no completed invocation with this parent_id",
                ),
            });
        }
    }
    Ok(store)
}

/// An invocation together with the mock calls made inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedInvocation {
    pub invocation: InvocationRecord,
    /// Ordered by `(timestamp_ns, seq)`.
    pub calls: Vec<MockCallRecord>,
}

impl CorrelatedInvocation {
    pub fn id(&self) -> &str {
        &self.invocation.invocation_id
    }

    pub fn mut_id(&self) -> &str {
        &self.invocation.mut_id
    }

    pub fn no_mock_calls(&self) -> bool {
        self.calls.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrphanReason {
    MissingParent,
    IncompleteParent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orphan {
    pub call: MockCallRecord,
    pub reason: OrphanReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    /// Sorted by `(mut_id, timestamp_ns, invocation_id)`.
    pub invocations: Vec<CorrelatedInvocation>,
    pub orphans: Vec<Orphan>,
}

/// Attaches every mock call to the invocation named by its `parent_id`.
pub fn correlate(store: &TraceStore) -> Correlation {
    let mut grouped: HashMap<&str, Vec<&MockCallRecord>> = HashMap::new();
    let mut orphans = Vec::new();
    let incomplete: HashSet<&str> = store.incomplete.iter().map(|i| i.invocation_id.as_str()).collect();
    for call in &store.calls {
        if store.by_id.contains_key(&call.parent_id) {
            grouped.entry(call.parent_id.as_str()).or_default().push(call);
        } else {
            let reason = if incomplete.contains(call.parent_id.as_str()) {
                OrphanReason::IncompleteParent
            } else {
                OrphanReason::MissingParent
            };
            log::warn!("dropping orphan mockcall {}#{} ({reason:?})", call.parent_id, call.seq);
            orphans.push(Orphan { call: call.clone(), reason });
        }
    }
    let mut invocations: Vec<CorrelatedInvocation> = store
        .invocations
        .iter()
        .map(|inv| {
            let mut calls: Vec<MockCallRecord> = grouped
                .remove(inv.invocation_id.as_str())
                .unwrap_or_default()
                .into_iter()
                .cloned()
                .collect();
            calls.sort_by_key(|c| (c.timestamp_ns, c.seq));
            CorrelatedInvocation { invocation: inv.clone(), calls }
        })
        .collect();
    invocations.sort_by(|a, b| {
        (a.mut_id(), a.invocation.timestamp_ns, a.id()).cmp(&(b.mut_id(), b.invocation.timestamp_ns, b.id()))
    });
    Correlation { invocations, orphans }
}

/// Which invocations of each MUT feed test generation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SelectionPolicy {
    #[default]
    First,
    /// One-based position in timestamp order.
    Nth(NonZeroUsize),
    All,
}

impl FromStr for SelectionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "first" => Ok(SelectionPolicy::First),
            "all" => Ok(SelectionPolicy::All),
            other => {
                let n = other.strip_prefix("nth:").unwrap_or(other);
                n.parse::<NonZeroUsize>()
                    .map(SelectionPolicy::Nth)
                    .map_err(|_| format!("invalid selection {s:?}: expected first, all, or nth:N with N >= 1"))
            }
        }
    }
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionPolicy::First => f.write_str("first"),
            SelectionPolicy::Nth(n) => write!(f, "nth:{n}"),
            SelectionPolicy::All => f.write_str("all"),
        }
    }
}

impl Serialize for SelectionPolicy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SelectionPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    NoMockCalls,
    UnserializableState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub mut_id: String,
    pub invocation_id: String,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub selected: Vec<CorrelatedInvocation>,
    pub excluded: Vec<Exclusion>,
    pub warnings: Vec<String>,
}

/// Applies `policy` per MUT over timestamp order, then drops invocations
/// without mock calls or with uncapturable receiver/parameter state.
pub fn select(correlated: &[CorrelatedInvocation], policy: SelectionPolicy) -> Selection {
    let mut by_mut: BTreeMap<&str, Vec<&CorrelatedInvocation>> = BTreeMap::new();
    for inv in correlated {
        by_mut.entry(inv.mut_id()).or_default().push(inv);
    }
    let mut out = Selection::default();
    for (mut_id, mut invs) in by_mut {
        invs.sort_by(|a, b| (a.invocation.timestamp_ns, a.id()).cmp(&(b.invocation.timestamp_ns, b.id())));
        let picked: Vec<&CorrelatedInvocation> = match policy {
            SelectionPolicy::First => invs.into_iter().take(1).collect(),
            SelectionPolicy::All => invs,
            SelectionPolicy::Nth(n) => match invs.get(n.get() - 1) {
                Some(inv) => vec![*inv],
                None => {
                    let w = format!("{mut_id}: policy {policy} but only {} invocation(s) recorded", invs.len());
                    log::warn!("{w}");
                    out.warnings.push(w);
                    vec![]
                }
            },
        };
        for inv in picked {
            let reason = if inv.no_mock_calls() {
                Some(ExclusionReason::NoMockCalls)
            } else if inv.invocation.has_opaque_state() {
                Some(ExclusionReason::UnserializableState)
            } else {
                None
            };
            match reason {
                Some(reason) => out.excluded.push(Exclusion {
                    mut_id: mut_id.to_string(),
                    invocation_id: inv.id().to_string(),
                    reason,
                }),
                None => out.selected.push(inv.clone()),
            }
        }
    }
    out
}
