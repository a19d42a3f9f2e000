use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::kind::ValueKind;
use super::validate::{Violation, ViolationKind};

pub const DEFAULT_MIN_LOC: u32 = 3;

/// How a mock reaches the object a mockable call is made on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TargetKind {
    Field,
    Parameter,
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetKind::Field => "field",
            TargetKind::Parameter => "param",
        })
    }
}

/// A call inside a MUT made on a field or parameter of an external type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockableSite {
    pub site_id: String,
    pub target_kind: TargetKind,
    /// Field name, or zero-based parameter index.
    pub accessor: String,
    pub external_type: String,
    pub callee_name: String,
    #[serde(default)]
    pub callee_param_kinds: Vec<ValueKind>,
    pub callee_return_kind: ValueKind,
}

impl MockableSite {
    pub fn parameter_index(&self) -> Option<usize> {
        match self.target_kind {
            TargetKind::Parameter => self.accessor.parse().ok(),
            TargetKind::Field => None,
        }
    }
}

/// A method under test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutEntry {
    pub mut_id: String,
    pub declaring_type: String,
    pub method_name: String,
    #[serde(default)]
    pub param_kinds: Vec<ValueKind>,
    pub return_kind: ValueKind,
    pub loc: u32,
    pub mockable_sites: Vec<MockableSite>,
}

impl MutEntry {
    pub fn site(&self, site_id: &str) -> Option<&MockableSite> {
        self.mockable_sites.iter().find(|s| s.site_id == site_id)
    }
}

#[derive(Deserialize)]
struct CatalogFile {
    schema_version: u32,
    entries: Vec<MutEntry>,
}

/// Statically discovered MUTs and their mockable call sites.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "CatalogFile")]
pub struct CandidateCatalog {
    pub schema_version: u32,
    pub entries: Vec<MutEntry>,
    #[serde(skip)]
    by_mut: HashMap<String, usize>,
    #[serde(skip)]
    by_site: HashMap<String, (usize, usize)>,
}

impl From<CatalogFile> for CandidateCatalog {
    fn from(f: CatalogFile) -> Self {
        Self::new(f.schema_version, f.entries)
    }
}

impl CandidateCatalog {
    pub const SCHEMA_VERSION: u32 = 1;

    pub fn new(schema_version: u32, entries: Vec<MutEntry>) -> Self {
        let mut by_mut = HashMap::new();
        let mut by_site = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_mut.entry(e.mut_id.clone()).or_insert(i);
            for (j, s) in e.mockable_sites.iter().enumerate() {
                by_site.entry(s.site_id.clone()).or_insert((i, j));
            }
        }
        Self { schema_version, entries, by_mut, by_site }
    }

    pub fn entry(&self, mut_id: &str) -> Option<&MutEntry> {
        self.by_mut.get(mut_id).map(|&i| &self.entries[i])
    }

    /// The site with this id and the MUT that owns it.
    pub fn site(&self, site_id: &str) -> Option<(&MutEntry, &MockableSite)> {
        self.by_site
            .get(site_id)
            .map(|&(i, j)| (&self.entries[i], &self.entries[i].mockable_sites[j]))
    }

    /// Every catalog invariant that does not hold.
    pub fn check(&self, min_loc: u32) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut muts = HashSet::new();
        let mut sites = HashSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            let subject = format!("entries[{i}] {}", e.mut_id);
            let mut v = |kind, msg: String| out.push(Violation::new(kind, subject.clone(), msg));
            if !muts.insert(e.mut_id.as_str()) {
                v(ViolationKind::DuplicateId, format!("mut_id {} appears more than once", e.mut_id));
            }
            if e.mockable_sites.is_empty() {
                v(ViolationKind::NoMockableSites, "entry lists no mockable sites".into());
            }
            if e.loc < min_loc {
                v(ViolationKind::BelowMinLoc, format!("loc {} is below the minimum of {min_loc}", e.loc));
            }
            for s in &e.mockable_sites {
                if !sites.insert(s.site_id.as_str()) {
                    v(ViolationKind::DuplicateId, format!("site_id {} appears more than once", s.site_id));
                }
                if s.external_type == e.declaring_type {
                    v(
                        ViolationKind::SelfTypedSite,
                        format!("site {} is on the declaring type {}", s.site_id, e.declaring_type),
                    );
                }
                if s.target_kind == TargetKind::Parameter
                    && s.parameter_index().is_none_or(|k| k >= e.param_kinds.len())
                {
                    v(
                        ViolationKind::BadAccessor,
                        format!(
                            "site {} accessor {:?} is not a parameter index below {}",
                            s.site_id,
                            s.accessor,
                            e.param_kinds.len()
                        ),
                    );
                }
            }
        }
        out
    }
}
