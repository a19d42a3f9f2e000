//! Run configuration: flags override the JSON config file, which overrides defaults.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rickgen_core::model::DEFAULT_MIN_LOC;
use rickgen_core::{OracleKind, SelectionPolicy};
use serde::{Deserialize, Serialize};

pub const DEFAULT_PROFILE: &str = "pytest-rick";
pub const DEFAULT_OUT_DIR: &str = "rick-tests";

/// Every field optional, as read from a config file or flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub catalog_path: Option<PathBuf>,
    pub trace_paths: Option<Vec<PathBuf>>,
    pub snapshot_dir: Option<PathBuf>,
    pub selection: Option<SelectionPolicy>,
    pub oracle_kinds: Option<Vec<OracleKind>>,
    /// A file path or the id of a built-in profile.
    pub profile_path: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub strict: Option<bool>,
    pub min_loc: Option<u32>,
}

impl PartialConfig {
    /// Reads a config file. Relative paths in it are taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut c: PartialConfig =
            serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        c.catalog_path.as_mut().map(rebase);
        c.snapshot_dir.as_mut().map(rebase);
        c.out_dir.as_mut().map(rebase);
        if let Some(ts) = c.trace_paths.as_mut() {
            ts.iter_mut().for_each(rebase);
        }
        if let Some(p) = c.profile_path.as_mut() {
            let joined = base.join(&*p);
            if Path::new(p).is_relative() && joined.exists() {
                *p = joined.to_string_lossy().into_owned();
            }
        }
        Ok(c)
    }

    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: PartialConfig) -> PartialConfig {
        PartialConfig {
            catalog_path: self.catalog_path.or(lower.catalog_path),
            trace_paths: self.trace_paths.or(lower.trace_paths),
            snapshot_dir: self.snapshot_dir.or(lower.snapshot_dir),
            selection: self.selection.or(lower.selection),
            oracle_kinds: self.oracle_kinds.or(lower.oracle_kinds),
            profile_path: self.profile_path.or(lower.profile_path),
            out_dir: self.out_dir.or(lower.out_dir),
            strict: self.strict.or(lower.strict),
            min_loc: self.min_loc.or(lower.min_loc),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub catalog_path: PathBuf,
    pub trace_paths: Vec<PathBuf>,
    pub snapshot_dir: PathBuf,
    pub selection: SelectionPolicy,
    pub oracle_kinds: Vec<OracleKind>,
    pub profile_path: String,
    pub out_dir: PathBuf,
    pub strict: bool,
    pub min_loc: u32,
}

impl RunConfig {
    /// Fills defaults and checks invariants. The snapshot directory defaults
    /// to `snapshots/` next to the catalog.
    pub fn resolve(c: PartialConfig) -> Result<Self> {
        let Some(catalog_path) = c.catalog_path else { bail!("no catalog given (--catalog or catalog_path)") };
        let snapshot_dir = c
            .snapshot_dir
            .unwrap_or_else(|| catalog_path.parent().unwrap_or(Path::new("")).join("snapshots"));
        let mut oracle_kinds = c.oracle_kinds.unwrap_or_else(|| OracleKind::ALL.to_vec());
        oracle_kinds.sort();
        oracle_kinds.dedup();
        if oracle_kinds.is_empty() {
            bail!("oracle_kinds must name at least one of OO, PO, CO");
        }
        let min_loc = c.min_loc.unwrap_or(DEFAULT_MIN_LOC);
        if min_loc < 1 {
            bail!("min_loc must be at least 1");
        }
        Ok(RunConfig {
            catalog_path,
            trace_paths: c.trace_paths.unwrap_or_default(),
            snapshot_dir,
            selection: c.selection.unwrap_or_default(),
            oracle_kinds,
            profile_path: c.profile_path.unwrap_or_else(|| DEFAULT_PROFILE.into()),
            out_dir: c.out_dir.unwrap_or_else(|| DEFAULT_OUT_DIR.into()),
            strict: c.strict.unwrap_or(false),
            min_loc,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_defaults() {
        let file = PartialConfig {
            catalog_path: Some("from-file.json".into()),
            selection: Some(SelectionPolicy::All),
            min_loc: Some(5),
            ..Default::default()
        };
        let flags = PartialConfig { min_loc: Some(7), ..Default::default() };
        let c = RunConfig::resolve(flags.over(file)).unwrap();
        assert_eq!(c.catalog_path, PathBuf::from("from-file.json"));
        assert_eq!(c.selection, SelectionPolicy::All);
        assert_eq!(c.min_loc, 7);
        assert_eq!(c.oracle_kinds, OracleKind::ALL.to_vec());
        assert_eq!(c.profile_path, DEFAULT_PROFILE);
        assert_eq!(c.snapshot_dir, PathBuf::from("snapshots"));
        assert!(!c.strict);
    }

    #[test]
    fn invariants() {
        let base = || PartialConfig { catalog_path: Some("c.json".into()), ..Default::default() };
        assert!(RunConfig::resolve(PartialConfig { oracle_kinds: Some(vec![]), ..base() }).is_err());
        assert!(RunConfig::resolve(PartialConfig { min_loc: Some(0), ..base() }).is_err());
        assert!(RunConfig::resolve(PartialConfig::default()).is_err());
    }

    #[test]
    fn config_file_paths_are_relative_to_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rick.json");
        fs::write(&path, r#"{"catalog_path": "cat.json", "trace_paths": ["t.jsonl"], "selection": "nth:2", "oracle_kinds": ["CO"]}"#)
            .unwrap();
        let c = PartialConfig::load(&path).unwrap();
        assert_eq!(c.catalog_path, Some(dir.path().join("cat.json")));
        assert_eq!(c.trace_paths, Some(vec![dir.path().join("t.jsonl")]));
        assert_eq!(c.oracle_kinds, Some(vec![OracleKind::CO]));
        fs::write(&path, r#"{"catalog": "x"}"#).unwrap();
        assert!(PartialConfig::load(&path).is_err());
    }
}
