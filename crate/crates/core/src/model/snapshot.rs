use std::fs;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::kind::ValueKind;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot blob unreadable: {path}: {source}")]
    BlobUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("snapshot blob path escapes the snapshot directory: {0}")]
    BlobPathOutside(String),
}

/// Reference to a serialized value stored next to the trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlobRef {
    /// Path relative to the snapshot directory.
    pub path: String,
    pub byte_size: u64,
    /// Hex SHA-256 of the blob contents, filled in at ingest.
    pub sha256: Option<String>,
}

/// A captured runtime value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawSnapshot", into = "RawSnapshot")]
pub enum ValueSnapshot {
    /// Marker for a call that returned nothing.
    Void,
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Blob(BlobRef),
    /// The value was observed but could not be captured.
    Opaque { reason: Option<String> },
}

/// Structural equality: same variant and contents, floats by bit pattern.
/// This is record identity, not the value semantics of [`values_equal`].
impl PartialEq for ValueSnapshot {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ValueSnapshot::Opaque { reason: a }, ValueSnapshot::Opaque { reason: b }) => a == b,
            (ValueSnapshot::Blob(a), ValueSnapshot::Blob(b)) => a == b,
            _ => self.key().is_some() && self.key() == other.key(),
        }
    }
}

/// Equality key for snapshots. Opaque values have none.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueKey {
    Void,
    Null,
    Bool(bool),
    Int(i64),
    Float(u64),
    Str(String),
    BlobDigest(String),
    BlobPath(String),
}

impl ValueSnapshot {
    pub fn opaque(reason: impl Into<String>) -> Self {
        ValueSnapshot::Opaque { reason: Some(reason.into()) }
    }

    pub fn blob(path: impl Into<String>, byte_size: u64) -> Self {
        ValueSnapshot::Blob(BlobRef { path: path.into(), byte_size, sha256: None })
    }

    pub fn wire_kind(&self) -> &'static str {
        match self {
            ValueSnapshot::Void => "VOID",
            ValueSnapshot::Null => "NULL",
            ValueSnapshot::Bool(_) => "BOOL",
            ValueSnapshot::Int(_) => "INT",
            ValueSnapshot::Float(_) => "FLOAT",
            ValueSnapshot::Str(_) => "STRING",
            ValueSnapshot::Blob(_) => "BLOB_REF",
            ValueSnapshot::Opaque { .. } => "OPAQUE",
        }
    }

    pub fn is_opaque(&self) -> bool {
        matches!(self, ValueSnapshot::Opaque { .. })
    }

    pub fn is_void(&self) -> bool {
        matches!(self, ValueSnapshot::Void)
    }

    /// Bool, int, float or string.
    pub fn is_scalar(&self) -> bool {
        matches!(
            self,
            ValueSnapshot::Bool(_) | ValueSnapshot::Int(_) | ValueSnapshot::Float(_) | ValueSnapshot::Str(_)
        )
    }

    pub fn as_blob(&self) -> Option<&BlobRef> {
        match self {
            ValueSnapshot::Blob(b) => Some(b),
            _ => None,
        }
    }

    /// Whether this value may stand for a declared kind.
    pub fn fits(&self, kind: &ValueKind) -> bool {
        match (kind, self) {
            (ValueKind::Void, ValueSnapshot::Void) => true,
            (ValueKind::Void, _) | (_, ValueSnapshot::Void) => false,
            (_, ValueSnapshot::Opaque { .. }) => true,
            (ValueKind::Bool, ValueSnapshot::Bool(_)) => true,
            (ValueKind::Int, ValueSnapshot::Int(_)) => true,
            (ValueKind::Float, ValueSnapshot::Float(_)) => true,
            (ValueKind::Str, ValueSnapshot::Str(_) | ValueSnapshot::Null) => true,
            (ValueKind::Object(_), _) => true,
            _ => false,
        }
    }

    /// Key under which two snapshots compare equal. Blobs use the digest
    /// recorded at ingest, or their path when no digest is known.
    pub fn key(&self) -> Option<ValueKey> {
        Some(match self {
            ValueSnapshot::Void => ValueKey::Void,
            ValueSnapshot::Null => ValueKey::Null,
            ValueSnapshot::Bool(b) => ValueKey::Bool(*b),
            ValueSnapshot::Int(i) => ValueKey::Int(*i),
            ValueSnapshot::Float(x) => ValueKey::Float(x.to_bits()),
            ValueSnapshot::Str(s) => ValueKey::Str(s.clone()),
            ValueSnapshot::Blob(b) => match &b.sha256 {
                Some(d) => ValueKey::BlobDigest(d.clone()),
                None => ValueKey::BlobPath(b.path.clone()),
            },
            ValueSnapshot::Opaque { .. } => return None,
        })
    }
}

/// Directory holding snapshot blobs.
#[derive(Debug, Clone)]
pub struct BlobStore {
    root: PathBuf,
}

impl BlobStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn resolve(&self, relative: &str) -> Result<PathBuf, SnapshotError> {
        let rel = Path::new(relative);
        let clean = rel
            .components()
            .all(|c| matches!(c, Component::Normal(_) | Component::CurDir));
        if relative.is_empty() || !clean {
            return Err(SnapshotError::BlobPathOutside(relative.to_string()));
        }
        Ok(self.root.join(rel))
    }

    pub fn read(&self, blob: &BlobRef) -> Result<Vec<u8>, SnapshotError> {
        let path = self.resolve(&blob.path)?;
        fs::read(&path).map_err(|source| SnapshotError::BlobUnreadable { path, source })
    }

    /// Hex SHA-256 of the blob's bytes, read from disk.
    pub fn digest(&self, blob: &BlobRef) -> Result<String, SnapshotError> {
        Ok(hex::encode(Sha256::digest(self.read(blob)?)))
    }
}

/// Value equality as used for stub and oracle deduplication.
///
/// Scalars compare by value with floats compared bit for bit. Blobs compare
/// by the SHA-256 of their contents. Opaque values equal nothing.
pub fn values_equal(
    a: &ValueSnapshot,
    b: &ValueSnapshot,
    blobs: &BlobStore,
) -> Result<bool, SnapshotError> {
    use ValueSnapshot as V;
    Ok(match (a, b) {
        (V::Blob(x), V::Blob(y)) => blobs.digest(x)? == blobs.digest(y)?,
        (V::Opaque { .. }, _) | (_, V::Opaque { .. }) => false,
        _ => a.key() == b.key(),
    })
}

#[derive(Serialize, Deserialize)]
struct RawSnapshot {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inline: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blob_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    byte_size: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

fn float_from_json(v: &serde_json::Value) -> Option<f64> {
    match v {
        serde_json::Value::Number(n) => n.as_f64(),
        serde_json::Value::String(s) => match s.as_str() {
            "NaN" => Some(f64::NAN),
            "inf" | "Infinity" => Some(f64::INFINITY),
            "-inf" | "-Infinity" => Some(f64::NEG_INFINITY),
            _ => None,
        },
        _ => None,
    }
}

fn float_to_json(x: f64) -> serde_json::Value {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        serde_json::Value::from(x)
    }
}

impl TryFrom<RawSnapshot> for ValueSnapshot {
    type Error = String;

    fn try_from(raw: RawSnapshot) -> Result<Self, String> {
        let is_scalar = matches!(raw.kind.as_str(), "BOOL" | "INT" | "FLOAT" | "STRING");
        if is_scalar != raw.inline.is_some() {
            return Err(format!("{} snapshot: inline value must be present iff kind is scalar", raw.kind));
        }
        if (raw.kind == "BLOB_REF") != raw.blob_path.is_some() {
            return Err(format!("{} snapshot: blob_path must be present iff kind is BLOB_REF", raw.kind));
        }
        let bad = |what: &str| format!("{} snapshot: inline value is not {what}", raw.kind);
        let inline = raw.inline.as_ref();
        Ok(match raw.kind.as_str() {
            "VOID" => ValueSnapshot::Void,
            "NULL" => ValueSnapshot::Null,
            "BOOL" => ValueSnapshot::Bool(inline.and_then(|v| v.as_bool()).ok_or_else(|| bad("a boolean"))?),
            "INT" => ValueSnapshot::Int(inline.and_then(|v| v.as_i64()).ok_or_else(|| bad("an integer"))?),
            "FLOAT" => ValueSnapshot::Float(inline.and_then(float_from_json).ok_or_else(|| bad("a number"))?),
            "STRING" => ValueSnapshot::Str(
                inline.and_then(|v| v.as_str()).ok_or_else(|| bad("a string"))?.to_string(),
            ),
            "BLOB_REF" => {
                let byte_size = raw.byte_size.filter(|&n| n > 0).ok_or_else(|| {
                    "BLOB_REF snapshot: byte_size must be present and positive".to_string()
                })?;
                ValueSnapshot::Blob(BlobRef {
                    path: raw.blob_path.unwrap_or_default(),
                    byte_size,
                    sha256: raw.sha256,
                })
            }
            "OPAQUE" => ValueSnapshot::Opaque { reason: raw.reason },
            other => return Err(format!("unknown snapshot kind {other:?}")),
        })
    }
}

impl From<ValueSnapshot> for RawSnapshot {
    fn from(v: ValueSnapshot) -> Self {
        let mut raw = RawSnapshot {
            kind: v.wire_kind().to_string(),
            inline: None,
            blob_path: None,
            byte_size: None,
            sha256: None,
            reason: None,
        };
        match v {
            ValueSnapshot::Bool(b) => raw.inline = Some(b.into()),
            ValueSnapshot::Int(i) => raw.inline = Some(i.into()),
            ValueSnapshot::Float(x) => raw.inline = Some(float_to_json(x)),
            ValueSnapshot::Str(s) => raw.inline = Some(s.into()),
            ValueSnapshot::Blob(b) => {
                raw.blob_path = Some(b.path);
                raw.byte_size = Some(b.byte_size);
                raw.sha256 = b.sha256;
            }
            ValueSnapshot::Opaque { reason } => raw.reason = reason,
            ValueSnapshot::Void | ValueSnapshot::Null => {}
        }
        raw
    }
}
