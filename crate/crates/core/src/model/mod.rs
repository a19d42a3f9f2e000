//! Shared data model: catalogs, trace records, value snapshots.

mod catalog;
mod kind;
mod record;
mod snapshot;
mod validate;

pub use catalog::{CandidateCatalog, MockableSite, MutEntry, TargetKind, DEFAULT_MIN_LOC};
pub use kind::{simple_name, KindCategory, ValueKind};
pub use record::{InvocationRecord, MockCallRecord, TraceRecord};
pub use snapshot::{values_equal, BlobRef, BlobStore, SnapshotError, ValueKey, ValueSnapshot};
pub use validate::{validate_record, Violation, ViolationKind};

