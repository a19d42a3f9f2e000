use std::fmt;

use serde::{Deserialize, Serialize};

use super::catalog::CandidateCatalog;
use super::record::{InvocationRecord, MockCallRecord, TraceRecord};
use super::snapshot::ValueSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Malformed,
    UnknownMut,
    UnknownSite,
    ArityMismatch,
    KindMismatch,
    DuplicateId,
    OrphanMockcall,
    SeqGap,
    BlobUnreadable,
    BlobSizeMismatch,
    NoMockableSites,
    BelowMinLoc,
    SelfTypedSite,
    BadAccessor,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Malformed => "malformed record",
            ViolationKind::UnknownMut => "unknown mut",
            ViolationKind::UnknownSite => "unknown site",
            ViolationKind::ArityMismatch => "arity mismatch",
            ViolationKind::KindMismatch => "kind mismatch",
            ViolationKind::DuplicateId => "duplicate id",
            ViolationKind::OrphanMockcall => "orphan mockcall",
            ViolationKind::SeqGap => "seq gap",
            ViolationKind::BlobUnreadable => "snapshot blob unreadable",
            ViolationKind::BlobSizeMismatch => "blob size mismatch",
            ViolationKind::NoMockableSites => "no mockable sites",
            ViolationKind::BelowMinLoc => "below minimum loc",
            ViolationKind::SelfTypedSite => "site on declaring type",
            ViolationKind::BadAccessor => "bad accessor",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: String,
    pub message: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self { kind, subject: subject.into(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.kind, self.subject, self.message)
    }
}

/// Schema and referential checks for a single record. An empty result means
/// the record is well formed with respect to `catalog`.
pub fn validate_record(record: &TraceRecord, catalog: &CandidateCatalog) -> Vec<Violation> {
    let mut out = Vec::new();
    let subject = record.subject();
    match record {
        TraceRecord::Invocation(r) => check_invocation(r, catalog, &subject, &mut out),
        TraceRecord::MockCall(c) => check_mockcall(c, catalog, &subject, &mut out),
    }
    out
}

fn check_invocation(r: &InvocationRecord, catalog: &CandidateCatalog, subject: &str, out: &mut Vec<Violation>) {
    if r.invocation_id.is_empty() {
        out.push(Violation::new(ViolationKind::Malformed, subject, "empty invocation_id"));
    }
    if r.receiver.is_void() {
        out.push(Violation::new(ViolationKind::KindMismatch, subject, "receiver is VOID"));
    }
    let Some(entry) = catalog.entry(&r.mut_id) else {
        out.push(Violation::new(ViolationKind::UnknownMut, subject, format!("mut_id {} not in catalog", r.mut_id)));
        return;
    };
    check_values(&r.params, &entry.param_kinds, &r.returned, &entry.return_kind, subject, out);
}

fn check_mockcall(c: &MockCallRecord, catalog: &CandidateCatalog, subject: &str, out: &mut Vec<Violation>) {
    let Some((_, site)) = catalog.site(&c.site_id) else {
        out.push(Violation::new(ViolationKind::UnknownSite, subject, format!("site_id {} not in catalog", c.site_id)));
        return;
    };
    check_values(&c.params, &site.callee_param_kinds, &c.returned, &site.callee_return_kind, subject, out);
}

fn check_values(
    params: &[ValueSnapshot],
    param_kinds: &[crate::model::ValueKind],
    returned: &ValueSnapshot,
    return_kind: &crate::model::ValueKind,
    subject: &str,
    out: &mut Vec<Violation>,
) {
    if params.len() != param_kinds.len() {
        out.push(Violation::new(
            ViolationKind::ArityMismatch,
            subject,
            format!("{} params recorded, catalog declares {}", params.len(), param_kinds.len()),
        ));
    } else {
        for (i, (p, k)) in params.iter().zip(param_kinds).enumerate() {
            if !p.fits(k) {
                out.push(Violation::new(
                    ViolationKind::KindMismatch,
                    subject,
                    format!("param {i} is {} but declared {k}", p.wire_kind()),
                ));
            }
        }
    }
    if !returned.fits(return_kind) {
        out.push(Violation::new(
            ViolationKind::KindMismatch,
            subject,
            format!("returned {} but declared {return_kind}", returned.wire_kind()),
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog::fixtures::*;
    use crate::model::MutEntry;

    fn catalog() -> CandidateCatalog {
        let mut one_param = load_existing_entry();
        one_param.mut_id = "one".into();
        one_param.param_kinds = vec!["int".into()];
        for s in &mut one_param.mockable_sites {
            s.site_id.push('1');
        }
        CandidateCatalog::new(1, vec![load_existing_entry(), one_param])
    }

    fn inv(mut_id: &str, params: Vec<ValueSnapshot>) -> TraceRecord {
        TraceRecord::Invocation(InvocationRecord {
            invocation_id: "i1".into(),
            mut_id: mut_id.into(),
            timestamp_ns: 1,
            receiver: ValueSnapshot::blob("r.bin", 3),
            params,
            returned: ValueSnapshot::Bool(true),
            completed: true,
        })
    }

    #[test]
    fn matching_arity_is_ok() {
        assert!(validate_record(&inv("one", vec![ValueSnapshot::Int(3)]), &catalog()).is_empty());
    }

    #[test]
    fn arity_mismatch_from_mutated_fixture() {
        let mut r = inv("one", vec![ValueSnapshot::Int(3)]);
        if let TraceRecord::Invocation(i) = &mut r {
            i.params.push(ValueSnapshot::Int(4));
        }
        let v = validate_record(&r, &catalog());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind.to_string(), "arity mismatch");
    }

    #[test]
    fn unknown_site() {
        let c = TraceRecord::MockCall(MockCallRecord {
            parent_id: "i1".into(),
            site_id: "nope".into(),
            seq: 0,
            timestamp_ns: 2,
            params: vec![],
            returned: ValueSnapshot::Void,
        });
        let v = validate_record(&c, &catalog());
        assert_eq!(v[0].kind.to_string(), "unknown site");
    }

    #[test]
    fn kind_mismatches() {
        let c = TraceRecord::MockCall(MockCallRecord {
            parent_id: "i1".into(),
            site_id: "s-header".into(),
            seq: 0,
            timestamp_ns: 2,
            params: vec![ValueSnapshot::Float(1.0)],
            returned: ValueSnapshot::Void,
        });
        let v = validate_record(&c, &catalog());
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|v| v.kind == ViolationKind::KindMismatch));
        let unknown: MutEntry = load_existing_entry();
        assert!(!validate_record(&inv(&unknown.mut_id, vec![]), &catalog())
            .iter()
            .any(|v| v.kind == ViolationKind::UnknownMut));
        assert_eq!(validate_record(&inv("ghost", vec![]), &catalog())[0].kind, ViolationKind::UnknownMut);
    }

    #[test]
    fn reparsed_record_validates_the_same() {
        let cat = catalog();
        for r in [inv("one", vec![ValueSnapshot::Int(3), ValueSnapshot::Null]), inv("ghost", vec![])] {
            let text = serde_json::to_string(&r).unwrap();
            let back: TraceRecord = serde_json::from_str(&text).unwrap();
            assert_eq!(validate_record(&r, &cat), validate_record(&back, &cat));
        }
    }
}
