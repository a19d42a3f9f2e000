use serde::{Deserialize, Serialize};

use super::snapshot::ValueSnapshot;

fn completed_default() -> bool {
    true
}

/// One MUT invocation as recorded by the agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvocationRecord {
    pub invocation_id: String,
    pub mut_id: String,
    pub timestamp_ns: u64,
    pub receiver: ValueSnapshot,
    #[serde(default)]
    pub params: Vec<ValueSnapshot>,
    pub returned: ValueSnapshot,
    #[serde(default = "completed_default")]
    pub completed: bool,
}

impl InvocationRecord {
    /// Receiver or some parameter could not be captured.
    pub fn has_opaque_state(&self) -> bool {
        self.receiver.is_opaque() || self.params.iter().any(ValueSnapshot::is_opaque)
    }
}

/// One mockable call made while a MUT invocation was open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockCallRecord {
    pub parent_id: String,
    pub site_id: String,
    /// Per-parent counter starting at 0.
    pub seq: u64,
    pub timestamp_ns: u64,
    #[serde(default)]
    pub params: Vec<ValueSnapshot>,
    pub returned: ValueSnapshot,
}

/// One line of a trace file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "record_type")]
pub enum TraceRecord {
    #[serde(rename = "mut")]
    Invocation(InvocationRecord),
    #[serde(rename = "mockcall")]
    MockCall(MockCallRecord),
}

impl TraceRecord {
    /// Identifier used when reporting problems with this record.
    pub fn subject(&self) -> String {
        match self {
            TraceRecord::Invocation(r) => format!("invocation {}", r.invocation_id),
            TraceRecord::MockCall(c) => format!("mockcall {}#{}", c.parent_id, c.seq),
        }
    }

    pub fn snapshots(&self) -> impl Iterator<Item = &ValueSnapshot> {
        let (head, params, ret): (Option<&ValueSnapshot>, &[ValueSnapshot], &ValueSnapshot) = match self {
            TraceRecord::Invocation(r) => (Some(&r.receiver), &r.params, &r.returned),
            TraceRecord::MockCall(c) => (None, &c.params, &c.returned),
        };
        head.into_iter().chain(params).chain(std::iter::once(ret))
    }

    pub fn snapshots_mut(&mut self) -> Vec<&mut ValueSnapshot> {
        match self {
            TraceRecord::Invocation(r) => std::iter::once(&mut r.receiver)
                .chain(r.params.iter_mut())
                .chain(std::iter::once(&mut r.returned))
                .collect(),
            TraceRecord::MockCall(c) => c.params.iter_mut().chain(std::iter::once(&mut c.returned)).collect(),
        }
    }
}
