//! Turns one correlated invocation into a test plan: which objects to mock,
//! what the mocks return, and the output, parameter and call oracles.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::CorrelatedInvocation;
use crate::model::{MockableSite, MutEntry, TargetKind, ValueKey, ValueKind, ValueSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OracleKind {
    OO,
    PO,
    CO,
}

impl OracleKind {
    pub const ALL: [OracleKind; 3] = [OracleKind::OO, OracleKind::PO, OracleKind::CO];

    /// `output`, `parameter` or `call`.
    pub fn long_name(self) -> &'static str {
        match self {
            OracleKind::OO => "output",
            OracleKind::PO => "parameter",
            OracleKind::CO => "call",
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for OracleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "OO" => Ok(OracleKind::OO),
            "PO" => Ok(OracleKind::PO),
            "CO" => Ok(OracleKind::CO),
            _ => Err(format!("unknown oracle kind {s:?} (expected OO, PO or CO)")),
        }
    }
}

/// A field or parameter of the MUT that is replaced by a mock.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MockTarget {
    pub target_kind: TargetKind,
    pub accessor: String,
    pub external_type: String,
}

impl MockTarget {
    fn of(site: &MockableSite) -> Self {
        Self {
            target_kind: site.target_kind,
            accessor: site.accessor.clone(),
            external_type: site.external_type.clone(),
        }
    }

    /// `field:<name>` or `param:<index>`.
    pub fn id(&self) -> String {
        format!("{}:{}", self.target_kind, self.accessor)
    }
}

/// A called site, with what codegen needs to name and match it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedSite {
    pub site_id: String,
    pub target: String,
    pub external_type: String,
    pub callee_name: String,
    pub param_kinds: Vec<ValueKind>,
    pub return_kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StubSpec {
    pub site_id: String,
    pub param_values: Vec<ValueSnapshot>,
    /// Returned on consecutive calls, in observation order.
    pub return_values: Vec<ValueSnapshot>,
    /// Ids of the mock targets the stub is installed on.
    #[serde(default)]
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputOracle {
    pub expected: ValueSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgMatcher {
    Value(ValueSnapshot),
    /// Any value of the kind; used where the observed value is opaque.
    Any(ValueKind),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamOracleEntry {
    pub site_id: String,
    pub param_values: Vec<ArgMatcher>,
    pub min_count: u32,
    #[serde(default)]
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallOracleRun {
    pub site_id: String,
    pub times: u64,
    /// One wildcard per callee parameter.
    pub matchers: Vec<ValueKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutSignature {
    pub declaring_type: String,
    pub method_name: String,
    pub param_kinds: Vec<ValueKind>,
    pub return_kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamSource {
    /// Replaced by the mock with this target id.
    Mock(String),
    Value(ValueSnapshot),
}

/// Everything needed to render the tests for one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPlan {
    pub mut_id: String,
    pub invocation_id: String,
    pub signature: MutSignature,
    pub mock_targets: Vec<MockTarget>,
    /// Called sites in order of first call.
    pub sites: Vec<PlannedSite>,
    pub stubs: Vec<StubSpec>,
    pub oo: Option<OutputOracle>,
    pub po: Vec<ParamOracleEntry>,
    pub co: Vec<CallOracleRun>,
    pub receiver: ValueSnapshot,
    pub params: Vec<ParamSource>,
    /// Some callee is reachable through several mocks of the same type, so
    /// stubs were merged across them.
    #[serde(default)]
    pub type_ambiguous: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl TestPlan {
    pub fn site(&self, site_id: &str) -> Option<&PlannedSite> {
        self.sites.iter().find(|s| s.site_id == site_id)
    }

    pub fn target(&self, id: &str) -> Option<&MockTarget> {
        self.mock_targets.iter().find(|t| t.id() == id)
    }

    pub fn oracle_kinds(&self) -> Vec<OracleKind> {
        OracleKind::ALL
            .into_iter()
            .filter(|k| *k != OracleKind::OO || self.oo.is_some())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    NoMockCalls,
    OpaqueReceiver,
    UnknownSite(String),
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::NoMockCalls => f.write_str("no mock calls observed"),
            SkipReason::OpaqueReceiver => f.write_str("receiver could not be captured"),
            SkipReason::UnknownSite(s) => write!(f, "call on site {s} which the MUT does not declare"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome {
    Planned(TestPlan),
    Skipped(SkipReason),
}

impl PlanOutcome {
    pub fn plan(self) -> Option<TestPlan> {
        match self {
            PlanOutcome::Planned(p) => Some(p),
            PlanOutcome::Skipped(_) => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stubs {
    pub stubs: Vec<StubSpec>,
    pub warnings: Vec<String>,
}

fn keys(values: &[ValueSnapshot]) -> Option<Vec<ValueKey>> {
    values.iter().map(ValueSnapshot::key).collect()
}

/// One stub per distinct `(site, params)` among calls that returned a value.
/// Differing returns for the same key are chained in call order; a return
/// equal to the one before it is not repeated.
pub fn build_stubs(inv: &CorrelatedInvocation) -> Stubs {
    let mut out = Stubs::default();
    let mut index: HashMap<(&str, Vec<ValueKey>), usize> = HashMap::new();
    for call in &inv.calls {
        if call.returned.is_void() {
            continue;
        }
        let subject = format!("{} {}#{}", call.site_id, call.parent_id, call.seq);
        if call.returned.is_opaque() {
            out.warnings.push(format!("unstubable return: {subject}"));
            continue;
        }
        let Some(params) = keys(&call.params) else {
            out.warnings.push(format!("unstubable parameter: {subject}"));
            continue;
        };
        match index.get(&(call.site_id.as_str(), params.clone())) {
            Some(&i) => {
                let returns = &mut out.stubs[i].return_values;
                if returns.last().and_then(ValueSnapshot::key) != call.returned.key() {
                    returns.push(call.returned.clone());
                }
            }
            None => {
                index.insert((call.site_id.as_str(), params), out.stubs.len());
                out.stubs.push(StubSpec {
                    site_id: call.site_id.clone(),
                    param_values: call.params.clone(),
                    return_values: vec![call.returned.clone()],
                    targets: Vec::new(),
                });
            }
        }
    }
    for w in &out.warnings {
        log::warn!("{w}");
    }
    out
}

/// Present when the MUT returns a primitive and the recorded return is scalar.
pub fn build_oo(inv: &CorrelatedInvocation, entry: &MutEntry) -> Option<OutputOracle> {
    let returned = &inv.invocation.returned;
    (entry.return_kind.is_primitive() && returned.is_scalar())
        .then(|| OutputOracle { expected: returned.clone() })
}

#[derive(PartialEq, Eq, Hash)]
enum MatcherKey {
    Value(ValueKey),
    Any(ValueKind),
}

/// One at-least-once verification per distinct `(site, params)` over all
/// calls, in order of first occurrence.
pub fn build_po(inv: &CorrelatedInvocation, entry: &MutEntry) -> Vec<ParamOracleEntry> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for call in &inv.calls {
        let kinds = entry.site(&call.site_id).map(|s| s.callee_param_kinds.as_slice()).unwrap_or(&[]);
        let mut degraded = false;
        let matchers: Vec<ArgMatcher> = call
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if p.is_opaque() {
                    degraded = true;
                    let kind = kinds.get(i).cloned().unwrap_or_else(|| ValueKind::Object("object".into()));
                    ArgMatcher::Any(kind)
                } else {
                    ArgMatcher::Value(p.clone())
                }
            })
            .collect();
        let key: Vec<MatcherKey> = matchers
            .iter()
            .map(|m| match m {
                ArgMatcher::Value(v) => MatcherKey::Value(v.key().expect("non-opaque value has a key")),
                ArgMatcher::Any(k) => MatcherKey::Any(k.clone()),
            })
            .collect();
        if seen.insert((call.site_id.clone(), key)) {
            out.push(ParamOracleEntry { site_id: call.site_id.clone(), param_values: matchers, min_count: 1, degraded });
        }
    }
    out
}

/// Run-length encoding of the ordered call sequence by site.
pub fn build_co(inv: &CorrelatedInvocation, entry: &MutEntry) -> Vec<CallOracleRun> {
    let mut out: Vec<CallOracleRun> = Vec::new();
    for call in &inv.calls {
        match out.last_mut() {
            Some(run) if run.site_id == call.site_id => run.times += 1,
            _ => out.push(CallOracleRun {
                site_id: call.site_id.clone(),
                times: 1,
                matchers: entry.site(&call.site_id).map(|s| s.callee_param_kinds.clone()).unwrap_or_default(),
            }),
        }
    }
    out
}

/// Assembles the plan for one selected invocation of `entry`.
pub fn plan_tests(inv: &CorrelatedInvocation, entry: &MutEntry) -> PlanOutcome {
    if inv.no_mock_calls() {
        return PlanOutcome::Skipped(SkipReason::NoMockCalls);
    }
    if inv.invocation.receiver.is_opaque() {
        return PlanOutcome::Skipped(SkipReason::OpaqueReceiver);
    }

    let mut sites: Vec<PlannedSite> = Vec::new();
    let mut targets = BTreeSet::new();
    for call in &inv.calls {
        let Some(site) = entry.site(&call.site_id) else {
            return PlanOutcome::Skipped(SkipReason::UnknownSite(call.site_id.clone()));
        };
        if sites.iter().all(|s| s.site_id != site.site_id) {
            let target = MockTarget::of(site);
            sites.push(PlannedSite {
                site_id: site.site_id.clone(),
                target: target.id(),
                external_type: site.external_type.clone(),
                callee_name: site.callee_name.clone(),
                param_kinds: site.callee_param_kinds.clone(),
                return_kind: site.callee_return_kind.clone(),
            });
            targets.insert(target);
        }
    }

    // Stubs bind to a type and callee, not to an instance: a stub for
    // `T.callee` is installed on every mock of type T that sees `callee`.
    let mut type_ambiguous = false;
    let Stubs { mut stubs, warnings } = build_stubs(inv);
    for stub in &mut stubs {
        let site = sites.iter().find(|s| s.site_id == stub.site_id).expect("stubbed site was called");
        let mut on: Vec<String> = sites
            .iter()
            .filter(|s| s.external_type == site.external_type && s.callee_name == site.callee_name)
            .map(|s| s.target.clone())
            .collect();
        on.sort();
        on.dedup();
        type_ambiguous |= on.len() > 1;
        stub.targets = on;
    }
    type_ambiguous |= sites.iter().any(|a| {
        sites
            .iter()
            .any(|b| a.target != b.target && a.external_type == b.external_type && a.callee_name == b.callee_name)
    });

    let params = entry
        .param_kinds
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let mocked = targets
                .iter()
                .find(|t| t.target_kind == TargetKind::Parameter && t.accessor.parse::<usize>().ok() == Some(i));
            match mocked {
                Some(t) => ParamSource::Mock(t.id()),
                None => ParamSource::Value(inv.invocation.params.get(i).cloned().unwrap_or(ValueSnapshot::Null)),
            }
        })
        .collect();

    PlanOutcome::Planned(TestPlan {
        mut_id: entry.mut_id.clone(),
        invocation_id: inv.invocation.invocation_id.clone(),
        signature: MutSignature {
            declaring_type: entry.declaring_type.clone(),
            method_name: entry.method_name.clone(),
            param_kinds: entry.param_kinds.clone(),
            return_kind: entry.return_kind.clone(),
        },
        mock_targets: targets.into_iter().collect(),
        sites,
        stubs,
        oo: build_oo(inv, entry),
        po: build_po(inv, entry),
        co: build_co(inv, entry),
        receiver: inv.invocation.receiver.clone(),
        params,
        type_ambiguous,
        warnings,
    })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;
    use ValueSnapshot::{Float, Int, Void};

    fn stub_summary(stubs: &[StubSpec]) -> Vec<String> {
        stubs
            .iter()
            .map(|s| {
                let p: Vec<_> = s.param_values.iter().map(|v| format!("{:?}", v.key().unwrap())).collect();
                let r: Vec<_> = s.return_values.iter().map(|v| format!("{:?}", v.key().unwrap())).collect();
                format!("{}({})->{}", s.site_id, p.join(","), r.join(","))
            })
            .collect()
    }

    #[test]
    fn load_existing_stubs() {
        let (inv, _) = load_existing();
        let stubs = build_stubs(&inv);
        assert!(stubs.warnings.is_empty());
        assert_eq!(
            stub_summary(&stubs.stubs),
            vec![
                "load()->Bool(true)",
                "header(Int(0))->Int(5)",
                "header(Int(4))->Int(1813699)",
                "header(Int(8))->Int(300)",
            ]
        );
    }

    #[test]
    fn move_node_stubs_skip_void_calls() {
        let (inv, _) = move_node();
        let stubs = build_stubs(&inv).stubs;
        assert_eq!(stubs.len(), 2);
        assert_eq!(stubs[0].return_values, vec![Float(-423.78378)]);
        assert_eq!(stubs[1].return_values, vec![Float(107.523186)]);
    }

    #[test]
    fn single_void_call_has_no_stub() {
        let inv = invocation("i", "m", vec![], Void, vec![("s", vec![Int(1)], Void)]);
        assert!(build_stubs(&inv).stubs.is_empty());
    }

    #[test]
    fn repeated_keys_chain_returns() {
        let inv = invocation(
            "i",
            "m",
            vec![],
            Void,
            vec![
                ("s", vec![Int(1)], Int(5)),
                ("s", vec![Int(1)], Int(5)),
                ("s", vec![Int(1)], Int(7)),
                ("s", vec![Int(1)], Int(5)),
                ("s", vec![Int(2)], ValueSnapshot::opaque("size")),
                ("s", vec![ValueSnapshot::opaque("size")], Int(1)),
            ],
        );
        let stubs = build_stubs(&inv);
        assert_eq!(stubs.stubs.len(), 1);
        assert_eq!(stubs.stubs[0].return_values, vec![Int(5), Int(7), Int(5)]);
        assert_eq!(stubs.warnings.len(), 2);
        assert!(stubs.warnings[0].starts_with("unstubable return"));
    }

    #[test]
    fn output_oracle() {
        let (inv, entry) = load_existing();
        assert_eq!(build_oo(&inv, &entry).unwrap().expected, ValueSnapshot::Bool(true));
        let (inv, entry) = move_node();
        assert!(build_oo(&inv, &entry).is_none());
        let mut e = entry.clone();
        e.return_kind = ValueKind::Int;
        let i = invocation("i", "m", vec![], Int(42), vec![]);
        assert_eq!(build_oo(&i, &e).unwrap().expected, Int(42));
    }

    #[test]
    fn parameter_oracles() {
        let (inv, entry) = load_existing();
        let po = build_po(&inv, &entry);
        assert_eq!(po.len(), 4);
        assert_eq!(po[1].param_values, vec![ArgMatcher::Value(Int(0))]);
        assert!(po.iter().all(|p| p.min_count == 1 && !p.degraded));

        let (inv, entry) = move_node();
        let po = build_po(&inv, &entry);
        assert_eq!(po.len(), 4);
        assert_eq!(po[2].param_values, vec![ArgMatcher::Value(Float(-403.92587))]);
        assert_eq!(po[3].param_values, vec![ArgMatcher::Value(Float(105.14341))]);
    }

    fn method_under_test_two() -> (CorrelatedInvocation, MutEntry) {
        let p = (TargetKind::Parameter, "1");
        let entry = MutEntry {
            mut_id: "ClassUnderTest.methodUnderTestTwo".into(),
            declaring_type: "ClassUnderTest".into(),
            method_name: "methodUnderTestTwo".into(),
            param_kinds: vec![ValueKind::Float, "ExternalTypeTwo".into()],
            return_kind: ValueKind::Int,
            loc: 10,
            mockable_sites: vec![
                site("m2", p, "ExternalTypeTwo", "mockableMethodTwo", &["float"], "int"),
                site("m3", p, "ExternalTypeTwo", "mockableMethodThree", &["int"], "int"),
            ],
        };
        let mut calls: Vec<_> = (0..42).map(|i| ("m2", vec![Float(0.1 * i as f64 + 4.2)], Int(89 + i))).collect();
        calls.push(("m3", vec![Int(15)], Int(48)));
        let inv = invocation("i2", &entry.mut_id, vec![Float(6.2), ValueSnapshot::blob("ext.bin", 8)], Int(42), calls);
        (inv, entry)
    }

    #[test]
    fn forty_two_distinct_floats() {
        let (inv, entry) = method_under_test_two();
        // independent count: distinct textual (site, params) tuples
        let distinct: HashSet<String> =
            inv.calls.iter().map(|c| format!("{}{}", c.site_id, serde_json::to_string(&c.params).unwrap())).collect();
        assert_eq!(distinct.len(), 43);
        assert_eq!(build_po(&inv, &entry).len(), distinct.len());
        let co = build_co(&inv, &entry);
        assert_eq!(
            co,
            vec![
                CallOracleRun { site_id: "m2".into(), times: 42, matchers: vec![ValueKind::Float] },
                CallOracleRun { site_id: "m3".into(), times: 1, matchers: vec![ValueKind::Int] },
            ]
        );
    }

    #[test]
    fn call_oracles() {
        let (inv, entry) = load_existing();
        let co = build_co(&inv, &entry);
        assert_eq!(co.len(), 2);
        assert_eq!((co[0].site_id.as_str(), co[0].times, co[0].matchers.len()), ("load", 1, 0));
        assert_eq!((co[1].site_id.as_str(), co[1].times, co[1].matchers.clone()), ("header", 3, vec![ValueKind::Int]));

        let abc = invocation("i", "m", vec![], Void, vec![("a", vec![], Void), ("b", vec![], Void), ("a", vec![], Void)]);
        let runs: Vec<_> = build_co(&abc, &entry).into_iter().map(|r| (r.site_id, r.times)).collect();
        assert_eq!(runs, vec![("a".into(), 1), ("b".into(), 1), ("a".into(), 1)]);
    }

    #[test]
    fn opaque_params_degrade_to_wildcards() {
        let (mut inv, entry) = move_node();
        inv.calls[2].params[0] = ValueSnapshot::opaque("x");
        inv.calls.push(inv.calls[2].clone());
        let po = build_po(&inv, &entry);
        assert_eq!(po.len(), 4);
        assert!(po[2].degraded);
        assert_eq!(po[2].param_values, vec![ArgMatcher::Any(ValueKind::Float)]);
    }

    #[test]
    fn load_existing_plan() {
        let (inv, entry) = load_existing();
        let plan = plan_tests(&inv, &entry).plan().unwrap();
        assert_eq!(plan.mock_targets.len(), 1);
        assert_eq!(plan.mock_targets[0].id(), "field:dataAccess");
        assert_eq!((plan.stubs.len(), plan.po.len(), plan.co.len()), (4, 4, 2));
        assert!(plan.oo.is_some());
        assert!(!plan.type_ambiguous);
        assert_eq!(plan.stubs[0].targets, vec!["field:dataAccess".to_string()]);
        assert_eq!(plan.oracle_kinds(), OracleKind::ALL.to_vec());
    }

    #[test]
    fn move_node_plan() {
        let (inv, entry) = move_node();
        let plan = plan_tests(&inv, &entry).plan().unwrap();
        assert_eq!(plan.mock_targets.len(), 1);
        assert_eq!(plan.mock_targets[0].target_kind, TargetKind::Parameter);
        assert_eq!(plan.sites.len(), 4);
        assert_eq!((plan.stubs.len(), plan.po.len(), plan.co.len()), (2, 4, 4));
        assert!(plan.oo.is_none());
        assert_eq!(plan.params[0], ParamSource::Mock("param:0".into()));
        assert!(matches!(plan.params[1], ParamSource::Value(ValueSnapshot::Blob(_))));
        assert_eq!(plan.oracle_kinds(), vec![OracleKind::PO, OracleKind::CO]);
    }

    #[test]
    fn plans_are_skipped_with_reasons() {
        let (mut inv, entry) = load_existing();
        let mut empty = inv.clone();
        empty.calls.clear();
        assert_eq!(plan_tests(&empty, &entry), PlanOutcome::Skipped(SkipReason::NoMockCalls));
        let mut opaque = inv.clone();
        opaque.invocation.receiver = ValueSnapshot::opaque("size");
        assert_eq!(plan_tests(&opaque, &entry), PlanOutcome::Skipped(SkipReason::OpaqueReceiver));
        inv.calls[0].site_id = "elsewhere".into();
        assert!(matches!(plan_tests(&inv, &entry), PlanOutcome::Skipped(SkipReason::UnknownSite(_))));
    }

    #[test]
    fn same_type_fields_merge_stubs() {
        let ty = "org.apache.fontbox.cmap.CMap";
        let entry = MutEntry {
            mut_id: "codeToGID".into(),
            declaring_type: "PDTrueTypeFont".into(),
            method_name: "codeToGID".into(),
            param_kinds: vec![ValueKind::Int],
            return_kind: ValueKind::Int,
            loc: 20,
            mockable_sites: vec![
                site("a", (TargetKind::Field, "cmapWinUnicode"), ty, "getGlyphId", &["int"], "int"),
                site("b", (TargetKind::Field, "cmapWinSymbol"), ty, "getGlyphId", &["int"], "int"),
            ],
        };
        let inv = invocation(
            "i",
            "codeToGID",
            vec![Int(65)],
            Int(3),
            vec![("a", vec![Int(65)], Int(0)), ("b", vec![Int(65)], Int(3))],
        );
        let plan = plan_tests(&inv, &entry).plan().unwrap();
        assert!(plan.type_ambiguous);
        assert_eq!(plan.mock_targets.len(), 2);
        for stub in &plan.stubs {
            assert_eq!(stub.targets, vec!["field:cmapWinSymbol".to_string(), "field:cmapWinUnicode".to_string()]);
        }
    }

    #[test]
    fn plan_json_round_trip() {
        let (inv, entry) = move_node();
        let plan = plan_tests(&inv, &entry).plan().unwrap();
        let text = serde_json::to_string_pretty(&plan).unwrap();
        let back: TestPlan = serde_json::from_str(&text).unwrap();
        assert_eq!(back, plan);
    }

    fn random_invocation() -> impl Strategy<Value = (CorrelatedInvocation, MutEntry)> {
        let sites = 1usize..=8;
        sites.prop_flat_map(|n| {
            let call = (0..n, 0i64..4, prop::bool::ANY);
            (Just(n), prop::collection::vec(call, 0..200))
        })
        .prop_map(|(n, calls)| {
            let f = (TargetKind::Field, "dep");
            let sites: Vec<_> = (0..n)
                .map(|i| site(&format!("s{i}"), f, "Dep", &format!("m{i}"), &["int"], if i % 2 == 0 { "int" } else { "void" }))
                .collect();
            let entry = MutEntry {
                mut_id: "m".into(),
                declaring_type: "Svc".into(),
                method_name: "m".into(),
                param_kinds: vec![],
                return_kind: ValueKind::Int,
                loc: 5,
                mockable_sites: sites,
            };
            let calls = calls
                .into_iter()
                .map(|(s, p, r)| {
                    let ret = if s % 2 == 0 { Int(r as i64) } else { Void };
                    (format!("s{s}"), vec![Int(p)], ret)
                })
                .collect::<Vec<_>>();
            let borrowed = calls.iter().map(|(s, p, r)| (s.as_str(), p.clone(), r.clone())).collect();
            (invocation("i", "m", vec![], Int(1), borrowed), entry)
        })
    }

    proptest! {
        #[test]
        fn sequence_laws((inv, entry) in random_invocation()) {
            let seq: Vec<&str> = inv.calls.iter().map(|c| c.site_id.as_str()).collect();
            let runs = seq.windows(2).filter(|w| w[0] != w[1]).count() + usize::from(!seq.is_empty());
            let co = build_co(&inv, &entry);
            prop_assert_eq!(co.len(), runs);
            prop_assert_eq!(co.iter().map(|r| r.times as usize).sum::<usize>(), seq.len());
            prop_assert!(co.windows(2).all(|w| w[0].site_id != w[1].site_id));

            let distinct: HashSet<(String, String)> = inv
                .calls
                .iter()
                .map(|c| (c.site_id.clone(), serde_json::to_string(&c.params).unwrap()))
                .collect();
            prop_assert_eq!(build_po(&inv, &entry).len(), distinct.len());

            for stub in build_stubs(&inv).stubs {
                let site = entry.site(&stub.site_id).unwrap();
                prop_assert!(!site.callee_return_kind.is_void());
                prop_assert!(inv.calls.iter().any(|c| c.site_id == stub.site_id && c.params == stub.param_values));
            }

            let a = plan_tests(&inv, &entry);
            let b = plan_tests(&inv, &entry);
            prop_assert_eq!(&a, &b);
            if let PlanOutcome::Planned(p) = a {
                prop_assert!(!p.po.is_empty() && !p.co.is_empty() && p.oo.is_some());
            } else {
                prop_assert!(inv.calls.is_empty());
            }
        }
    }
}
