//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rickgen_core::ingest::{correlate, ingest, CorrelatedInvocation, IngestOptions};
use rickgen_core::model::{
    CandidateCatalog, InvocationRecord, MockCallRecord, MockableSite, MutEntry, TargetKind, TraceRecord, ValueKind,
    ValueSnapshot,
};
use rickgen_core::report::{aggregate, kill_matrix, load_mutation_dir, load_results, RunStatus};
use rickgen_core::synthesis::{ArgMatcher, CallOracleRun};
use rickgen_core::{plan_tests, render, OracleKind, TargetProfile, TestPlan};

type Outcome = Result<String, String>;
/// (mut_id, timestamp, invocation_id, [(timestamp, seq)] of its calls)
type Grouped = Vec<(String, u64, String, Vec<(u64, u64)>)>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

/// Runs `generate` on a fixture directory and returns the manifest and plans.
fn generate_fixture(name: &str) -> Result<(serde_json::Value, Vec<TestPlan>), String> {
    let dir = fixtures().join(name);
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let o = Command::new(env!("CARGO_BIN_EXE_rickgen"))
        .arg("generate")
        .arg("--catalog")
        .arg(dir.join("catalog.json"))
        .arg("--trace")
        .arg(dir.join("trace.jsonl"))
        .arg("--out")
        .arg(out.path())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.code() == Some(0), || format!("generate exited {:?}: {}", o.status, String::from_utf8_lossy(&o.stderr)))?;
    let read = |f: &str| -> Result<serde_json::Value, String> {
        let text = fs::read_to_string(out.path().join(f)).map_err(|e| e.to_string())?;
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    let manifest = read("manifest.json")?;
    let plans = serde_json::from_value(read("plans.json")?["plans"].clone()).map_err(|e| e.to_string())?;
    Ok((manifest, plans))
}

fn manifest_kinds(m: &serde_json::Value) -> Vec<String> {
    m["tests"].as_array().map_or(vec![], |ts| ts.iter().map(|t| t["oracle_kind"].as_str().unwrap_or("").to_string()).collect())
}

/// `callee(args)->returns` for each stub, for comparison with golden output.
fn stub_lines(plan: &TestPlan) -> Vec<(String, Vec<ValueSnapshot>, Vec<ValueSnapshot>)> {
    plan.stubs
        .iter()
        .map(|s| (plan.site(&s.site_id).unwrap().callee_name.clone(), s.param_values.clone(), s.return_values.clone()))
        .collect()
}

fn po_lines(plan: &TestPlan) -> Vec<(String, Vec<ArgMatcher>, u32)> {
    plan.po
        .iter()
        .map(|e| (plan.site(&e.site_id).unwrap().callee_name.clone(), e.param_values.clone(), e.min_count))
        .collect()
}

fn co_lines(plan: &TestPlan) -> Vec<(String, u64, Vec<ValueKind>)> {
    plan.co
        .iter()
        .map(|r: &CallOracleRun| (plan.site(&r.site_id).unwrap().callee_name.clone(), r.times, r.matchers.clone()))
        .collect()
}

fn load_existing_golden() -> Outcome {
    use ValueSnapshot::{Bool, Int};
    let (manifest, plans) = generate_fixture("loadExisting")?;
    ensure(manifest_kinds(&manifest) == ["OO", "PO", "CO"], || format!("tests: {:?}", manifest_kinds(&manifest)))?;
    ensure(plans.len() == 1, || format!("{} plans", plans.len()))?;
    let p = &plans[0];
    let s = |c: &str, a: Vec<ValueSnapshot>, r: ValueSnapshot| (c.to_string(), a, vec![r]);
    let stubs = vec![
        s("loadExisting", vec![], Bool(true)),
        s("getHeader", vec![Int(0)], Int(5)),
        s("getHeader", vec![Int(4)], Int(1813699)),
        s("getHeader", vec![Int(8)], Int(300)),
    ];
    ensure(stub_lines(p) == stubs, || format!("stubs {:?}", stub_lines(p)))?;
    ensure(p.oo.as_ref().map(|o| &o.expected) == Some(&Bool(true)), || format!("oo {:?}", p.oo))?;
    let v = |c: &str, a: Vec<ValueSnapshot>| (c.to_string(), a.into_iter().map(ArgMatcher::Value).collect(), 1);
    let po = vec![
        v("loadExisting", vec![]),
        v("getHeader", vec![Int(0)]),
        v("getHeader", vec![Int(4)]),
        v("getHeader", vec![Int(8)]),
    ];
    ensure(po_lines(p) == po, || format!("po {:?}", po_lines(p)))?;
    let co = vec![("loadExisting".to_string(), 1, vec![]), ("getHeader".to_string(), 3, vec![ValueKind::Int])];
    ensure(co_lines(p) == co, || format!("co {:?}", co_lines(p)))?;
    Ok("3 tests, 4 stubs, OO=true, |po|=4, co=[loadExisting x1, getHeader(int) x3]".into())
}

fn move_node_golden() -> Outcome {
    use ValueSnapshot::Float;
    let (manifest, plans) = generate_fixture("moveNode")?;
    ensure(manifest_kinds(&manifest) == ["PO", "CO"], || format!("tests: {:?}", manifest_kinds(&manifest)))?;
    let p = &plans[0];
    let stubs = vec![
        ("x".to_string(), vec![], vec![Float(-423.78378)]),
        ("y".to_string(), vec![], vec![Float(107.523186)]),
    ];
    ensure(stub_lines(p) == stubs, || format!("stubs {:?}", stub_lines(p)))?;
    ensure(p.oo.is_none(), || "unexpected OO".into())?;
    let v = |c: &str, a: Vec<ValueSnapshot>| (c.to_string(), a.into_iter().map(ArgMatcher::Value).collect(), 1);
    let po = vec![v("x", vec![]), v("y", vec![]), v("setX", vec![Float(-403.92587)]), v("setY", vec![Float(105.14341)])];
    ensure(po_lines(p) == po, || format!("po {:?}", po_lines(p)))?;
    ensure(p.mock_targets.len() == 1 && p.mock_targets[0].target_kind == TargetKind::Parameter, || {
        format!("mock targets {:?}", p.mock_targets)
    })?;
    Ok("2 stubs, |po|=4 incl. setX(-403.92587) and setY(105.14341), no OO".into())
}

fn site(id: String, callee: String, params: Vec<ValueKind>, ret: ValueKind) -> MockableSite {
    MockableSite {
        site_id: id,
        target_kind: TargetKind::Field,
        accessor: "dep".into(),
        external_type: "ext.Dependency".into(),
        callee_name: callee,
        callee_param_kinds: params,
        callee_return_kind: ret,
    }
}

fn random_value(rng: &mut StdRng, kind: &ValueKind) -> ValueSnapshot {
    match kind {
        ValueKind::Void => ValueSnapshot::Void,
        ValueKind::Bool => ValueSnapshot::Bool(rng.gen()),
        ValueKind::Int => ValueSnapshot::Int(rng.gen_range(-3..4)),
        ValueKind::Float => ValueSnapshot::Float([0.5, -1.25, 3.0][rng.gen_range(0..3)]),
        ValueKind::Str => ValueSnapshot::Str(["a", "b"][rng.gen_range(0..2)].into()),
        ValueKind::Object(_) => ValueSnapshot::Null,
    }
}

fn sequence_laws() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let kinds = [vec![], vec![ValueKind::Int], vec![ValueKind::Int, ValueKind::Bool], vec![ValueKind::Float], vec![ValueKind::Str]];
    let rets = [ValueKind::Int, ValueKind::Void, ValueKind::Bool, ValueKind::Float];
    let pytest = TargetProfile::builtin("pytest-rick").ok_or("no pytest profile")?;
    let junit = TargetProfile::builtin("junit5-mockito").ok_or("no junit profile")?;
    let cases = 1000;
    let mut total_calls = 0usize;
    let mut longest = 0usize;
    for case in 0..cases {
        let n_sites = rng.gen_range(1..=8);
        let sites: Vec<MockableSite> = (0..n_sites)
            .map(|i| {
                site(
                    format!("s{i}"),
                    format!("call{}", i % 3),
                    kinds[rng.gen_range(0..kinds.len())].clone(),
                    rets[rng.gen_range(0..rets.len())].clone(),
                )
            })
            .collect();
        let entry = MutEntry {
            mut_id: "pkg.Subject.run".into(),
            declaring_type: "pkg.Subject".into(),
            method_name: "run".into(),
            param_kinds: vec![],
            return_kind: ValueKind::Int,
            loc: 10,
            mockable_sites: sites.clone(),
        };
        let len = if case % 50 == 0 { 10_000 } else { rng.gen_range(1..=400) };
        // Runs of repeated sites make RLE non-trivial.
        let mut seq_sites = Vec::with_capacity(len);
        while seq_sites.len() < len {
            let s = rng.gen_range(0..n_sites);
            let run = rng.gen_range(1..=4).min(len - seq_sites.len());
            seq_sites.extend(std::iter::repeat_n(s, run));
        }
        let calls: Vec<MockCallRecord> = seq_sites
            .iter()
            .enumerate()
            .map(|(i, &s)| MockCallRecord {
                parent_id: format!("inv{case}"),
                site_id: sites[s].site_id.clone(),
                seq: i as u64,
                timestamp_ns: 1 + i as u64,
                params: sites[s].callee_param_kinds.iter().map(|k| random_value(&mut rng, k)).collect(),
                returned: random_value(&mut rng, &sites[s].callee_return_kind),
            })
            .collect();
        let inv = CorrelatedInvocation {
            invocation: InvocationRecord {
                invocation_id: format!("inv{case}"),
                mut_id: entry.mut_id.clone(),
                timestamp_ns: 0,
                receiver: ValueSnapshot::blob("r.bin", 8),
                params: vec![],
                returned: ValueSnapshot::Int(rng.gen_range(0..10)),
                completed: true,
            },
            calls,
        };
        let plan = plan_tests(&inv, &entry).plan().ok_or_else(|| format!("case {case}: no plan"))?;

        let runs = 1 + seq_sites.windows(2).filter(|w| w[0] != w[1]).count();
        ensure(plan.co.len() == runs, || format!("case {case}: |co| {} != {runs} runs", plan.co.len()))?;
        let times: u64 = plan.co.iter().map(|r| r.times).sum();
        ensure(times == len as u64, || format!("case {case}: sum of times {times} != {len}"))?;
        let distinct: HashSet<(String, String)> =
            inv.calls.iter().map(|c| (c.site_id.clone(), format!("{:?}", c.params))).collect();
        ensure(plan.po.len() == distinct.len(), || {
            format!("case {case}: |po| {} != {} distinct tuples", plan.po.len(), distinct.len())
        })?;
        for profile in [&pytest, &junit] {
            let a = render(&plan, profile).map_err(|e| e.to_string())?;
            let b = render(&plan, profile).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("case {case}: rendering differs between runs"))?;
        }
        total_calls += len;
        longest = longest.max(len);
    }
    Ok(format!("{cases} invocations, {total_calls} calls, longest {longest}"))
}

fn correlation_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xc0443);
    let int = || vec![ValueKind::Int];
    let a = MutEntry {
        mut_id: "app.Service.handle".into(),
        declaring_type: "app.Service".into(),
        method_name: "handle".into(),
        param_kinds: vec![],
        return_kind: ValueKind::Int,
        loc: 12,
        mockable_sites: vec![
            site("a.get".into(), "get".into(), int(), ValueKind::Int),
            site("a.put".into(), "put".into(), int(), ValueKind::Void),
            MockableSite {
                // The callee is itself a MUT, so its invocation nests inside this one.
                site_id: "a.nested".into(),
                target_kind: TargetKind::Field,
                accessor: "store".into(),
                external_type: "app.Store".into(),
                callee_name: "lookup".into(),
                callee_param_kinds: int(),
                callee_return_kind: ValueKind::Int,
            },
        ],
    };
    let b = MutEntry {
        mut_id: "app.Store.lookup".into(),
        declaring_type: "app.Store".into(),
        method_name: "lookup".into(),
        param_kinds: int(),
        return_kind: ValueKind::Int,
        loc: 8,
        mockable_sites: vec![site("b.read".into(), "read".into(), int(), ValueKind::Int)],
    };
    let catalog = CandidateCatalog::new(1, vec![a, b]);
    let traces = 200;
    let mut checked_calls = 0usize;
    let mut nested = 0usize;
    let snapshots = tempfile::tempdir().map_err(|e| e.to_string())?;

    for t in 0..traces {
        let mut records: Vec<TraceRecord> = Vec::new();
        let mut clock = 0u64;
        let mut tick = |rng: &mut StdRng| {
            clock += rng.gen_range(0..3);
            clock
        };
        let n = rng.gen_range(1..=8);
        for i in 0..n {
            let id = format!("t{t}-a{i}");
            let start = tick(&mut rng);
            let mut seq = 0;
            for _ in 0..rng.gen_range(0..6) {
                let s = ["a.get", "a.put", "a.nested"][rng.gen_range(0..3)];
                let ts = tick(&mut rng);
                let returned = if s == "a.put" { ValueSnapshot::Void } else { ValueSnapshot::Int(rng.gen_range(0..9)) };
                records.push(TraceRecord::MockCall(MockCallRecord {
                    parent_id: id.clone(),
                    site_id: s.into(),
                    seq,
                    timestamp_ns: ts,
                    params: vec![ValueSnapshot::Int(rng.gen_range(0..9))],
                    returned: returned.clone(),
                }));
                seq += 1;
                if s == "a.nested" && rng.gen_bool(0.7) {
                    nested += 1;
                    let bid = format!("{id}-b{seq}");
                    for j in 0..rng.gen_range(0..3) {
                        records.push(TraceRecord::MockCall(MockCallRecord {
                            parent_id: bid.clone(),
                            site_id: "b.read".into(),
                            seq: j,
                            timestamp_ns: ts,
                            params: vec![ValueSnapshot::Int(j as i64)],
                            returned: ValueSnapshot::Int(1),
                        }));
                    }
                    records.push(TraceRecord::Invocation(InvocationRecord {
                        invocation_id: bid,
                        mut_id: "app.Store.lookup".into(),
                        timestamp_ns: ts,
                        receiver: ValueSnapshot::Null,
                        params: vec![ValueSnapshot::Int(0)],
                        returned,
                        completed: rng.gen_bool(0.9),
                    }));
                }
            }
            records.push(TraceRecord::Invocation(InvocationRecord {
                invocation_id: id,
                mut_id: "app.Service.handle".into(),
                timestamp_ns: start,
                receiver: ValueSnapshot::Null,
                params: vec![],
                returned: ValueSnapshot::Int(0),
                completed: rng.gen_bool(0.85),
            }));
        }
        for k in 0..rng.gen_range(0..3) {
            records.push(TraceRecord::MockCall(MockCallRecord {
                parent_id: format!("t{t}-ghost"),
                site_id: "a.get".into(),
                seq: k,
                timestamp_ns: tick(&mut rng),
                params: vec![ValueSnapshot::Int(0)],
                returned: ValueSnapshot::Int(0),
            }));
        }
        records.shuffle(&mut rng);

        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let files = rng.gen_range(1..=3);
        let mut texts = vec![String::new(); files];
        for r in &records {
            let line = serde_json::to_string(r).map_err(|e| e.to_string())?;
            let f = rng.gen_range(0..files);
            texts[f].push_str(&line);
            texts[f].push('\n');
        }
        let paths: Vec<PathBuf> = (0..files).map(|i| dir.path().join(format!("trace-{i}.jsonl"))).collect();
        for (p, text) in paths.iter().zip(&texts) {
            fs::write(p, text).map_err(|e| e.to_string())?;
        }
        let store = ingest(&paths, snapshots.path(), &catalog, &IngestOptions::default()).map_err(|e| e.to_string())?;
        let got = correlate(&store);

        // Reference: group by parent over completed invocations, then sort.
        let invs: Vec<&InvocationRecord> = records
            .iter()
            .filter_map(|r| match r {
                TraceRecord::Invocation(i) if i.completed => Some(i),
                _ => None,
            })
            .collect();
        let calls: Vec<&MockCallRecord> = records
            .iter()
            .filter_map(|r| match r {
                TraceRecord::MockCall(c) => Some(c),
                _ => None,
            })
            .collect();
        let mut expected: Grouped = invs
            .iter()
            .map(|i| {
                let mut cs: Vec<(u64, u64)> = calls
                    .iter()
                    .filter(|c| c.parent_id == i.invocation_id)
                    .map(|c| (c.timestamp_ns, c.seq))
                    .collect();
                cs.sort();
                (i.mut_id.clone(), i.timestamp_ns, i.invocation_id.clone(), cs)
            })
            .collect();
        expected.sort_by(|x, y| (&x.0, x.1, &x.2).cmp(&(&y.0, y.1, &y.2)));
        let completed: BTreeSet<&str> = invs.iter().map(|i| i.invocation_id.as_str()).collect();
        let mut expected_orphans: Vec<(String, u64)> = calls
            .iter()
            .filter(|c| !completed.contains(c.parent_id.as_str()))
            .map(|c| (c.parent_id.clone(), c.seq))
            .collect();
        expected_orphans.sort();

        let actual: Grouped = got
            .invocations
            .iter()
            .map(|c| {
                (
                    c.invocation.mut_id.clone(),
                    c.invocation.timestamp_ns,
                    c.invocation.invocation_id.clone(),
                    c.calls.iter().map(|m| (m.timestamp_ns, m.seq)).collect(),
                )
            })
            .collect();
        let mut actual_orphans: Vec<(String, u64)> =
            got.orphans.iter().map(|o| (o.call.parent_id.clone(), o.call.seq)).collect();
        actual_orphans.sort();
        ensure(actual == expected, || format!("trace {t}: correlated invocations differ"))?;
        ensure(actual_orphans == expected_orphans, || format!("trace {t}: orphans differ"))?;
        let attached: usize = got.invocations.iter().map(|c| c.calls.len()).sum();
        ensure(attached + got.orphans.len() == calls.len(), || {
            format!("trace {t}: {attached} attached + {} orphans != {} calls", got.orphans.len(), calls.len())
        })?;
        checked_calls += calls.len();
    }
    Ok(format!("{traces} traces, {checked_calls} calls, {nested} nested invocations"))
}

fn report_arithmetic() -> Outcome {
    let results = load_results(fixtures().join("report/results-294.jsonl")).map_err(|e| e.to_string())?;
    let count = |s: RunStatus| results.iter().filter(|r| r.status == s).count();
    let split = (count(RunStatus::Pass), count(RunStatus::OracleFail), count(RunStatus::RuntimeError));
    ensure(split == (154, 57, 83), || format!("fixture split {split:?}"))?;
    let summary = aggregate(&results);
    let p = summary.total.percentages;
    let close = |a: f64, b: f64| (a - b).abs() <= 0.1 + 1e-9;
    ensure(
        close(p.successfully_mimic, 52.4) && close(p.incompletely_mimic, 19.4) && close(p.unhandled_mut_behavior, 28.2),
        || format!("percentages {p:?}"),
    )?;
    let muts: BTreeSet<&str> = results.iter().map(|r| r.mut_id.as_str()).collect();
    let passing: BTreeSet<&str> =
        results.iter().filter(|r| r.status == RunStatus::Pass).map(|r| r.mut_id.as_str()).collect();
    ensure(muts.len() == 128 && passing.len() == 79, || format!("{} of {} MUTs", passing.len(), muts.len()))?;
    ensure(summary.mut_count == 128 && summary.muts_with_passing_test == 79, || {
        format!("rollup {} of {}", summary.muts_with_passing_test, summary.mut_count)
    })?;
    ensure(close(summary.muts_with_passing_test_pct, 61.7), || format!("rollup {}", summary.muts_with_passing_test_pct))?;
    Ok(format!(
        "{:.1}% / {:.1}% / {:.1}%, {} of {} MUTs = {:.1}%",
        p.successfully_mimic,
        p.incompletely_mimic,
        p.unhandled_mut_behavior,
        summary.muts_with_passing_test,
        summary.mut_count,
        summary.muts_with_passing_test_pct
    ))
}

fn kill_matrix_fidelity() -> Outcome {
    use OracleKind::*;
    let (baseline, mutants) = load_mutation_dir(fixtures().join("mutation/loadExisting")).map_err(|e| e.to_string())?;
    let m = kill_matrix(&baseline, &mutants).map_err(|e| e.to_string())?;
    let set = |v: &[&'static str]| v.iter().copied().collect::<BTreeSet<&str>>();
    ensure(m.killed(OO) == set(&["2", "3"]), || format!("OO {:?}", m.killed(OO)))?;
    ensure(m.killed(CO) == set(&["1", "2", "3"]), || format!("CO {:?}", m.killed(CO)))?;
    ensure(m.killed(PO) == set(&["1", "2", "3", "4", "5"]), || format!("PO {:?}", m.killed(PO)))?;
    let expected: BTreeMap<Vec<OracleKind>, Vec<&str>> = BTreeMap::from([
        (vec![OO], vec![]),
        (vec![PO], vec!["4", "5"]),
        (vec![CO], vec![]),
        (vec![OO, PO], vec![]),
        (vec![OO, CO], vec![]),
        (vec![PO, CO], vec!["1"]),
        (vec![OO, PO, CO], vec!["2", "3"]),
    ]);
    ensure(m.partition.len() == 7, || format!("{} partition cells", m.partition.len()))?;
    for cell in &m.partition {
        let want = expected.get(&cell.oracles).ok_or_else(|| format!("unexpected cell {:?}", cell.oracles))?;
        ensure(cell.mutants == *want && cell.count == want.len(), || format!("cell {:?}: {:?}", cell.oracles, cell.mutants))?;
    }
    ensure(m.survivors.is_empty(), || format!("survivors {:?}", m.survivors))?;
    Ok("OO={2,3} CO={1,2,3} PO={1..5}; all three {2,3}, PO+CO {1}, PO only {4,5}".into())
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("loadExisting golden test", Duration::from_secs(1), load_existing_golden),
        ("moveNode golden test", Duration::from_secs(1), move_node_golden),
        ("sequence law property suite", Duration::from_secs(30), sequence_laws),
        ("correlation oracle", Duration::from_secs(10), correlation_oracle),
        ("report arithmetic", Duration::from_secs(1), report_arithmetic),
        ("kill-matrix fidelity", Duration::from_secs(1), kill_matrix_fidelity),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if took <= limit {
                Ok(detail)
            } else {
                Err(format!("took {took:.2?}, limit {limit:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS  {name} ({took:.2?} <= {limit:?}): {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name} ({took:.2?}): {reason}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
