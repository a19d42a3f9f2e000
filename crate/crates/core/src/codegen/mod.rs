//! Renders test plans into test source through a [`TargetProfile`].
//!
//! Every test follows Arrange/Act/Assert. The arrange and act sections are
//! shared by the tests of a plan; the assert section holds the statements of
//! exactly one oracle kind.

mod profile;
mod template;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{simple_name, BlobStore, TargetKind, ValueKind, ValueSnapshot};
use crate::synthesis::{ArgMatcher, OracleKind, ParamSource, TestPlan};

pub use profile::{TargetProfile, TEMPLATES};

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("template {template} leaves placeholder {{{placeholder}}} unresolved while rendering {plan_field}")]
    UnresolvedPlaceholder { template: String, placeholder: String, plan_field: String },
    #[error("cannot render {plan_field}: {kind} values have no source form")]
    UnrenderableValue { plan_field: String, kind: &'static str },
    #[error("missing snapshot assets: {}", .0.join(", "))]
    MissingAssets(Vec<String>),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

const BUILTIN_PROFILES: &[(&str, &str)] = &[
    ("pytest-rick", include_str!("../../profiles/pytest-rick.json")),
    ("junit5-mockito", include_str!("../../profiles/junit5-mockito.json")),
];

impl TargetProfile {
    /// Profiles shipped with the crate, by id.
    pub fn builtin(id: &str) -> Option<TargetProfile> {
        BUILTIN_PROFILES.iter().find(|(name, _)| *name == id).map(|(_, text)| {
            let p: TargetProfile = serde_json::from_str(text).expect("builtin profile parses");
            p.check().expect("builtin profile is complete");
            p
        })
    }

    pub fn builtin_ids() -> impl Iterator<Item = &'static str> {
        BUILTIN_PROFILES.iter().map(|(n, _)| *n)
    }
}

/// One rendered test function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedTest {
    /// File the test belongs in, relative to the bundle root.
    pub file_name: String,
    pub test_name: String,
    pub source_text: String,
    /// Snapshot blobs the test loads, relative to the snapshot directory.
    pub required_assets: Vec<String>,
    pub oracle_kind: OracleKind,
}

/// `"<method> with <kind> oracle, mocking <Type.callee(kinds)>, ..."`.
pub fn display_name(plan: &TestPlan, kind: OracleKind) -> String {
    let mut callees: Vec<String> = Vec::new();
    for site in &plan.sites {
        let kinds: Vec<&str> = site.param_kinds.iter().map(ValueKind::display_name).collect();
        let name = format!("{}.{}({})", simple_name(&site.external_type), site.callee_name, kinds.join(", "));
        if !callees.contains(&name) {
            callees.push(name);
        }
    }
    format!("{} with {} oracle, mocking {}", plan.signature.method_name, kind.long_name(), callees.join(", "))
}

const RECEIVER_VAR: &str = "receivingObject";

struct Renderer<'a> {
    plan: &'a TestPlan,
    profile: &'a TargetProfile,
    mock_vars: HashMap<String, String>,
    assets: BTreeSet<String>,
}

impl<'a> Renderer<'a> {
    fn new(plan: &'a TestPlan, profile: &'a TargetProfile) -> Self {
        let mut mock_vars = HashMap::new();
        let mut taken: HashMap<String, usize> = HashMap::new();
        for t in &plan.mock_targets {
            *taken.entry(simple_name(&t.external_type).to_string()).or_default() += 1;
        }
        for t in &plan.mock_targets {
            let ty = simple_name(&t.external_type);
            let var = if taken[ty] > 1 {
                let accessor = match t.target_kind {
                    TargetKind::Field => capitalize(&t.accessor),
                    TargetKind::Parameter => format!("Param{}", t.accessor),
                };
                format!("mock{ty}{accessor}")
            } else {
                format!("mock{ty}")
            };
            mock_vars.insert(t.id(), sanitize_ident(&var));
        }
        Self { plan, profile, mock_vars, assets: BTreeSet::new() }
    }

    fn fill(&self, name: &str, vars: &[(&str, &str)], plan_field: &str) -> Result<String, CodegenError> {
        let text = self.profile.template(name)?;
        template::fill(text, vars).map_err(|e| match e {
            template::FillError::Unbound(p) => CodegenError::UnresolvedPlaceholder {
                template: name.into(),
                placeholder: p.into(),
                plan_field: plan_field.into(),
            },
            template::FillError::Syntax(s) => {
                CodegenError::Profile(format!("template {name} at {}: {}", s.offset, s.message))
            }
        })
    }

    fn mock_var(&self, target: &str) -> &str {
        self.mock_vars.get(target).map(String::as_str).unwrap_or("mock")
    }

    fn type_name(&self, kind: &ValueKind, field: &str) -> Result<String, CodegenError> {
        Ok(match kind {
            ValueKind::Bool => self.fill("type_bool", &[], field)?,
            ValueKind::Int => self.fill("type_int", &[], field)?,
            ValueKind::Float => self.fill("type_float", &[], field)?,
            ValueKind::Str => self.fill("type_string", &[], field)?,
            other => other.display_name().to_string(),
        })
    }

    fn value(&mut self, v: &ValueSnapshot, field: &str) -> Result<String, CodegenError> {
        match v {
            ValueSnapshot::Null => self.fill("lit_null", &[], field),
            ValueSnapshot::Bool(true) => self.fill("lit_true", &[], field),
            ValueSnapshot::Bool(false) => self.fill("lit_false", &[], field),
            ValueSnapshot::Int(i) => self.fill("lit_int", &[("value", &i.to_string())], field),
            ValueSnapshot::Float(x) if x.is_nan() => self.fill("lit_float_nan", &[], field),
            ValueSnapshot::Float(x) if x.is_infinite() && *x > 0.0 => self.fill("lit_float_inf", &[], field),
            ValueSnapshot::Float(x) if x.is_infinite() => self.fill("lit_float_neg_inf", &[], field),
            ValueSnapshot::Float(x) => self.fill("lit_float", &[("value", &format!("{x:?}"))], field),
            ValueSnapshot::Str(s) => self.fill("lit_string", &[("literal", &quote(s))], field),
            ValueSnapshot::Blob(b) => {
                self.assets.insert(b.path.clone());
                let path = asset_path(&b.path);
                self.fill("asset", &[("path", &path), ("path_literal", &quote(&path))], field)
            }
            ValueSnapshot::Void | ValueSnapshot::Opaque { .. } => {
                Err(CodegenError::UnrenderableValue { plan_field: field.into(), kind: v.wire_kind() })
            }
        }
    }

    fn wildcard(&self, kind: &ValueKind, field: &str) -> Result<String, CodegenError> {
        match kind {
            ValueKind::Bool => self.fill("any_bool", &[], field),
            ValueKind::Int => self.fill("any_int", &[], field),
            ValueKind::Float => self.fill("any_float", &[], field),
            ValueKind::Str => self.fill("any_string", &[], field),
            ValueKind::Void | ValueKind::Object(_) => {
                let ty = kind.display_name();
                self.fill("any_object", &[("type", ty), ("type_literal", &quote(ty))], field)
            }
        }
    }

    fn values(&mut self, vs: &[ValueSnapshot], field: &str) -> Result<String, CodegenError> {
        let mut out = Vec::with_capacity(vs.len());
        for (i, v) in vs.iter().enumerate() {
            out.push(self.value(v, &format!("{field}[{i}]"))?);
        }
        Ok(out.join(", "))
    }

    /// Arrange and act statements shared by every test of the plan.
    fn arrange_act(&mut self) -> Result<(Vec<String>, Vec<String>), CodegenError> {
        let plan = self.plan;
        let mut arrange = vec![self.fill("comment_arrange", &[], "arrange")?];
        let receiver_type = simple_name(&plan.signature.declaring_type).to_string();
        let receiver = self.value(&plan.receiver, "receiver")?;
        arrange.push(self.fill(
            "bind_receiver",
            &[("var", RECEIVER_VAR), ("value", &receiver), ("type", &receiver_type)],
            "receiver",
        )?);

        let mut args = Vec::new();
        for (i, src) in plan.params.iter().enumerate() {
            let field = format!("params[{i}]");
            match src {
                ParamSource::Mock(target) => args.push(self.mock_var(target).to_string()),
                ParamSource::Value(v @ ValueSnapshot::Blob(_)) => {
                    let var = format!("paramObject{}", i + 1);
                    let value = self.value(v, &field)?;
                    let kind = plan.signature.param_kinds.get(i).cloned().unwrap_or(ValueKind::Object("Object".into()));
                    let ty = self.type_name(&kind, &field)?;
                    arrange.push(self.fill(
                        "bind_param",
                        &[("var", &var), ("value", &value), ("type", &ty), ("index", &i.to_string())],
                        &field,
                    )?);
                    args.push(var);
                }
                ParamSource::Value(v) => args.push(self.value(v, &field)?),
            }
        }

        for (i, t) in plan.mock_targets.iter().enumerate() {
            let field = format!("mock_targets[{i}]");
            let var = self.mock_var(&t.id()).to_string();
            let ty = simple_name(&t.external_type);
            arrange.push(self.fill(
                "mock_create",
                &[
                    ("mock_var", &var),
                    ("type", ty),
                    ("qualified_type", &t.external_type),
                    ("type_literal", &quote(ty)),
                    ("qualified_type_literal", &quote(&t.external_type)),
                ],
                &field,
            )?);
            if t.target_kind == TargetKind::Field {
                arrange.push(self.fill(
                    "field_inject",
                    &[
                        ("receiver_var", RECEIVER_VAR),
                        ("field", &t.accessor),
                        ("field_literal", &quote(&t.accessor)),
                        ("mock_var", &var),
                        ("type", ty),
                    ],
                    &field,
                )?);
            }
        }

        for (i, stub) in plan.stubs.iter().enumerate() {
            let field = format!("stubs[{i}]");
            let site = plan.site(&stub.site_id).ok_or_else(|| CodegenError::UnresolvedPlaceholder {
                template: "stub".into(),
                placeholder: "callee".into(),
                plan_field: format!("{field}.site_id"),
            })?;
            let call_args = self.values(&stub.param_values, &format!("{field}.param_values"))?;
            let returns = self.values(&stub.return_values, &format!("{field}.return_values"))?;
            let (name, key) = if stub.return_values.len() == 1 { ("stub", "value") } else { ("stub_consecutive", "values") };
            let targets: Vec<&str> =
                if stub.targets.is_empty() { vec![site.target.as_str()] } else { stub.targets.iter().map(String::as_str).collect() };
            for target in targets {
                let var = self.mock_var(target).to_string();
                arrange.push(self.fill(
                    name,
                    &[("mock_var", &var), ("callee", &site.callee_name), ("args", &call_args), (key, &returns)],
                    &field,
                )?);
            }
        }

        let mut act = vec![self.fill("comment_act", &[], "act")?];
        let args = args.join(", ");
        let method = plan.signature.method_name.as_str();
        act.push(if plan.signature.return_kind.is_void() {
            self.fill("act_void", &[("receiver_var", RECEIVER_VAR), ("method", method), ("args", &args)], "signature")?
        } else {
            let rt = self.type_name(&plan.signature.return_kind, "signature.return_kind")?;
            self.fill(
                "act_value",
                &[("receiver_var", RECEIVER_VAR), ("method", method), ("args", &args), ("return_type", &rt)],
                "signature",
            )?
        });
        Ok((arrange, act))
    }

    fn assertions(&mut self, kind: OracleKind) -> Result<Vec<String>, CodegenError> {
        let plan = self.plan;
        let mut out = vec![self.fill("comment_assert", &[], "assert")?];
        match kind {
            OracleKind::OO => {
                let Some(oo) = &plan.oo else { return Ok(out) };
                let expected = self.value(&oo.expected, "oo.expected")?;
                let rt = self.type_name(&plan.signature.return_kind, "signature.return_kind")?;
                out.push(self.fill("assert_output", &[("expected", &expected), ("return_type", &rt)], "oo")?);
            }
            OracleKind::PO => {
                for (i, entry) in plan.po.iter().enumerate() {
                    let field = format!("po[{i}]");
                    let site = self.site(&entry.site_id, &field)?;
                    let mut args = Vec::new();
                    for (j, m) in entry.param_values.iter().enumerate() {
                        let f = format!("{field}.param_values[{j}]");
                        args.push(match m {
                            ArgMatcher::Value(v) => self.value(v, &f)?,
                            ArgMatcher::Any(k) => self.wildcard(k, &f)?,
                        });
                    }
                    let var = self.mock_var(&site.target).to_string();
                    out.push(self.fill(
                        "verify_at_least_once",
                        &[("mock_var", &var), ("callee", &site.callee_name), ("args", &args.join(", "))],
                        &field,
                    )?);
                }
            }
            OracleKind::CO => {
                let mut vars: Vec<String> = Vec::new();
                for (i, run) in plan.co.iter().enumerate() {
                    let var = self.mock_var(&self.site(&run.site_id, &format!("co[{i}]"))?.target.clone()).to_string();
                    if !vars.contains(&var) {
                        vars.push(var);
                    }
                }
                out.push(self.fill("in_order_begin", &[("mock_vars", &vars.join(", "))], "co")?);
                for (i, run) in plan.co.iter().enumerate() {
                    let field = format!("co[{i}]");
                    let site = self.site(&run.site_id, &field)?;
                    let matchers = run
                        .matchers
                        .iter()
                        .enumerate()
                        .map(|(j, k)| self.wildcard(k, &format!("{field}.matchers[{j}]")))
                        .collect::<Result<Vec<_>, _>>()?;
                    let var = self.mock_var(&site.target).to_string();
                    out.push(self.fill(
                        "in_order_verify",
                        &[
                            ("mock_var", &var),
                            ("callee", &site.callee_name),
                            ("times", &run.times.to_string()),
                            ("matchers", &matchers.join(", ")),
                        ],
                        &field,
                    )?);
                }
            }
        }
        Ok(out)
    }

    fn site(&self, site_id: &str, field: &str) -> Result<&'a crate::synthesis::PlannedSite, CodegenError> {
        self.plan.site(site_id).ok_or_else(|| CodegenError::UnresolvedPlaceholder {
            template: "verify".into(),
            placeholder: "callee".into(),
            plan_field: format!("{field}.site_id"),
        })
    }

    fn file_vars(&self) -> [(&'static str, String); 3] {
        let sig = &self.plan.signature;
        [
            ("declaring_type", sig.declaring_type.clone()),
            ("declaring_simple", simple_name(&sig.declaring_type).to_string()),
            ("method", sig.method_name.clone()),
        ]
    }
}

/// Declaring type, mocked types and object-typed signature kinds of a plan.
fn qualified_types(plan: &TestPlan) -> BTreeSet<String> {
    let mut out = BTreeSet::from([plan.signature.declaring_type.clone()]);
    out.extend(plan.mock_targets.iter().map(|t| t.external_type.clone()));
    let kinds = plan.signature.param_kinds.iter().chain(std::iter::once(&plan.signature.return_kind));
    out.extend(kinds.filter_map(|k| match k {
        ValueKind::Object(name) if name.contains('.') => Some(name.clone()),
        _ => None,
    }));
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn sanitize_ident(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect()
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn asset_path(blob_path: &str) -> String {
    format!("assets/{}", blob_path.replace('\\', "/"))
}

fn indent_block(lines: &[String], indent: &str, out: &mut Vec<String>) {
    for stmt in lines {
        for line in stmt.lines() {
            out.push(if line.is_empty() { String::new() } else { format!("{indent}{line}") });
        }
    }
}

fn with_vars<'v>(vars: &'v [(&'static str, String)]) -> Vec<(&'static str, &'v str)> {
    vars.iter().map(|(k, v)| (*k, v.as_str())).collect()
}

/// Renders one test per oracle kind present in the plan.
pub fn render(plan: &TestPlan, profile: &TargetProfile) -> Result<Vec<RenderedTest>, CodegenError> {
    render_with_suffix(plan, profile, "")
}

fn render_with_suffix(plan: &TestPlan, profile: &TargetProfile, suffix: &str) -> Result<Vec<RenderedTest>, CodegenError> {
    let mut r = Renderer::new(plan, profile);
    let (arrange, act) = r.arrange_act()?;
    let file_vars = r.file_vars();
    let file_name = r.fill("file_name", &with_vars(&file_vars), "signature")?;

    let mut tests = Vec::new();
    for kind in plan.oracle_kinds() {
        let assert = r.assertions(kind)?;
        let mut body = Vec::new();
        indent_block(&arrange, &profile.indent, &mut body);
        body.push(String::new());
        indent_block(&act, &profile.indent, &mut body);
        body.push(String::new());
        indent_block(&assert, &profile.indent, &mut body);

        let oracle = kind.to_string();
        let method = plan.signature.method_name.as_str();
        let title = capitalize(method);
        let test_name = r.fill(
            "test_name",
            &[("method", method), ("method_title", &title), ("oracle", &oracle), ("suffix", suffix)],
            "signature",
        )?;
        let display = display_name(plan, kind);
        let source_text = r.fill(
            "test_function",
            &[
                ("test_name", &test_name),
                ("display_name", &display),
                ("display_name_literal", &quote(&display)),
                ("body", &body.join("\n")),
                ("oracle", &oracle),
            ],
            "plan",
        )?;
        tests.push(RenderedTest {
            file_name: file_name.clone(),
            test_name,
            source_text,
            required_assets: Vec::new(),
            oracle_kind: kind,
        });
    }
    let assets: Vec<String> = r.assets.into_iter().collect();
    for t in &mut tests {
        t.required_assets = assets.clone();
    }
    Ok(tests)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestTest {
    pub test_name: String,
    pub file: String,
    pub mut_id: String,
    pub invocation_id: String,
    pub oracle_kind: OracleKind,
}

/// Per-MUT counts of what was generated, summed over its plans.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutStats {
    pub mut_id: String,
    pub method: String,
    pub plans: usize,
    pub tests: usize,
    pub mock_targets: usize,
    pub mock_methods: usize,
    pub stubs: usize,
    pub oo_statements: usize,
    pub po_statements: usize,
    pub co_statements: usize,
    pub type_ambiguous: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub profile_id: String,
    pub files: Vec<String>,
    pub assets: Vec<String>,
    pub tests: Vec<ManifestTest>,
    pub muts: Vec<MutStats>,
}

impl Manifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CodegenError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CodegenError::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|e| CodegenError::Profile(format!("{}: {e}", path.display())))
    }
}

fn write(path: &Path, contents: &[u8]) -> Result<(), CodegenError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CodegenError::Io { path: dir.into(), source })?;
    }
    fs::write(path, contents).map_err(|source| CodegenError::Io { path: path.into(), source })
}

/// Writes one test file per MUT, the snapshot assets the tests load, and
/// `manifest.json`. Only oracle kinds listed in `kinds` are emitted. Nothing
/// is written if any asset is missing.
pub fn emit_bundle(
    plans: &[TestPlan],
    profile: &TargetProfile,
    blobs: &BlobStore,
    out_dir: impl AsRef<Path>,
    kinds: &[OracleKind],
) -> Result<Manifest, CodegenError> {
    let out_dir = out_dir.as_ref();
    let mut groups: BTreeMap<&str, Vec<&TestPlan>> = BTreeMap::new();
    for p in plans {
        groups.entry(p.mut_id.as_str()).or_default().push(p);
    }

    let mut manifest = Manifest { profile_id: profile.profile_id.clone(), ..Default::default() };
    let mut files: Vec<(String, String)> = Vec::new();
    let mut assets = BTreeSet::new();
    for (mut_id, group) in groups {
        let mut stats = MutStats { mut_id: mut_id.to_string(), ..Default::default() };
        let mut tests = Vec::new();
        for (i, plan) in group.iter().enumerate() {
            let suffix = if group.len() > 1 { format!("_{}", i + 1) } else { String::new() };
            let rendered: Vec<RenderedTest> = render_with_suffix(plan, profile, &suffix)?
                .into_iter()
                .filter(|t| kinds.contains(&t.oracle_kind))
                .collect();
            stats.method = plan.signature.method_name.clone();
            stats.plans += 1;
            stats.mock_targets += plan.mock_targets.len();
            stats.mock_methods += plan.sites.len();
            stats.stubs += plan.stubs.len();
            stats.type_ambiguous |= plan.type_ambiguous;
            for t in &rendered {
                match t.oracle_kind {
                    OracleKind::OO => stats.oo_statements += 1,
                    OracleKind::PO => stats.po_statements += plan.po.len(),
                    OracleKind::CO => stats.co_statements += plan.co.len(),
                }
                assets.extend(t.required_assets.iter().cloned());
            }
            tests.extend(rendered.into_iter().map(|t| (plan.invocation_id.clone(), t)));
        }
        if tests.is_empty() {
            continue;
        }
        stats.tests = tests.len();

        let first = group[0];
        let r = Renderer::new(first, profile);
        let vars = r.file_vars();
        let mut file_name = tests[0].1.file_name.clone();
        if files.iter().any(|(f, _)| *f == file_name) {
            let (stem, ext) = file_name.rsplit_once('.').map_or((file_name.as_str(), ""), |(s, e)| (s, e));
            let mut n = 2;
            let base = stem.to_string();
            loop {
                let candidate = if ext.is_empty() { format!("{base}_{n}") } else { format!("{base}_{n}.{ext}") };
                if files.iter().all(|(f, _)| *f != candidate) {
                    file_name = candidate;
                    break;
                }
                n += 1;
            }
        }
        let mut types = BTreeSet::new();
        for plan in &group {
            types.extend(qualified_types(plan));
        }
        let mut imports = Vec::new();
        for t in &types {
            let line = r.fill("import", &[("qualified_type", t)], "signature")?;
            if !line.is_empty() {
                imports.push(line);
            }
        }
        let imports = imports.join("\n");
        let mut preamble_vars = with_vars(&vars);
        preamble_vars.push(("profile_id", &profile.profile_id));
        preamble_vars.push(("imports", &imports));
        let mut text = r.fill("preamble", &preamble_vars, "signature")?;
        for (_, t) in &tests {
            text.push('\n');
            text.push_str(&t.source_text);
            text.push('\n');
        }
        let post = r.fill("postamble", &with_vars(&vars), "signature")?;
        if !post.is_empty() {
            text.push_str(&post);
        }
        if !text.ends_with('\n') {
            text.push('\n');
        }

        for (invocation_id, t) in tests {
            manifest.tests.push(ManifestTest {
                test_name: t.test_name,
                file: file_name.clone(),
                mut_id: mut_id.to_string(),
                invocation_id,
                oracle_kind: t.oracle_kind,
            });
        }
        manifest.muts.push(stats);
        files.push((file_name, text));
    }

    let mut missing = Vec::new();
    let mut sources = Vec::new();
    for a in &assets {
        match blobs.resolve(a) {
            Ok(p) if p.is_file() => sources.push((a.clone(), p)),
            _ => missing.push(a.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(CodegenError::MissingAssets(missing));
    }

    fs::create_dir_all(out_dir).map_err(|source| CodegenError::Io { path: out_dir.into(), source })?;
    for (rel, src) in sources {
        let dest = out_dir.join(asset_path(&rel));
        if let Some(dir) = dest.parent() {
            fs::create_dir_all(dir).map_err(|source| CodegenError::Io { path: dir.into(), source })?;
        }
        fs::copy(&src, &dest).map_err(|source| CodegenError::Io { path: dest.clone(), source })?;
        manifest.assets.push(asset_path(&rel));
    }
    for (name, text) in &files {
        write(&out_dir.join(name), text.as_bytes())?;
        manifest.files.push(name.clone());
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&out_dir.join(Manifest::FILE_NAME), format!("{json}\n").as_bytes())?;
    Ok(manifest)
}
