use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::template;
use super::CodegenError;

/// Every template the renderer uses, with the placeholders it may contain.
pub const TEMPLATES: &[(&str, &[&str])] = &[
    ("file_name", &["declaring_type", "declaring_simple", "method"]),
    ("preamble", &["declaring_type", "declaring_simple", "method", "profile_id", "imports"]),
    ("import", &["qualified_type"]),
    ("postamble", &["declaring_type", "declaring_simple", "method"]),
    ("test_function", &["test_name", "display_name", "display_name_literal", "body", "oracle"]),
    ("test_name", &["method", "method_title", "oracle", "suffix"]),
    ("comment_arrange", &[]),
    ("comment_act", &[]),
    ("comment_assert", &[]),
    ("bind_receiver", &["var", "value", "type"]),
    ("bind_param", &["var", "value", "type", "index"]),
    ("asset", &["path", "path_literal"]),
    ("mock_create", &["mock_var", "type", "qualified_type", "type_literal", "qualified_type_literal"]),
    ("field_inject", &["receiver_var", "field", "field_literal", "mock_var", "type"]),
    ("stub", &["mock_var", "callee", "args", "value"]),
    ("stub_consecutive", &["mock_var", "callee", "args", "values"]),
    ("act_value", &["receiver_var", "method", "args", "return_type"]),
    ("act_void", &["receiver_var", "method", "args"]),
    ("assert_output", &["expected", "return_type"]),
    ("verify_at_least_once", &["mock_var", "callee", "args"]),
    ("in_order_begin", &["mock_vars"]),
    ("in_order_verify", &["mock_var", "callee", "times", "matchers"]),
    ("any_bool", &[]),
    ("any_int", &[]),
    ("any_float", &[]),
    ("any_string", &[]),
    ("any_object", &["type", "type_literal"]),
    ("lit_null", &[]),
    ("lit_true", &[]),
    ("lit_false", &[]),
    ("lit_int", &["value"]),
    ("lit_float", &["value"]),
    ("lit_float_nan", &[]),
    ("lit_float_inf", &[]),
    ("lit_float_neg_inf", &[]),
    ("lit_string", &["literal"]),
    ("type_bool", &[]),
    ("type_int", &[]),
    ("type_float", &[]),
    ("type_string", &[]),
];

fn default_indent() -> String {
    "    ".into()
}

/// Syntax tables for one test ecosystem. Loaded from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetProfile {
    pub profile_id: String,
    /// Prefix for each line of a test body.
    #[serde(default = "default_indent")]
    pub indent: String,
    pub templates: BTreeMap<String, String>,
}

impl TargetProfile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CodegenError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| CodegenError::Profile(format!("cannot read {}: {e}", path.display())))?;
        let profile: TargetProfile = serde_json::from_str(&text)
            .map_err(|e| CodegenError::Profile(format!("{}: {e}", path.display())))?;
        profile.check()?;
        Ok(profile)
    }

    /// Verifies that every template is present and uses only placeholders
    /// the renderer binds for it.
    pub fn check(&self) -> Result<(), CodegenError> {
        for (name, allowed) in TEMPLATES {
            let Some(text) = self.templates.get(*name) else {
                return Err(CodegenError::Profile(format!("{}: missing template {name}", self.profile_id)));
            };
            let used = template::placeholders(text).map_err(|e| {
                CodegenError::Profile(format!("{}: template {name} at {}: {}", self.profile_id, e.offset, e.message))
            })?;
            if let Some(bad) = used.iter().find(|p| !allowed.contains(p)) {
                return Err(CodegenError::Profile(format!(
                    "{}: template {name} uses {{{bad}}}, which is not one of {allowed:?}",
                    self.profile_id
                )));
            }
        }
        if let Some(extra) = self.templates.keys().find(|k| TEMPLATES.iter().all(|(n, _)| n != k)) {
            return Err(CodegenError::Profile(format!("{}: unknown template {extra}", self.profile_id)));
        }
        Ok(())
    }

    pub(crate) fn template(&self, name: &str) -> Result<&str, CodegenError> {
        self.templates
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| CodegenError::Profile(format!("{}: missing template {name}", self.profile_id)))
    }
}
