use std::fmt;

use serde::{Deserialize, Serialize};

/// Declared kind of a parameter or return value.
///
/// On the wire this is a bare string: `void`, `bool`, `int`, `float`,
/// `string`, or any other name, which is taken as an object type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum ValueKind {
    Void,
    Bool,
    Int,
    Float,
    Str,
    Object(String),
}

/// Coarse classification used for return kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindCategory {
    Void,
    Primitive,
    Object,
}

impl ValueKind {
    pub fn category(&self) -> KindCategory {
        match self {
            ValueKind::Void => KindCategory::Void,
            ValueKind::Bool | ValueKind::Int | ValueKind::Float | ValueKind::Str => {
                KindCategory::Primitive
            }
            ValueKind::Object(_) => KindCategory::Object,
        }
    }

    pub fn is_void(&self) -> bool {
        matches!(self, ValueKind::Void)
    }

    pub fn is_primitive(&self) -> bool {
        self.category() == KindCategory::Primitive
    }

    /// Name used in human-readable signatures, e.g. `getHeader(int)`.
    pub fn display_name(&self) -> &str {
        match self {
            ValueKind::Void => "void",
            ValueKind::Bool => "bool",
            ValueKind::Int => "int",
            ValueKind::Float => "float",
            ValueKind::Str => "string",
            ValueKind::Object(name) => simple_name(name),
        }
    }
}

impl From<String> for ValueKind {
    fn from(s: String) -> Self {
        match s.as_str() {
            "void" => ValueKind::Void,
            "bool" => ValueKind::Bool,
            "int" => ValueKind::Int,
            "float" => ValueKind::Float,
            "string" => ValueKind::Str,
            _ => ValueKind::Object(s),
        }
    }
}

impl From<&str> for ValueKind {
    fn from(s: &str) -> Self {
        ValueKind::from(s.to_string())
    }
}

impl From<ValueKind> for String {
    fn from(k: ValueKind) -> Self {
        match k {
            ValueKind::Object(name) => name,
            other => other.display_name().to_string(),
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueKind::Object(name) => f.write_str(name),
            other => f.write_str(other.display_name()),
        }
    }
}

/// Last segment of a dotted qualified name.
pub fn simple_name(qualified: &str) -> &str {
    qualified.rsplit(['.', ':']).next().unwrap_or(qualified)
}
