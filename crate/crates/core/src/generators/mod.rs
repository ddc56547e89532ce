//! Deterministic serializations of a compiled schema.
//!
//! Every generator is a pure function of its input. JSON outputs are
//! canonical: keys sorted, two-space indentation, trailing newline.

mod context;
mod docs;
mod json_schema;
mod sql;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::induction::CompiledSchema;

pub use context::gen_context;
pub use docs::{display_range, gen_docs};
pub use json_schema::gen_json_schema;
pub use sql::gen_sql_ddl;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    JsonSchema,
    SqlDdl,
    JsonLdContext,
    Docs,
}

impl Target {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "json-schema" | "json_schema" => Some(Target::JsonSchema),
            "sql-ddl" | "sql_ddl" => Some(Target::SqlDdl),
            "context" | "jsonld-context" | "jsonld_context" => Some(Target::JsonLdContext),
            "docs" => Some(Target::Docs),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorOptions {
    pub target: Target,
    /// Emits a top-level reference to this class (JSON Schema only).
    pub root_class: Option<String>,
    /// Only `generic` is supported.
    pub dialect: String,
    /// Levels of class-ranged slots to inline in JSON Schema; 0 always
    /// references the named definition.
    pub inline_depth: usize,
    /// Give classes without an identifier an `_id INTEGER` key in SQL.
    pub surrogate_keys: bool,
}

impl GeneratorOptions {
    pub fn new(target: Target) -> Self {
        Self {
            target,
            root_class: None,
            dialect: "generic".to_string(),
            inline_depth: 0,
            surrogate_keys: true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("unknown root class {0:?}")]
    UnknownRootClass(String),
    #[error("unsupported SQL dialect {0:?}")]
    UnsupportedDialect(String),
    #[error("{class}.{slot} references {range}, which has no identifier, and surrogate keys are disabled")]
    NoKey { class: String, slot: String, range: String },
}

/// Output of one generator run: a single document or a tree of files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generated {
    Text(String),
    Files(BTreeMap<String, String>),
}

/// Dispatches on `opts.target`.
pub fn generate(schema: &CompiledSchema, opts: &GeneratorOptions) -> Result<Generated, GeneratorError> {
    Ok(match opts.target {
        Target::JsonSchema => Generated::Text(gen_json_schema(schema, opts)?),
        Target::SqlDdl => Generated::Text(gen_sql_ddl(schema, opts)?),
        Target::JsonLdContext => Generated::Text(gen_context(schema)),
        Target::Docs => Generated::Files(gen_docs(schema)),
    })
}

/// Recursively sorts object keys.
pub(crate) fn canonical(value: serde_json::Value) -> serde_json::Value {
    use serde_json::Value as J;
    match value {
        J::Object(map) => {
            let sorted: BTreeMap<String, J> = map.into_iter().map(|(k, v)| (k, canonical(v))).collect();
            J::Object(sorted.into_iter().collect())
        }
        J::Array(items) => J::Array(items.into_iter().map(canonical).collect()),
        other => other,
    }
}

pub(crate) fn to_canonical_text(value: serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(&canonical(value)).expect("JSON values serialize");
    text.push('\n');
    text
}
