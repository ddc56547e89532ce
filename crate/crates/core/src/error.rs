use std::path::PathBuf;

use thiserror::Error;

use crate::metamodel::ElementKind;

/// Errors raised while loading, merging or compiling a schema.
#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing required key: {0}")]
    MissingKey(&'static str),
    #[error("expected a mapping for {0}")]
    NotAMapping(String),
    #[error("invalid value for {key}: {message}")]
    InvalidValue { key: String, message: String },
    #[error("invalid {what} name {name:?}")]
    InvalidName { what: String, name: String },
    #[error("{what} is not an absolute URI: {value:?}")]
    InvalidUri { what: String, value: String },
    #[error("duplicate element name {name:?}: declared as {first} and as {second}")]
    DuplicateElement {
        name: String,
        first: ElementKind,
        second: ElementKind,
    },
    #[error("slot {slot}: minimum_value {min} exceeds maximum_value {max}")]
    InvalidBounds { slot: String, min: f64, max: f64 },
    #[error("malformed CURIE {0:?}")]
    MalformedCurie(String),
    #[error("undeclared prefix {prefix:?} in {curie:?}")]
    UndeclaredPrefix { prefix: String, curie: String },
    #[error("conflicting declarations for prefix {prefix:?}: {first} vs {second}")]
    PrefixConflict {
        prefix: String,
        first: String,
        second: String,
    },
    #[error("cannot resolve import {reference:?} (searched: {})", searched.join(", "))]
    UnresolvedImport {
        reference: String,
        searched: Vec<String>,
    },
    #[error("import cycle: {}", .0.join(" -> "))]
    ImportCycle(Vec<String>),
    #[error("element {name:?} is a {first} in {first_schema} but a {second} in {second_schema}")]
    ConflictingKinds {
        name: String,
        first: ElementKind,
        first_schema: String,
        second: ElementKind,
        second_schema: String,
    },
    #[error("remote import {0:?} requires an enabled fetcher")]
    RemoteImportDisabled(String),
    #[error("failed to fetch {reference:?}: {message}")]
    Fetch { reference: String, message: String },
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("class {class}: unknown parent {parent:?}")]
    UnknownParent { class: String, parent: String },
    #[error("slot {slot}: unknown parent slot {parent:?}")]
    UnknownSlotParent { slot: String, parent: String },
    #[error("inheritance cycle: {}", .0.join(" -> "))]
    InheritanceCycle(Vec<String>),
    #[error("class {class}: unknown slot {slot:?}")]
    UnknownSlot { class: String, slot: String },
    #[error("slot {slot}: unknown range {range:?}")]
    UnknownRange { slot: String, range: String },
    #[error("class {class}: more than one identifier slot ({})", slots.join(", "))]
    MultipleIdentifiers { class: String, slots: Vec<String> },
    #[error("class {class}: slot_usage for {slot:?}, which is not a slot of the class")]
    UnreachableSlotUsage { class: String, slot: String },
    #[error("class {class}: slot_usage of {slot}.{field} conflicts between {}", sources.join(" and "))]
    OverlayConflict {
        class: String,
        slot: String,
        field: &'static str,
        sources: Vec<String>,
    },
    #[error("invalid pattern {pattern:?} on {owner}: {message}")]
    InvalidPattern {
        owner: String,
        pattern: String,
        message: String,
    },
}

impl SchemaError {
    pub(crate) fn from_yaml(err: &serde_yaml::Error) -> Self {
        let (line, column) = err
            .location()
            .map(|l| (l.line(), l.column()))
            .unwrap_or((0, 0));
        SchemaError::Syntax {
            line,
            column,
            message: err.to_string(),
        }
    }
}
