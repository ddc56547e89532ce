//! Schema-language toolkit.
//!
//! Schemas are parsed ([`loader`]), merged with their imports, compiled into
//! a resolved model ([`induction`]) and then consumed by the [`validator`],
//! the [`generators`], the [`linter`], the tabular importer ([`sheets`]) and
//! the transformation engine ([`mapper`]).

pub mod error;
pub mod metamodel;
pub mod prefixes;
pub mod loader;
pub mod induction;
pub mod data;
pub mod validator;
pub mod generators;
pub mod linter;
pub mod sheets;
pub mod mapper;
#[cfg(feature = "testkit")]
pub mod testkit;

pub use error::SchemaError;
pub use induction::{compile, CompiledSchema, InducedSlot};
pub use loader::{parse_schema, resolve_imports, serialize_schema, ImportResolver};
pub use metamodel::SchemaDefinition;
