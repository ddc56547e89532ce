//! In-memory representation of schema elements.
//!
//! A [`SchemaDefinition`] is the parsed, unresolved model. Every optional
//! field stays optional here so that `slot_usage` overlays can tell an
//! explicit `required: false` apart from an absent key; defaults are applied
//! during induction.

use std::fmt;
use std::sync::OnceLock;

use indexmap::IndexMap;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::SchemaError;

/// Prefix of the built-in types schema and of every `linkml:*` import.
pub const LINKML_PREFIX: &str = "linkml";
pub const LINKML_BASE: &str = "https://w3id.org/linkml/";
pub const XSD_BASE: &str = "http://www.w3.org/2001/XMLSchema#";
pub const BUILTIN_SCHEMA_ID: &str = "https://w3id.org/linkml/types";

const URI_PATTERN: &str = r"^[A-Za-z][A-Za-z0-9+.\-]*:[^\s]+$";

/// Range used when neither the slot nor the schema names one.
pub const FALLBACK_RANGE: &str = "string";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A non-fatal message produced while loading, compiling or transforming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn warning(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.severity, self.message)
    }
}

/// The closed set of primitive kinds a [`TypeDefinition`] can be built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseKind {
    String,
    Integer,
    Float,
    Boolean,
    Uri,
    Curie,
    Date,
    Datetime,
}

impl BaseKind {
    pub const ALL: [BaseKind; 8] = [
        BaseKind::String,
        BaseKind::Integer,
        BaseKind::Float,
        BaseKind::Boolean,
        BaseKind::Uri,
        BaseKind::Curie,
        BaseKind::Date,
        BaseKind::Datetime,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BaseKind::String => "string",
            BaseKind::Integer => "integer",
            BaseKind::Float => "float",
            BaseKind::Boolean => "boolean",
            BaseKind::Uri => "uri",
            BaseKind::Curie => "curie",
            BaseKind::Date => "date",
            BaseKind::Datetime => "datetime",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == text)
    }

    /// Lexical form required of text values of this kind, as an anchored
    /// regular expression. Shared by the validator and the JSON Schema
    /// generator so that both judge values identically.
    pub fn lexical_pattern(self) -> Option<&'static str> {
        match self {
            BaseKind::Uri => Some(URI_PATTERN),
            BaseKind::Curie => Some(r"^[A-Za-z_][A-Za-z0-9_.\-]*:[^\s]*$"),
            BaseKind::Date => Some(r"^[0-9]{4}-(0[1-9]|1[0-2])-(0[1-9]|[12][0-9]|3[01])$"),
            BaseKind::Datetime => Some(
                r"^[0-9]{4}-(0[1-9]|1[0-2])-(0[1-9]|[12][0-9]|3[01])T([01][0-9]|2[0-3]):[0-5][0-9]:[0-5][0-9](\.[0-9]+)?(Z|[+-]([01][0-9]|2[0-3]):[0-5][0-9])?$",
            ),
            _ => None,
        }
    }

    fn xsd_local(self) -> &'static str {
        match self {
            BaseKind::String => "string",
            BaseKind::Integer => "integer",
            BaseKind::Float => "double",
            BaseKind::Boolean => "boolean",
            BaseKind::Uri => "anyURI",
            BaseKind::Curie => "string",
            BaseKind::Date => "date",
            BaseKind::Datetime => "dateTime",
        }
    }
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MappingPredicate {
    Exact,
    Close,
    Broad,
    Narrow,
    Related,
}

impl MappingPredicate {
    pub const ALL: [MappingPredicate; 5] = [
        MappingPredicate::Exact,
        MappingPredicate::Close,
        MappingPredicate::Broad,
        MappingPredicate::Narrow,
        MappingPredicate::Related,
    ];

    /// Key used for this predicate in schema documents, e.g. `exact_mappings`.
    pub fn key(self) -> &'static str {
        match self {
            MappingPredicate::Exact => "exact_mappings",
            MappingPredicate::Close => "close_mappings",
            MappingPredicate::Broad => "broad_mappings",
            MappingPredicate::Narrow => "narrow_mappings",
            MappingPredicate::Related => "related_mappings",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.key() == key)
    }

    /// The SKOS property this predicate stands for.
    pub fn skos_curie(self) -> &'static str {
        match self {
            MappingPredicate::Exact => "skos:exactMatch",
            MappingPredicate::Close => "skos:closeMatch",
            MappingPredicate::Broad => "skos:broadMatch",
            MappingPredicate::Narrow => "skos:narrowMatch",
            MappingPredicate::Related => "skos:relatedMatch",
        }
    }
}

/// Alignment annotation; carries no validation semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    pub predicate: MappingPredicate,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassDefinition {
    pub name: String,
    pub description: Option<String>,
    pub is_a: Option<String>,
    pub mixins: Vec<String>,
    pub abstract_: bool,
    pub slots: Vec<String>,
    pub attributes: IndexMap<String, SlotDefinition>,
    pub slot_usage: IndexMap<String, SlotDefinition>,
    pub class_uri: Option<String>,
    pub mappings: Vec<Mapping>,
    pub from_schema: Option<String>,
}

impl ClassDefinition {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    /// Parents in linearization order: `is_a` first, then mixins.
    pub fn parents(&self) -> impl Iterator<Item = &str> {
        self.is_a
            .as_deref()
            .into_iter()
            .chain(self.mixins.iter().map(String::as_str))
    }

    /// Slots declared on this class itself (slot list, then attributes).
    pub fn own_slot_names(&self) -> impl Iterator<Item = &str> {
        self.slots
            .iter()
            .map(String::as_str)
            .chain(self.attributes.keys().map(String::as_str))
    }

    pub fn declares_slot(&self, slot: &str) -> bool {
        self.slots.iter().any(|s| s == slot) || self.attributes.contains_key(slot)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlotDefinition {
    pub name: String,
    pub description: Option<String>,
    pub is_a: Option<String>,
    pub range: Option<String>,
    pub required: Option<bool>,
    pub multivalued: Option<bool>,
    pub identifier: Option<bool>,
    pub pattern: Option<String>,
    pub minimum_value: Option<f64>,
    pub maximum_value: Option<f64>,
    pub unit: Option<String>,
    pub slot_uri: Option<String>,
    pub examples: Vec<String>,
    pub mappings: Vec<Mapping>,
    pub from_schema: Option<String>,
}

impl SlotDefinition {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    /// Fill every field that is absent on `self` from `parent`.
    pub(crate) fn inherit_from(&mut self, parent: &SlotDefinition) {
        fn fill<T: Clone>(own: &mut Option<T>, parent: &Option<T>) {
            if own.is_none() {
                own.clone_from(parent);
            }
        }
        fill(&mut self.description, &parent.description);
        fill(&mut self.range, &parent.range);
        fill(&mut self.required, &parent.required);
        fill(&mut self.multivalued, &parent.multivalued);
        fill(&mut self.identifier, &parent.identifier);
        fill(&mut self.pattern, &parent.pattern);
        fill(&mut self.minimum_value, &parent.minimum_value);
        fill(&mut self.maximum_value, &parent.maximum_value);
        fill(&mut self.unit, &parent.unit);
        fill(&mut self.slot_uri, &parent.slot_uri);
        if self.examples.is_empty() {
            self.examples.clone_from(&parent.examples);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PermissibleValue {
    pub text: String,
    pub description: Option<String>,
    pub meaning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EnumDefinition {
    pub name: String,
    pub description: Option<String>,
    pub permissible_values: IndexMap<String, PermissibleValue>,
    pub from_schema: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDefinition {
    pub name: String,
    pub base: BaseKind,
    pub pattern: Option<String>,
    pub description: Option<String>,
    pub from_schema: Option<String>,
}

impl TypeDefinition {
    pub fn new(name: impl Into<String>, base: BaseKind) -> Self {
        Self {
            name: name.into(),
            base,
            pattern: None,
            description: None,
            from_schema: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Class,
    Slot,
    Enum,
    Type,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementKind::Class => "class",
            ElementKind::Slot => "slot",
            ElementKind::Enum => "enum",
            ElementKind::Type => "type",
        })
    }
}

/// A borrowed view of any named element.
#[derive(Debug, Clone, Copy)]
pub enum Element<'a> {
    Class(&'a ClassDefinition),
    Slot(&'a SlotDefinition),
    Enum(&'a EnumDefinition),
    Type(&'a TypeDefinition),
}

impl Element<'_> {
    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Class(_) => ElementKind::Class,
            Element::Slot(_) => ElementKind::Slot,
            Element::Enum(_) => ElementKind::Enum,
            Element::Type(_) => ElementKind::Type,
        }
    }

    pub fn description(&self) -> Option<&str> {
        match self {
            Element::Class(c) => c.description.as_deref(),
            Element::Slot(s) => s.description.as_deref(),
            Element::Enum(e) => e.description.as_deref(),
            Element::Type(t) => t.description.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SchemaDefinition {
    pub id: String,
    pub name: String,
    pub title: Option<String>,
    pub description: Option<String>,
    pub license: Option<String>,
    pub version: Option<String>,
    pub prefixes: IndexMap<String, String>,
    pub default_prefix: Option<String>,
    pub default_range: Option<String>,
    pub imports: Vec<String>,
    pub classes: IndexMap<String, ClassDefinition>,
    pub slots: IndexMap<String, SlotDefinition>,
    pub enums: IndexMap<String, EnumDefinition>,
    pub types: IndexMap<String, TypeDefinition>,
}

impl SchemaDefinition {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            ..Self::default()
        }
    }

    /// Looks a name up across all four element maps.
    pub fn element(&self, name: &str) -> Option<Element<'_>> {
        if let Some(c) = self.classes.get(name) {
            Some(Element::Class(c))
        } else if let Some(s) = self.slots.get(name) {
            Some(Element::Slot(s))
        } else if let Some(e) = self.enums.get(name) {
            Some(Element::Enum(e))
        } else {
            self.types.get(name).map(Element::Type)
        }
    }

    pub fn element_kinds(&self, name: &str) -> Vec<ElementKind> {
        let mut kinds = Vec::new();
        if self.classes.contains_key(name) {
            kinds.push(ElementKind::Class);
        }
        if self.slots.contains_key(name) {
            kinds.push(ElementKind::Slot);
        }
        if self.enums.contains_key(name) {
            kinds.push(ElementKind::Enum);
        }
        if self.types.contains_key(name) {
            kinds.push(ElementKind::Type);
        }
        kinds
    }

    /// All element names with their kind, in map order (classes, slots, enums, types).
    pub fn element_names(&self) -> impl Iterator<Item = (&str, ElementKind)> {
        self.classes
            .keys()
            .map(|n| (n.as_str(), ElementKind::Class))
            .chain(self.slots.keys().map(|n| (n.as_str(), ElementKind::Slot)))
            .chain(self.enums.keys().map(|n| (n.as_str(), ElementKind::Enum)))
            .chain(self.types.keys().map(|n| (n.as_str(), ElementKind::Type)))
    }

    /// Checks the structural invariants that do not depend on import resolution.
    pub fn check_structure(&self) -> Result<(), SchemaError> {
        if !is_absolute_uri(&self.id) {
            return Err(SchemaError::InvalidUri {
                what: "schema id".into(),
                value: self.id.clone(),
            });
        }
        check_name(&self.name, "schema")?;
        for (prefix, base) in &self.prefixes {
            if !is_absolute_uri(base) {
                return Err(SchemaError::InvalidUri {
                    what: format!("prefix {prefix}"),
                    value: base.clone(),
                });
            }
        }
        let mut seen: IndexMap<&str, ElementKind> = IndexMap::new();
        for (name, kind) in self.element_names() {
            check_name(name, &kind.to_string())?;
            if let Some(first) = seen.insert(name, kind) {
                return Err(SchemaError::DuplicateElement {
                    name: name.to_string(),
                    first,
                    second: kind,
                });
            }
        }
        for class in self.classes.values() {
            for (name, attr) in &class.attributes {
                check_name(name, "attribute")?;
                check_bounds(attr)?;
            }
            for usage in class.slot_usage.values() {
                check_bounds(usage)?;
            }
        }
        for slot in self.slots.values() {
            check_bounds(slot)?;
        }
        for e in self.enums.values() {
            for pv in e.permissible_values.values() {
                if let Some(meaning) = &pv.meaning {
                    if split_curie(meaning).is_none() {
                        return Err(SchemaError::MalformedCurie(meaning.clone()));
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_bounds(slot: &SlotDefinition) -> Result<(), SchemaError> {
    if let (Some(min), Some(max)) = (slot.minimum_value, slot.maximum_value) {
        if min > max {
            return Err(SchemaError::InvalidBounds {
                slot: slot.name.clone(),
                min,
                max,
            });
        }
    }
    Ok(())
}

fn name_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z_][A-Za-z0-9_]*(?: [A-Za-z0-9_]+)*$").unwrap())
}

/// Element names: a letter or underscore, then alphanumerics/underscores,
/// with single internal spaces allowed.
pub fn is_valid_name(name: &str) -> bool {
    name_regex().is_match(name)
}

pub(crate) fn check_name(name: &str, what: &str) -> Result<(), SchemaError> {
    if is_valid_name(name) {
        Ok(())
    } else {
        Err(SchemaError::InvalidName {
            what: what.to_string(),
            name: name.to_string(),
        })
    }
}

/// `scheme ":" rest` with a non-empty rest and no whitespace.
pub fn is_absolute_uri(text: &str) -> bool {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(URI_PATTERN).unwrap())
        .is_match(text)
}

/// Splits `prefix:local` at the first colon. `None` when there is no colon
/// or the prefix is empty.
pub fn split_curie(text: &str) -> Option<(&str, &str)> {
    let (prefix, local) = text.split_once(':')?;
    if prefix.is_empty() || prefix.chars().any(char::is_whitespace) {
        return None;
    }
    Some((prefix, local))
}

/// The built-in types every schema implicitly imports.
pub fn builtin_schema() -> SchemaDefinition {
    let mut schema = SchemaDefinition::new(BUILTIN_SCHEMA_ID, "types");
    schema.title = Some("Core types".into());
    schema.description = Some("Built-in primitive types".into());
    schema.prefixes.insert(LINKML_PREFIX.into(), LINKML_BASE.into());
    schema.prefixes.insert("xsd".into(), XSD_BASE.into());
    schema.default_prefix = Some(LINKML_PREFIX.into());
    for kind in BaseKind::ALL {
        let mut t = TypeDefinition::new(kind.as_str(), kind);
        t.description = Some(format!("A primitive {kind} value (xsd:{})", kind.xsd_local()));
        t.from_schema = Some(BUILTIN_SCHEMA_ID.into());
        schema.types.insert(kind.as_str().into(), t);
    }
    schema
}
