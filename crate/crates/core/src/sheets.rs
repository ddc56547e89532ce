//! Schema definitions written as spreadsheet rows.
//!
//! The first row holds human column headers, the second a `>` descriptor
//! row binding each column to a metamodel field. A row naming only a class
//! declares the class; a row naming a class and a slot declares an
//! attribute of that class.

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::error::SchemaError;
use crate::metamodel::{
    builtin_schema, BaseKind, ClassDefinition, Diagnostic, SchemaDefinition, SlotDefinition, LINKML_BASE,
    LINKML_PREFIX,
};

/// Allowed number of values: `max == None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cardinality {
    pub min: u32,
    pub max: Option<u32>,
}

impl Cardinality {
    pub fn is_multivalued(self) -> bool {
        self.max.is_none_or(|m| m > 1)
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_cardinality(*self))
    }
}

#[derive(Debug, Error)]
pub enum SheetError {
    #[error("malformed cardinality {0:?}")]
    Cardinality(String),
    #[error("cardinality {0:?} has a minimum above its maximum")]
    CardinalityOrder(String),
    #[error("table error: {0}")]
    Table(String),
    #[error("no `>` descriptor row after the header row")]
    MissingDescriptor,
    #[error("unknown descriptor {0:?}")]
    UnknownDescriptor(String),
    #[error("descriptor {0:?} is bound to more than one column")]
    RepeatedDescriptor(String),
    #[error("the first column must be bound to `class`")]
    MissingClassColumn,
    #[error("line {line}: {class}.{slot}: cardinality {cardinality:?} makes the slot mandatory but required is {required:?}")]
    ConflictingRequired {
        line: usize,
        class: String,
        slot: String,
        cardinality: String,
        required: String,
    },
    #[error("line {line}: {class}.{slot} is declared twice")]
    DuplicateSlot { line: usize, class: String, slot: String },
    #[error("line {line}: expected TRUE or FALSE, got {value:?}")]
    BadBoolean { line: usize, value: String },
    #[error("line {line}: a slot row needs a class")]
    SlotWithoutClass { line: usize },
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

/// `a..b`, `a..*`, bare `a`, or empty for the `0..1` default.
pub fn parse_cardinality(text: &str) -> Result<Cardinality, SheetError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Cardinality { min: 0, max: Some(1) });
    }
    let bad = || SheetError::Cardinality(text.to_string());
    let number = |s: &str| -> Result<u32, SheetError> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse().map_err(|_| bad())
    };
    let card = match text.split_once("..") {
        None => {
            let n = number(text)?;
            Cardinality { min: n, max: Some(n) }
        }
        Some((lo, "*")) => Cardinality {
            min: number(lo)?,
            max: None,
        },
        Some((lo, hi)) => Cardinality {
            min: number(lo)?,
            max: Some(number(hi)?),
        },
    };
    match card.max {
        Some(0) => Err(bad()),
        Some(max) if card.min > max => Err(SheetError::CardinalityOrder(text.to_string())),
        _ => Ok(card),
    }
}

/// Inverse of [`parse_cardinality`]; equal bounds print as a bare number.
pub fn format_cardinality(card: Cardinality) -> String {
    match card.max {
        None => format!("{}..*", card.min),
        Some(max) if max == card.min => max.to_string(),
        Some(max) => format!("{}..{max}", card.min),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Descriptor {
    Class,
    Slot,
    Cardinality,
    Required,
    Range,
    IsA,
    Description,
}

impl Descriptor {
    pub fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "class" => Descriptor::Class,
            "slot" => Descriptor::Slot,
            "cardinality" => Descriptor::Cardinality,
            "required" => Descriptor::Required,
            "range" => Descriptor::Range,
            "is_a" => Descriptor::IsA,
            "description" => Descriptor::Description,
            _ => return None,
        })
    }
}

/// Column header to descriptor; `None` marks an ignored column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheetDescriptor {
    pub column_bindings: IndexMap<String, Option<Descriptor>>,
}

impl SheetDescriptor {
    pub fn new(headers: &[String], descriptors: &[String]) -> Result<Self, SheetError> {
        let mut column_bindings = IndexMap::new();
        let mut used = Vec::new();
        for (i, header) in headers.iter().enumerate() {
            let token = descriptors.get(i).map(|s| s.trim()).unwrap_or("");
            let token = if i == 0 { token.trim_start_matches('>').trim() } else { token };
            let binding = if token.is_empty() {
                None
            } else {
                let d = Descriptor::parse(token).ok_or_else(|| SheetError::UnknownDescriptor(token.to_string()))?;
                if used.contains(&d) {
                    return Err(SheetError::RepeatedDescriptor(token.to_string()));
                }
                used.push(d);
                Some(d)
            };
            let key = if header.is_empty() || column_bindings.contains_key(header) {
                format!("column {}", i + 1)
            } else {
                header.clone()
            };
            column_bindings.insert(key, binding);
        }
        if column_bindings.values().next() != Some(&Some(Descriptor::Class)) {
            return Err(SheetError::MissingClassColumn);
        }
        Ok(Self { column_bindings })
    }

    fn column(&self, d: Descriptor) -> Option<usize> {
        self.column_bindings.values().position(|b| *b == Some(d))
    }
}

/// Data rows with the line number each came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sheet {
    pub descriptor: SheetDescriptor,
    pub rows: Vec<(usize, Vec<String>)>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Splits tab-separated text into the descriptor and trimmed data rows.
/// Empty rows and `#` comment rows are skipped; extra `>` rows are ignored
/// with a warning.
pub fn read_sheet(text: &str) -> Result<Sheet, SheetError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(text.as_bytes());
    let mut lines = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| SheetError::Table(e.to_string()))?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        lines.push((line, record.iter().map(|c| c.trim().to_string()).collect::<Vec<_>>()));
    }
    let mut lines = lines
        .into_iter()
        .filter(|(_, cells)| cells.iter().any(|c| !c.is_empty()))
        .filter(|(_, cells)| !cells[0].starts_with('#'));
    let (_, headers) = lines.next().ok_or(SheetError::MissingDescriptor)?;
    let (_, descriptors) = lines.next().ok_or(SheetError::MissingDescriptor)?;
    if !descriptors[0].starts_with('>') {
        return Err(SheetError::MissingDescriptor);
    }
    let descriptor = SheetDescriptor::new(&headers, &descriptors)?;
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for (line, cells) in lines {
        if cells[0].starts_with('>') {
            diagnostics.push(Diagnostic::warning(format!("line {line}: extra descriptor row ignored")));
        } else {
            rows.push((line, cells));
        }
    }
    Ok(Sheet {
        descriptor,
        rows,
        diagnostics,
    })
}

/// The converted schema and any warnings raised on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetSchema {
    pub schema: SchemaDefinition,
    pub diagnostics: Vec<Diagnostic>,
}

/// Builds a schema from descriptor-bound rows.
///
/// Slot rows become attributes of their class. A cardinality with a
/// minimum of 1 or more makes the slot required; an explicit `required`
/// cell wins over a `0..` cardinality (with a warning) but contradicting a
/// mandatory cardinality is an error. A single-valued slot named `id`
/// becomes the class identifier.
pub fn sheet_to_schema(
    rows: &[(usize, Vec<String>)],
    descriptor: &SheetDescriptor,
    schema_id: &str,
    schema_name: &str,
) -> Result<SheetSchema, SheetError> {
    let mut schema = SchemaDefinition::new(schema_id, schema_name);
    schema.prefixes.insert(LINKML_PREFIX.into(), LINKML_BASE.into());
    let sep = if schema_id.ends_with('/') || schema_id.ends_with('#') { "" } else { "/" };
    schema.prefixes.insert(schema_name.into(), format!("{schema_id}{sep}"));
    schema.default_prefix = Some(schema_name.into());
    schema.imports.push(format!("{LINKML_PREFIX}:types"));
    let mut diagnostics = Vec::new();

    let get = |cells: &Vec<String>, d: Descriptor| -> Option<String> {
        descriptor
            .column(d)
            .and_then(|i| cells.get(i))
            .filter(|c| !c.is_empty())
            .cloned()
    };
    for (line, cells) in rows {
        let line = *line;
        let class_name = get(cells, Descriptor::Class);
        let slot_name = get(cells, Descriptor::Slot);
        let Some(class_name) = class_name else {
            if slot_name.is_some() {
                return Err(SheetError::SlotWithoutClass { line });
            }
            continue;
        };
        let class = schema
            .classes
            .entry(class_name.clone())
            .or_insert_with(|| ClassDefinition::new(class_name.clone()));
        let Some(slot_name) = slot_name else {
            if let Some(d) = get(cells, Descriptor::Description) {
                class.description = Some(d);
            }
            if let Some(parent) = get(cells, Descriptor::IsA) {
                class.is_a = Some(parent);
            }
            continue;
        };
        if class.attributes.contains_key(&slot_name) {
            return Err(SheetError::DuplicateSlot {
                line,
                class: class_name,
                slot: slot_name,
            });
        }

        let mut slot = SlotDefinition::new(slot_name.clone());
        slot.description = get(cells, Descriptor::Description);
        slot.is_a = get(cells, Descriptor::IsA);
        let card_text = get(cells, Descriptor::Cardinality);
        let card = card_text.as_deref().map(parse_cardinality).transpose()?;
        let required_text = get(cells, Descriptor::Required);
        let required_cell = match required_text.as_deref() {
            None => None,
            Some(t) if t.eq_ignore_ascii_case("true") => Some(true),
            Some(t) if t.eq_ignore_ascii_case("false") => Some(false),
            Some(t) => return Err(SheetError::BadBoolean { line, value: t.to_string() }),
        };
        slot.required = match (card, required_cell) {
            (Some(c), Some(false)) if c.min >= 1 => {
                return Err(SheetError::ConflictingRequired {
                    line,
                    class: class_name,
                    slot: slot_name,
                    cardinality: card_text.unwrap_or_default(),
                    required: required_text.unwrap_or_default(),
                })
            }
            (Some(c), Some(true)) if c.min == 0 => {
                diagnostics.push(Diagnostic::warning(format!(
                    "line {line}: {class_name}.{slot_name}: cardinality {:?} says optional but required is {:?}; \
                     the required column wins",
                    card_text.as_deref().unwrap_or_default(),
                    required_text.as_deref().unwrap_or_default()
                )));
                Some(true)
            }
            (_, Some(r)) => Some(r),
            (Some(c), None) => Some(c.min >= 1),
            (None, None) => None,
        };
        slot.multivalued = card.map(Cardinality::is_multivalued);
        if let Some(range) = get(cells, Descriptor::Range) {
            slot.range = Some(if range == "uri:curie" { "curie".to_string() } else { range });
        }
        if slot_name == "id" && slot.multivalued != Some(true) {
            slot.identifier = Some(true);
        }
        class.attributes.insert(slot_name, slot);
    }

    // ranges naming nothing in this sheet are left for the compiler to judge
    let builtins = builtin_schema();
    for class in schema.classes.values() {
        for slot in class.attributes.values() {
            if let Some(range) = &slot.range {
                let known = builtins.types.contains_key(range)
                    || BaseKind::parse(range).is_some()
                    || schema.classes.contains_key(range);
                if !known {
                    diagnostics.push(Diagnostic::warning(format!(
                        "{}.{}: range {range:?} is not defined in this sheet; it must come from an import",
                        class.name, slot.name
                    )));
                }
            }
        }
    }
    schema.check_structure()?;
    Ok(SheetSchema { schema, diagnostics })
}

/// Reads a whole sheet and converts it.
pub fn tsv_to_schema(text: &str, schema_id: &str, schema_name: &str) -> Result<SheetSchema, SheetError> {
    let sheet = read_sheet(text)?;
    let mut out = sheet_to_schema(&sheet.rows, &sheet.descriptor, schema_id, schema_name)?;
    let mut diagnostics = sheet.diagnostics;
    diagnostics.append(&mut out.diagnostics);
    out.diagnostics = diagnostics;
    Ok(out)
}
