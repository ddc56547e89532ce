//! Instance data: records and the readers for YAML, JSON and delimited tables.

use std::fmt;
use std::sync::OnceLock;

use indexmap::IndexMap;
use regex::Regex;
use thiserror::Error;

use crate::induction::{CompiledSchema, InducedSlot, RangeRef};
use crate::metamodel::BaseKind;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Integer(i64),
    Float(f64),
    Text(String),
    List(Vec<Value>),
    Record(IndexMap<String, Value>),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Integer(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::Value as J;
        match self {
            Value::Null => J::Null,
            Value::Bool(b) => J::Bool(*b),
            Value::Integer(i) => J::from(*i),
            Value::Float(f) => serde_json::Number::from_f64(*f).map_or(J::Null, J::Number),
            Value::Text(s) => J::String(s.clone()),
            Value::List(items) => J::Array(items.iter().map(Value::to_json).collect()),
            Value::Record(map) => J::Object(
                map.iter()
                    .map(|(k, v)| (k.clone(), v.to_json()))
                    .collect(),
            ),
        }
    }

    pub fn from_json(value: &serde_json::Value) -> Self {
        use serde_json::Value as J;
        match value {
            J::Null => Value::Null,
            J::Bool(b) => Value::Bool(*b),
            J::Number(n) => match n.as_i64() {
                Some(i) => Value::Integer(i),
                None => Value::Float(n.as_f64().unwrap_or(f64::NAN)),
            },
            J::String(s) => Value::Text(s.clone()),
            J::Array(items) => Value::List(items.iter().map(Value::from_json).collect()),
            J::Object(map) => Value::Record(
                map.iter()
                    .map(|(k, v)| (k.clone(), Value::from_json(v)))
                    .collect(),
            ),
        }
    }

    fn from_yaml(value: &serde_yaml::Value) -> Result<Self, DataError> {
        use serde_yaml::Value as Y;
        Ok(match value {
            Y::Null => Value::Null,
            Y::Bool(b) => Value::Bool(*b),
            Y::Number(n) => match n.as_i64() {
                Some(i) => Value::Integer(i),
                None => Value::Float(n.as_f64().unwrap_or(f64::NAN)),
            },
            Y::String(s) => Value::Text(s.clone()),
            Y::Sequence(items) => {
                Value::List(items.iter().map(Value::from_yaml).collect::<Result<_, _>>()?)
            }
            Y::Mapping(map) => Value::Record(yaml_record(map)?),
            Y::Tagged(t) => Value::from_yaml(&t.value)?,
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// One instance of a class: slot name to value, in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct DataRecord {
    pub asserted_class: String,
    pub values: IndexMap<String, Value>,
}

impl DataRecord {
    pub fn new(asserted_class: impl Into<String>) -> Self {
        Self {
            asserted_class: asserted_class.into(),
            values: IndexMap::new(),
        }
    }

    pub fn with(mut self, slot: &str, value: Value) -> Self {
        self.values.insert(slot.to_string(), value);
        self
    }

    /// Present and not null.
    pub fn get(&self, slot: &str) -> Option<&Value> {
        self.values.get(slot).filter(|v| !v.is_null())
    }

    pub fn to_json(&self) -> serde_json::Value {
        Value::Record(self.values.clone()).to_json()
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("record {index} is not a mapping")]
    NotARecord { index: usize },
    #[error("data key {0:?} is not text")]
    NonTextKey(String),
    #[error("table error: {0}")]
    Table(#[from] csv::Error),
    #[error("unknown class {0:?}")]
    UnknownClass(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Yaml,
    Json,
    Tsv,
    Csv,
}

impl DataFormat {
    /// Guesses the format from a file extension.
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "yaml" | "yml" => Some(DataFormat::Yaml),
            "json" => Some(DataFormat::Json),
            "tsv" | "tab" => Some(DataFormat::Tsv),
            "csv" => Some(DataFormat::Csv),
            _ => None,
        }
    }
}

fn yaml_record(map: &serde_yaml::Mapping) -> Result<IndexMap<String, Value>, DataError> {
    map.iter()
        .map(|(k, v)| match k {
            serde_yaml::Value::String(s) => Ok((s.clone(), Value::from_yaml(v)?)),
            other => Err(DataError::NonTextKey(format!("{other:?}"))),
        })
        .collect()
}

fn into_records(items: Vec<Value>, class: &str) -> Result<Vec<DataRecord>, DataError> {
    items
        .into_iter()
        .enumerate()
        .map(|(index, item)| match item {
            Value::Record(values) => Ok(DataRecord {
                asserted_class: class.to_string(),
                values,
            }),
            _ => Err(DataError::NotARecord { index }),
        })
        .collect()
}

/// A YAML document holding one mapping or a list of mappings.
pub fn records_from_yaml(text: &str, class: &str) -> Result<Vec<DataRecord>, DataError> {
    let doc: serde_yaml::Value =
        serde_yaml::from_str(text).map_err(|e| DataError::Syntax(e.to_string()))?;
    let value = Value::from_yaml(&doc)?;
    match value {
        Value::Null => Ok(Vec::new()),
        Value::List(items) => into_records(items, class),
        single => into_records(vec![single], class),
    }
}

/// A JSON document holding one object or an array of objects.
pub fn records_from_json(text: &str, class: &str) -> Result<Vec<DataRecord>, DataError> {
    let doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| DataError::Syntax(e.to_string()))?;
    match Value::from_json(&doc) {
        Value::List(items) => into_records(items, class),
        single => into_records(vec![single], class),
    }
}

/// A delimited table: header row of slot names, one record per row.
///
/// Empty cells are absent values. Cells are typed by the induced slot they
/// land in: strict decimal/integer syntax becomes a number, `true`/`false`
/// becomes a boolean, and anything that does not parse stays text so the
/// validator can report it.
pub fn records_from_table(
    text: &str,
    delimiter: u8,
    class: &str,
    schema: &CompiledSchema,
) -> Result<Vec<DataRecord>, DataError> {
    let slots = schema
        .induced_slots(class)
        .ok_or_else(|| DataError::UnknownClass(class.to_string()))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        if row.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let mut record = DataRecord::new(class);
        for (header, cell) in headers.iter().zip(row.iter()) {
            let cell = cell.trim();
            if cell.is_empty() {
                continue;
            }
            let slot = slots.iter().find(|s| &s.name == header);
            let value = typed_cell(cell, slot, schema);
            record.values.insert(header.clone(), value);
        }
        records.push(record);
    }
    Ok(records)
}

fn cell_base_kind(slot: &InducedSlot, schema: &CompiledSchema) -> Option<BaseKind> {
    match &slot.effective_range {
        RangeRef::Type { base, .. } => Some(*base),
        RangeRef::Class(c) => schema.identifier_slot(c).and_then(|id| match &id.effective_range {
            RangeRef::Type { base, .. } => Some(*base),
            _ => None,
        }),
        RangeRef::Enum(_) => None,
    }
}

fn typed_cell(cell: &str, slot: Option<&InducedSlot>, schema: &CompiledSchema) -> Value {
    let kind = slot.and_then(|s| {
        if s.multivalued {
            None
        } else {
            cell_base_kind(s, schema)
        }
    });
    match kind {
        Some(BaseKind::Integer) => parse_integer(cell).map_or_else(|| Value::text(cell), Value::Integer),
        Some(BaseKind::Float) => parse_decimal(cell).map_or_else(|| Value::text(cell), Value::Float),
        Some(BaseKind::Boolean) => parse_boolean(cell).map_or_else(|| Value::text(cell), Value::Bool),
        _ => Value::text(cell),
    }
}

/// Strict decimal syntax: optional sign, digits, optional fraction and
/// exponent. No thousands separators, no locale forms.
pub fn parse_decimal(text: &str) -> Option<f64> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"^[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?$").unwrap()
    });
    if re.is_match(text) {
        text.parse().ok().filter(|f: &f64| f.is_finite())
    } else {
        None
    }
}

pub fn parse_integer(text: &str) -> Option<i64> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"^[+-]?[0-9]+$").unwrap());
    if re.is_match(text) {
        text.parse().ok()
    } else {
        None
    }
}

pub fn parse_boolean(text: &str) -> Option<bool> {
    if text.eq_ignore_ascii_case("true") {
        Some(true)
    } else if text.eq_ignore_ascii_case("false") {
        Some(false)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_decimal() {
        assert_eq!(parse_decimal("5"), Some(5.0));
        assert_eq!(parse_decimal("-112.1129"), Some(-112.1129));
        assert_eq!(parse_decimal("3.149"), Some(3.149));
        assert_eq!(parse_decimal("1e3"), Some(1000.0));
        for bad in ["5 cm", "2 ft", "0-20", "n/a", "1,5,8", "", "1,5", " 5", "inf", "NaN"] {
            assert_eq!(parse_decimal(bad), None, "{bad}");
        }
        assert_eq!(parse_integer("100"), Some(100));
        assert_eq!(parse_integer("1.0"), None);
    }

    #[test]
    fn yaml_records_keep_document_order() {
        let recs = records_from_yaml("- {b: 1, a: x}\n- {c: [1, 2.5]}\n", "T").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].values.keys().collect::<Vec<_>>(), ["b", "a"]);
        assert_eq!(recs[1].values["c"], Value::List(vec![Value::Integer(1), Value::Float(2.5)]));
        assert!(matches!(
            records_from_yaml("- 1\n", "T"),
            Err(DataError::NotARecord { index: 0 })
        ));
    }

    #[test]
    fn json_records() {
        let recs = records_from_json(r#"{"id": "Sample:S1", "depth": 5, "k": null}"#, "Sample").unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].values["depth"], Value::Integer(5));
        assert_eq!(recs[0].get("k"), None);
    }
}
