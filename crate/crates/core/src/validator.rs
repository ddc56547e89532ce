//! Schema-driven validation of records and collections.
//!
//! Absent keys and explicit nulls both mean "not specified"; an empty string
//! is a present value. Numbers are never parsed out of text unless coercion
//! is switched on, and every coercion is reported as a warning.

use std::collections::HashMap;
use std::fmt::Write as _;

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use crate::data::{parse_boolean, parse_decimal, parse_integer, DataRecord, Value};
use crate::induction::{CompiledSchema, InducedSlot, RangeRef};
use crate::metamodel::{split_curie, BaseKind, Severity};
use crate::prefixes::PrefixMap;

pub mod rules {
    pub const MISSING_REQUIRED: &str = "missing_required";
    pub const UNKNOWN_SLOT: &str = "unknown_slot";
    pub const SHAPE_VIOLATION: &str = "shape_violation";
    pub const RANGE_VIOLATION: &str = "range_violation";
    pub const ENUM_VIOLATION: &str = "enum_violation";
    pub const PATTERN_VIOLATION: &str = "pattern_violation";
    pub const BOUND_VIOLATION: &str = "bound_violation";
    pub const UNDECLARED_PREFIX: &str = "undeclared_prefix";
    pub const DUPLICATE_IDENTIFIER: &str = "duplicate_identifier";
    pub const COERCED: &str = "coerced";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub rule_id: String,
    pub path: String,
    pub message: String,
}

impl Finding {
    fn error(rule_id: &str, path: &str, message: String) -> Self {
        Self {
            severity: Severity::Error,
            rule_id: rule_id.to_string(),
            path: path.to_string(),
            message,
        }
    }

    fn warning(rule_id: &str, path: &str, message: String) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(rule_id, path, message)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn from_findings(findings: Vec<Finding>) -> Self {
        Self {
            valid: !findings.iter().any(Finding::is_error),
            findings,
        }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.is_error())
    }

    /// Stable machine-readable form.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// One line per finding followed by a summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.findings {
            let _ = writeln!(out, "{}[{}] {}: {}", f.severity, f.rule_id, f.path, f.message);
        }
        let errors = self.errors().count();
        let warnings = self.findings.len() - errors;
        let verdict = if self.valid { "valid" } else { "invalid" };
        let _ = writeln!(out, "{verdict}: {errors} error(s), {warnings} warning(s)");
        out
    }
}

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("unknown class {0:?}")]
    UnknownClass(String),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationOptions {
    /// Accept numeric and boolean text for numeric/boolean ranges, with a warning.
    pub coerce: bool,
}

/// Holds the compiled schema and its compiled slot patterns.
pub struct Validator<'a> {
    schema: &'a CompiledSchema,
    options: ValidationOptions,
    patterns: HashMap<String, Regex>,
}

impl<'a> Validator<'a> {
    pub fn new(schema: &'a CompiledSchema, options: ValidationOptions) -> Self {
        let mut patterns = HashMap::new();
        for slot in schema.induced.values().flatten() {
            if let Some(p) = &slot.pattern {
                patterns
                    .entry(p.clone())
                    .or_insert_with(|| anchored(p).expect("patterns are checked at compile time"));
            }
        }
        Self {
            schema,
            options,
            patterns,
        }
    }

    pub fn validate_record(&self, record: &DataRecord) -> Result<ValidationReport, ValidationError> {
        let mut findings = Vec::new();
        self.record_findings(&record.asserted_class, &record.values, "", &mut findings)?;
        Ok(ValidationReport::from_findings(findings))
    }

    pub fn validate_collection(&self, records: &[DataRecord]) -> Result<ValidationReport, ValidationError> {
        let mut findings = Vec::new();
        let mut seen: HashMap<(String, String), usize> = HashMap::new();
        for (index, record) in records.iter().enumerate() {
            let prefix = format!("/{index}");
            self.record_findings(&record.asserted_class, &record.values, &prefix, &mut findings)?;
            let Some(id_slot) = self.schema.identifier_slot(&record.asserted_class) else {
                continue;
            };
            let Some(value) = record.get(&id_slot.name) else {
                continue;
            };
            if matches!(value, Value::List(_) | Value::Record(_)) {
                continue;
            }
            let key = (record.asserted_class.clone(), value.to_string());
            if let Some(first) = seen.get(&key) {
                findings.push(Finding::error(
                    rules::DUPLICATE_IDENTIFIER,
                    &format!("{prefix}/{}", id_slot.name),
                    format!("identifier {value} of record {index} duplicates record {first}"),
                ));
            } else {
                seen.insert(key, index);
            }
        }
        Ok(ValidationReport::from_findings(findings))
    }

    fn record_findings(
        &self,
        class: &str,
        values: &indexmap::IndexMap<String, Value>,
        path: &str,
        out: &mut Vec<Finding>,
    ) -> Result<(), ValidationError> {
        let slots = self
            .schema
            .induced_slots(class)
            .ok_or_else(|| ValidationError::UnknownClass(class.to_string()))?;
        for (key, value) in values {
            let slot_path = format!("{path}/{key}");
            let Some(slot) = slots.iter().find(|s| &s.name == key) else {
                out.push(Finding::error(
                    rules::UNKNOWN_SLOT,
                    &slot_path,
                    format!("{key:?} is not a slot of {class}"),
                ));
                continue;
            };
            if value.is_null() {
                continue;
            }
            let mut local = Vec::new();
            self.slot_value(slot, value, &slot_path, &mut local)?;
            if !matches!(slot.effective_range, RangeRef::Class(_)) {
                local.sort_by(|a, b| a.rule_id.cmp(&b.rule_id));
            }
            out.extend(local);
        }
        for slot in slots.iter().filter(|s| s.required) {
            if values.get(&slot.name).is_none_or(Value::is_null) {
                out.push(Finding::error(
                    rules::MISSING_REQUIRED,
                    &format!("{path}/{}", slot.name),
                    format!("required slot {:?} of {class} is missing", slot.name),
                ));
            }
        }
        Ok(())
    }

    fn slot_value(
        &self,
        slot: &InducedSlot,
        value: &Value,
        path: &str,
        out: &mut Vec<Finding>,
    ) -> Result<(), ValidationError> {
        match (slot.multivalued, value) {
            (true, Value::List(items)) => {
                for (i, item) in items.iter().enumerate() {
                    self.single_value(slot, item, &format!("{path}/{i}"), out)?;
                }
            }
            (true, _) => out.push(Finding::error(
                rules::SHAPE_VIOLATION,
                path,
                format!("{:?} is multivalued; expected a list, got {value}", slot.name),
            )),
            (false, Value::List(_)) => out.push(Finding::error(
                rules::SHAPE_VIOLATION,
                path,
                format!("{:?} is single-valued; got a list", slot.name),
            )),
            (false, _) => self.single_value(slot, value, path, out)?,
        }
        Ok(())
    }

    fn single_value(
        &self,
        slot: &InducedSlot,
        value: &Value,
        path: &str,
        out: &mut Vec<Finding>,
    ) -> Result<(), ValidationError> {
        match &slot.effective_range {
            RangeRef::Class(class) => self.class_value(slot, class, value, path, out),
            _ => {
                out.extend(self.scalar_findings(slot, value, path));
                Ok(())
            }
        }
    }

    fn class_value(
        &self,
        slot: &InducedSlot,
        class: &str,
        value: &Value,
        path: &str,
        out: &mut Vec<Finding>,
    ) -> Result<(), ValidationError> {
        let is_abstract = self.schema.class(class).is_some_and(|c| c.abstract_);
        match value {
            Value::Record(values) if !is_abstract => self.record_findings(class, values, path, out),
            Value::Record(values) => {
                // an abstract range accepts any concrete descendant
                let mut candidates = self
                    .schema
                    .descendants(class)
                    .into_iter()
                    .filter(|c| self.schema.class(c).is_some_and(|d| !d.abstract_));
                let matched = candidates.any(|c| {
                    let mut trial = Vec::new();
                    self.record_findings(c, values, path, &mut trial).is_ok()
                        && !trial.iter().any(Finding::is_error)
                });
                if !matched {
                    out.push(Finding::error(
                        rules::RANGE_VIOLATION,
                        path,
                        format!("object does not conform to any concrete subclass of {class}"),
                    ));
                }
                Ok(())
            }
            scalar => {
                match self.schema.identifier_slot(class) {
                    Some(id_slot) => out.extend(self.scalar_findings(id_slot, scalar, path)),
                    None => out.push(Finding::error(
                        rules::RANGE_VIOLATION,
                        path,
                        format!("{:?} expects an inlined {class} object, got {scalar}", slot.name),
                    )),
                }
                Ok(())
            }
        }
    }

    /// Findings for one non-list value against a type- or enum-ranged slot.
    pub fn scalar_findings(&self, slot: &InducedSlot, value: &Value, path: &str) -> Vec<Finding> {
        let mut out = Vec::new();
        let prefix_map = &self.schema.prefix_map;
        let mut numeric = value.as_f64();
        match &slot.effective_range {
            RangeRef::Enum(name) => {
                let allowed = &self.schema.source.enums[name].permissible_values;
                match value {
                    Value::Text(t) if allowed.contains_key(t) => {}
                    _ => out.push(Finding::error(
                        rules::ENUM_VIOLATION,
                        path,
                        format!("{value} is not a permissible value of {name}"),
                    )),
                }
            }
            RangeRef::Type { base, .. } => {
                match self.base_kind_check(*base, value, prefix_map, path) {
                    KindCheck::Ok => {}
                    KindCheck::Coerced(n, finding) => {
                        numeric = n;
                        out.push(finding);
                    }
                    KindCheck::Fail(findings) => {
                        out.extend(findings);
                        return out;
                    }
                }
            }
            RangeRef::Class(_) => unreachable!("class ranges are handled by the caller"),
        }
        if let (Some(pattern), Value::Text(text)) = (&slot.pattern, value) {
            let re = self.patterns.get(pattern);
            let matched = match re {
                Some(re) => re.is_match(text),
                None => anchored(pattern).is_some_and(|re| re.is_match(text)),
            };
            if !matched {
                out.push(Finding::error(
                    rules::PATTERN_VIOLATION,
                    path,
                    format!("{value} does not match pattern {pattern:?}"),
                ));
            }
        }
        if let Some(n) = numeric {
            if let Some(min) = slot.minimum_value.filter(|m| n < *m) {
                out.push(Finding::error(
                    rules::BOUND_VIOLATION,
                    path,
                    format!("{n} is below minimum_value {min}"),
                ));
            }
            if let Some(max) = slot.maximum_value.filter(|m| n > *m) {
                out.push(Finding::error(
                    rules::BOUND_VIOLATION,
                    path,
                    format!("{n} is above maximum_value {max}"),
                ));
            }
        }
        out
    }

    fn base_kind_check(&self, base: BaseKind, value: &Value, prefix_map: &PrefixMap, path: &str) -> KindCheck {
        let fail = || {
            KindCheck::Fail(vec![Finding::error(
                rules::RANGE_VIOLATION,
                path,
                format!("{value} is not a valid {base}"),
            )])
        };
        let coerce = |parsed: Option<f64>| match parsed {
            Some(n) if self.options.coerce => KindCheck::Coerced(
                Some(n),
                Finding::warning(rules::COERCED, path, format!("coerced text {value} to {base}")),
            ),
            _ => fail(),
        };
        match (base, value) {
            (BaseKind::String, Value::Text(_)) => KindCheck::Ok,
            (BaseKind::Integer, Value::Integer(_)) => KindCheck::Ok,
            (BaseKind::Integer, Value::Float(f)) if f.fract() == 0.0 => KindCheck::Ok,
            (BaseKind::Integer, Value::Text(t)) => coerce(parse_integer(t).map(|i| i as f64)),
            (BaseKind::Float, Value::Integer(_) | Value::Float(_)) => KindCheck::Ok,
            (BaseKind::Float, Value::Text(t)) => coerce(parse_decimal(t)),
            (BaseKind::Boolean, Value::Bool(_)) => KindCheck::Ok,
            (BaseKind::Boolean, Value::Text(t)) => match parse_boolean(t) {
                Some(_) if self.options.coerce => KindCheck::Coerced(
                    None,
                    Finding::warning(rules::COERCED, path, format!("coerced text {value} to boolean")),
                ),
                _ => fail(),
            },
            (BaseKind::Uri | BaseKind::Date | BaseKind::Datetime, Value::Text(t)) => {
                if lexical_match(base, t) {
                    KindCheck::Ok
                } else {
                    fail()
                }
            }
            (BaseKind::Curie, Value::Text(t)) => {
                if !lexical_match(base, t) {
                    return fail();
                }
                match split_curie(t) {
                    Some((prefix, _)) if prefix_map.contains(prefix) => KindCheck::Ok,
                    Some((prefix, _)) => KindCheck::Fail(vec![Finding::error(
                        rules::UNDECLARED_PREFIX,
                        path,
                        format!("prefix {prefix:?} of {value} is not declared"),
                    )]),
                    None => fail(),
                }
            }
            _ => fail(),
        }
    }
}

enum KindCheck {
    Ok,
    Coerced(Option<f64>, Finding),
    Fail(Vec<Finding>),
}

fn anchored(pattern: &str) -> Option<Regex> {
    Regex::new(&format!("^(?:{pattern})$")).ok()
}

fn lexical_match(base: BaseKind, text: &str) -> bool {
    use std::sync::OnceLock;
    static CACHE: OnceLock<HashMap<BaseKind, Regex>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        BaseKind::ALL
            .into_iter()
            .filter_map(|k| k.lexical_pattern().map(|p| (k, Regex::new(p).unwrap())))
            .collect()
    });
    cache.get(&base).is_none_or(|re| re.is_match(text))
}

/// Validates one record against its asserted class.
pub fn validate_record(schema: &CompiledSchema, record: &DataRecord) -> Result<ValidationReport, ValidationError> {
    Validator::new(schema, ValidationOptions::default()).validate_record(record)
}

/// Validates records together, adding identifier uniqueness per class.
pub fn validate_collection(
    schema: &CompiledSchema,
    records: &[DataRecord],
) -> Result<ValidationReport, ValidationError> {
    Validator::new(schema, ValidationOptions::default()).validate_collection(records)
}

/// Findings for one value against one induced slot: shape, range, pattern
/// and bounds. The compiled schema supplies the prefix map, permissible
/// values and nested class definitions.
pub fn check_value(schema: &CompiledSchema, slot: &InducedSlot, value: &Value) -> Vec<Finding> {
    let validator = Validator::new(schema, ValidationOptions::default());
    let mut out = Vec::new();
    if !value.is_null() {
        validator
            .slot_value(slot, value, &format!("/{}", slot.name), &mut out)
            .expect("compiled ranges name known classes");
    }
    out
}
