//! Declarative transformations of schemas and of the data that conforms
//! to them: slot renames, splits, drops, class renames and subsetting.
//!
//! A spec document has a `transformations` list of class bindings, each
//! with a `rules` list, and an optional top-level `subset_classes` list:
//!
//! ```yaml
//! transformations:
//!   - source_class: Sample
//!     target_class: Sample        # optional; a different name renames the class
//!     rules:
//!       - rename_slot: {from: environment_type, to: sample_type}
//!       - split_slot:
//!           from: position
//!           pattern: '^(\S+)\s+(\S+)$'    # or `separator: " "`
//!           targets: [{slot: latitude, type: float}, {slot: longitude, type: float}]
//!       - drop_slot: notes
//!       - copy_slot: id
//! subset_classes: [Sample]
//! ```

use std::collections::HashSet;

use indexmap::IndexMap;
use regex::Regex;
use serde_yaml::Value as Y;
use thiserror::Error;

use crate::data::{parse_boolean, parse_decimal, parse_integer, DataRecord, Value};
use crate::error::SchemaError;
use crate::induction::{class_ancestors, reachable_slot_names};
use crate::metamodel::{BaseKind, Diagnostic, SchemaDefinition, SlotDefinition};

#[derive(Debug, Clone)]
pub enum Splitter {
    Separator(String),
    /// Anchored by the author; one capture group per target.
    Pattern(Regex),
}

impl PartialEq for Splitter {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Splitter::Separator(a), Splitter::Separator(b)) => a == b,
            (Splitter::Pattern(a), Splitter::Pattern(b)) => a.as_str() == b.as_str(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitTarget {
    pub slot: String,
    pub kind: BaseKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    RenameSlot { from: String, to: String },
    SplitSlot { from: String, splitter: Splitter, targets: Vec<SplitTarget> },
    CopySlot(String),
    DropSlot(String),
    SubsetClasses(Vec<String>),
}

impl Rule {
    /// The source slot this rule takes ownership of, if any.
    fn consumes(&self) -> Option<&str> {
        match self {
            Rule::RenameSlot { from, .. } | Rule::SplitSlot { from, .. } => Some(from),
            Rule::CopySlot(s) | Rule::DropSlot(s) => Some(s),
            Rule::SubsetClasses(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassBinding {
    pub source_class: String,
    pub target_class: String,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransformSpec {
    pub bindings: Vec<ClassBinding>,
    pub subset: Option<Vec<String>>,
    pub diagnostics: Vec<Diagnostic>,
}

impl TransformSpec {
    pub fn is_identity(&self) -> bool {
        self.subset.is_none() && self.bindings.iter().all(|b| b.rules.is_empty() && b.source_class == b.target_class)
    }

    fn binding(&self, class: &str) -> Option<&ClassBinding> {
        self.bindings.iter().find(|b| b.source_class == class)
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("{0}")]
    Invalid(String),
    #[error("unknown rule kind {0:?}")]
    UnknownRule(String),
    #[error("invalid split pattern {pattern:?}: {message}")]
    BadPattern { pattern: String, message: String },
    #[error("split of {slot:?}: pattern has {groups} capture group(s) for {targets} target(s)")]
    GroupCount { slot: String, groups: usize, targets: usize },
    #[error("split of {0:?} names a target twice")]
    DuplicateTarget(String),
    #[error("split target type {0:?} is not a base type")]
    BadTargetType(String),
    #[error("slot {slot:?} of {class} is consumed by more than one rule")]
    SlotConsumedTwice { class: String, slot: String },
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("{class} has no slot {slot:?}")]
    UnknownSlot { class: String, slot: String },
    #[error("{class}: {what} {slot:?} must be declared on the class itself")]
    NotDirect { class: String, slot: String, what: &'static str },
    #[error("{class}: {name:?} already exists")]
    NameTaken { class: String, name: String },
    #[error("subset keep-list is empty")]
    EmptySubset,
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("cannot split {slot}: {value:?} does not yield {expected} value(s)")]
    SplitFailed { slot: String, value: String, expected: usize },
    #[error("cannot split {slot}: {value} is not text")]
    NotText { slot: String, value: String },
    #[error("split of {slot}: {value:?} is not a valid {kind} for {target}")]
    TargetParse { slot: String, target: String, value: String, kind: BaseKind },
}

// ---------------------------------------------------------------- parsing

fn text_field(map: &Y, key: &str, ctx: &str) -> Result<String, SpecError> {
    match map.get(key) {
        Some(Y::String(s)) => Ok(s.clone()),
        Some(_) => Err(SpecError::Invalid(format!("{ctx}: `{key}` must be text"))),
        None => Err(SpecError::Invalid(format!("{ctx}: missing `{key}`"))),
    }
}

/// Accepts `kind: name` and `kind: {name: ...}`.
fn name_arg(body: &Y, kind: &str) -> Result<String, SpecError> {
    match body {
        Y::String(s) => Ok(s.clone()),
        Y::Mapping(_) => text_field(body, "name", kind),
        _ => Err(SpecError::Invalid(format!("{kind}: expected a slot name"))),
    }
}

fn text_list(body: &Y, ctx: &str) -> Result<Vec<String>, SpecError> {
    let items = match body {
        Y::Sequence(items) => items,
        Y::Mapping(_) => match body.get("classes") {
            Some(Y::Sequence(items)) => items,
            _ => return Err(SpecError::Invalid(format!("{ctx}: expected a list of class names"))),
        },
        Y::Null => return Ok(Vec::new()),
        _ => return Err(SpecError::Invalid(format!("{ctx}: expected a list of class names"))),
    };
    items
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| SpecError::Invalid(format!("{ctx}: class names must be text")))
        })
        .collect()
}

fn parse_rule(item: &Y, diagnostics: &mut Vec<Diagnostic>) -> Result<Rule, SpecError> {
    let Y::Mapping(m) = item else {
        return Err(SpecError::Invalid("each rule must be a single-key mapping".into()));
    };
    let mut entries = m.iter();
    let (Some((Y::String(kind), body)), None) = (entries.next(), entries.next()) else {
        return Err(SpecError::Invalid("each rule must be a single-key mapping".into()));
    };
    Ok(match kind.as_str() {
        "rename_slot" => {
            let from = text_field(body, "from", kind)?;
            let to = text_field(body, "to", kind)?;
            if from == to {
                diagnostics.push(Diagnostic::warning(format!("rename_slot {from:?} to itself has no effect")));
            }
            Rule::RenameSlot { from, to }
        }
        "split_slot" => {
            let from = text_field(body, "from", kind)?;
            let splitter = match (body.get("separator"), body.get("pattern")) {
                (Some(Y::String(sep)), None) if !sep.is_empty() => Splitter::Separator(sep.clone()),
                (None, Some(Y::String(p))) => Splitter::Pattern(Regex::new(p).map_err(|e| SpecError::BadPattern {
                    pattern: p.clone(),
                    message: e.to_string(),
                })?),
                _ => {
                    return Err(SpecError::Invalid(format!(
                        "split_slot {from:?}: give exactly one of a non-empty `separator` or a `pattern`"
                    )))
                }
            };
            let Some(Y::Sequence(raw)) = body.get("targets") else {
                return Err(SpecError::Invalid(format!("split_slot {from:?}: missing `targets` list")));
            };
            let mut targets = Vec::new();
            for t in raw {
                let slot = text_field(t, "slot", "split target")?;
                let ty = match t.get("type") {
                    None => "string".to_string(),
                    Some(_) => text_field(t, "type", "split target")?,
                };
                let kind = BaseKind::parse(&ty).ok_or(SpecError::BadTargetType(ty))?;
                if targets.iter().any(|x: &SplitTarget| x.slot == slot) {
                    return Err(SpecError::DuplicateTarget(from));
                }
                targets.push(SplitTarget { slot, kind });
            }
            if targets.is_empty() {
                return Err(SpecError::Invalid(format!("split_slot {from:?}: no targets")));
            }
            if let Splitter::Pattern(re) = &splitter {
                let groups = re.captures_len() - 1;
                if groups != targets.len() {
                    return Err(SpecError::GroupCount {
                        slot: from,
                        groups,
                        targets: targets.len(),
                    });
                }
            }
            Rule::SplitSlot { from, splitter, targets }
        }
        "copy_slot" => Rule::CopySlot(name_arg(body, kind)?),
        "drop_slot" => Rule::DropSlot(name_arg(body, kind)?),
        "subset_classes" => Rule::SubsetClasses(text_list(body, kind)?),
        other => return Err(SpecError::UnknownRule(other.to_string())),
    })
}

/// Parses a spec document.
pub fn parse_transform_spec(text: &str) -> Result<TransformSpec, SpecError> {
    let doc: Y = serde_yaml::from_str(text).map_err(|e| SpecError::Syntax(e.to_string()))?;
    let mut spec = TransformSpec::default();
    let top = match &doc {
        Y::Null => return Ok(spec),
        Y::Mapping(m) => m,
        _ => return Err(SpecError::Invalid("a spec must be a mapping".into())),
    };
    for key in top.keys() {
        match key.as_str() {
            Some("transformations" | "subset_classes") => {}
            _ => spec
                .diagnostics
                .push(Diagnostic::warning(format!("unknown spec key {key:?} ignored"))),
        }
    }
    if let Some(subset) = doc.get("subset_classes") {
        spec.subset = Some(text_list(subset, "subset_classes")?);
    }
    let bindings = match doc.get("transformations") {
        None | Some(Y::Null) => Vec::new(),
        Some(Y::Sequence(items)) => items.clone(),
        Some(_) => return Err(SpecError::Invalid("`transformations` must be a list".into())),
    };
    for b in &bindings {
        let source_class = text_field(b, "source_class", "transformation")?;
        let target_class = match b.get("target_class") {
            None => source_class.clone(),
            Some(_) => text_field(b, "target_class", "transformation")?,
        };
        let mut rules = Vec::new();
        match b.get("rules") {
            None | Some(Y::Null) => {}
            Some(Y::Sequence(items)) => {
                for item in items {
                    match parse_rule(item, &mut spec.diagnostics)? {
                        Rule::SubsetClasses(keep) => spec.subset.get_or_insert_with(Vec::new).extend(keep),
                        rule => rules.push(rule),
                    }
                }
            }
            Some(_) => return Err(SpecError::Invalid(format!("{source_class}: `rules` must be a list"))),
        }
        let mut consumed = HashSet::new();
        for slot in rules.iter().filter_map(Rule::consumes) {
            if !consumed.insert(slot) {
                return Err(SpecError::SlotConsumedTwice {
                    class: source_class.clone(),
                    slot: slot.to_string(),
                });
            }
        }
        spec.bindings.push(ClassBinding {
            source_class,
            target_class,
            rules,
        });
    }
    Ok(spec)
}

// ---------------------------------------------------------------- schemas

/// The target schema and notes about choices made while deriving it.
#[derive(Debug, Clone, PartialEq)]
pub struct Derived {
    pub schema: SchemaDefinition,
    pub diagnostics: Vec<Diagnostic>,
}

/// Applies a spec to a (merged) source schema.
///
/// Renaming a global slot renames it for every class that uses it. Split
/// and drop only touch slots declared on the bound class itself; a global
/// slot no class uses any more is removed. Split targets become attributes
/// typed by their declared base type.
pub fn derive_schema(spec: &TransformSpec, source: &SchemaDefinition) -> Result<Derived, MapError> {
    let mut schema = source.clone();
    let mut diagnostics = Vec::new();
    for binding in &spec.bindings {
        let class = &binding.source_class;
        if !source.classes.contains_key(class) {
            return Err(MapError::UnknownClass(class.clone()));
        }
        let reachable = reachable_slot_names(source, class)?;
        for rule in &binding.rules {
            if let Some(slot) = rule.consumes() {
                if !reachable.iter().any(|r| r == slot) {
                    return Err(MapError::UnknownSlot {
                        class: class.clone(),
                        slot: slot.to_string(),
                    });
                }
            }
            apply_schema_rule(&mut schema, class, rule, &mut diagnostics)?;
        }
        if binding.target_class != *class {
            rename_class(&mut schema, class, &binding.target_class)?;
        }
    }
    if let Some(keep) = &spec.subset {
        schema = subset(&schema, keep)?;
    }
    schema.check_structure()?;
    Ok(Derived { schema, diagnostics })
}

fn apply_schema_rule(
    schema: &mut SchemaDefinition,
    class: &str,
    rule: &Rule,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<(), MapError> {
    match rule {
        Rule::RenameSlot { from, to } if from == to => {}
        Rule::RenameSlot { from, to } => {
            if schema.element(to).is_some() || schema.classes.values().any(|c| c.attributes.contains_key(to)) {
                return Err(MapError::NameTaken {
                    class: class.to_string(),
                    name: to.clone(),
                });
            }
            let owner = schema.classes.get_mut(class).expect("checked by caller");
            let renamed = if let Some(attr) = owner.attributes.shift_remove_full(from) {
                let (idx, _, mut def) = attr;
                def.name.clone_from(to);
                owner.attributes.insert(to.clone(), def);
                let last = owner.attributes.len() - 1;
                owner.attributes.move_index(last, idx);
                owner.attributes[idx].clone()
            } else {
                let def = schema.slots.shift_remove_full(from);
                let Some((idx, _, mut def)) = def else {
                    // an inherited attribute; renaming it here would split the parent
                    return Err(MapError::NotDirect {
                        class: class.to_string(),
                        slot: from.clone(),
                        what: "renamed attribute",
                    });
                };
                def.name.clone_from(to);
                schema.slots.insert(to.clone(), def);
                let last = schema.slots.len() - 1;
                schema.slots.move_index(last, idx);
                for c in schema.classes.values_mut() {
                    for s in c.slots.iter_mut().filter(|s| *s == from) {
                        s.clone_from(to);
                    }
                    if let Some((i, _, mut usage)) = c.slot_usage.shift_remove_full(from) {
                        usage.name.clone_from(to);
                        c.slot_usage.insert(to.clone(), usage);
                        let last = c.slot_usage.len() - 1;
                        c.slot_usage.move_index(last, i);
                    }
                }
                for s in schema.slots.values_mut() {
                    if s.is_a.as_deref() == Some(from) {
                        s.is_a = Some(to.clone());
                    }
                }
                schema.slots[to].clone()
            };
            if let Some(uri) = &renamed.slot_uri {
                diagnostics.push(Diagnostic::warning(format!(
                    "{from} renamed to {to} keeps slot_uri {uri}; review whether it still fits"
                )));
            }
        }
        Rule::SplitSlot { from, targets, .. } => {
            remove_direct_slot(schema, class, from, "split slot")?;
            for t in targets {
                let taken = schema.classes[class].attributes.contains_key(&t.slot)
                    || schema.classes[class].slots.contains(&t.slot)
                    || schema.element(&t.slot).is_some_and(|e| e.kind() != crate::metamodel::ElementKind::Slot);
                if taken {
                    return Err(MapError::NameTaken {
                        class: class.to_string(),
                        name: t.slot.clone(),
                    });
                }
                let mut def = SlotDefinition::new(t.slot.clone());
                def.range = Some(t.kind.as_str().to_string());
                def.description = Some(format!("Split from {from}."));
                schema.classes[class].attributes.insert(t.slot.clone(), def);
            }
        }
        Rule::DropSlot(slot) => remove_direct_slot(schema, class, slot, "dropped slot")?,
        Rule::CopySlot(_) | Rule::SubsetClasses(_) => {}
    }
    Ok(())
}

fn remove_direct_slot(
    schema: &mut SchemaDefinition,
    class: &str,
    slot: &str,
    what: &'static str,
) -> Result<(), MapError> {
    let owner = schema.classes.get_mut(class).expect("checked by caller");
    let had_attr = owner.attributes.shift_remove(slot).is_some();
    let before = owner.slots.len();
    owner.slots.retain(|s| s != slot);
    let had_slot = owner.slots.len() != before;
    if !had_attr && !had_slot {
        return Err(MapError::NotDirect {
            class: class.to_string(),
            slot: slot.to_string(),
            what,
        });
    }
    owner.slot_usage.shift_remove(slot);
    let still_used = schema.classes.values().any(|c| c.slots.iter().any(|s| s == slot))
        || schema.slots.values().any(|s| s.is_a.as_deref() == Some(slot));
    if had_slot && !still_used {
        schema.slots.shift_remove(slot);
    }
    Ok(())
}

fn rename_class(schema: &mut SchemaDefinition, from: &str, to: &str) -> Result<(), MapError> {
    if schema.element(to).is_some() {
        return Err(MapError::NameTaken {
            class: from.to_string(),
            name: to.to_string(),
        });
    }
    let (idx, _, mut def) = schema.classes.shift_remove_full(from).expect("checked by caller");
    def.name = to.to_string();
    schema.classes.insert(to.to_string(), def);
    let last = schema.classes.len() - 1;
    schema.classes.move_index(last, idx);
    let fix = |r: &mut Option<String>| {
        if r.as_deref() == Some(from) {
            *r = Some(to.to_string());
        }
    };
    for c in schema.classes.values_mut() {
        fix(&mut c.is_a);
        for m in c.mixins.iter_mut().filter(|m| *m == from) {
            *m = to.to_string();
        }
        for s in c.attributes.values_mut().chain(c.slot_usage.values_mut()) {
            fix(&mut s.range);
        }
    }
    for s in schema.slots.values_mut() {
        fix(&mut s.range);
    }
    fix(&mut schema.default_range);
    Ok(())
}

/// Keeps `keep`, their ancestors, and everything their slots refer to.
fn subset(schema: &SchemaDefinition, keep: &[String]) -> Result<SchemaDefinition, MapError> {
    if keep.is_empty() {
        return Err(MapError::EmptySubset);
    }
    let mut classes: Vec<String> = Vec::new();
    let mut queue: Vec<String> = keep.to_vec();
    let mut slots: Vec<String> = Vec::new();
    let mut ranges: HashSet<String> = HashSet::new();
    while let Some(class) = queue.pop() {
        if classes.contains(&class) {
            continue;
        }
        if !schema.classes.contains_key(&class) {
            return Err(MapError::UnknownClass(class));
        }
        for ancestor in class_ancestors(schema, &class)? {
            let def = &schema.classes[&ancestor];
            let mut local_ranges: Vec<String> = Vec::new();
            for s in &def.slots {
                if !slots.contains(s) {
                    slots.push(s.clone());
                }
                let mut cur = schema.slots.get(s);
                while let Some(d) = cur {
                    local_ranges.extend(d.range.clone());
                    cur = d.is_a.as_ref().and_then(|p| {
                        if !slots.contains(p) {
                            slots.push(p.clone());
                        }
                        schema.slots.get(p)
                    });
                }
            }
            local_ranges.extend(def.attributes.values().chain(def.slot_usage.values()).filter_map(|s| s.range.clone()));
            for r in local_ranges {
                if schema.classes.contains_key(&r) && !classes.contains(&r) {
                    queue.push(r.clone());
                }
                ranges.insert(r);
            }
            if ancestor != class && !classes.contains(&ancestor) {
                queue.push(ancestor);
            }
        }
        classes.push(class);
    }
    if let Some(r) = &schema.default_range {
        ranges.insert(r.clone());
    }
    let mut out = schema.clone();
    out.classes.retain(|name, _| classes.contains(name));
    out.slots.retain(|name, _| slots.contains(name));
    out.enums.retain(|name, _| ranges.contains(name));
    // types are cheap and shared; keep every declared type
    Ok(out)
}

// ---------------------------------------------------------------- data

/// Applies the rules bound to the record's class; other records pass
/// through unchanged. Absent sources give absent targets.
pub fn transform_record(spec: &TransformSpec, record: &DataRecord) -> Result<DataRecord, TransformError> {
    let Some(binding) = spec.binding(&record.asserted_class) else {
        return Ok(record.clone());
    };
    let mut values: Vec<(String, Value)> = record.values.clone().into_iter().collect();
    for rule in &binding.rules {
        match rule {
            Rule::RenameSlot { from, to } => {
                for (k, _) in values.iter_mut().filter(|(k, _)| k == from) {
                    k.clone_from(to);
                }
            }
            Rule::DropSlot(slot) => values.retain(|(k, _)| k != slot),
            Rule::SplitSlot { from, splitter, targets } => {
                let Some(pos) = values.iter().position(|(k, _)| k == from) else {
                    continue;
                };
                let (_, value) = values.remove(pos);
                if value.is_null() {
                    continue;
                }
                let parts = split_value(from, &value, splitter, targets)?;
                for (offset, part) in parts.into_iter().enumerate() {
                    values.insert(pos + offset, part);
                }
            }
            Rule::CopySlot(_) | Rule::SubsetClasses(_) => {}
        }
    }
    Ok(DataRecord {
        asserted_class: binding.target_class.clone(),
        values: values.into_iter().collect::<IndexMap<_, _>>(),
    })
}

fn split_value(
    slot: &str,
    value: &Value,
    splitter: &Splitter,
    targets: &[SplitTarget],
) -> Result<Vec<(String, Value)>, TransformError> {
    let Value::Text(text) = value else {
        return Err(TransformError::NotText {
            slot: slot.to_string(),
            value: value.to_string(),
        });
    };
    let failed = || TransformError::SplitFailed {
        slot: slot.to_string(),
        value: text.clone(),
        expected: targets.len(),
    };
    let pieces: Vec<String> = match splitter {
        Splitter::Separator(sep) => text.split(sep.as_str()).map(|p| p.trim().to_string()).collect(),
        Splitter::Pattern(re) => {
            let caps = re.captures(text).ok_or_else(failed)?;
            (1..caps.len())
                .map(|i| caps.get(i).map(|m| m.as_str().to_string()).ok_or_else(failed))
                .collect::<Result<_, _>>()?
        }
    };
    if pieces.len() != targets.len() {
        return Err(failed());
    }
    targets
        .iter()
        .zip(pieces)
        .map(|(t, piece)| {
            let parsed = match t.kind {
                BaseKind::Float => parse_decimal(&piece).map(Value::Float),
                BaseKind::Integer => parse_integer(&piece).map(Value::Integer),
                BaseKind::Boolean => parse_boolean(&piece).map(Value::Bool),
                _ => Some(Value::Text(piece.clone())),
            };
            parsed.map(|v| (t.slot.clone(), v)).ok_or_else(|| TransformError::TargetParse {
                slot: slot.to_string(),
                target: t.slot.clone(),
                value: piece,
                kind: t.kind,
            })
        })
        .collect()
}

/// One result per input record, in input order.
pub fn transform_collection(spec: &TransformSpec, records: &[DataRecord]) -> Vec<Result<DataRecord, TransformError>> {
    records.iter().map(|r| transform_record(spec, r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loader::parse_schema;

    const POSITION_SPLIT: &str = r#"
transformations:
  - source_class: Sample
    rules:
      - split_slot:
          from: position
          pattern: '^\s*(-?[0-9]+(?:\.[0-9]+)?)°?\s+(-?[0-9]+(?:\.[0-9]+)?)°?\s*$'
          targets:
            - {slot: latitude, type: float}
            - {slot: longitude, type: float}
      - rename_slot: {from: environment_type, to: sample_type}
"#;

    const SOURCE: &str = r#"
id: https://example.org/source
name: source
prefixes:
  linkml: https://w3id.org/linkml/
  MIXS: https://w3id.org/mixs/
classes:
  Sample:
    slots: [id, position, environment_type]
  Site:
    slots: [environment_type]
slots:
  id:
    identifier: true
  position: {}
  environment_type:
    range: EnvironmentTypeEnum
    slot_uri: MIXS:0000009
enums:
  EnvironmentTypeEnum:
    permissible_values:
      soil: {}
types:
  string:
    base: string
  float:
    base: float
"#;

    fn source() -> SchemaDefinition {
        parse_schema(SOURCE).unwrap().schema
    }

    fn row(position: Option<&str>) -> DataRecord {
        let mut r = DataRecord::new("Sample").with("id", Value::text("S1"));
        if let Some(p) = position {
            r = r.with("position", Value::text(p));
        }
        r.with("environment_type", Value::text("soil"))
    }

    #[test]
    fn parses_split_and_rename_rules() {
        let spec = parse_transform_spec(POSITION_SPLIT).unwrap();
        assert_eq!(spec.bindings.len(), 1);
        let rules = &spec.bindings[0].rules;
        assert_eq!(rules.len(), 2);
        assert!(matches!(&rules[0], Rule::SplitSlot { from, targets, .. } if from == "position" && targets.len() == 2));
        assert_eq!(
            rules[1],
            Rule::RenameSlot {
                from: "environment_type".into(),
                to: "sample_type".into()
            }
        );
    }

    #[test]
    fn spec_errors() {
        let unknown = "transformations:\n  - source_class: A\n    rules:\n      - explode_slot: x\n";
        assert!(matches!(parse_transform_spec(unknown), Err(SpecError::UnknownRule(k)) if k == "explode_slot"));
        let groups = "transformations:\n  - source_class: A\n    rules:\n      - split_slot: {from: p, pattern: '(a)', targets: [{slot: x}, {slot: y}]}\n";
        assert!(matches!(parse_transform_spec(groups), Err(SpecError::GroupCount { groups: 1, targets: 2, .. })));
        let twice = "transformations:\n  - source_class: A\n    rules:\n      - drop_slot: p\n      - rename_slot: {from: p, to: q}\n";
        assert!(matches!(parse_transform_spec(twice), Err(SpecError::SlotConsumedTwice { .. })));
        assert!(matches!(parse_transform_spec("transformations: ["), Err(SpecError::Syntax(_))));
        let selfref = "transformations:\n  - source_class: A\n    rules:\n      - rename_slot: {from: p, to: p}\n";
        let spec = parse_transform_spec(selfref).unwrap();
        assert_eq!(spec.diagnostics.len(), 1);
    }

    #[test]
    fn empty_spec_is_identity() {
        let spec = parse_transform_spec("transformations: []\n").unwrap();
        assert!(spec.is_identity());
        let src = source();
        assert_eq!(derive_schema(&spec, &src).unwrap().schema, src);
        assert_eq!(transform_record(&spec, &row(Some("1 2"))).unwrap(), row(Some("1 2")));
    }

    #[test]
    fn derived_schema_splits_and_renames() {
        let spec = parse_transform_spec(POSITION_SPLIT).unwrap();
        let derived = derive_schema(&spec, &source()).unwrap();
        let s = &derived.schema;
        let sample = &s.classes["Sample"];
        assert_eq!(sample.slots, ["id", "sample_type"]);
        assert_eq!(sample.attributes.keys().collect::<Vec<_>>(), ["latitude", "longitude"]);
        assert_eq!(sample.attributes["latitude"].range.as_deref(), Some("float"));
        assert!(!s.slots.contains_key("position"));
        assert_eq!(s.slots["sample_type"].range.as_deref(), Some("EnvironmentTypeEnum"));
        assert_eq!(s.classes["Site"].slots, ["sample_type"]);
        assert!(derived.diagnostics[0].message.contains("MIXS:0000009"));
    }

    #[test]
    fn record_transform_follows_rules() {
        let spec = parse_transform_spec(POSITION_SPLIT).unwrap();
        let out = transform_record(&spec, &row(Some("36.1069° -112.1129"))).unwrap();
        assert_eq!(
            out.values.into_iter().collect::<Vec<_>>(),
            [
                ("id".to_string(), Value::text("S1")),
                ("latitude".to_string(), Value::Float(36.1069)),
                ("longitude".to_string(), Value::Float(-112.1129)),
                ("sample_type".to_string(), Value::text("soil")),
            ]
        );
        let absent = transform_record(&spec, &row(None)).unwrap();
        assert!(absent.get("latitude").is_none() && absent.get("longitude").is_none());
        let err = transform_record(&spec, &row(Some("66.5° varies"))).unwrap_err();
        assert!(err.to_string().contains("66.5° varies"), "{err}");
        let results = transform_collection(&spec, &[row(Some("1 2")), row(Some("x")), row(None)]);
        assert_eq!(results.len(), 3);
        assert!(results[1].is_err());
    }

    #[test]
    fn separator_split_and_target_types() {
        let spec = parse_transform_spec(
            "transformations:\n  - source_class: Sample\n    rules:\n      - split_slot: {from: position, separator: ',', targets: [{slot: a, type: integer}, {slot: b}]}\n",
        )
        .unwrap();
        let out = transform_record(&spec, &row(Some("3, x"))).unwrap();
        assert_eq!(out.values["a"], Value::Integer(3));
        assert_eq!(out.values["b"], Value::text("x"));
        assert!(matches!(
            transform_record(&spec, &row(Some("x, 3"))),
            Err(TransformError::TargetParse { .. })
        ));
    }

    #[test]
    fn subset_keeps_closure() {
        let text = r#"
id: https://example.org/s
name: s
classes:
  Base:
    slots: [id]
  Sample:
    is_a: Base
    slots: [site]
  Site:
    slots: [kind]
  Unused: {}
slots:
  id: {}
  site:
    range: Site
  kind:
    range: KindEnum
enums:
  KindEnum: {}
  OtherEnum: {}
"#;
        let src = parse_schema(text).unwrap().schema;
        let spec = parse_transform_spec("subset_classes: [Sample]\n").unwrap();
        let out = derive_schema(&spec, &src).unwrap().schema;
        assert_eq!(out.classes.keys().collect::<Vec<_>>(), ["Base", "Sample", "Site"]);
        assert_eq!(out.slots.keys().collect::<Vec<_>>(), ["id", "site", "kind"]);
        assert_eq!(out.enums.keys().collect::<Vec<_>>(), ["KindEnum"]);
        let empty = parse_transform_spec("subset_classes: []\n").unwrap();
        assert!(matches!(derive_schema(&empty, &src), Err(MapError::EmptySubset)));
    }

    #[test]
    fn class_rename_and_unknown_references() {
        let spec = parse_transform_spec("transformations:\n  - source_class: Site\n    target_class: Place\n").unwrap();
        let out = derive_schema(&spec, &source()).unwrap().schema;
        assert!(out.classes.contains_key("Place") && !out.classes.contains_key("Site"));
        let rec = DataRecord::new("Site");
        assert_eq!(transform_record(&spec, &rec).unwrap().asserted_class, "Place");

        let bad = parse_transform_spec("transformations:\n  - source_class: Sample\n    rules:\n      - drop_slot: nope\n").unwrap();
        assert!(matches!(derive_schema(&bad, &source()), Err(MapError::UnknownSlot { .. })));
        let bad = parse_transform_spec("transformations:\n  - source_class: Nope\n").unwrap();
        assert!(matches!(derive_schema(&bad, &source()), Err(MapError::UnknownClass(_))));
    }
}
