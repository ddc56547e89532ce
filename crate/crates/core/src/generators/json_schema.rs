use serde_json::{json, Map, Value};

use super::{to_canonical_text, GeneratorError, GeneratorOptions};
use crate::induction::{CompiledSchema, InducedSlot, RangeRef};
use crate::metamodel::BaseKind;

const DIALECT: &str = "https://json-schema.org/draft/2020-12/schema";

/// Draft 2020-12 JSON Schema with one `$defs` entry per concrete class and
/// per enum.
///
/// Optional slots also accept `null`, which the validator treats as "not
/// specified". Class-ranged slots accept the referenced object or, when the
/// range class has an identifier, a reference by identifier.
pub fn gen_json_schema(schema: &CompiledSchema, opts: &GeneratorOptions) -> Result<String, GeneratorError> {
    if let Some(root) = &opts.root_class {
        if schema.class(root).is_none() {
            return Err(GeneratorError::UnknownRootClass(root.clone()));
        }
    }
    let mut defs = Map::new();
    for class in schema.concrete_classes() {
        defs.insert(class.name.clone(), class_schema(schema, &class.name, opts.inline_depth));
    }
    for (name, e) in &schema.source.enums {
        let mut def = json!({
            "type": "string",
            "enum": e.permissible_values.keys().collect::<Vec<_>>(),
        });
        let meanings: Vec<String> = e
            .permissible_values
            .values()
            .filter_map(|pv| pv.meaning.as_ref().filter(|m| **m != pv.text).map(|m| format!("{} = {m}", pv.text)))
            .collect();
        let description = match (&e.description, meanings.is_empty()) {
            (Some(d), true) => Some(d.clone()),
            (Some(d), false) => Some(format!("{d} Meanings: {}.", meanings.join("; "))),
            (None, false) => Some(format!("Meanings: {}.", meanings.join("; "))),
            (None, true) => None,
        };
        if let Some(d) = description {
            def["description"] = Value::String(d);
        }
        defs.insert(name.clone(), def);
    }

    let mut doc = Map::new();
    doc.insert("$schema".into(), DIALECT.into());
    doc.insert("$id".into(), schema.source.id.clone().into());
    doc.insert("title".into(), schema.source.title.clone().unwrap_or_else(|| schema.source.name.clone()).into());
    if let Some(d) = &schema.source.description {
        doc.insert("description".into(), d.clone().into());
    }
    if let Some(version) = &schema.source.version {
        doc.insert("version".into(), version.clone().into());
    }
    if let Some(root) = &opts.root_class {
        if let Value::Object(entry) = class_reference(schema, root, 0) {
            doc.extend(entry);
        }
    }
    doc.insert("$defs".into(), Value::Object(defs));
    Ok(to_canonical_text(Value::Object(doc)))
}

fn class_schema(schema: &CompiledSchema, class: &str, inline_depth: usize) -> Value {
    let slots = schema.induced_slots(class).unwrap_or_default();
    let mut properties = Map::new();
    let mut required = Vec::new();
    for slot in slots {
        properties.insert(slot.name.clone(), slot_schema(schema, slot, inline_depth));
        if slot.required {
            required.push(slot.name.clone());
        }
    }
    let mut def = json!({
        "type": "object",
        "properties": properties,
        "required": required,
        "additionalProperties": false,
    });
    if let Some(d) = schema.class(class).and_then(|c| c.description.clone()) {
        def["description"] = Value::String(d);
    }
    def
}

fn slot_schema(schema: &CompiledSchema, slot: &InducedSlot, inline_depth: usize) -> Value {
    let single = match &slot.effective_range {
        RangeRef::Class(c) => class_value(schema, c, inline_depth),
        RangeRef::Enum(e) => {
            let mut v = json!({ "$ref": format!("#/$defs/{e}") });
            if let Some(p) = &slot.pattern {
                v["pattern"] = anchored(p).into();
            }
            v
        }
        RangeRef::Type { base, .. } => scalar_schema(*base, slot),
    };
    let mut value = if slot.multivalued {
        json!({ "type": "array", "items": single })
    } else {
        single
    };
    if let Some(d) = &slot.description {
        value = match value {
            Value::Object(mut m) if !m.contains_key("$ref") => {
                m.insert("description".into(), d.clone().into());
                Value::Object(m)
            }
            other => other,
        };
    }
    if slot.required {
        value
    } else {
        json!({ "anyOf": [value, { "type": "null" }] })
    }
}

fn scalar_schema(base: BaseKind, slot: &InducedSlot) -> Value {
    let mut v = Map::new();
    let ty = match base {
        BaseKind::Integer => "integer",
        BaseKind::Float => "number",
        BaseKind::Boolean => "boolean",
        _ => "string",
    };
    v.insert("type".into(), ty.into());
    let patterns: Vec<String> = base
        .lexical_pattern()
        .map(str::to_string)
        .into_iter()
        .chain(slot.pattern.as_deref().map(anchored))
        .collect();
    match patterns.len() {
        0 => {}
        1 => {
            v.insert("pattern".into(), patterns[0].clone().into());
        }
        _ => {
            let all: Vec<Value> = patterns.into_iter().map(|p| json!({ "pattern": p })).collect();
            v.insert("allOf".into(), all.into());
        }
    }
    if matches!(base, BaseKind::Integer | BaseKind::Float) {
        if let Some(min) = slot.minimum_value {
            v.insert("minimum".into(), number(min));
        }
        if let Some(max) = slot.maximum_value {
            v.insert("maximum".into(), number(max));
        }
    }
    Value::Object(v)
}

/// The object itself or, if the class has an identifier, its identifier.
fn class_value(schema: &CompiledSchema, class: &str, inline_depth: usize) -> Value {
    let object = class_reference(schema, class, inline_depth);
    match schema.identifier_slot(class) {
        Some(id) => {
            let reference = match &id.effective_range {
                RangeRef::Type { base, .. } => scalar_schema(*base, id),
                RangeRef::Enum(e) => json!({ "$ref": format!("#/$defs/{e}") }),
                RangeRef::Class(_) => json!(false),
            };
            json!({ "anyOf": [object, reference] })
        }
        None => object,
    }
}

/// A reference to the definition of `class`; abstract classes become a
/// choice over their concrete descendants.
fn class_reference(schema: &CompiledSchema, class: &str, inline_depth: usize) -> Value {
    let concrete: Vec<&str> = schema
        .descendants(class)
        .into_iter()
        .filter(|c| schema.class(c).is_some_and(|d| !d.abstract_))
        .collect();
    let one = |c: &str| {
        if inline_depth > 0 {
            class_schema(schema, c, inline_depth - 1)
        } else {
            json!({ "$ref": format!("#/$defs/{c}") })
        }
    };
    let is_abstract = schema.class(class).is_some_and(|c| c.abstract_);
    if !is_abstract {
        return one(class);
    }
    match concrete.as_slice() {
        [] => json!(false),
        [only] => one(only),
        many => json!({ "anyOf": many.iter().map(|c| one(c)).collect::<Vec<_>>() }),
    }
}

fn anchored(pattern: &str) -> String {
    format!("^(?:{pattern})$")
}

fn number(n: f64) -> Value {
    if n.fract() == 0.0 && n.abs() < 9.0e15 {
        Value::from(n as i64)
    } else {
        serde_json::Number::from_f64(n).map_or(Value::Null, Value::Number)
    }
}
