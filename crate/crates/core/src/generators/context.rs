use serde_json::{Map, Value};

use super::to_canonical_text;
use crate::induction::{CompiledSchema, RangeRef};
use crate::metamodel::{BaseKind, ElementKind};

const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// JSON-LD context: every prefix once, then every element name mapped to
/// its expanded URI.
///
/// A prefix and an element may share a name (a `Sample` prefix next to a
/// `Sample` class); the prefix wins because CURIE expansion depends on it.
/// Mappings are echoed outside the context under a top-level `mappings`
/// key, where JSON-LD processors ignore them.
pub fn gen_context(schema: &CompiledSchema) -> String {
    let mut ctx = Map::new();
    for (prefix, base) in schema.prefix_map.iter() {
        ctx.insert(prefix.to_string(), Value::String(base.to_string()));
    }
    for (name, kind) in schema.source.element_names() {
        if ctx.contains_key(name) {
            continue;
        }
        let Some(uri) = schema.element_uri(name) else {
            continue;
        };
        let entry = match kind {
            ElementKind::Slot => slot_entry(schema, name, uri),
            _ => Value::String(uri.to_string()),
        };
        ctx.insert(name.to_string(), entry);
    }
    for class in schema.source.classes.values() {
        for name in class.attributes.keys() {
            if ctx.contains_key(name) {
                continue;
            }
            if let Some(uri) = schema.element_uri(name) {
                ctx.insert(name.clone(), slot_entry(schema, name, uri));
            }
        }
    }

    let mut doc = Map::new();
    doc.insert("@context".into(), Value::Object(ctx));
    let mappings = mapping_echo(schema);
    if !mappings.is_empty() {
        doc.insert("mappings".into(), Value::Object(mappings));
    }
    to_canonical_text(Value::Object(doc))
}

/// `{"@id": ...}` plus a datatype or `@id` coercion when the range says so.
fn slot_entry(schema: &CompiledSchema, name: &str, uri: &str) -> Value {
    let mut entry = Map::new();
    entry.insert("@id".into(), Value::String(uri.to_string()));
    let range = schema.induced.values().flatten().find(|s| s.name == name).map(|s| &s.effective_range);
    let datatype = match range {
        Some(RangeRef::Class(_)) => Some("@id".to_string()),
        Some(RangeRef::Type { base, .. }) => match base {
            BaseKind::Integer => Some(format!("{XSD}integer")),
            BaseKind::Float => Some(format!("{XSD}double")),
            BaseKind::Boolean => Some(format!("{XSD}boolean")),
            BaseKind::Date => Some(format!("{XSD}date")),
            BaseKind::Datetime => Some(format!("{XSD}dateTime")),
            BaseKind::Uri | BaseKind::Curie => Some("@id".to_string()),
            BaseKind::String => None,
        },
        _ => None,
    };
    if let Some(t) = datatype {
        entry.insert("@type".into(), Value::String(t));
    }
    Value::Object(entry)
}

fn mapping_echo(schema: &CompiledSchema) -> Map<String, Value> {
    let mut out = Map::new();
    let class_maps = schema.source.classes.values().map(|c| (&c.name, &c.mappings));
    let slot_maps = schema.source.slots.values().map(|s| (&s.name, &s.mappings));
    for (name, mappings) in class_maps.chain(slot_maps) {
        if mappings.is_empty() {
            continue;
        }
        let mut by_predicate = Map::new();
        for m in mappings {
            let list = by_predicate
                .entry(m.predicate.skos_curie().to_string())
                .or_insert_with(|| Value::Array(Vec::new()));
            if let Value::Array(items) = list {
                items.push(Value::String(m.target.clone()));
            }
        }
        out.insert(name.clone(), Value::Object(by_predicate));
    }
    out
}
