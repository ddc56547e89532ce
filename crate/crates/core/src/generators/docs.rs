use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_yaml::{Mapping, Value};

use crate::induction::{uri_local_name, CompiledSchema, InducedSlot, RangeRef};
use crate::loader::slot_mapping;
use crate::metamodel::{SlotDefinition, FALLBACK_RANGE};
use crate::prefixes::contract_uri;

/// Markdown pages: one per class, slot, enum and type, plus `index.md`.
///
/// Pages are keyed by file name (`<Name>.md`, spaces replaced by
/// underscores) and link to each other relatively.
pub fn gen_docs(schema: &CompiledSchema) -> BTreeMap<String, String> {
    let mut pages = BTreeMap::new();
    pages.insert("index.md".to_string(), index_page(schema));
    for name in schema.source.classes.keys() {
        pages.insert(page_name(name), class_page(schema, name));
    }
    for (name, def) in slot_pages(schema) {
        pages.entry(page_name(&name)).or_insert_with(|| slot_page(schema, &name, &def));
    }
    for name in schema.source.enums.keys() {
        pages.insert(page_name(name), enum_page(schema, name));
    }
    for name in schema.source.types.keys() {
        pages.insert(page_name(name), type_page(schema, name));
    }
    pages
}

fn page_name(name: &str) -> String {
    format!("{}.md", name.replace(' ', "_"))
}

fn link(name: &str, label: &str) -> String {
    format!("[{label}]({})", page_name(name))
}

/// Range as shown in docs; built-in types are capitalized (`Float`).
pub fn display_range(schema: &CompiledSchema, range: &str) -> String {
    let builtin = schema
        .source
        .types
        .get(range)
        .is_some_and(|t| t.from_schema.as_deref() == Some(crate::metamodel::BUILTIN_SCHEMA_ID));
    if builtin {
        let mut chars = range.chars();
        chars
            .next()
            .map(|c| c.to_uppercase().chain(chars).collect())
            .unwrap_or_default()
    } else {
        range.to_string()
    }
}

fn range_link(schema: &CompiledSchema, range: &str) -> String {
    link(range, &display_range(schema, range))
}

/// Table cells may not contain pipes or line breaks.
fn cell(text: &str) -> String {
    text.replace('|', "\\|").replace('\n', " ")
}

fn curie_or_uri(schema: &CompiledSchema, name: &str) -> Option<String> {
    schema
        .element_uri(name)
        .map(|uri| contract_uri(&schema.prefix_map, uri).as_str().to_string())
}

fn index_page(schema: &CompiledSchema) -> String {
    let s = &schema.source;
    let mut out = String::new();
    let _ = writeln!(out, "# {}\n", s.title.as_deref().unwrap_or(&s.name));
    if let Some(d) = &s.description {
        let _ = writeln!(out, "{d}\n");
    }
    let _ = writeln!(out, "URI: {}\n", s.id);
    if let Some(v) = &s.version {
        let _ = writeln!(out, "Version: {v}\n");
    }
    let slot_names: Vec<String> = slot_pages(schema).into_iter().map(|(n, _)| n).collect();
    let sections: [(&str, Vec<&str>); 4] = [
        ("Classes", s.classes.keys().map(String::as_str).collect()),
        ("Slots", slot_names.iter().map(String::as_str).collect()),
        ("Enumerations", s.enums.keys().map(String::as_str).collect()),
        ("Types", s.types.keys().map(String::as_str).collect()),
    ];
    for (title, names) in sections {
        if names.is_empty() {
            continue;
        }
        let _ = writeln!(out, "## {title}\n");
        let _ = writeln!(out, "| Name | Description |\n| --- | --- |");
        for name in names {
            let desc = s.element(name).and_then(|e| e.description().map(str::to_string)).or_else(|| {
                slot_pages(schema)
                    .into_iter()
                    .find(|(n, _)| n == name)
                    .and_then(|(_, d)| d.description)
            });
            let _ = writeln!(out, "| {} | {} |", link(name, name), cell(desc.as_deref().unwrap_or("")));
        }
        out.push('\n');
    }
    finish(out)
}

fn class_page(schema: &CompiledSchema, name: &str) -> String {
    let class = &schema.source.classes[name];
    let mut out = String::new();
    let _ = writeln!(out, "# Class: {name}\n");
    if let Some(d) = &class.description {
        let _ = writeln!(out, "Description: {d}\n");
    }
    if class.abstract_ {
        out.push_str("Abstract: yes\n\n");
    }
    if let Some(uri) = curie_or_uri(schema, name) {
        let _ = writeln!(out, "URI: {uri}\n");
    }
    let ancestors = &schema.ancestors[name];
    if ancestors.len() > 1 {
        let chain: Vec<String> = ancestors[1..].iter().map(|a| link(a, a)).collect();
        let _ = writeln!(out, "Ancestors: {}\n", chain.join(", "));
    }
    let children: Vec<String> = schema
        .source
        .classes
        .values()
        .filter(|c| c.parents().any(|p| p == name))
        .map(|c| link(&c.name, &c.name))
        .collect();
    if !children.is_empty() {
        let _ = writeln!(out, "Children: {}\n", children.join(", "));
    }

    out.push_str("## Slots\n\n");
    out.push_str("| Name | Cardinality and Range | Inheritance | Examples |\n");
    out.push_str("| --- | --- | --- | --- |\n");
    for slot in schema.induced_slots(name).unwrap_or_default() {
        let _ = writeln!(
            out,
            "| {} | {} {} | {} | {} |",
            link(&slot.name, &slot.name),
            slot.cardinality(),
            range_link(schema, slot.effective_range.name()),
            slot.inheritance_label.as_str(),
            cell(&slot.examples.join(", ")),
        );
    }
    mappings_section(&mut out, &class.mappings);
    finish(out)
}

/// Global slots, then attributes whose names are not already taken.
fn slot_pages(schema: &CompiledSchema) -> Vec<(String, SlotDefinition)> {
    let s = &schema.source;
    let mut out: Vec<(String, SlotDefinition)> = s.slots.iter().map(|(n, d)| (n.clone(), d.clone())).collect();
    for class in s.classes.values() {
        for (n, d) in &class.attributes {
            if s.element(n).is_none() && !out.iter().any(|(o, _)| o == n) {
                out.push((n.clone(), d.clone()));
            }
        }
    }
    out
}

fn slot_page(schema: &CompiledSchema, name: &str, def: &SlotDefinition) -> String {
    let users: Vec<(&str, &InducedSlot)> = schema
        .induced
        .iter()
        .filter_map(|(c, slots)| slots.iter().find(|s| s.name == name).map(|s| (c.as_str(), s)))
        .collect();
    let range = def
        .range
        .clone()
        .or_else(|| users.first().map(|(_, s)| s.effective_range.name().to_string()))
        .or_else(|| schema.source.default_range.clone())
        .unwrap_or_else(|| FALLBACK_RANGE.to_string());

    let mut out = String::new();
    let _ = writeln!(out, "# Slot: {name}\n");
    if let Some(d) = &def.description {
        let _ = writeln!(out, "Description: {d}\n");
    }
    let _ = writeln!(out, "Range: {}\n", range_link(schema, &range));
    if let Some(uri) = curie_or_uri(schema, name) {
        let _ = writeln!(out, "URI: {uri}\n");
    }

    out.push_str("## Applicable Classes\n\n");
    out.push_str("| Name | Description | Modifies Slot |\n| --- | --- | --- |\n");
    for (class, _) in &users {
        let c = &schema.source.classes[*class];
        let modifies = if c.slot_usage.contains_key(name) { "yes" } else { "no" };
        let _ = writeln!(
            out,
            "| {} | {} | {modifies} |",
            link(class, class),
            cell(c.description.as_deref().unwrap_or(""))
        );
    }
    out.push('\n');
    mappings_section(&mut out, &def.mappings);

    out.push_str("## Source\n\n```yaml\n");
    out.push_str(&source_echo(schema, name, def, &range));
    out.push_str("```\n");
    finish(out)
}

/// The slot definition as written, with provenance and domain filled in.
fn source_echo(schema: &CompiledSchema, name: &str, def: &SlotDefinition, range: &str) -> String {
    let mut m = Mapping::new();
    m.insert("name".into(), name.into());
    if let Some(d) = &def.description {
        m.insert("description".into(), d.as_str().into());
    }
    let from = def.from_schema.clone().unwrap_or_else(|| schema.source.id.clone());
    m.insert("from_schema".into(), from.into());
    let slot_uri = def.slot_uri.clone().or_else(|| {
        schema
            .source
            .default_prefix
            .as_ref()
            .map(|p| format!("{p}:{}", uri_local_name(name)))
    });
    if let Some(u) = slot_uri {
        m.insert("slot_uri".into(), u.into());
    }
    for (k, v) in slot_mapping(def) {
        let key = k.as_str().unwrap_or_default();
        if !matches!(key, "description" | "from_schema" | "slot_uri" | "range") {
            m.insert(k, v);
        }
    }
    let domain: Vec<Value> = schema
        .source
        .classes
        .values()
        .filter(|c| c.declares_slot(name))
        .map(|c| Value::from(c.name.as_str()))
        .collect();
    if !domain.is_empty() {
        m.insert("domain_of".into(), Value::Sequence(domain));
    }
    m.insert("range".into(), range.into());
    serde_yaml::to_string(&Value::Mapping(m)).expect("mappings serialize")
}

fn enum_page(schema: &CompiledSchema, name: &str) -> String {
    let e = &schema.source.enums[name];
    let mut out = String::new();
    let _ = writeln!(out, "# Enum: {name}\n");
    if let Some(d) = &e.description {
        let _ = writeln!(out, "Description: {d}\n");
    }
    if let Some(uri) = curie_or_uri(schema, name) {
        let _ = writeln!(out, "URI: {uri}\n");
    }
    out.push_str("## Permissible Values\n\n");
    out.push_str("| Value | Meaning | Description |\n| --- | --- | --- |\n");
    for pv in e.permissible_values.values() {
        let _ = writeln!(
            out,
            "| {} | {} | {} |",
            cell(&pv.text),
            cell(pv.meaning.as_deref().unwrap_or("")),
            cell(pv.description.as_deref().unwrap_or(""))
        );
    }
    out.push('\n');
    let constrained = constrained_slots(schema, name);
    if !constrained.is_empty() {
        out.push_str("## Slots constrained by this enum\n\n");
        out.push_str("| Name | Description |\n| --- | --- |\n");
        for (slot, desc) in constrained {
            let _ = writeln!(out, "| {} | {} |", link(&slot, &slot), cell(desc.as_deref().unwrap_or("")));
        }
        out.push('\n');
    }
    finish(out)
}

fn constrained_slots(schema: &CompiledSchema, range: &str) -> Vec<(String, Option<String>)> {
    let mut out: Vec<(String, Option<String>)> = Vec::new();
    for slot in schema.induced.values().flatten() {
        let hit = matches!(&slot.effective_range, RangeRef::Enum(e) | RangeRef::Class(e) if e == range);
        if hit && !out.iter().any(|(n, _)| n == &slot.name) {
            out.push((slot.name.clone(), slot.description.clone()));
        }
    }
    out
}

fn type_page(schema: &CompiledSchema, name: &str) -> String {
    let t = &schema.source.types[name];
    let mut out = String::new();
    let _ = writeln!(out, "# Type: {}\n", display_range(schema, name));
    if let Some(d) = &t.description {
        let _ = writeln!(out, "Description: {d}\n");
    }
    let _ = writeln!(out, "Base: {}\n", t.base);
    if let Some(p) = &t.pattern {
        let _ = writeln!(out, "Pattern: `{p}`\n");
    }
    if let Some(uri) = curie_or_uri(schema, name) {
        let _ = writeln!(out, "URI: {uri}\n");
    }
    finish(out)
}

fn mappings_section(out: &mut String, mappings: &[crate::metamodel::Mapping]) {
    if mappings.is_empty() {
        return;
    }
    out.push_str("## Mappings\n\n| Predicate | Target |\n| --- | --- |\n");
    for m in mappings {
        let _ = writeln!(out, "| {} | {} |", m.predicate.skos_curie(), m.target);
    }
    out.push('\n');
}

/// Exactly one trailing newline.
fn finish(mut out: String) -> String {
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}
