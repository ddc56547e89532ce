//! Compiles a merged schema: ancestor linearization, induced slots and
//! identifier expansion.
//!
//! Linearization is depth-first, `is_a` before mixins, mixins in declaration
//! order, keeping the first occurrence of each class. It is not C3.

use std::collections::HashSet;

use indexmap::IndexMap;
use regex::Regex;

use crate::error::SchemaError;
use crate::loader::build_prefix_map;
use crate::metamodel::{
    split_curie, BaseKind, ClassDefinition, Diagnostic, Mapping, SchemaDefinition, SlotDefinition,
    FALLBACK_RANGE,
};
use crate::prefixes::{expand_curie, PrefixMap};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RangeRef {
    Type { name: String, base: BaseKind },
    Class(String),
    Enum(String),
}

impl RangeRef {
    pub fn name(&self) -> &str {
        match self {
            RangeRef::Type { name, .. } | RangeRef::Class(name) | RangeRef::Enum(name) => name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InheritanceLabel {
    Direct,
    Inherited,
    Overridden,
}

impl InheritanceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            InheritanceLabel::Direct => "direct",
            InheritanceLabel::Inherited => "inherited",
            InheritanceLabel::Overridden => "overridden",
        }
    }
}

/// The effective slot a class has after inheritance and overlays.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedSlot {
    pub name: String,
    pub owner_class: String,
    pub effective_range: RangeRef,
    pub required: bool,
    pub multivalued: bool,
    pub identifier: bool,
    pub pattern: Option<String>,
    pub minimum_value: Option<f64>,
    pub maximum_value: Option<f64>,
    pub slot_uri: Option<String>,
    pub slot_uri_expanded: Option<String>,
    pub description: Option<String>,
    pub unit: Option<String>,
    pub examples: Vec<String>,
    pub mappings: Vec<Mapping>,
    pub inheritance_label: InheritanceLabel,
}

impl InducedSlot {
    /// `min..max` with `*` for unbounded.
    pub fn cardinality(&self) -> String {
        let min = if self.required { "1" } else { "0" };
        let max = if self.multivalued { "*" } else { "1" };
        format!("{min}..{max}")
    }
}

#[derive(Debug, Clone)]
pub struct CompiledSchema {
    pub source: SchemaDefinition,
    pub prefix_map: PrefixMap,
    pub induced: IndexMap<String, Vec<InducedSlot>>,
    pub ancestors: IndexMap<String, Vec<String>>,
    pub expanded_uris: IndexMap<String, String>,
    pub diagnostics: Vec<Diagnostic>,
}

impl CompiledSchema {
    pub fn induced_slots(&self, class: &str) -> Option<&[InducedSlot]> {
        self.induced.get(class).map(Vec::as_slice)
    }

    pub fn induced_slot(&self, class: &str, slot: &str) -> Option<&InducedSlot> {
        self.induced.get(class)?.iter().find(|s| s.name == slot)
    }

    pub fn identifier_slot(&self, class: &str) -> Option<&InducedSlot> {
        self.induced.get(class)?.iter().find(|s| s.identifier)
    }

    pub fn class(&self, name: &str) -> Option<&ClassDefinition> {
        self.source.classes.get(name)
    }

    /// Non-abstract classes in declaration order.
    pub fn concrete_classes(&self) -> impl Iterator<Item = &ClassDefinition> {
        self.source.classes.values().filter(|c| !c.abstract_)
    }

    /// Classes whose ancestor chain includes `class` (itself included).
    pub fn descendants(&self, class: &str) -> Vec<&str> {
        self.ancestors
            .iter()
            .filter(|(_, chain)| chain.iter().any(|a| a == class))
            .map(|(c, _)| c.as_str())
            .collect()
    }

    /// URI of an element, falling back to the default prefix.
    pub fn element_uri(&self, name: &str) -> Option<&str> {
        self.expanded_uris.get(name).map(String::as_str)
    }
}

/// Linearized ancestor chain of `class`, starting with the class itself.
pub fn class_ancestors(schema: &SchemaDefinition, class: &str) -> Result<Vec<String>, SchemaError> {
    if !schema.classes.contains_key(class) {
        return Err(SchemaError::UnknownClass(class.to_string()));
    }
    let mut out = Vec::new();
    let mut path = Vec::new();
    visit_ancestors(schema, class, &mut path, &mut out)?;
    Ok(out)
}

fn visit_ancestors(
    schema: &SchemaDefinition,
    class: &str,
    path: &mut Vec<String>,
    out: &mut Vec<String>,
) -> Result<(), SchemaError> {
    if let Some(pos) = path.iter().position(|c| c == class) {
        let mut cycle = path[pos..].to_vec();
        cycle.push(class.to_string());
        return Err(SchemaError::InheritanceCycle(cycle));
    }
    let def = schema
        .classes
        .get(class)
        .ok_or_else(|| SchemaError::UnknownClass(class.to_string()))?;
    if !out.iter().any(|c| c == class) {
        out.push(class.to_string());
    }
    path.push(class.to_string());
    for parent in def.parents() {
        if !schema.classes.contains_key(parent) {
            return Err(SchemaError::UnknownParent {
                class: class.to_string(),
                parent: parent.to_string(),
            });
        }
        visit_ancestors(schema, parent, path, out)?;
    }
    path.pop();
    Ok(())
}

/// Shortest parent-edge distance from `class` to each ancestor.
fn ancestor_depths(schema: &SchemaDefinition, class: &str) -> IndexMap<String, usize> {
    let mut depths = IndexMap::new();
    let mut frontier = vec![class.to_string()];
    let mut depth = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for c in frontier {
            if depths.contains_key(&c) {
                continue;
            }
            depths.insert(c.clone(), depth);
            if let Some(def) = schema.classes.get(&c) {
                next.extend(def.parents().map(str::to_string));
            }
        }
        frontier = next;
        depth += 1;
    }
    depths
}

/// Slot names reachable on `class`: own slots and attributes first, then
/// each ancestor's in linearization order. No range resolution.
pub fn reachable_slot_names(schema: &SchemaDefinition, class: &str) -> Result<Vec<String>, SchemaError> {
    let mut names: Vec<String> = Vec::new();
    for ancestor in class_ancestors(schema, class)? {
        for slot in schema.classes[&ancestor].own_slot_names() {
            if !names.iter().any(|n| n == slot) {
                names.push(slot.to_string());
            }
        }
    }
    Ok(names)
}

/// Resolves a slot's `is_a` chain, nearest definition winning per field.
fn resolve_slot_parents(schema: &SchemaDefinition, slot: &SlotDefinition) -> Result<SlotDefinition, SchemaError> {
    let mut resolved = slot.clone();
    let mut seen = vec![slot.name.clone()];
    let mut parent_name = slot.is_a.clone();
    while let Some(parent) = parent_name {
        if seen.contains(&parent) {
            seen.push(parent);
            return Err(SchemaError::InheritanceCycle(seen));
        }
        let def = schema.slots.get(&parent).ok_or_else(|| SchemaError::UnknownSlotParent {
            slot: slot.name.clone(),
            parent: parent.clone(),
        })?;
        resolved.inherit_from(def);
        seen.push(parent);
        parent_name = def.is_a.clone();
    }
    Ok(resolved)
}

fn resolve_range(schema: &SchemaDefinition, slot: &str, range: &str) -> Result<RangeRef, SchemaError> {
    if let Some(t) = schema.types.get(range) {
        Ok(RangeRef::Type {
            name: range.to_string(),
            base: t.base,
        })
    } else if schema.classes.contains_key(range) {
        Ok(RangeRef::Class(range.to_string()))
    } else if schema.enums.contains_key(range) {
        Ok(RangeRef::Enum(range.to_string()))
    } else {
        Err(SchemaError::UnknownRange {
            slot: slot.to_string(),
            range: range.to_string(),
        })
    }
}

/// Applies the overlay fields that are present in `overlays`, picking the
/// value from the shallowest class; equal-depth disagreements are errors.
fn apply_overlays(
    class: &str,
    slot: &mut SlotDefinition,
    overlays: &[(usize, &str, &SlotDefinition)],
) -> Result<(), SchemaError> {
    macro_rules! overlay_field {
        ($field:ident) => {{
            let mut best: Option<(usize, &str, &_)> = None;
            let mut tied: Vec<String> = Vec::new();
            for (depth, owner, o) in overlays {
                if let Some(v) = &o.$field {
                    match best {
                        Some((d, _, _)) if d < *depth => {}
                        Some((d, first, bv)) if d == *depth => {
                            if bv != v {
                                if tied.is_empty() {
                                    tied.push(first.to_string());
                                }
                                tied.push(owner.to_string());
                            }
                        }
                        _ => {
                            best = Some((*depth, owner, v));
                            tied.clear();
                        }
                    }
                }
            }
            if !tied.is_empty() {
                return Err(SchemaError::OverlayConflict {
                    class: class.to_string(),
                    slot: slot.name.clone(),
                    field: stringify!($field),
                    sources: tied,
                });
            }
            if let Some((_, _, v)) = best {
                slot.$field = Some(v.clone());
            }
        }};
    }
    overlay_field!(description);
    overlay_field!(range);
    overlay_field!(required);
    overlay_field!(multivalued);
    overlay_field!(identifier);
    overlay_field!(pattern);
    overlay_field!(minimum_value);
    overlay_field!(maximum_value);
    overlay_field!(unit);
    overlay_field!(slot_uri);
    // list-valued fields: nearest non-empty wins
    if let Some((_, _, o)) = overlays
        .iter()
        .filter(|(_, _, o)| !o.examples.is_empty())
        .min_by_key(|(d, _, _)| *d)
    {
        slot.examples.clone_from(&o.examples);
    }
    Ok(())
}

/// Induced slots of one class, own declarations first.
pub fn induced_slots(schema: &SchemaDefinition, class: &str) -> Result<Vec<InducedSlot>, SchemaError> {
    let prefix_map = build_prefix_map(schema)?;
    let mut diagnostics = Vec::new();
    induce(schema, &prefix_map, class, &mut diagnostics)
}

fn induce(
    schema: &SchemaDefinition,
    prefix_map: &PrefixMap,
    class: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<Vec<InducedSlot>, SchemaError> {
    let chain = class_ancestors(schema, class)?;
    let depths = ancestor_depths(schema, class);
    let names = reachable_slot_names(schema, class)?;
    let own = &schema.classes[class];

    for usage in own.slot_usage.keys() {
        if !names.contains(usage) {
            return Err(SchemaError::UnreachableSlotUsage {
                class: class.to_string(),
                slot: usage.clone(),
            });
        }
    }
    for ancestor in &chain[1..] {
        for usage in schema.classes[ancestor].slot_usage.keys() {
            if !reachable_slot_names(schema, ancestor)?.contains(usage) {
                return Err(SchemaError::UnreachableSlotUsage {
                    class: ancestor.clone(),
                    slot: usage.clone(),
                });
            }
        }
    }

    let mut out = Vec::with_capacity(names.len());
    for name in &names {
        // Base definition: nearest attribute wins over the global slot.
        let attribute = chain
            .iter()
            .filter_map(|c| schema.classes[c].attributes.get(name).map(|a| (depths[c], a)))
            .min_by_key(|(d, _)| *d)
            .map(|(_, a)| a);
        let base = match attribute {
            Some(a) => a,
            None => schema.slots.get(name).ok_or_else(|| SchemaError::UnknownSlot {
                class: class.to_string(),
                slot: name.clone(),
            })?,
        };
        let mut def = resolve_slot_parents(schema, base)?;

        let overlays: Vec<(usize, &str, &SlotDefinition)> = chain
            .iter()
            .filter_map(|c| {
                schema.classes[c]
                    .slot_usage
                    .get(name)
                    .map(|o| (depths[c], c.as_str(), o))
            })
            .collect();
        apply_overlays(class, &mut def, &overlays)?;

        let range_name = def
            .range
            .clone()
            .or_else(|| schema.default_range.clone())
            .unwrap_or_else(|| FALLBACK_RANGE.to_string());
        let effective_range = resolve_range(schema, name, &range_name)?;

        let identifier = def.identifier.unwrap_or(false);
        let mut required = def.required.unwrap_or(false);
        let mut multivalued = def.multivalued.unwrap_or(false);
        if identifier {
            if def.required == Some(false) {
                diagnostics.push(Diagnostic::warning(format!(
                    "{class}.{name}: identifier slot declared required: false; treating as required"
                )));
            }
            if multivalued {
                diagnostics.push(Diagnostic::warning(format!(
                    "{class}.{name}: identifier slot declared multivalued; treating as single-valued"
                )));
            }
            required = true;
            multivalued = false;
        }

        let pattern = def.pattern.clone().or_else(|| match &effective_range {
            RangeRef::Type { name, .. } => schema.types[name].pattern.clone(),
            _ => None,
        });
        if let Some(p) = &pattern {
            Regex::new(p).map_err(|e| SchemaError::InvalidPattern {
                owner: format!("{class}.{name}"),
                pattern: p.clone(),
                message: e.to_string(),
            })?;
        }

        let slot_uri_expanded = match &def.slot_uri {
            Some(uri) => Some(expand_identifier(prefix_map, uri)?),
            None => default_uri(schema, prefix_map, name),
        };

        let inheritance_label = if own.declares_slot(name) {
            InheritanceLabel::Direct
        } else if own.slot_usage.contains_key(name) {
            InheritanceLabel::Overridden
        } else {
            InheritanceLabel::Inherited
        };

        out.push(InducedSlot {
            name: name.clone(),
            owner_class: class.to_string(),
            effective_range,
            required,
            multivalued,
            identifier,
            pattern,
            minimum_value: def.minimum_value,
            maximum_value: def.maximum_value,
            slot_uri: def.slot_uri.clone(),
            slot_uri_expanded,
            description: def.description.clone(),
            unit: def.unit.clone(),
            examples: def.examples.clone(),
            mappings: def.mappings.clone(),
            inheritance_label,
        });
    }

    let identifiers: Vec<String> = out
        .iter()
        .filter(|s| s.identifier)
        .map(|s| s.name.clone())
        .collect();
    if identifiers.len() > 1 {
        return Err(SchemaError::MultipleIdentifiers {
            class: class.to_string(),
            slots: identifiers,
        });
    }
    Ok(out)
}

/// Absolute URIs pass through; anything else is expanded as a CURIE.
fn expand_identifier(prefix_map: &PrefixMap, text: &str) -> Result<String, SchemaError> {
    match split_curie(text) {
        Some((prefix, _)) if !prefix_map.contains(prefix) && text.contains("://") => Ok(text.to_string()),
        _ => expand_curie(prefix_map, text),
    }
}

/// Local names in URIs use underscores for spaces.
pub fn uri_local_name(name: &str) -> String {
    name.replace(' ', "_")
}

fn default_uri(schema: &SchemaDefinition, prefix_map: &PrefixMap, name: &str) -> Option<String> {
    let local = uri_local_name(name);
    match schema.default_prefix.as_deref().and_then(|p| prefix_map.get(p)) {
        Some(base) => Some(format!("{base}{local}")),
        None => {
            let sep = if schema.id.ends_with('/') || schema.id.ends_with('#') { "" } else { "/" };
            Some(format!("{}{sep}{local}", schema.id))
        }
    }
}

/// Compiles a merged schema (see [`crate::loader::resolve_imports`]).
pub fn compile(schema: &SchemaDefinition) -> Result<CompiledSchema, SchemaError> {
    schema.check_structure()?;
    let prefix_map = build_prefix_map(schema)?;
    let mut diagnostics = Vec::new();

    for e in schema.enums.values() {
        for pv in e.permissible_values.values() {
            if let Some(meaning) = &pv.meaning {
                expand_curie(&prefix_map, meaning)?;
            }
        }
    }
    for slot in schema.slots.values() {
        resolve_slot_parents(schema, slot)?;
    }
    if let Some(range) = &schema.default_range {
        resolve_range(schema, "default_range", range)?;
    }

    let mut ancestors = IndexMap::new();
    let mut induced = IndexMap::new();
    for name in schema.classes.keys() {
        ancestors.insert(name.clone(), class_ancestors(schema, name)?);
        induced.insert(name.clone(), induce(schema, &prefix_map, name, &mut diagnostics)?);
    }
    // global slots never attached to a class still need resolvable ranges
    for (name, slot) in &schema.slots {
        let resolved = resolve_slot_parents(schema, slot)?;
        if let Some(range) = resolved.range.as_ref().or(schema.default_range.as_ref()) {
            resolve_range(schema, name, range)?;
        }
    }

    let mut expanded_uris = IndexMap::new();
    let mut seen = HashSet::new();
    for (name, class) in &schema.classes {
        let uri = match &class.class_uri {
            Some(curie) => Some(expand_identifier(&prefix_map, curie)?),
            None => default_uri(schema, &prefix_map, name),
        };
        if let Some(uri) = uri {
            expanded_uris.insert(name.clone(), uri);
        }
        seen.insert(name.clone());
    }
    let mut slot_defs: Vec<(&String, &SlotDefinition)> = schema.slots.iter().collect();
    for class in schema.classes.values() {
        slot_defs.extend(class.attributes.iter());
    }
    for (name, slot) in slot_defs {
        if !seen.insert(name.clone()) {
            continue;
        }
        let uri = match &slot.slot_uri {
            Some(curie) => Some(expand_identifier(&prefix_map, curie)?),
            None => default_uri(schema, &prefix_map, name),
        };
        if let Some(uri) = uri {
            expanded_uris.insert(name.clone(), uri);
        }
    }
    for name in schema.enums.keys() {
        if let Some(uri) = default_uri(schema, &prefix_map, name) {
            expanded_uris.insert(name.clone(), uri);
        }
    }
    for (name, t) in &schema.types {
        let uri = if t.from_schema.as_deref() == Some(crate::metamodel::BUILTIN_SCHEMA_ID) {
            Some(format!("{}{name}", crate::metamodel::LINKML_BASE))
        } else {
            default_uri(schema, &prefix_map, name)
        };
        if let Some(uri) = uri {
            expanded_uris.insert(name.clone(), uri);
        }
    }

    Ok(CompiledSchema {
        source: schema.clone(),
        prefix_map,
        induced,
        ancestors,
        expanded_uris,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loader::{parse_schema, resolve_imports, ImportResolver};

    fn merged(text: &str) -> SchemaDefinition {
        let parsed = parse_schema(text).unwrap().schema;
        resolve_imports(&parsed, &mut ImportResolver::default(), None)
            .unwrap()
            .schema
    }

    const HEADER: &str = "id: https://example.org/t\nname: t\nprefixes:\n  ex: https://example.org/t/\ndefault_prefix: ex\n";

    #[test]
    fn no_parents_is_self() {
        let s = merged(&format!("{HEADER}classes:\n  A: {{}}\n"));
        assert_eq!(class_ancestors(&s, "A").unwrap(), vec!["A"]);
    }

    #[test]
    fn subclass_chain() {
        let s = merged(&format!(
            "{HEADER}classes:\n  SampleSite: {{}}\n  AirSampleSite:\n    is_a: SampleSite\n"
        ));
        assert_eq!(
            class_ancestors(&s, "AirSampleSite").unwrap(),
            vec!["AirSampleSite", "SampleSite"]
        );
    }

    /// Independent oracle: enumerate every parent-edge path from the start
    /// node, order paths lexicographically by edge label (is_a = 0, mixins
    /// 1.. in declaration order), and keep first occurrences.
    fn linearization_oracle(schema: &SchemaDefinition, start: &str) -> Vec<String> {
        let mut paths: Vec<(Vec<usize>, String)> = Vec::new();
        let mut work = vec![(Vec::new(), start.to_string())];
        while let Some((labels, node)) = work.pop() {
            let class = &schema.classes[&node];
            let mut edges: Vec<(usize, String)> = Vec::new();
            if let Some(p) = &class.is_a {
                edges.push((0, p.clone()));
            }
            for (i, m) in class.mixins.iter().enumerate() {
                edges.push((i + 1, m.clone()));
            }
            for (label, parent) in edges {
                let mut l = labels.clone();
                l.push(label);
                work.push((l, parent));
            }
            paths.push((labels, node));
        }
        paths.sort();
        let mut out: Vec<String> = Vec::new();
        for (_, node) in paths {
            if !out.contains(&node) {
                out.push(node);
            }
        }
        out
    }

    #[test]
    fn diamond_matches_enumeration_oracle() {
        let s = merged(&format!(
            "{HEADER}classes:\n  A: {{}}\n  B:\n    is_a: A\n  C:\n    is_a: A\n  D:\n    is_a: B\n    mixins: [C]\n"
        ));
        let expected = linearization_oracle(&s, "D");
        assert_eq!(expected, vec!["D", "B", "A", "C"]);
        assert_eq!(class_ancestors(&s, "D").unwrap(), expected);
    }

    #[test]
    fn cycle_and_unknown() {
        let s = merged(&format!(
            "{HEADER}classes:\n  A:\n    is_a: B\n  B:\n    is_a: A\n"
        ));
        match class_ancestors(&s, "A") {
            Err(SchemaError::InheritanceCycle(path)) => assert_eq!(path, vec!["A", "B", "A"]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            class_ancestors(&s, "Nope"),
            Err(SchemaError::UnknownClass(_))
        ));
    }

    const EXCERPT_SAMPLE: &str = r#"classes:
  Sample:
    slots: [latitude, longitude, environment_type, depth, depth_units]
  DeepSample:
    is_a: Sample
    slots: [pressure]
slots:
  latitude: {range: float, required: true}
  longitude: {range: float, required: true}
  environment_type: {range: EnvironmentTypeEnum}
  depth: {range: float}
  depth_units: {}
  pressure: {range: float}
enums:
  EnvironmentTypeEnum:
    permissible_values:
      soil:
"#;

    #[test]
    fn sample_induced_slots() {
        let s = merged(&format!("{HEADER}{EXCERPT_SAMPLE}"));
        let slots = induced_slots(&s, "Sample").unwrap();
        assert_eq!(slots.len(), 5);
        let env = &slots[2];
        assert_eq!(env.name, "environment_type");
        assert_eq!(env.cardinality(), "0..1");
        assert_eq!(env.effective_range, RangeRef::Enum("EnvironmentTypeEnum".into()));
        assert_eq!(env.inheritance_label, InheritanceLabel::Direct);
        assert_eq!(slots[0].cardinality(), "1..1");
        // default range
        assert_eq!(slots[4].effective_range.name(), "string");

        let deep = induced_slots(&s, "DeepSample").unwrap();
        assert_eq!(deep.len(), 6);
        assert_eq!(deep[0].name, "pressure");
        assert_eq!(
            deep.iter()
                .filter(|s| s.inheritance_label == InheritanceLabel::Inherited)
                .count(),
            5
        );
    }

    #[test]
    fn slot_usage_tightens_child_only() {
        // Hand-resolved: Parent.note is optional; Child overrides required
        // and nothing else, so range stays string and label is overridden.
        let s = merged(&format!(
            "{HEADER}classes:\n  Parent:\n    slots: [note]\n  Child:\n    is_a: Parent\n    slot_usage:\n      note:\n        required: true\nslots:\n  note:\n    required: false\n    description: free text\n"
        ));
        let parent = induced_slots(&s, "Parent").unwrap();
        let child = induced_slots(&s, "Child").unwrap();
        assert!(!parent[0].required);
        assert_eq!(parent[0].inheritance_label, InheritanceLabel::Direct);
        assert!(child[0].required);
        assert_eq!(child[0].inheritance_label, InheritanceLabel::Overridden);
        assert_eq!(child[0].description.as_deref(), Some("free text"));
        assert_eq!(child[0].effective_range.name(), "string");
    }

    #[test]
    fn induction_errors() {
        let unknown_slot = merged(&format!("{HEADER}classes:\n  A:\n    slots: [nope]\n"));
        assert!(matches!(
            induced_slots(&unknown_slot, "A"),
            Err(SchemaError::UnknownSlot { .. })
        ));
        let unknown_range = merged(&format!(
            "{HEADER}classes:\n  A:\n    slots: [x]\nslots:\n  x:\n    range: Nope\n"
        ));
        assert!(matches!(
            induced_slots(&unknown_range, "A"),
            Err(SchemaError::UnknownRange { .. })
        ));
        let two_ids = merged(&format!(
            "{HEADER}classes:\n  A:\n    slots: [x, y]\nslots:\n  x:\n    identifier: true\n  y:\n    identifier: true\n"
        ));
        assert!(matches!(
            induced_slots(&two_ids, "A"),
            Err(SchemaError::MultipleIdentifiers { .. })
        ));
        let unreachable = merged(&format!(
            "{HEADER}classes:\n  A:\n    slot_usage:\n      x:\n        required: true\nslots:\n  x: {{}}\n"
        ));
        assert!(matches!(
            induced_slots(&unreachable, "A"),
            Err(SchemaError::UnreachableSlotUsage { .. })
        ));
    }

    #[test]
    fn mixin_overlay_conflict_is_error() {
        let s = merged(&format!(
            "{HEADER}classes:\n  M1:\n    slots: [x]\n    slot_usage:\n      x:\n        required: true\n  M2:\n    slots: [x]\n    slot_usage:\n      x:\n        required: false\n  C:\n    mixins: [M1, M2]\nslots:\n  x: {{}}\n"
        ));
        assert!(matches!(
            induced_slots(&s, "C"),
            Err(SchemaError::OverlayConflict { field: "required", .. })
        ));
    }

    #[test]
    fn identifier_forces_required() {
        let s = merged(&format!(
            "{HEADER}classes:\n  A:\n    slots: [id]\nslots:\n  id:\n    identifier: true\n    required: false\n"
        ));
        let compiled = compile(&s).unwrap();
        let id = &compiled.induced["A"][0];
        assert!(id.required && id.identifier && !id.multivalued);
        assert_eq!(compiled.diagnostics.len(), 1);
    }

    #[test]
    fn expanded_uris_use_declared_or_default() {
        let header = HEADER.replace(
            "  ex: https://example.org/t/\n",
            "  ex: https://example.org/t/\n  MIXS: https://w3id.org/mixs/\n",
        );
        let mut s = merged(&format!(
            "{header}classes:\n  A:\n    slots: [x, y]\nslots:\n  x:\n    slot_uri: MIXS:0000009\n  y: {{}}\n"
        ));
        let compiled = compile(&s).unwrap();
        assert_eq!(compiled.expanded_uris["x"], "https://w3id.org/mixs/0000009");
        assert_eq!(compiled.expanded_uris["y"], "https://example.org/t/y");
        assert_eq!(compiled.expanded_uris["A"], "https://example.org/t/A");
        assert_eq!(compiled.expanded_uris["string"], "https://w3id.org/linkml/string");
        s.default_prefix = None;
        let compiled = compile(&s).unwrap();
        assert_eq!(compiled.expanded_uris["A"], "https://example.org/t/A");
    }
}
