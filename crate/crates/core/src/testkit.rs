//! Property-test strategies for generating schemas.
//!
//! Compiled only with the `testkit` feature. The generators produce
//! documents that pass the structural checks and compile, so the same
//! strategies drive round-trip, induction and generator properties.

use indexmap::IndexMap;
use proptest::collection::vec;
use proptest::option;
use proptest::prelude::*;

use crate::metamodel::{
    builtin_schema, BaseKind, ClassDefinition, EnumDefinition, Mapping, MappingPredicate, PermissibleValue,
    SchemaDefinition, SlotDefinition, TypeDefinition,
};

const BUILTIN_RANGES: [&str; 5] = ["string", "integer", "float", "boolean", "curie"];

/// Free text that stresses YAML quoting: colons, hashes, quotes, and
/// scalars that would otherwise read back as numbers, booleans or null.
pub fn arb_text() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => "[A-Za-z][A-Za-z0-9 ,.()'-]{0,24}",
        1 => Just("true".to_string()),
        1 => Just("null".to_string()),
        1 => Just("1.5".to_string()),
        1 => Just("key: value # not a comment".to_string()),
        1 => Just("\"quoted\" and 'single'".to_string()),
        1 => Just("degrees 36.1069° north".to_string()),
    ]
}

fn arb_prefix() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9_]{0,6}"
}

fn arb_base_uri() -> impl Strategy<Value = String> {
    ("[a-z]{1,8}", "[a-z0-9/]{0,8}", prop_oneof![Just("/"), Just("#"), Just("_")])
        .prop_map(|(host, path, end)| format!("https://{host}.example.org/{path}{end}"))
}

/// A prefix map with distinct prefixes and absolute bases.
pub fn arb_prefix_map() -> impl Strategy<Value = IndexMap<String, String>> {
    vec((arb_prefix(), arb_base_uri()), 0..6).prop_map(|pairs| {
        let reserved = builtin_schema().prefixes;
        let mut map = IndexMap::new();
        for (p, b) in pairs {
            if reserved.contains_key(&p) {
                continue;
            }
            map.entry(p).or_insert(b);
        }
        map
    })
}

/// Local parts that are legal after a prefix and contain no whitespace.
pub fn arb_local() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_][A-Za-z0-9_.\\-]{0,12}"
}

fn arb_mappings() -> impl Strategy<Value = Vec<Mapping>> {
    vec(
        (0usize..MappingPredicate::ALL.len(), "[A-Z]{2,5}", "[0-9]{3,7}"),
        0..3,
    )
    .prop_map(|items| {
        let mut out: Vec<Mapping> = items
            .into_iter()
            .map(|(p, prefix, local)| Mapping {
                predicate: MappingPredicate::ALL[p],
                target: format!("{prefix}:{local}"),
            })
            .collect();
        out.sort_by_key(|m| m.predicate);
        out
    })
}

fn arb_bounds() -> impl Strategy<Value = (Option<f64>, Option<f64>)> {
    (option::of(-1000i32..1000), option::of(0u16..2000), any::<bool>()).prop_map(
        |(min, span, quarter)| {
            let scale = if quarter { 0.25 } else { 1.0 };
            let min = min.map(|m| f64::from(m) * scale);
            let max = match (min, span) {
                (Some(m), Some(s)) => Some(m + f64::from(s) * scale),
                (None, Some(s)) => Some(f64::from(s) * scale),
                _ => None,
            };
            (min, max)
        },
    )
}

/// Slot body whose range is drawn from `ranges`.
fn arb_slot_body(ranges: Vec<String>) -> impl Strategy<Value = SlotDefinition> {
    let range = if ranges.is_empty() {
        Just(None).boxed()
    } else {
        option::of(proptest::sample::select(ranges)).boxed()
    };
    (
        (option::of(arb_text()), range, option::of(any::<bool>()), option::of(any::<bool>())),
        (
            option::of(Just("^[A-Za-z0-9_]+$".to_string())),
            arb_bounds(),
            option::of("[a-z]{1,3}"),
            option::of(("[A-Z]{2,4}", "[a-z_]{1,8}").prop_map(|(p, l)| format!("{p}:{l}"))),
        ),
        (vec(arb_text(), 0..3), arb_mappings(), option::of(arb_base_uri())),
    )
        .prop_map(
            |((description, range, required, multivalued), (pattern, bounds, unit, slot_uri), (examples, mappings, from_schema))| {
                SlotDefinition {
                    name: String::new(),
                    description,
                    is_a: None,
                    range,
                    required,
                    multivalued,
                    identifier: None,
                    pattern,
                    minimum_value: bounds.0,
                    maximum_value: bounds.1,
                    unit,
                    slot_uri,
                    examples,
                    mappings,
                    from_schema,
                }
            },
        )
}

fn arb_enum(name: String) -> impl Strategy<Value = EnumDefinition> {
    (
        option::of(arb_text()),
        vec(
            (
                "[a-z][a-z0-9 _-]{0,10}",
                option::of(arb_text()),
                option::of(("[A-Z]{2,5}", "[0-9]{4,8}").prop_map(|(p, l)| format!("{p}:{l}"))),
            ),
            1..5,
        ),
    )
        .prop_map(move |(description, pvs)| {
            let mut permissible_values = IndexMap::new();
            for (text, description, meaning) in pvs {
                let text = text.trim().to_string();
                if text.is_empty() {
                    continue;
                }
                permissible_values.entry(text.clone()).or_insert(PermissibleValue {
                    text,
                    description,
                    meaning,
                });
            }
            EnumDefinition {
                name: name.clone(),
                description,
                permissible_values,
                from_schema: None,
            }
        })
}

fn arb_type(name: String) -> impl Strategy<Value = TypeDefinition> {
    (
        proptest::sample::select(BaseKind::ALL.to_vec()),
        option::of(Just("^[a-z]+$".to_string())),
        option::of(arb_text()),
    )
        .prop_map(move |(base, pattern, description)| TypeDefinition {
            name: name.clone(),
            base,
            pattern,
            description,
            from_schema: None,
        })
}

/// Shape of one generated class before names are attached.
#[derive(Debug, Clone)]
struct ClassShape {
    parent: Option<prop::sample::Index>,
    mixins: Vec<prop::sample::Index>,
    abstract_: bool,
    slots: Vec<prop::sample::Index>,
    attributes: Vec<SlotDefinition>,
    usage: Vec<prop::sample::Index>,
    description: Option<String>,
    class_uri: Option<String>,
    mappings: Vec<Mapping>,
}

fn arb_class_shape(ranges: Vec<String>) -> impl Strategy<Value = ClassShape> {
    (
        (option::of(any::<prop::sample::Index>()), vec(any::<prop::sample::Index>(), 0..2), any::<bool>()),
        (vec(any::<prop::sample::Index>(), 0..4), vec(arb_slot_body(ranges), 0..3)),
        (
            vec(any::<prop::sample::Index>(), 0..2),
            option::of(arb_text()),
            option::of(("[A-Z]{2,4}", "[0-9]{3,7}").prop_map(|(p, l)| format!("{p}:{l}"))),
            arb_mappings(),
        ),
    )
        .prop_map(
            |((parent, mixins, abstract_), (slots, attributes), (usage, description, class_uri, mappings))| ClassShape {
                parent,
                mixins,
                abstract_,
                slots,
                attributes,
                usage,
                description,
                class_uri,
                mappings,
            },
        )
}

/// Maximum `is_a` chain length produced by [`arb_schema`] and [`arb_hierarchy`].
pub const MAX_DEPTH: usize = 5;

/// Builds the classes from their shapes. Parents and mixins always point at
/// earlier classes, so the hierarchy is acyclic, and `is_a` chains stop
/// growing at [`MAX_DEPTH`].
fn assemble_classes(shapes: Vec<ClassShape>, slot_names: &[String]) -> IndexMap<String, ClassDefinition> {
    let mut classes: IndexMap<String, ClassDefinition> = IndexMap::new();
    let mut depth: Vec<usize> = Vec::new();
    for (i, shape) in shapes.into_iter().enumerate() {
        let name = format!("Class{i}");
        let mut class = ClassDefinition::new(&name);
        let mut d = 1;
        if i > 0 {
            if let Some(p) = shape.parent {
                let candidates: Vec<usize> = (0..i).filter(|&j| depth[j] < MAX_DEPTH).collect();
                if !candidates.is_empty() {
                    let j = candidates[p.index(candidates.len())];
                    class.is_a = Some(format!("Class{j}"));
                    d = depth[j] + 1;
                }
            }
            for m in &shape.mixins {
                let mixin = format!("Class{}", m.index(i));
                if class.is_a.as_deref() != Some(mixin.as_str()) && !class.mixins.contains(&mixin) {
                    class.mixins.push(mixin);
                }
            }
        }
        depth.push(d);
        class.abstract_ = shape.abstract_;
        if !slot_names.is_empty() {
            for s in &shape.slots {
                let slot = slot_names[s.index(slot_names.len())].clone();
                if !class.slots.contains(&slot) {
                    class.slots.push(slot);
                }
            }
        }
        for (k, mut attr) in shape.attributes.into_iter().enumerate() {
            let attr_name = format!("attr_{i}_{k}");
            attr.name = attr_name.clone();
            attr.from_schema = None;
            class.attributes.insert(attr_name, attr);
        }
        if !class.slots.is_empty() {
            for s in shape.usage {
                let slot = class.slots[s.index(class.slots.len())].clone();
                let mut overlay = SlotDefinition::new(&slot);
                // one value per slot, so overlays reached through two
                // parents at the same depth never disagree
                overlay.required = Some(slot.len().is_multiple_of(2));
                class.slot_usage.insert(slot, overlay);
            }
        }
        class.description = shape.description;
        class.class_uri = shape.class_uri;
        class.mappings = shape.mappings;
        classes.insert(name, class);
    }
    classes
}

/// A complete schema document exercising every supported construct.
pub fn arb_schema() -> impl Strategy<Value = SchemaDefinition> {
    (0usize..6, 0usize..7, 0usize..3, 0usize..3)
        .prop_flat_map(|(n_classes, n_slots, n_enums, n_types)| {
            let enum_names: Vec<String> = (0..n_enums).map(|i| format!("Kind{i}Enum")).collect();
            let type_names: Vec<String> = (0..n_types).map(|i| format!("code_type_{i}")).collect();
            let class_names: Vec<String> = (0..n_classes).map(|i| format!("Class{i}")).collect();
            let mut ranges: Vec<String> = BUILTIN_RANGES.iter().map(|s| s.to_string()).collect();
            ranges.extend(enum_names.iter().cloned());
            ranges.extend(type_names.iter().cloned());
            ranges.extend(class_names.iter().cloned());
            let header = (
                "[a-z]{1,8}",
                option::of(arb_text()),
                option::of(arb_text()),
                option::of(Just("https://creativecommons.org/publicdomain/zero/1.0/".to_string())),
                option::of("[0-9]\\.[0-9]\\.[0-9]"),
                arb_prefix_map(),
                any::<bool>(),
            );
            (
                header,
                vec(arb_class_shape(ranges.clone()), n_classes),
                vec(arb_slot_body(ranges), n_slots),
                enum_names.into_iter().map(arb_enum).collect::<Vec<_>>(),
                type_names.into_iter().map(arb_type).collect::<Vec<_>>(),
            )
        })
        .prop_map(|((name, title, description, license, version, prefixes, import_types), class_shapes, slot_bodies, enums, types)| {
            let mut schema = SchemaDefinition::new(format!("https://w3id.org/{name}"), name);
            schema.title = title;
            schema.description = description;
            schema.license = license;
            schema.version = version;
            schema.default_prefix = prefixes.keys().next().cloned();
            schema.prefixes = prefixes;
            if import_types {
                schema.imports.push("linkml:types".into());
            }
            let mut slot_names = Vec::new();
            for (i, mut slot) in slot_bodies.into_iter().enumerate() {
                let slot_name = format!("slot_{i}");
                slot.name = slot_name.clone();
                slot_names.push(slot_name.clone());
                schema.slots.insert(slot_name, slot);
            }
            schema.classes = assemble_classes(class_shapes, &slot_names);
            for e in enums {
                schema.enums.insert(e.name.clone(), e);
            }
            for t in types {
                schema.types.insert(t.name.clone(), t);
            }
            declare_used_prefixes(&mut schema);
            schema
        })
}

/// Adds a prefix declaration for every CURIE that compilation expands.
fn declare_used_prefixes(schema: &mut SchemaDefinition) {
    let mut curies: Vec<String> = Vec::new();
    for class in schema.classes.values() {
        curies.extend(class.class_uri.clone());
        curies.extend(class.attributes.values().filter_map(|a| a.slot_uri.clone()));
    }
    curies.extend(schema.slots.values().filter_map(|s| s.slot_uri.clone()));
    for e in schema.enums.values() {
        curies.extend(e.permissible_values.values().filter_map(|pv| pv.meaning.clone()));
    }
    for curie in curies {
        if let Some((prefix, _)) = curie.split_once(':') {
            if !schema.prefixes.contains_key(prefix) {
                let base = format!("https://example.org/{}/", prefix.to_lowercase());
                schema.prefixes.insert(prefix.to_string(), base);
            }
        }
    }
}

/// An inheritance hierarchy of up to `max_classes` classes with `is_a`
/// chains up to [`MAX_DEPTH`] long, mixins, attributes and slot_usage.
pub fn arb_hierarchy(max_classes: usize) -> impl Strategy<Value = SchemaDefinition> {
    (1usize..=max_classes, 1usize..6)
        .prop_flat_map(|(n_classes, n_slots)| {
            let ranges: Vec<String> = BUILTIN_RANGES.iter().map(|s| s.to_string()).collect();
            (
                vec(arb_class_shape(ranges.clone()), n_classes),
                vec(arb_slot_body(ranges), n_slots),
            )
        })
        .prop_map(|(shapes, slot_bodies)| {
            let mut schema = SchemaDefinition::new("https://example.org/hierarchy", "hierarchy");
            let mut slot_names = Vec::new();
            for (i, mut slot) in slot_bodies.into_iter().enumerate() {
                let slot_name = format!("slot_{i}");
                slot.name = slot_name.clone();
                slot.from_schema = None;
                slot_names.push(slot_name.clone());
                schema.slots.insert(slot_name, slot);
            }
            schema.classes = assemble_classes(shapes, &slot_names);
            declare_used_prefixes(&mut schema);
            schema
        })
}

/// Length of the longest `is_a` chain in `schema`, counting classes.
pub fn is_a_depth(schema: &SchemaDefinition) -> usize {
    schema
        .classes
        .keys()
        .map(|name| {
            let mut d = 0;
            let mut current = Some(name.as_str());
            while let Some(c) = current {
                d += 1;
                current = schema.classes.get(c).and_then(|c| c.is_a.as_deref());
            }
            d
        })
        .max()
        .unwrap_or(0)
}
