//! Generated-input properties: document round trip, CURIE round trip,
//! induced-slot monotonicity and generator determinism.

use std::collections::BTreeSet;

use proptest::prelude::*;
use schemaforge::generators::{generate, GeneratorOptions, Target};
use schemaforge::prefixes::{contract_uri, expand_curie, Contracted, PrefixMap};
use schemaforge::testkit::{arb_hierarchy, arb_local, arb_prefix_map, arb_schema, is_a_depth, MAX_DEPTH};
use schemaforge::{compile, parse_schema, resolve_imports, serialize_schema, CompiledSchema, ImportResolver, SchemaDefinition};

fn compiled(schema: &SchemaDefinition) -> CompiledSchema {
    let merged = resolve_imports(schema, &mut ImportResolver::new(Vec::new()), None)
        .unwrap_or_else(|e| panic!("{e}\n{}", serialize_schema(schema)));
    compile(&merged.schema).unwrap_or_else(|e| panic!("{e}\n{}", serialize_schema(schema)))
}

fn slot_names(schema: &CompiledSchema, class: &str) -> BTreeSet<String> {
    schema
        .induced_slots(class)
        .unwrap()
        .iter()
        .map(|s| s.name.clone())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn serialize_then_parse_is_identity(schema in arb_schema()) {
        let text = serialize_schema(&schema);
        let loaded = parse_schema(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        prop_assert!(loaded.diagnostics.is_empty(), "{:?}", loaded.diagnostics);
        prop_assert_eq!(&loaded.schema, &schema);
        // and the text is a fixed point
        prop_assert_eq!(serialize_schema(&loaded.schema), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn expand_then_contract_round_trips(map in arb_prefix_map(), local in arb_local()) {
        let mut prefixes = PrefixMap::new();
        prefixes.union(&map).unwrap();
        for (prefix, base) in &map {
            let curie = format!("{prefix}:{local}");
            let uri = expand_curie(&prefixes, &curie).unwrap();
            prop_assert_eq!(&uri, &format!("{base}{local}"));
            let back = match contract_uri(&prefixes, &uri) {
                Contracted::Curie(c) => c,
                Contracted::PassThrough(u) => panic!("{u} did not contract"),
            };
            // another declared base may be a longer match, but the result
            // always names the same URI
            prop_assert_eq!(expand_curie(&prefixes, &back).unwrap(), uri.clone());
            let shadowed = map.iter().any(|(p, b)| {
                p != prefix && uri.len() > b.len() && uri.starts_with(b.as_str())
                    && (b.len() > base.len() || b == base)
            });
            if !shadowed {
                prop_assert_eq!(back, curie);
            }
        }
    }

    #[test]
    fn undeclared_prefixes_pass_through(map in arb_prefix_map(), local in arb_local()) {
        let mut prefixes = PrefixMap::new();
        prefixes.union(&map).unwrap();
        let uri = format!("urn:nowhere:{local}");
        prop_assert_eq!(contract_uri(&prefixes, &uri), Contracted::PassThrough(uri.clone()));
    }

    #[test]
    fn induced_slots_grow_down_the_hierarchy(schema in arb_hierarchy(8)) {
        prop_assert!(is_a_depth(&schema) <= MAX_DEPTH);
        let compiled = compiled(&schema);
        for class in schema.classes.keys() {
            let own = slot_names(&compiled, class);
            for ancestor in &compiled.ancestors[class] {
                let inherited = slot_names(&compiled, ancestor);
                prop_assert!(
                    own.is_superset(&inherited),
                    "{} lacks {:?} from {}",
                    class,
                    inherited.difference(&own).collect::<Vec<_>>(),
                    ancestor
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn generators_are_byte_deterministic(schema in arb_schema()) {
        let targets = [Target::JsonSchema, Target::SqlDdl, Target::JsonLdContext, Target::Docs];
        for target in targets {
            let opts = GeneratorOptions::new(target);
            // each run compiles from scratch so no state is shared
            let runs: Vec<_> = (0..3).map(|_| generate(&compiled(&schema), &opts).unwrap()).collect();
            prop_assert_eq!(&runs[0], &runs[1]);
            prop_assert_eq!(&runs[1], &runs[2]);
        }
    }
}

#[test]
fn hierarchies_reach_the_depth_limit() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let strategy = arb_hierarchy(8);
    let deepest = (0..400)
        .map(|_| is_a_depth(&strategy.new_tree(&mut runner).unwrap().current()))
        .max()
        .unwrap();
    assert_eq!(deepest, MAX_DEPTH);
}
