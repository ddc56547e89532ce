//! Byte-level comparison of generator output with the stored golden files.

use std::path::{Path, PathBuf};

use schemaforge::generators::{generate, Generated, GeneratorOptions, Target};
use schemaforge::loader::load_schema_file;
use schemaforge::{compile, CompiledSchema, ImportResolver};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn sample_schema() -> CompiledSchema {
    let loaded = load_schema_file(&fixtures().join("sample_schema.yaml"), &mut ImportResolver::new(Vec::new())).unwrap();
    compile(&loaded.schema).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(fixtures().join("golden").join(name)).unwrap()
}

fn single(target: Target) -> String {
    match generate(&sample_schema(), &GeneratorOptions::new(target)).unwrap() {
        Generated::Text(t) => t,
        Generated::Files(_) => unreachable!(),
    }
}

#[test]
fn json_schema_matches_golden() {
    assert_eq!(single(Target::JsonSchema), golden("sample_schema.schema.json"));
}

#[test]
fn ddl_matches_golden() {
    assert_eq!(single(Target::SqlDdl), golden("sample_schema.sql"));
}

#[test]
fn context_matches_golden() {
    assert_eq!(single(Target::JsonLdContext), golden("sample_schema.context.jsonld"));
}

#[test]
fn doc_pages_match_golden() {
    let Generated::Files(pages) = generate(&sample_schema(), &GeneratorOptions::new(Target::Docs)).unwrap() else {
        unreachable!()
    };
    for page in ["Sample.md", "environment_type.md"] {
        assert_eq!(pages[page], golden(page), "{page}");
    }
}
