//! End-to-end acceptance suite. Drives the built `schemaforge` binary over
//! the shipped fixtures and prints one PASS/FAIL line per criterion.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestCaseError, TestRunner};
use regex::Regex;
use rusqlite::{params_from_iter, Connection};
use schemaforge::data::{records_from_table, records_from_yaml, DataRecord, Value};
use schemaforge::generators::{generate, GeneratorOptions, Target};
use schemaforge::loader::load_schema_file;
use schemaforge::prefixes::{contract_uri, expand_curie, Contracted, PrefixMap};
use schemaforge::sheets::{parse_cardinality, Cardinality};
use schemaforge::testkit::{arb_hierarchy, arb_local, arb_prefix_map, arb_schema, MAX_DEPTH};
use schemaforge::{compile, parse_schema, resolve_imports, serialize_schema, CompiledSchema, ImportResolver};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);
type CorpusFile = (&'static str, &'static str, fn(&str, &CompiledSchema) -> Vec<DataRecord>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
    elapsed: Duration,
}

fn schemaforge(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_schemaforge"))
        .args(args)
        .output()
        .expect("the binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        elapsed: start.elapsed(),
    }
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("schemaforge-acceptance-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn sample_schema() -> CompiledSchema {
    let loaded = load_schema_file(&fixtures().join("sample_schema.yaml"), &mut ImportResolver::new(Vec::new())).unwrap();
    compile(&loaded.schema).unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

/// Findings of a JSON report as (record index, rule id, path).
fn findings(report: &serde_json::Value) -> Vec<(usize, String, String)> {
    report["findings"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["severity"] == "error")
        .map(|f| {
            let path = f["path"].as_str().unwrap().to_string();
            let index = path.split('/').nth(1).and_then(|i| i.parse().ok()).unwrap_or(usize::MAX);
            (index, f["rule_id"].as_str().unwrap().to_string(), path)
        })
        .collect()
}

fn lifecycle() -> Outcome {
    let schema = fixture("sample_schema.yaml");
    let after = schemaforge(&["validate", "-s", &schema, "-C", "Sample", "--format", "json", &fixture("samples_curated.tsv")]);
    ensure!(after.code == 0, "after rows exit {}: {}", after.code, after.stderr);
    let report = json(&after.stdout);
    ensure!(report["valid"] == true, "after rows invalid");
    ensure!(report["findings"].as_array().unwrap().is_empty(), "after rows have findings: {}", after.stdout);

    let before = schemaforge(&["validate", "-s", &schema, "-C", "Sample", "--format", "json", &fixture("samples_raw_as_sample.tsv")]);
    ensure!(before.code == 1, "before rows exit {}", before.code);
    let found = findings(&json(&before.stdout));
    let has = |rule: &str, path: &str| found.iter().any(|(_, r, p)| r == rule && p == path);
    for (row, label) in [(0, "S1"), (1, "S2"), (3, "S4"), (6, "S7")] {
        ensure!(has("range_violation", &format!("/{row}/depth")), "no depth range_violation for {label}");
    }
    ensure!(has("missing_required", "/2/latitude"), "no missing latitude for S3");
    ensure!(has("missing_required", "/2/longitude"), "no missing longitude for S3");
    ensure!(has("enum_violation", "/3/environment_type"), "no enum_violation for \"mere\"");
    for row in 0..7 {
        ensure!(found.iter().any(|(i, _, _)| *i == row), "row {row} has no finding");
    }
    let golden = read(fixtures().join("golden/samples_raw_validation.json"));
    ensure!(before.stdout == golden, "report differs from golden/samples_raw_validation.json");
    let text = schemaforge(&["validate", "-s", &schema, "-C", "Sample", &fixture("samples_raw_as_sample.tsv")]);
    ensure!(
        text.stdout == read(fixtures().join("golden/samples_raw_validation.txt")),
        "text report differs from golden/samples_raw_validation.txt"
    );
    for run in [&after, &before, &text] {
        ensure!(run.elapsed < Duration::from_secs(1), "validation took {:?}", run.elapsed);
    }
    Ok(())
}

fn schemasheets() -> Outcome {
    let run = schemaforge(&["sheets", &fixture("sample_study_sheet.tsv"), "--id", "https://example.org/table2", "--name", "table2"]);
    ensure!(run.code == 0, "sheets exit {}: {}", run.code, run.stderr);
    let schema = parse_schema(&run.stdout).map_err(|e| e.to_string())?.schema;
    let classes: BTreeSet<&str> = schema.classes.keys().map(String::as_str).collect();
    ensure!(classes == BTreeSet::from(["Sample", "Study"]), "classes {classes:?}");
    let slots = |class: &str| -> BTreeSet<String> { schema.classes[class].own_slot_names().map(String::from).collect() };
    let expected: BTreeSet<String> = ["latitude", "longitude", "environment_type"].map(String::from).into();
    ensure!(slots("Sample") == expected, "Sample slots {:?}", slots("Sample"));
    ensure!(slots("Study") == BTreeSet::from(["id".to_string()]), "Study slots {:?}", slots("Study"));
    let latitude = &schema.classes["Sample"].attributes["latitude"];
    ensure!(latitude.required == Some(true), "latitude required = {:?}", latitude.required);
    ensure!(
        run.stderr.lines().any(|l| l.contains("latitude") && l.contains("0..1") && l.contains("TRUE")),
        "no contradiction warning for latitude: {}",
        run.stderr
    );
    for (text, min, max) in [("0..1", 0, Some(1)), ("1", 1, Some(1)), ("0..*", 0, None)] {
        let parsed = parse_cardinality(text).map_err(|e| e.to_string())?;
        ensure!(parsed == Cardinality { min, max }, "{text} parsed to {parsed:?}");
    }
    Ok(())
}

fn strip_links(text: &str) -> String {
    Regex::new(r"\[([^\]]*)\]\([^)]*\)").unwrap().replace_all(text, "$1").into_owned()
}

/// Table rows as trimmed cells.
fn rows(page: &str) -> Vec<Vec<String>> {
    page.lines()
        .filter(|l| l.starts_with('|'))
        .map(|l| l.trim_matches('|').split('|').map(|c| c.trim().to_string()).collect())
        .collect()
}

fn documentation() -> Outcome {
    let out = scratch_dir("docs");
    let run = schemaforge(&["gen", "--target", "docs", &fixture("sample_schema.yaml"), "-o", out.to_str().unwrap()]);
    ensure!(run.code == 0, "docs exit {}: {}", run.code, run.stderr);
    let sample = read(out.join("Sample.md"));
    let slot = read(out.join("environment_type.md"));

    let sample_rows = rows(&strip_links(&sample));
    ensure!(
        sample_rows.iter().any(|r| r.len() >= 3 && r[0] == "environment_type" && r[1] == "0..1 EnvironmentTypeEnum" && r[2] == "direct"),
        "Sample page has no environment_type row"
    );
    let slot_plain = strip_links(&slot);
    ensure!(slot_plain.lines().any(|l| l == "Range: EnvironmentTypeEnum"), "no Range line");
    let applicable = slot_plain.split("## Applicable Classes").nth(1).ok_or("no Applicable Classes section")?;
    let applicable = applicable.split("\n## ").next().unwrap();
    ensure!(
        rows(applicable).iter().any(|r| r[0] == "Sample" && r.last().map(String::as_str) == Some("no")),
        "Applicable Classes does not list Sample with Modifies Slot no"
    );
    ensure!(sample == read(fixtures().join("golden/Sample.md")), "Sample.md differs from golden");
    ensure!(slot == read(fixtures().join("golden/environment_type.md")), "environment_type.md differs from golden");
    let _ = std::fs::remove_dir_all(&out);
    Ok(())
}

fn transformation() -> Outcome {
    let out = scratch_dir("map");
    let derived = out.join("derived.yaml");
    let run = schemaforge(&[
        "map",
        "--spec",
        &fixture("position_split.yaml"),
        "--schema",
        &fixture("sample_source_schema.yaml"),
        "--format",
        "json",
        "--derived-schema",
        derived.to_str().unwrap(),
        &fixture("samples_raw.tsv"),
    ]);
    ensure!(run.code == 1, "map exit {} (two rows cannot be split)", run.code);
    let results = json(&run.stdout);
    let results = results.as_array().ok_or("map output is not an array")?;
    ensure!(results.len() == 7, "{} results for 7 records", results.len());
    let s1 = &results[0];
    ensure!(s1["latitude"] == 36.1069, "S1 latitude {}", s1["latitude"]);
    ensure!(s1["longitude"] == -112.1129, "S1 longitude {}", s1["longitude"]);
    ensure!(s1["sample_type"].as_str().is_some_and(|s| !s.is_empty()), "S1 sample_type missing");
    ensure!(s1.get("environment_type").is_none(), "S1 kept environment_type");
    ensure!(results[5].is_null(), "S6 was transformed");
    ensure!(
        run.stderr.lines().any(|l| l.starts_with("record 5:") && l.contains("split") && l.contains("66.5° varies")),
        "no split failure for S6: {}",
        run.stderr
    );

    // every parseable record validates against the derived schema
    let transformed: Vec<&serde_json::Value> = results.iter().filter(|r| !r.is_null()).collect();
    let data = out.join("transformed.json");
    std::fs::write(&data, serde_json::to_string(&transformed).unwrap()).unwrap();
    let check = schemaforge(&["validate", "-s", derived.to_str().unwrap(), "-C", "Sample", data.to_str().unwrap()]);
    ensure!(check.code == 0, "transformed records do not conform:\n{}{}", check.stdout, check.stderr);
    let _ = std::fs::remove_dir_all(&out);
    Ok(())
}

fn oracle_agreement() -> Outcome {
    let schema = sample_schema();
    let mut oracles = HashMap::new();
    for class in ["Sample", "Study"] {
        let run = schemaforge(&["gen", "--target", "json-schema", "--root-class", class, &fixture("sample_schema.yaml")]);
        ensure!(run.code == 0, "json-schema exit {}", run.code);
        oracles.insert(class, jsonschema::validator_for(&json(&run.stdout)).map_err(|e| e.to_string())?);
    }
    let corpus: [CorpusFile; 4] = [
        ("sample_variants.yaml", "Sample", |t, _| records_from_yaml(t, "Sample").unwrap()),
        ("studies.yaml", "Study", |t, _| records_from_yaml(t, "Study").unwrap()),
        ("samples_curated.tsv", "Sample", |t, s| records_from_table(t, b'\t', "Sample", s).unwrap()),
        ("samples_raw_as_sample.tsv", "Sample", |t, s| records_from_table(t, b'\t', "Sample", s).unwrap()),
    ];
    // collection-level and prefix-declaration rules have no JSON Schema form
    let excluded = ["duplicate_identifier", "undeclared_prefix"];
    let (mut total, mut invalid) = (0, 0);
    let mut disagreements = Vec::new();
    for (file, class, parse) in corpus {
        let records = parse(&read(fixtures().join(file)), &schema);
        let run = schemaforge(&["validate", "-s", &fixture("sample_schema.yaml"), "-C", class, "--format", "json", &fixture(file)]);
        ensure!(run.code == 0 || run.code == 1, "validate {file} exit {}", run.code);
        let rejected: BTreeSet<usize> = findings(&json(&run.stdout))
            .into_iter()
            .filter(|(_, rule, _)| !excluded.contains(&rule.as_str()))
            .map(|(i, _, _)| i)
            .collect();
        for (i, record) in records.iter().enumerate() {
            total += 1;
            let ours = !rejected.contains(&i);
            let theirs = oracles[class].is_valid(&record.to_json());
            invalid += usize::from(!ours);
            if ours != theirs {
                disagreements.push(format!("{file}[{i}]: validator {ours}, oracle {theirs}"));
            }
        }
    }
    ensure!(total >= 30, "corpus has {total} records");
    ensure!(invalid > 0 && invalid < total, "corpus does not span valid and invalid records");
    ensure!(disagreements.is_empty(), "{} of {total} disagree: {disagreements:?}", disagreements.len());
    Ok(())
}

fn run_property<S: proptest::strategy::Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn compiled(schema: &schemaforge::SchemaDefinition) -> Result<CompiledSchema, TestCaseError> {
    let merged = resolve_imports(schema, &mut ImportResolver::new(Vec::new()), None).map_err(|e| TestCaseError::fail(e.to_string()))?;
    compile(&merged.schema).map_err(|e| TestCaseError::fail(e.to_string()))
}

fn sql_value(value: &Value) -> rusqlite::types::Value {
    use rusqlite::types::Value as Sql;
    match value {
        Value::Integer(i) => Sql::Integer(*i),
        Value::Float(f) => Sql::Real(*f),
        Value::Text(t) => Sql::Text(t.clone()),
        Value::Bool(b) => Sql::Integer(i64::from(*b)),
        _ => Sql::Null,
    }
}

fn properties() -> Outcome {
    let start = Instant::now();

    run_property(500, arb_schema(), |schema| {
        let text = serialize_schema(&schema);
        let back = parse_schema(&text).map_err(|e| TestCaseError::fail(e.to_string()))?.schema;
        if back != schema {
            return Err(TestCaseError::fail(format!("round trip changed the schema:\n{text}")));
        }
        Ok(())
    })
    .map_err(|e| format!("(a) round trip: {e}"))?;

    run_property(256, (arb_prefix_map(), arb_local()), |(map, local)| {
        let mut prefixes = PrefixMap::new();
        prefixes.union(&map).unwrap();
        for prefix in map.keys() {
            let uri = expand_curie(&prefixes, &format!("{prefix}:{local}")).unwrap();
            match contract_uri(&prefixes, &uri) {
                Contracted::Curie(c) if expand_curie(&prefixes, &c).ok().as_deref() == Some(uri.as_str()) => {}
                other => return Err(TestCaseError::fail(format!("{uri} contracted to {other:?}"))),
            }
        }
        Ok(())
    })
    .map_err(|e| format!("(b) CURIE round trip: {e}"))?;

    run_property(256, arb_hierarchy(8), |schema| {
        let compiled = compiled(&schema)?;
        let names = |c: &str| -> BTreeSet<String> { compiled.induced[c].iter().map(|s| s.name.clone()).collect() };
        for (class, ancestors) in &compiled.ancestors {
            if ancestors.len() > MAX_DEPTH * schema.classes.len() {
                return Err(TestCaseError::fail("hierarchy too deep"));
            }
            for a in ancestors {
                if !names(class).is_superset(&names(a)) {
                    return Err(TestCaseError::fail(format!("{class} loses slots of {a}")));
                }
            }
        }
        Ok(())
    })
    .map_err(|e| format!("(c) monotonicity: {e}"))?;

    for target in ["json-schema", "sql-ddl", "context"] {
        let runs: Vec<String> = (0..3)
            .map(|_| schemaforge(&["gen", "--target", target, &fixture("sample_schema.yaml")]).stdout)
            .collect();
        ensure!(runs[0] == runs[1] && runs[1] == runs[2], "(d) {target} output varies between runs");
    }
    let docs: Vec<BTreeMap<String, String>> = (0..3)
        .map(|i| {
            let dir = scratch_dir(&format!("determinism-{i}"));
            schemaforge(&["gen", "--target", "docs", &fixture("sample_schema.yaml"), "-o", dir.to_str().unwrap()]);
            let pages = std::fs::read_dir(&dir)
                .unwrap()
                .map(|e| e.unwrap().path())
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), read(&p)))
                .collect();
            let _ = std::fs::remove_dir_all(&dir);
            pages
        })
        .collect();
    ensure!(docs[0] == docs[1] && docs[1] == docs[2], "(d) docs output varies between runs");
    run_property(40, arb_schema(), |schema| {
        for target in [Target::JsonSchema, Target::SqlDdl, Target::JsonLdContext, Target::Docs] {
            let opts = GeneratorOptions::new(target);
            let first = generate(&compiled(&schema)?, &opts).unwrap();
            for _ in 0..2 {
                if generate(&compiled(&schema)?, &opts).unwrap() != first {
                    return Err(TestCaseError::fail(format!("{target:?} output varies")));
                }
            }
        }
        Ok(())
    })
    .map_err(|e| format!("(d) determinism: {e}"))?;

    let ddl = schemaforge(&["gen", "--target", "sql-ddl", &fixture("sample_schema.yaml")]);
    let conn = Connection::open_in_memory().unwrap();
    conn.execute_batch(&ddl.stdout).map_err(|e| format!("(e) DDL does not load: {e}"))?;
    let rows = records_from_table(&read(fixtures().join("samples_curated.tsv")), b'\t', "Sample", &sample_schema()).unwrap();
    for row in &rows {
        let columns: Vec<&str> = row.values.keys().map(String::as_str).collect();
        let sql = format!(
            "INSERT INTO Sample ({}) VALUES ({})",
            columns.join(", "),
            vec!["?"; columns.len()].join(", ")
        );
        conn.execute(&sql, params_from_iter(row.values.values().map(sql_value)))
            .map_err(|e| format!("(e) row rejected: {e}"))?;
    }
    let count: i64 = conn.query_row("SELECT COUNT(*) FROM Sample", [], |r| r.get(0)).unwrap();
    ensure!(count == 4, "(e) {count} rows stored");

    ensure!(start.elapsed() < Duration::from_secs(60), "property suites took {:?}", start.elapsed());
    Ok(())
}

fn dogfooding() -> Outcome {
    for schema in ["sample_schema.yaml", "environment_enums.yaml", "sample_source_schema.yaml"] {
        let run = schemaforge(&["lint", "--format", "json", &fixture(schema)]);
        ensure!(run.code == 0, "lint {schema} exit {}", run.code);
        ensure!(json(&run.stdout) == serde_json::json!([]), "{schema} is not lint clean: {}", run.stdout);
    }
    let run = schemaforge(&["lint", "--format", "json", &fixture("malformed_schema.yaml")]);
    let found = json(&run.stdout);
    let rules: Vec<(&str, &str)> = found
        .as_array()
        .unwrap()
        .iter()
        .map(|f| (f["rule_id"].as_str().unwrap(), f["element"].as_str().unwrap()))
        .collect();
    ensure!(
        rules == [("class_name_not_camelcase", "sample"), ("slot_name_not_snakecase", "environmentType")],
        "malformed schema findings {rules:?}"
    );
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 before/after lifecycle", lifecycle),
        ("2 schemasheets", schemasheets),
        ("3 documentation", documentation),
        ("4 transformation", transformation),
        ("5 oracle agreement", oracle_agreement),
        ("6 property suites", properties),
        ("7 dogfooding", dogfooding),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        match outcome {
            Ok(()) => println!("PASS criterion {name}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL criterion {name}: {reason}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
