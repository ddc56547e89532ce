//! Command-line front end: `compile`, `validate`, `lint`, `gen`, `sheets`
//! and `map`.
//!
//! Exit codes: 0 success, 1 validation/lint/transform failures, 2 usage
//! errors, 3 input errors (unreadable or unparsable files).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use schemaforge::data::{records_from_json, records_from_table, records_from_yaml, DataFormat, DataRecord};
use schemaforge::generators::{generate, Generated, GeneratorOptions, Target};
use schemaforge::linter::{findings_to_json, findings_to_text, lint, LintConfig};
use schemaforge::loader::{load_schema_file, parse_schema, serialize_schema, ImportResolver};
use schemaforge::mapper::{derive_schema, parse_transform_spec, transform_collection};
use schemaforge::metamodel::{Diagnostic, Severity};
use schemaforge::sheets::tsv_to_schema;
use schemaforge::validator::{ValidationOptions, Validator};
use schemaforge::{compile, CompiledSchema};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FINDINGS: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "schemaforge", version, about = "Compile, validate, generate, lint, import and transform schemas")]
struct Cli {
    /// Extra directories to search for imported schemas (also SCHEMAFORGE_PATH).
    #[arg(long = "import-path", short = 'I', global = true)]
    import_path: Vec<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenTarget {
    JsonSchema,
    SqlDdl,
    Context,
    Docs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Resolve imports, compile, and print the induced slots of every class.
    Compile { schema: PathBuf },
    /// Validate data files (YAML, JSON, TSV, CSV) against a class.
    Validate {
        #[arg(short = 's', long)]
        schema: PathBuf,
        #[arg(short = 'C', long = "class")]
        class: String,
        #[arg(required = true)]
        data: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Accept numbers and booleans written as text, with a warning each.
        #[arg(long)]
        coerce: bool,
    },
    /// Check a schema against naming and completeness rules.
    Lint {
        schema: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Generate a serialization of a schema.
    Gen {
        #[arg(long, value_enum)]
        target: GenTarget,
        schema: PathBuf,
        /// Output file, or directory for docs.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        #[arg(long)]
        root_class: Option<String>,
        #[arg(long, default_value_t = 0)]
        inline_depth: usize,
        /// Fail instead of adding `_id` keys to classes without an identifier.
        #[arg(long)]
        no_surrogate_keys: bool,
    },
    /// Convert a tab-separated schema sheet into a schema document.
    Sheets {
        tsv: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        name: String,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Apply a transformation spec to a schema and, optionally, to data.
    Map {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Class of the data records; defaults to the first bound class.
        #[arg(short = 'C', long = "class")]
        class: Option<String>,
        data: Vec<PathBuf>,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        /// Where to write the derived schema when data is given.
        #[arg(long)]
        derived_schema: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

/// A failure that ends the command with a non-zero exit code.
struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.to_string(),
    }
}

fn usage_error(message: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

type Outcome = Result<u8, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let mut ctx = Ctx {
        out,
        err,
        import_path: cli.import_path.clone(),
    };
    match ctx.dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(ctx.err, "error: {}", f.message);
            f.code
        }
    }
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    import_path: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn dispatch(&mut self, command: Command) -> Outcome {
        match command {
            Command::Compile { schema } => self.compile(&schema),
            Command::Validate {
                schema,
                class,
                data,
                format,
                coerce,
            } => self.validate(&schema, &class, &data, format, coerce),
            Command::Lint { schema, config, format } => self.lint(&schema, config.as_deref(), format),
            Command::Gen {
                target,
                schema,
                output,
                root_class,
                inline_depth,
                no_surrogate_keys,
            } => {
                let mut opts = GeneratorOptions::new(match target {
                    GenTarget::JsonSchema => Target::JsonSchema,
                    GenTarget::SqlDdl => Target::SqlDdl,
                    GenTarget::Context => Target::JsonLdContext,
                    GenTarget::Docs => Target::Docs,
                });
                opts.root_class = root_class;
                opts.inline_depth = inline_depth;
                opts.surrogate_keys = !no_surrogate_keys;
                self.generate(&schema, &opts, output.as_deref())
            }
            Command::Sheets { tsv, id, name, output } => self.sheets(&tsv, &id, &name, output.as_deref()),
            Command::Map {
                spec,
                schema,
                class,
                data,
                output,
                derived_schema,
                format,
            } => self.map(&spec, &schema, class, &data, output.as_deref(), derived_schema.as_deref(), format),
        }
    }

    fn warn(&mut self, diagnostics: &[Diagnostic]) {
        for d in diagnostics {
            let _ = writeln!(self.err, "{}: {}", d.severity, d.message);
        }
    }

    fn emit(&mut self, text: &str, output: Option<&Path>) -> Result<(), Failure> {
        match output {
            Some(path) => write_file(path, text),
            None => self.out.write_all(text.as_bytes()).map_err(input_error),
        }
    }

    fn resolver(&self) -> ImportResolver {
        ImportResolver::from_env(self.import_path.clone())
    }

    fn load(&mut self, path: &Path) -> Result<CompiledSchema, Failure> {
        let loaded = load_schema_file(path, &mut self.resolver()).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        self.warn(&loaded.diagnostics);
        let compiled = compile(&loaded.schema).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        self.warn(&compiled.diagnostics);
        Ok(compiled)
    }

    fn compile(&mut self, path: &Path) -> Outcome {
        let schema = self.load(path)?;
        let mut text = String::new();
        let _ = writeln!(text, "schema {} <{}>", schema.source.name, schema.source.id);
        for (name, class) in &schema.source.classes {
            let marker = if class.abstract_ { " (abstract)" } else { "" };
            let _ = writeln!(text, "class {name}{marker}");
            let _ = writeln!(text, "  uri: {}", schema.element_uri(name).unwrap_or("-"));
            let _ = writeln!(text, "  ancestors: {}", schema.ancestors[name].join(", "));
            for slot in schema.induced_slots(name).unwrap_or_default() {
                let id = if slot.identifier { " identifier" } else { "" };
                let _ = writeln!(
                    text,
                    "  slot {} {} {} {}{id}",
                    slot.name,
                    slot.cardinality(),
                    slot.effective_range.name(),
                    slot.inheritance_label.as_str()
                );
            }
        }
        self.emit(&text, None)?;
        Ok(EXIT_OK)
    }

    fn validate(&mut self, schema: &Path, class: &str, data: &[PathBuf], format: Format, coerce: bool) -> Outcome {
        let schema = self.load(schema)?;
        if schema.class(class).is_none() {
            return Err(input_error(format!("unknown class {class:?}")));
        }
        let mut records = Vec::new();
        for path in data {
            records.extend(read_records(path, class, &schema)?);
        }
        let validator = Validator::new(&schema, ValidationOptions { coerce });
        let report = validator.validate_collection(&records).map_err(input_error)?;
        let text = match format {
            Format::Json => report.to_json(),
            Format::Text => report.to_text(),
        };
        self.emit(&text, None)?;
        Ok(if report.valid { EXIT_OK } else { EXIT_FINDINGS })
    }

    fn lint(&mut self, path: &Path, config: Option<&Path>, format: Format) -> Outcome {
        let config = match config {
            Some(p) => LintConfig::parse(&read(p)?).map_err(|e| input_error(format!("{}: {e}", p.display())))?,
            None => LintConfig::default(),
        };
        let parsed = parse_schema(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        self.warn(&parsed.diagnostics);
        let findings = lint(&parsed.schema, &config);
        let text = match format {
            Format::Json => findings_to_json(&findings),
            Format::Text => findings_to_text(&findings),
        };
        self.emit(&text, None)?;
        let errors = findings.iter().any(|f| f.severity == Severity::Error);
        Ok(if errors { EXIT_FINDINGS } else { EXIT_OK })
    }

    fn generate(&mut self, path: &Path, opts: &GeneratorOptions, output: Option<&Path>) -> Outcome {
        let schema = self.load(path)?;
        let generated = generate(&schema, opts).map_err(|e| Failure {
            code: match e {
                schemaforge::generators::GeneratorError::UnknownRootClass(_)
                | schemaforge::generators::GeneratorError::UnsupportedDialect(_) => EXIT_USAGE,
                _ => EXIT_INPUT,
            },
            message: e.to_string(),
        })?;
        match generated {
            Generated::Text(text) => self.emit(&text, output)?,
            Generated::Files(files) => {
                let dir = output.ok_or_else(|| usage_error("docs need an output directory (-o DIR)"))?;
                std::fs::create_dir_all(dir).map_err(|e| input_error(format!("{}: {e}", dir.display())))?;
                for (name, text) in files {
                    write_file(&dir.join(name), &text)?;
                }
            }
        }
        Ok(EXIT_OK)
    }

    fn sheets(&mut self, tsv: &Path, id: &str, name: &str, output: Option<&Path>) -> Outcome {
        let converted = tsv_to_schema(&read(tsv)?, id, name).map_err(|e| input_error(format!("{}: {e}", tsv.display())))?;
        self.warn(&converted.diagnostics);
        self.emit(&serialize_schema(&converted.schema), output)?;
        Ok(EXIT_OK)
    }

    #[allow(clippy::too_many_arguments)]
    fn map(
        &mut self,
        spec_path: &Path,
        schema_path: &Path,
        class: Option<String>,
        data: &[PathBuf],
        output: Option<&Path>,
        derived_path: Option<&Path>,
        format: Format,
    ) -> Outcome {
        let spec = parse_transform_spec(&read(spec_path)?).map_err(|e| input_error(format!("{}: {e}", spec_path.display())))?;
        self.warn(&spec.diagnostics);
        let source = self.load(schema_path)?;
        let derived = derive_schema(&spec, &source.source).map_err(input_error)?;
        self.warn(&derived.diagnostics);
        let derived_text = serialize_schema(&derived.schema);
        if data.is_empty() {
            self.emit(&derived_text, output)?;
            return Ok(EXIT_OK);
        }
        if let Some(p) = derived_path {
            write_file(p, &derived_text)?;
        }
        let class = class
            .or_else(|| spec.bindings.first().map(|b| b.source_class.clone()))
            .ok_or_else(|| usage_error("no class given (-C) and the spec binds none"))?;
        if source.class(&class).is_none() {
            return Err(input_error(format!("unknown class {class:?}")));
        }
        let mut records = Vec::new();
        for path in data {
            records.extend(read_records(path, &class, &source)?);
        }
        let results = transform_collection(&spec, &records);
        let mut transformed = Vec::new();
        let mut failures = 0;
        for (i, result) in results.iter().enumerate() {
            match result {
                Ok(r) => transformed.push(r.to_json()),
                Err(e) => {
                    failures += 1;
                    let _ = writeln!(self.err, "record {i}: {e}");
                    transformed.push(serde_json::Value::Null);
                }
            }
        }
        let doc = serde_json::Value::Array(transformed);
        let text = match format {
            Format::Json => {
                let mut t = serde_json::to_string_pretty(&doc).expect("records serialize");
                t.push('\n');
                t
            }
            Format::Text => serde_json_to_yaml(&doc),
        };
        self.emit(&text, output)?;
        let _ = writeln!(
            self.err,
            "{} record(s) in, {} transformed, {failures} failed",
            records.len(),
            records.len() - failures
        );
        Ok(if failures > 0 { EXIT_FINDINGS } else { EXIT_OK })
    }
}

fn serde_json_to_yaml(doc: &serde_json::Value) -> String {
    serde_yaml::to_string(doc).expect("records serialize")
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| input_error(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// Reads records of `class` from a data file, choosing the reader by extension.
fn read_records(path: &Path, class: &str, schema: &CompiledSchema) -> Result<Vec<DataRecord>, Failure> {
    let text = read(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let format = DataFormat::from_extension(ext)
        .ok_or_else(|| input_error(format!("{}: unknown data format {ext:?}", path.display())))?;
    let parsed = match format {
        DataFormat::Yaml => records_from_yaml(&text, class),
        DataFormat::Json => records_from_json(&text, class),
        DataFormat::Tsv => records_from_table(&text, b'\t', class, schema),
        DataFormat::Csv => records_from_table(&text, b',', class, schema),
    };
    parsed.map_err(|e| input_error(format!("{}: {e}", path.display())))
}
