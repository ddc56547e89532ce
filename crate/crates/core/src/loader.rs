//! Reading and writing schema documents, and import resolution.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde_yaml::{Mapping, Value};

use crate::error::SchemaError;
use crate::metamodel::{
    builtin_schema, check_name, BaseKind, ClassDefinition, Diagnostic, ElementKind,
    EnumDefinition, Mapping as ElementMapping, MappingPredicate, PermissibleValue,
    SchemaDefinition, SlotDefinition, TypeDefinition, BUILTIN_SCHEMA_ID, LINKML_PREFIX,
};
use crate::prefixes::PrefixMap;

/// Environment variable holding extra import search roots.
pub const SEARCH_PATH_ENV: &str = "SCHEMAFORGE_PATH";

/// A schema together with the warnings produced while building it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub schema: SchemaDefinition,
    pub diagnostics: Vec<Diagnostic>,
}

const SCHEMA_KEYS: &[&str] = &[
    "id",
    "name",
    "title",
    "description",
    "license",
    "version",
    "prefixes",
    "default_prefix",
    "default_range",
    "imports",
    "classes",
    "slots",
    "enums",
    "types",
];

/// Parses a schema document.
pub fn parse_schema(text: &str) -> Result<Loaded, SchemaError> {
    let doc: Value = serde_yaml::from_str(text).map_err(|e| SchemaError::from_yaml(&e))?;
    let top = match doc {
        Value::Mapping(m) => m,
        Value::Null => Mapping::new(),
        _ => return Err(SchemaError::NotAMapping("the top level of a schema document".into())),
    };
    let mut p = Parser::default();
    let schema = p.schema(&top)?;
    schema.check_structure()?;
    Ok(Loaded {
        schema,
        diagnostics: p.diagnostics,
    })
}

#[derive(Default)]
struct Parser {
    diagnostics: Vec<Diagnostic>,
}

impl Parser {
    fn unknown_key(&mut self, key: &str, context: &str) {
        let message = match key {
            "from.schema" | "slot.uri" => format!(
                "unsupported key `{key}` in {context} (use `{}`)",
                key.replace('.', "_")
            ),
            _ => format!("unrecognized key `{key}` in {context}"),
        };
        self.diagnostics.push(Diagnostic::warning(message));
    }

    fn schema(&mut self, top: &Mapping) -> Result<SchemaDefinition, SchemaError> {
        let get = |k: &str| top.get(k);
        let id = get("id")
            .map(|v| scalar_text(v, "id"))
            .transpose()?
            .ok_or(SchemaError::MissingKey("id"))?;
        let name = get("name")
            .map(|v| scalar_text(v, "name"))
            .transpose()?
            .ok_or(SchemaError::MissingKey("name"))?;
        let mut schema = SchemaDefinition::new(id, name);
        for (key, value) in entries(top, "schema")? {
            match key {
                "id" | "name" => {}
                "title" => schema.title = opt_text(value, key)?,
                "description" => schema.description = opt_text(value, key)?,
                "license" => schema.license = opt_text(value, key)?,
                "version" => schema.version = opt_text(value, key)?,
                "default_prefix" => schema.default_prefix = opt_text(value, key)?,
                "default_range" => schema.default_range = opt_text(value, key)?,
                "imports" => schema.imports = text_list(value, key)?,
                "prefixes" => schema.prefixes = prefixes(value)?,
                "classes" => {
                    for (name, body) in entries_or_empty(value, "classes")? {
                        let class = self.class(name, body)?;
                        schema.classes.insert(name.to_string(), class);
                    }
                }
                "slots" => {
                    for (name, body) in entries_or_empty(value, "slots")? {
                        let slot = self.slot(name, body, &format!("slot {name}"))?;
                        schema.slots.insert(name.to_string(), slot);
                    }
                }
                "enums" => {
                    for (name, body) in entries_or_empty(value, "enums")? {
                        let e = self.enumeration(name, body)?;
                        schema.enums.insert(name.to_string(), e);
                    }
                }
                "types" => {
                    for (name, body) in entries_or_empty(value, "types")? {
                        let t = self.type_def(name, body)?;
                        schema.types.insert(name.to_string(), t);
                    }
                }
                other => {
                    debug_assert!(!SCHEMA_KEYS.contains(&other));
                    self.unknown_key(other, "schema");
                }
            }
        }
        Ok(schema)
    }

    fn class(&mut self, name: &str, body: &Value) -> Result<ClassDefinition, SchemaError> {
        check_name(name, "class")?;
        let mut class = ClassDefinition::new(name);
        let context = format!("class {name}");
        for (key, value) in body_entries(body, &context)? {
            match key {
                "name" => check_echoed_name(value, name)?,
                "description" => class.description = opt_text(value, key)?,
                "is_a" => class.is_a = opt_text(value, key)?,
                "mixins" => class.mixins = text_list(value, key)?,
                "abstract" => class.abstract_ = opt_bool(value, key)?.unwrap_or(false),
                "slots" => class.slots = text_list(value, key)?,
                "class_uri" => class.class_uri = opt_text(value, key)?,
                "from_schema" => class.from_schema = opt_text(value, key)?,
                "attributes" => {
                    for (attr, attr_body) in entries_or_empty(value, key)? {
                        check_name(attr, "attribute")?;
                        let slot = self.slot(attr, attr_body, &format!("attribute {name}.{attr}"))?;
                        class.attributes.insert(attr.to_string(), slot);
                    }
                }
                "slot_usage" => {
                    for (slot, usage) in entries_or_empty(value, key)? {
                        let overlay =
                            self.slot(slot, usage, &format!("slot_usage {name}.{slot}"))?;
                        class.slot_usage.insert(slot.to_string(), overlay);
                    }
                }
                k if MappingPredicate::from_key(k).is_some() => {
                    let predicate = MappingPredicate::from_key(k).unwrap();
                    class.mappings.extend(mapping_list(value, predicate)?);
                }
                other => self.unknown_key(other, &context),
            }
        }
        normalize_mappings(&mut class.mappings);
        Ok(class)
    }

    fn slot(&mut self, name: &str, body: &Value, context: &str) -> Result<SlotDefinition, SchemaError> {
        let mut slot = SlotDefinition::new(name);
        for (key, value) in body_entries(body, context)? {
            match key {
                "name" => check_echoed_name(value, name)?,
                "description" => slot.description = opt_text(value, key)?,
                "is_a" => slot.is_a = opt_text(value, key)?,
                "range" => slot.range = opt_text(value, key)?,
                "required" => slot.required = opt_bool(value, key)?,
                "multivalued" => slot.multivalued = opt_bool(value, key)?,
                "identifier" => slot.identifier = opt_bool(value, key)?,
                "pattern" => slot.pattern = opt_text(value, key)?,
                "minimum_value" => slot.minimum_value = opt_number(value, key)?,
                "maximum_value" => slot.maximum_value = opt_number(value, key)?,
                "unit" => slot.unit = opt_text(value, key)?,
                "slot_uri" => slot.slot_uri = opt_text(value, key)?,
                "from_schema" => slot.from_schema = opt_text(value, key)?,
                "examples" => slot.examples = examples(value)?,
                k if MappingPredicate::from_key(k).is_some() => {
                    let predicate = MappingPredicate::from_key(k).unwrap();
                    slot.mappings.extend(mapping_list(value, predicate)?);
                }
                other => self.unknown_key(other, context),
            }
        }
        normalize_mappings(&mut slot.mappings);
        Ok(slot)
    }

    fn enumeration(&mut self, name: &str, body: &Value) -> Result<EnumDefinition, SchemaError> {
        check_name(name, "enum")?;
        let mut e = EnumDefinition {
            name: name.to_string(),
            ..Default::default()
        };
        let context = format!("enum {name}");
        for (key, value) in body_entries(body, &context)? {
            match key {
                "name" => check_echoed_name(value, name)?,
                "description" => e.description = opt_text(value, key)?,
                "from_schema" => e.from_schema = opt_text(value, key)?,
                "permissible_values" => {
                    for (text, pv_body) in entries_or_empty(value, key)? {
                        let pv = self.permissible_value(text, pv_body, name)?;
                        e.permissible_values.insert(text.to_string(), pv);
                    }
                }
                other => self.unknown_key(other, &context),
            }
        }
        Ok(e)
    }

    fn permissible_value(
        &mut self,
        text: &str,
        body: &Value,
        enum_name: &str,
    ) -> Result<PermissibleValue, SchemaError> {
        if text.is_empty() {
            return Err(SchemaError::InvalidValue {
                key: format!("{enum_name}.permissible_values"),
                message: "empty permissible value".into(),
            });
        }
        let mut pv = PermissibleValue {
            text: text.to_string(),
            ..Default::default()
        };
        let context = format!("permissible value {enum_name}.{text}");
        for (key, value) in body_entries(body, &context)? {
            match key {
                "text" => check_echoed_name(value, text)?,
                "description" => pv.description = opt_text(value, key)?,
                "meaning" => pv.meaning = opt_text(value, key)?,
                other => self.unknown_key(other, &context),
            }
        }
        Ok(pv)
    }

    fn type_def(&mut self, name: &str, body: &Value) -> Result<TypeDefinition, SchemaError> {
        check_name(name, "type")?;
        let context = format!("type {name}");
        let mut base = None;
        let mut t = TypeDefinition::new(name, BaseKind::String);
        for (key, value) in body_entries(body, &context)? {
            match key {
                "name" => check_echoed_name(value, name)?,
                "base" | "typeof" => {
                    let text = scalar_text(value, key)?;
                    base = Some(BaseKind::parse(&text).ok_or_else(|| SchemaError::InvalidValue {
                        key: format!("{name}.{key}"),
                        message: format!("{text:?} is not one of the built-in base kinds"),
                    })?);
                }
                "pattern" => t.pattern = opt_text(value, key)?,
                "description" => t.description = opt_text(value, key)?,
                "from_schema" => t.from_schema = opt_text(value, key)?,
                other => self.unknown_key(other, &context),
            }
        }
        t.base = base.ok_or(SchemaError::MissingKey("base"))?;
        Ok(t)
    }
}

fn entries<'a>(map: &'a Mapping, context: &str) -> Result<Vec<(&'a str, &'a Value)>, SchemaError> {
    map.iter()
        .map(|(k, v)| match k {
            Value::String(s) => Ok((s.as_str(), v)),
            other => Err(SchemaError::InvalidValue {
                key: context.to_string(),
                message: format!("non-text key {other:?}"),
            }),
        })
        .collect()
}

fn entries_or_empty<'a>(value: &'a Value, context: &str) -> Result<Vec<(&'a str, &'a Value)>, SchemaError> {
    match value {
        Value::Null => Ok(Vec::new()),
        Value::Mapping(m) => entries(m, context),
        _ => Err(SchemaError::NotAMapping(context.to_string())),
    }
}

fn body_entries<'a>(value: &'a Value, context: &str) -> Result<Vec<(&'a str, &'a Value)>, SchemaError> {
    entries_or_empty(value, context)
}

fn check_echoed_name(value: &Value, expected: &str) -> Result<(), SchemaError> {
    let echoed = scalar_text(value, "name")?;
    if echoed != expected {
        return Err(SchemaError::InvalidValue {
            key: format!("{expected}.name"),
            message: format!("name {echoed:?} does not match its key {expected:?}"),
        });
    }
    Ok(())
}

fn scalar_text(value: &Value, key: &str) -> Result<String, SchemaError> {
    match value {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(SchemaError::InvalidValue {
            key: key.to_string(),
            message: "expected a scalar".into(),
        }),
    }
}

fn opt_text(value: &Value, key: &str) -> Result<Option<String>, SchemaError> {
    match value {
        Value::Null => Ok(None),
        v => scalar_text(v, key).map(Some),
    }
}

fn opt_bool(value: &Value, key: &str) -> Result<Option<bool>, SchemaError> {
    match value {
        Value::Null => Ok(None),
        Value::Bool(b) => Ok(Some(*b)),
        _ => Err(SchemaError::InvalidValue {
            key: key.to_string(),
            message: "expected true or false".into(),
        }),
    }
}

fn opt_number(value: &Value, key: &str) -> Result<Option<f64>, SchemaError> {
    match value {
        Value::Null => Ok(None),
        Value::Number(n) => n.as_f64().filter(|f| f.is_finite()).map(Some).ok_or_else(|| {
            SchemaError::InvalidValue {
                key: key.to_string(),
                message: "expected a finite number".into(),
            }
        }),
        _ => Err(SchemaError::InvalidValue {
            key: key.to_string(),
            message: "expected a number".into(),
        }),
    }
}

fn text_list(value: &Value, key: &str) -> Result<Vec<String>, SchemaError> {
    match value {
        Value::Null => Ok(Vec::new()),
        Value::Sequence(items) => items.iter().map(|v| scalar_text(v, key)).collect(),
        v => Ok(vec![scalar_text(v, key)?]),
    }
}

fn examples(value: &Value) -> Result<Vec<String>, SchemaError> {
    let items = match value {
        Value::Null => return Ok(Vec::new()),
        Value::Sequence(items) => items.as_slice(),
        v => std::slice::from_ref(v),
    };
    items
        .iter()
        .map(|item| match item {
            Value::Mapping(m) => m
                .get("value")
                .ok_or(SchemaError::MissingKey("value"))
                .and_then(|v| scalar_text(v, "examples")),
            v => scalar_text(v, "examples"),
        })
        .collect()
}

fn mapping_list(value: &Value, predicate: MappingPredicate) -> Result<Vec<ElementMapping>, SchemaError> {
    Ok(text_list(value, predicate.key())?
        .into_iter()
        .map(|target| ElementMapping { predicate, target })
        .collect())
}

/// Mappings are kept grouped by predicate so serialization round-trips.
fn normalize_mappings(mappings: &mut [ElementMapping]) {
    mappings.sort_by_key(|m| m.predicate);
}

fn prefixes(value: &Value) -> Result<IndexMap<String, String>, SchemaError> {
    let mut out = IndexMap::new();
    for (prefix, body) in entries_or_empty(value, "prefixes")? {
        let base = match body {
            Value::Mapping(m) => m
                .get("prefix_reference")
                .ok_or(SchemaError::MissingKey("prefix_reference"))
                .and_then(|v| scalar_text(v, "prefix_reference"))?,
            v => scalar_text(v, "prefixes")?,
        };
        out.insert(prefix.to_string(), base);
    }
    Ok(out)
}

/// Writes a schema back to the canonical text format.
pub fn serialize_schema(schema: &SchemaDefinition) -> String {
    let mut top = Mapping::new();
    put(&mut top, "id", Some(schema.id.as_str()));
    put(&mut top, "name", Some(schema.name.as_str()));
    put(&mut top, "title", schema.title.as_deref());
    put(&mut top, "description", schema.description.as_deref());
    put(&mut top, "license", schema.license.as_deref());
    put(&mut top, "version", schema.version.as_deref());
    if !schema.prefixes.is_empty() {
        let m: Mapping = schema
            .prefixes
            .iter()
            .map(|(p, b)| (Value::from(p.as_str()), Value::from(b.as_str())))
            .collect();
        top.insert("prefixes".into(), Value::Mapping(m));
    }
    put(&mut top, "default_prefix", schema.default_prefix.as_deref());
    put(&mut top, "default_range", schema.default_range.as_deref());
    put_list(&mut top, "imports", &schema.imports);
    if !schema.classes.is_empty() {
        let m = schema
            .classes
            .iter()
            .map(|(n, c)| (Value::from(n.as_str()), class_value(c)))
            .collect();
        top.insert("classes".into(), Value::Mapping(m));
    }
    if !schema.slots.is_empty() {
        top.insert("slots".into(), Value::Mapping(slot_map(&schema.slots)));
    }
    if !schema.enums.is_empty() {
        let m = schema
            .enums
            .iter()
            .map(|(n, e)| (Value::from(n.as_str()), enum_value(e)))
            .collect();
        top.insert("enums".into(), Value::Mapping(m));
    }
    if !schema.types.is_empty() {
        let m = schema
            .types
            .iter()
            .map(|(n, t)| (Value::from(n.as_str()), type_value(t)))
            .collect();
        top.insert("types".into(), Value::Mapping(m));
    }
    serde_yaml::to_string(&Value::Mapping(top)).expect("schema values are always serializable")
}

fn put(m: &mut Mapping, key: &str, value: Option<&str>) {
    if let Some(v) = value {
        m.insert(key.into(), v.into());
    }
}

fn put_bool(m: &mut Mapping, key: &str, value: Option<bool>) {
    if let Some(v) = value {
        m.insert(key.into(), Value::Bool(v));
    }
}

fn put_number(m: &mut Mapping, key: &str, value: Option<f64>) {
    if let Some(v) = value {
        m.insert(key.into(), Value::Number(v.into()));
    }
}

fn put_list(m: &mut Mapping, key: &str, values: &[String]) {
    if !values.is_empty() {
        m.insert(
            key.into(),
            Value::Sequence(values.iter().map(|v| Value::from(v.as_str())).collect()),
        );
    }
}

fn put_mappings(m: &mut Mapping, mappings: &[ElementMapping]) {
    for predicate in MappingPredicate::ALL {
        let targets: Vec<String> = mappings
            .iter()
            .filter(|x| x.predicate == predicate)
            .map(|x| x.target.clone())
            .collect();
        put_list(m, predicate.key(), &targets);
    }
}

fn slot_map(slots: &IndexMap<String, SlotDefinition>) -> Mapping {
    slots
        .iter()
        .map(|(n, s)| (Value::from(n.as_str()), slot_value(s)))
        .collect()
}

fn class_value(c: &ClassDefinition) -> Value {
    let mut m = Mapping::new();
    put(&mut m, "description", c.description.as_deref());
    put(&mut m, "from_schema", c.from_schema.as_deref());
    put(&mut m, "is_a", c.is_a.as_deref());
    put_list(&mut m, "mixins", &c.mixins);
    if c.abstract_ {
        m.insert("abstract".into(), Value::Bool(true));
    }
    put_list(&mut m, "slots", &c.slots);
    if !c.attributes.is_empty() {
        m.insert("attributes".into(), Value::Mapping(slot_map(&c.attributes)));
    }
    if !c.slot_usage.is_empty() {
        m.insert("slot_usage".into(), Value::Mapping(slot_map(&c.slot_usage)));
    }
    put(&mut m, "class_uri", c.class_uri.as_deref());
    put_mappings(&mut m, &c.mappings);
    Value::Mapping(m)
}

/// YAML mapping for one slot definition; also used by the docs source echo.
pub(crate) fn slot_mapping(s: &SlotDefinition) -> Mapping {
    let mut m = Mapping::new();
    put(&mut m, "description", s.description.as_deref());
    put(&mut m, "from_schema", s.from_schema.as_deref());
    put(&mut m, "is_a", s.is_a.as_deref());
    put(&mut m, "range", s.range.as_deref());
    put_bool(&mut m, "required", s.required);
    put_bool(&mut m, "multivalued", s.multivalued);
    put_bool(&mut m, "identifier", s.identifier);
    put(&mut m, "pattern", s.pattern.as_deref());
    put_number(&mut m, "minimum_value", s.minimum_value);
    put_number(&mut m, "maximum_value", s.maximum_value);
    put(&mut m, "unit", s.unit.as_deref());
    put(&mut m, "slot_uri", s.slot_uri.as_deref());
    put_list(&mut m, "examples", &s.examples);
    put_mappings(&mut m, &s.mappings);
    m
}

fn slot_value(s: &SlotDefinition) -> Value {
    Value::Mapping(slot_mapping(s))
}

fn enum_value(e: &EnumDefinition) -> Value {
    let mut m = Mapping::new();
    put(&mut m, "description", e.description.as_deref());
    put(&mut m, "from_schema", e.from_schema.as_deref());
    if !e.permissible_values.is_empty() {
        let pvs = e
            .permissible_values
            .iter()
            .map(|(text, pv)| {
                let mut body = Mapping::new();
                put(&mut body, "description", pv.description.as_deref());
                put(&mut body, "meaning", pv.meaning.as_deref());
                let body = if body.is_empty() { Value::Null } else { Value::Mapping(body) };
                (Value::from(text.as_str()), body)
            })
            .collect();
        m.insert("permissible_values".into(), Value::Mapping(pvs));
    }
    Value::Mapping(m)
}

fn type_value(t: &TypeDefinition) -> Value {
    let mut m = Mapping::new();
    m.insert("base".into(), t.base.as_str().into());
    put(&mut m, "pattern", t.pattern.as_deref());
    put(&mut m, "description", t.description.as_deref());
    put(&mut m, "from_schema", t.from_schema.as_deref());
    Value::Mapping(m)
}

type Fetcher = Box<dyn Fn(&str) -> Result<String, String>>;

/// Locates imported schema documents.
///
/// A reference `foo/bar` is looked up as `foo/bar.yaml` first in the
/// importing document's directory and then in each search root, in order.
/// `linkml:*` references name the built-in types and are never looked up.
/// Absolute `http(s)` references are only followed when a fetcher has been
/// installed with [`ImportResolver::with_fetcher`].
pub struct ImportResolver {
    search_roots: Vec<PathBuf>,
    loaded: HashMap<String, (SchemaDefinition, Option<PathBuf>)>,
    fetcher: Option<Fetcher>,
}

impl fmt::Debug for ImportResolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImportResolver")
            .field("search_roots", &self.search_roots)
            .field("loaded", &self.loaded.keys().collect::<Vec<_>>())
            .field("remote", &self.fetcher.is_some())
            .finish()
    }
}

impl Default for ImportResolver {
    fn default() -> Self {
        Self::new(Vec::new())
    }
}

impl ImportResolver {
    pub fn new(search_roots: Vec<PathBuf>) -> Self {
        Self {
            search_roots,
            loaded: HashMap::new(),
            fetcher: None,
        }
    }

    /// `roots` followed by the entries of `SCHEMAFORGE_PATH`.
    pub fn from_env(mut roots: Vec<PathBuf>) -> Self {
        if let Some(extra) = std::env::var_os(SEARCH_PATH_ENV) {
            roots.extend(std::env::split_paths(&extra).filter(|p| !p.as_os_str().is_empty()));
        }
        Self::new(roots)
    }

    /// Enables remote imports through `fetch`, which maps a URL to document text.
    pub fn with_fetcher(mut self, fetch: impl Fn(&str) -> Result<String, String> + 'static) -> Self {
        self.fetcher = Some(Box::new(fetch));
        self
    }

    pub fn search_roots(&self) -> &[PathBuf] {
        &self.search_roots
    }

    fn candidates(&self, reference: &str, base_dir: Option<&Path>) -> Vec<PathBuf> {
        let file = if reference.ends_with(".yaml") || reference.ends_with(".yml") {
            reference.to_string()
        } else {
            format!("{reference}.yaml")
        };
        base_dir
            .into_iter()
            .chain(self.search_roots.iter().map(PathBuf::as_path))
            .map(|root| root.join(&file))
            .collect()
    }

    fn load(
        &mut self,
        reference: &str,
        base_dir: Option<&Path>,
        diagnostics: &mut Vec<Diagnostic>,
    ) -> Result<(SchemaDefinition, Option<PathBuf>), SchemaError> {
        let key = match base_dir {
            Some(dir) if !is_remote(reference) => format!("{}::{reference}", dir.display()),
            _ => reference.to_string(),
        };
        if let Some(hit) = self.loaded.get(&key) {
            return Ok(hit.clone());
        }
        let (text, dir) = if is_remote(reference) {
            let fetch = self
                .fetcher
                .as_ref()
                .ok_or_else(|| SchemaError::RemoteImportDisabled(reference.to_string()))?;
            let text = fetch(reference).map_err(|message| SchemaError::Fetch {
                reference: reference.to_string(),
                message,
            })?;
            (text, None)
        } else {
            let candidates = self.candidates(reference, base_dir);
            let path = candidates.iter().find(|p| p.is_file()).cloned().ok_or_else(|| {
                SchemaError::UnresolvedImport {
                    reference: reference.to_string(),
                    searched: candidates.iter().map(|p| p.display().to_string()).collect(),
                }
            })?;
            let text = std::fs::read_to_string(&path).map_err(|source| SchemaError::Io {
                path: path.clone(),
                source,
            })?;
            (text, path.parent().map(Path::to_path_buf))
        };
        let parsed = parse_schema(&text)?;
        diagnostics.extend(
            parsed
                .diagnostics
                .into_iter()
                .map(|d| Diagnostic::warning(format!("{reference}: {}", d.message))),
        );
        self.loaded.insert(key, (parsed.schema.clone(), dir.clone()));
        Ok((parsed.schema, dir))
    }
}

fn is_remote(reference: &str) -> bool {
    reference.starts_with("http://") || reference.starts_with("https://")
}

fn is_builtin_import(reference: &str) -> bool {
    reference
        .split_once(':')
        .is_some_and(|(p, _)| p == LINKML_PREFIX)
        || reference == BUILTIN_SCHEMA_ID
}

/// Merges `root` with its import closure.
///
/// Order is built-in types, then imports depth-first post-order, then the
/// root itself; later schemas win name collisions and every real override
/// is reported. `root_dir` is probed before the resolver's search roots.
pub fn resolve_imports(
    root: &SchemaDefinition,
    resolver: &mut ImportResolver,
    root_dir: Option<&Path>,
) -> Result<Loaded, SchemaError> {
    let mut order: Vec<SchemaDefinition> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut visited: HashSet<String> = HashSet::new();
    let mut stack: Vec<(String, String)> = vec![(root.id.clone(), root.name.clone())];
    collect_imports(
        root,
        root_dir,
        resolver,
        &mut stack,
        &mut visited,
        &mut order,
        &mut diagnostics,
    )?;

    let mut merged = SchemaDefinition {
        id: root.id.clone(),
        name: root.name.clone(),
        title: root.title.clone(),
        description: root.description.clone(),
        license: root.license.clone(),
        version: root.version.clone(),
        default_prefix: root.default_prefix.clone(),
        default_range: root.default_range.clone(),
        imports: root.imports.clone(),
        ..SchemaDefinition::default()
    };
    let mut prefixes = PrefixMap::new();
    let builtin = builtin_schema();
    for source in std::iter::once(&builtin).chain(order.iter()).chain(std::iter::once(root)) {
        prefixes.union(&source.prefixes)?;
        merge_elements(&mut merged, source, &mut diagnostics)?;
    }
    merged.prefixes = prefixes.as_map().clone();
    merged.check_structure()?;
    Ok(Loaded {
        schema: merged,
        diagnostics,
    })
}

fn collect_imports(
    schema: &SchemaDefinition,
    dir: Option<&Path>,
    resolver: &mut ImportResolver,
    stack: &mut Vec<(String, String)>,
    visited: &mut HashSet<String>,
    order: &mut Vec<SchemaDefinition>,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<(), SchemaError> {
    for reference in &schema.imports {
        if is_builtin_import(reference) {
            continue;
        }
        let (imported, imported_dir) = resolver.load(reference, dir, diagnostics)?;
        if let Some(pos) = stack.iter().position(|(id, _)| *id == imported.id) {
            let mut cycle: Vec<String> = stack[pos..].iter().map(|(_, n)| n.clone()).collect();
            cycle.push(imported.name.clone());
            return Err(SchemaError::ImportCycle(cycle));
        }
        if visited.contains(&imported.id) {
            continue;
        }
        stack.push((imported.id.clone(), imported.name.clone()));
        collect_imports(
            &imported,
            imported_dir.as_deref(),
            resolver,
            stack,
            visited,
            order,
            diagnostics,
        )?;
        stack.pop();
        visited.insert(imported.id.clone());
        order.push(imported);
    }
    Ok(())
}

fn merge_elements(
    merged: &mut SchemaDefinition,
    source: &SchemaDefinition,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<(), SchemaError> {
    let provenance = |from: &Option<String>| from.clone().or_else(|| Some(source.id.clone()));
    for (name, kind) in source.element_names() {
        let existing = merged.element_kinds(name);
        if let Some(&first) = existing.iter().find(|k| **k != kind) {
            let first_schema = match merged.element(name) {
                Some(crate::metamodel::Element::Class(c)) => c.from_schema.clone(),
                Some(crate::metamodel::Element::Slot(s)) => s.from_schema.clone(),
                Some(crate::metamodel::Element::Enum(e)) => e.from_schema.clone(),
                Some(crate::metamodel::Element::Type(t)) => t.from_schema.clone(),
                None => None,
            };
            return Err(SchemaError::ConflictingKinds {
                name: name.to_string(),
                first,
                first_schema: first_schema.unwrap_or_default(),
                second: kind,
                second_schema: source.id.clone(),
            });
        }
        let replaced = match kind {
            ElementKind::Class => {
                let mut c = source.classes[name].clone();
                c.from_schema = provenance(&c.from_schema);
                replace(&mut merged.classes, name, c)
            }
            ElementKind::Slot => {
                let mut s = source.slots[name].clone();
                s.from_schema = provenance(&s.from_schema);
                replace(&mut merged.slots, name, s)
            }
            ElementKind::Enum => {
                let mut e = source.enums[name].clone();
                e.from_schema = provenance(&e.from_schema);
                replace(&mut merged.enums, name, e)
            }
            ElementKind::Type => {
                let mut t = source.types[name].clone();
                t.from_schema = provenance(&t.from_schema);
                replace(&mut merged.types, name, t)
            }
        };
        if replaced {
            diagnostics.push(Diagnostic::warning(format!(
                "{kind} {name} from {} overrides an earlier definition",
                source.id
            )));
        }
    }
    Ok(())
}

/// Inserts `value`; returns true when a different definition was replaced.
fn replace<T: PartialEq>(map: &mut IndexMap<String, T>, name: &str, value: T) -> bool {
    match map.get_mut(name) {
        Some(slot) if *slot == value => false,
        Some(slot) => {
            *slot = value;
            true
        }
        None => {
            map.insert(name.to_string(), value);
            false
        }
    }
}

/// Prefix map of an already merged schema.
pub fn build_prefix_map(schema: &SchemaDefinition) -> Result<PrefixMap, SchemaError> {
    let mut map = PrefixMap::new();
    map.union(&schema.prefixes)?;
    Ok(map)
}

/// Reads, parses and merges a schema file; its directory is searched first.
pub fn load_schema_file(path: &Path, resolver: &mut ImportResolver) -> Result<Loaded, SchemaError> {
    let text = std::fs::read_to_string(path).map_err(|source| SchemaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed = parse_schema(&text)?;
    let mut resolved = resolve_imports(&parsed.schema, resolver, path.parent())?;
    let mut diagnostics = parsed.diagnostics;
    diagnostics.append(&mut resolved.diagnostics);
    Ok(Loaded {
        schema: resolved.schema,
        diagnostics,
    })
}
