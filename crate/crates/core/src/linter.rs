//! Best-practice checks on a parsed (not necessarily compilable) schema.

use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::metamodel::{split_curie, Severity, SchemaDefinition, LINKML_PREFIX};

pub const MISSING_DESCRIPTION: &str = "missing_description";
pub const CLASS_NAME_NOT_CAMELCASE: &str = "class_name_not_camelcase";
pub const SLOT_NAME_NOT_SNAKECASE: &str = "slot_name_not_snakecase";
pub const ENUM_NAME_NOT_CAMELCASE: &str = "enum_name_not_camelcase";
pub const MISSING_RANGE: &str = "missing_range";
pub const EMPTY_ENUM: &str = "empty_enum";
pub const UNDECLARED_PREFIX_IN_MAPPING: &str = "undeclared_prefix_in_mapping";

pub const RULES: [&str; 7] = [
    MISSING_DESCRIPTION,
    CLASS_NAME_NOT_CAMELCASE,
    SLOT_NAME_NOT_SNAKECASE,
    ENUM_NAME_NOT_CAMELCASE,
    MISSING_RANGE,
    EMPTY_ENUM,
    UNDECLARED_PREFIX_IN_MAPPING,
];

/// Prefixes every schema may use without declaring them.
const IMPLICIT_PREFIXES: [&str; 2] = [LINKML_PREFIX, "xsd"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LintFinding {
    pub rule_id: String,
    pub element: String,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LintConfigError {
    #[error("lint config is not valid: {0}")]
    Syntax(String),
    #[error("unknown lint rule {0:?}")]
    UnknownRule(String),
    #[error("rule {rule:?}: expected off, warning or error, got {value:?}")]
    BadLevel { rule: String, value: String },
}

/// Per-rule level; `None` means the rule is off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LintConfig {
    pub rules: IndexMap<String, Option<Severity>>,
}

impl Default for LintConfig {
    /// All rules enabled at warning.
    fn default() -> Self {
        Self {
            rules: RULES.iter().map(|r| (r.to_string(), Some(Severity::Warning))).collect(),
        }
    }
}

impl LintConfig {
    pub fn all_off() -> Self {
        Self {
            rules: RULES.iter().map(|r| (r.to_string(), None)).collect(),
        }
    }

    /// Reads `rule: off|warning|error` pairs, optionally nested under `rules:`.
    /// Rules not mentioned keep their default.
    pub fn parse(text: &str) -> Result<Self, LintConfigError> {
        let doc: serde_yaml::Value =
            serde_yaml::from_str(text).map_err(|e| LintConfigError::Syntax(e.to_string()))?;
        let doc = match doc.get("rules") {
            Some(inner) => inner.clone(),
            None => doc,
        };
        let mut config = Self::default();
        let map = match doc {
            serde_yaml::Value::Null => return Ok(config),
            serde_yaml::Value::Mapping(m) => m,
            _ => return Err(LintConfigError::Syntax("expected a mapping of rule ids".into())),
        };
        for (k, v) in map {
            let rule = k
                .as_str()
                .ok_or_else(|| LintConfigError::Syntax("rule ids must be text".into()))?
                .to_string();
            if !RULES.contains(&rule.as_str()) {
                return Err(LintConfigError::UnknownRule(rule));
            }
            let level = match &v {
                serde_yaml::Value::String(s) if s == "off" => None,
                serde_yaml::Value::Bool(false) => None,
                serde_yaml::Value::String(s) if s == "warning" => Some(Severity::Warning),
                serde_yaml::Value::String(s) if s == "error" => Some(Severity::Error),
                other => {
                    return Err(LintConfigError::BadLevel {
                        rule,
                        value: serde_yaml::to_string(other).unwrap_or_default().trim().to_string(),
                    })
                }
            };
            config.rules.insert(rule, level);
        }
        Ok(config)
    }

    fn level(&self, rule: &str) -> Option<Severity> {
        self.rules.get(rule).copied().flatten()
    }
}

/// First character uppercase, then letters and digits only.
pub fn is_camel_case(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_uppercase()) && name.chars().all(|c| c.is_ascii_alphanumeric())
}

/// Lowercase letters, digits and underscores.
pub fn is_snake_case(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Runs every enabled rule. Findings come in element declaration order
/// (classes, slots, enums, types), then by rule id.
pub fn lint(schema: &SchemaDefinition, config: &LintConfig) -> Vec<LintFinding> {
    let declared = |prefix: &str| schema.prefixes.contains_key(prefix) || IMPLICIT_PREFIXES.contains(&prefix);
    let mut out = Vec::new();
    let mut emit = |element: &str, mut hits: Vec<(&'static str, String)>| {
        hits.sort_by(|a, b| a.0.cmp(b.0));
        for (rule, message) in hits {
            if let Some(severity) = config.level(rule) {
                out.push(LintFinding {
                    rule_id: rule.to_string(),
                    element: element.to_string(),
                    severity,
                    message,
                });
            }
        }
    };

    for (name, class) in &schema.classes {
        let mut hits = Vec::new();
        if class.description.is_none() {
            hits.push((MISSING_DESCRIPTION, format!("class {name} has no description")));
        }
        if !is_camel_case(name) {
            hits.push((CLASS_NAME_NOT_CAMELCASE, format!("class name {name:?} is not CamelCase")));
        }
        let curies = class.class_uri.iter().chain(class.mappings.iter().map(|m| &m.target));
        hits.extend(undeclared(curies, &declared, name));
        emit(name, hits);
    }
    for (name, slot) in &schema.slots {
        let mut hits = Vec::new();
        if slot.description.is_none() {
            hits.push((MISSING_DESCRIPTION, format!("slot {name} has no description")));
        }
        if !is_snake_case(name) {
            hits.push((SLOT_NAME_NOT_SNAKECASE, format!("slot name {name:?} is not snake_case")));
        }
        if slot.range.is_none() && schema.default_range.is_none() {
            hits.push((MISSING_RANGE, format!("slot {name} has no range and the schema has no default_range")));
        }
        let curies = slot.slot_uri.iter().chain(slot.mappings.iter().map(|m| &m.target));
        hits.extend(undeclared(curies, &declared, name));
        emit(name, hits);
    }
    for (name, e) in &schema.enums {
        let mut hits = Vec::new();
        if e.description.is_none() {
            hits.push((MISSING_DESCRIPTION, format!("enum {name} has no description")));
        }
        if !is_camel_case(name) {
            hits.push((ENUM_NAME_NOT_CAMELCASE, format!("enum name {name:?} is not CamelCase")));
        }
        if e.permissible_values.is_empty() {
            hits.push((EMPTY_ENUM, format!("enum {name} has no permissible values")));
        }
        let meanings = e.permissible_values.values().filter_map(|pv| pv.meaning.as_ref());
        hits.extend(undeclared(meanings, &declared, name));
        emit(name, hits);
    }
    for (name, t) in &schema.types {
        if t.description.is_none() {
            emit(name, vec![(MISSING_DESCRIPTION, format!("type {name} has no description"))]);
        }
    }
    out
}

fn undeclared<'a>(
    curies: impl Iterator<Item = &'a String>,
    declared: &impl Fn(&str) -> bool,
    element: &str,
) -> Vec<(&'static str, String)> {
    curies
        .filter(|c| !c.contains("://"))
        .filter_map(|c| split_curie(c).map(|(p, _)| (c, p)))
        .filter(|(_, p)| !declared(p))
        .map(|(c, p)| {
            (
                UNDECLARED_PREFIX_IN_MAPPING,
                format!("{element} refers to {c}, but prefix {p:?} is not declared"),
            )
        })
        .collect()
}

/// `severity[rule] element: message` lines.
pub fn findings_to_text(findings: &[LintFinding]) -> String {
    let mut out = String::new();
    for f in findings {
        let _ = writeln!(out, "{}[{}] {}: {}", f.severity, f.rule_id, f.element, f.message);
    }
    out
}

pub fn findings_to_json(findings: &[LintFinding]) -> String {
    let mut text = serde_json::to_string_pretty(findings).expect("findings serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loader::parse_schema;

    fn schema(text: &str) -> SchemaDefinition {
        parse_schema(text).unwrap().schema
    }

    const HEADER: &str = "id: https://example.org/s\nname: s\nprefixes:\n  ex: https://example.org/\n";

    fn ids(findings: &[LintFinding]) -> Vec<(&str, &str)> {
        findings.iter().map(|f| (f.element.as_str(), f.rule_id.as_str())).collect()
    }

    #[test]
    fn naming_conventions() {
        let s = schema(&format!(
            "{HEADER}classes:\n  sample:\n    description: x\nslots:\n  environmentType:\n    description: x\n    range: string\n"
        ));
        let found = lint(&s, &LintConfig::default());
        assert_eq!(
            ids(&found),
            [("sample", CLASS_NAME_NOT_CAMELCASE), ("environmentType", SLOT_NAME_NOT_SNAKECASE)]
        );
        assert!(found.iter().all(|f| f.severity == Severity::Warning));
    }

    #[test]
    fn well_formed_enum_is_clean() {
        let s = schema(&format!(
            "{HEADER}  ENVO: http://purl.obolibrary.org/obo/ENVO_\nenums:\n  EnvironmentTypeEnum:\n    description: x\n    permissible_values:\n      soil:\n        meaning: ENVO:00001998\n"
        ));
        assert!(lint(&s, &LintConfig::default()).is_empty());
    }

    #[test]
    fn completeness_rules() {
        let s = schema(&format!(
            "{HEADER}classes:\n  Thing:\n    class_uri: nope:Thing\nslots:\n  size: {{}}\nenums:\n  Empty:\n    description: x\n"
        ));
        let found = lint(&s, &LintConfig::default());
        assert_eq!(
            ids(&found),
            [
                ("Thing", MISSING_DESCRIPTION),
                ("Thing", UNDECLARED_PREFIX_IN_MAPPING),
                ("size", MISSING_DESCRIPTION),
                ("size", MISSING_RANGE),
                ("Empty", EMPTY_ENUM),
            ]
        );
        let with_default = schema(&format!("{HEADER}default_range: string\nslots:\n  size:\n    description: x\n"));
        assert!(lint(&with_default, &LintConfig::default()).is_empty());
    }

    #[test]
    fn config_filters_and_reseverities() {
        let s = schema(&format!("{HEADER}classes:\n  sample: {{}}\n"));
        let config = LintConfig::parse("missing_description: off\nclass_name_not_camelcase: error\n").unwrap();
        let found = lint(&s, &config);
        assert_eq!(ids(&found), [("sample", CLASS_NAME_NOT_CAMELCASE)]);
        assert_eq!(found[0].severity, Severity::Error);
        assert!(lint(&s, &LintConfig::all_off()).is_empty());
    }

    #[test]
    fn config_errors() {
        assert_eq!(
            LintConfig::parse("no_such_rule: error\n"),
            Err(LintConfigError::UnknownRule("no_such_rule".into()))
        );
        assert!(matches!(
            LintConfig::parse("empty_enum: loud\n"),
            Err(LintConfigError::BadLevel { .. })
        ));
        assert_eq!(LintConfig::parse("rules:\n  empty_enum: off\n").unwrap().level(EMPTY_ENUM), None);
    }

    #[test]
    fn case_predicates() {
        assert!(is_camel_case("EnvironmentTypeEnum"));
        assert!(is_camel_case("Sample2"));
        assert!(!is_camel_case("Sample_Site"));
        assert!(!is_camel_case("sample"));
        assert!(is_snake_case("environment_type"));
        assert!(is_snake_case("k"));
        assert!(!is_snake_case("K"));
        assert!(!is_snake_case("env type"));
    }
}
