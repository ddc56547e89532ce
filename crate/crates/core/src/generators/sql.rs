use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use super::{GeneratorError, GeneratorOptions};
use crate::induction::{CompiledSchema, InducedSlot, RangeRef};
use crate::metamodel::BaseKind;

const SURROGATE: &str = "_id";

/// Generic SQL DDL: one table per concrete class, one auxiliary table per
/// multivalued slot, foreign keys inline.
///
/// Tables are ordered so that referenced tables come first; ties and
/// cycles fall back to declaration order. Auxiliary tables come last.
pub fn gen_sql_ddl(schema: &CompiledSchema, opts: &GeneratorOptions) -> Result<String, GeneratorError> {
    if opts.dialect != "generic" {
        return Err(GeneratorError::UnsupportedDialect(opts.dialect.clone()));
    }
    let classes: Vec<&str> = schema.concrete_classes().map(|c| c.name.as_str()).collect();
    let mut main = HashMap::new();
    let mut deps: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    let mut aux = Vec::new();

    for &class in &classes {
        let Some(key) = table_key(schema, class, opts) else {
            main.insert(class, String::new());
            continue;
        };
        let mut columns = Vec::new();
        if key.surrogate {
            columns.push(format!("{SURROGATE} INTEGER PRIMARY KEY"));
        }
        for slot in schema.induced_slots(class).unwrap_or_default() {
            if slot.multivalued {
                aux.push(aux_table(schema, class, &key, slot, opts)?);
                continue;
            }
            let mut col = format!("{} {}", quote(&slot.name), column_type(schema, slot, opts, class)?);
            if slot.identifier {
                col.push_str(" PRIMARY KEY");
            } else if slot.required {
                col.push_str(" NOT NULL");
            }
            col.push_str(&constraints(schema, slot, opts, class)?);
            if let RangeRef::Class(target) = &slot.effective_range {
                if target != class && classes.contains(&target.as_str()) {
                    deps.entry(class).or_default().insert(target);
                }
            }
            columns.push(col);
        }
        if columns.is_empty() {
            columns.push(format!("{SURROGATE} INTEGER PRIMARY KEY"));
        }
        main.insert(class, format!("CREATE TABLE {} ({});", quote(class), columns.join(", ")));
    }

    let mut out = String::new();
    for class in topological(&classes, &deps) {
        if !main[class].is_empty() {
            let _ = writeln!(out, "{}", main[class]);
        }
    }
    for stmt in aux {
        let _ = writeln!(out, "{stmt}");
    }
    Ok(out)
}

struct Key {
    column: String,
    ty: &'static str,
    surrogate: bool,
}

fn table_key(schema: &CompiledSchema, class: &str, opts: &GeneratorOptions) -> Option<Key> {
    match schema.identifier_slot(class) {
        Some(id) => Some(Key {
            column: id.name.clone(),
            ty: scalar_type(schema, id),
            surrogate: false,
        }),
        None if opts.surrogate_keys => Some(Key {
            column: SURROGATE.to_string(),
            ty: "INTEGER",
            surrogate: true,
        }),
        // no key at all: the table is still emitted, just unreferenceable
        None => Some(Key {
            column: String::new(),
            ty: "",
            surrogate: false,
        }),
    }
}

fn base_type(base: BaseKind) -> &'static str {
    match base {
        BaseKind::Integer => "INTEGER",
        BaseKind::Float => "REAL",
        BaseKind::Boolean => "BOOLEAN",
        BaseKind::String | BaseKind::Uri | BaseKind::Curie | BaseKind::Date | BaseKind::Datetime => "TEXT",
    }
}

fn scalar_type(schema: &CompiledSchema, slot: &InducedSlot) -> &'static str {
    match &slot.effective_range {
        RangeRef::Type { base, .. } => base_type(*base),
        RangeRef::Enum(_) => "TEXT",
        RangeRef::Class(c) => match schema.identifier_slot(c) {
            Some(id) if id.name != slot.name || id.owner_class != slot.owner_class => scalar_type(schema, id),
            _ => "INTEGER",
        },
    }
}

fn column_type(
    schema: &CompiledSchema,
    slot: &InducedSlot,
    opts: &GeneratorOptions,
    class: &str,
) -> Result<&'static str, GeneratorError> {
    if let RangeRef::Class(target) = &slot.effective_range {
        let key = referenced_key(schema, class, slot, target, opts)?;
        return Ok(key.ty);
    }
    Ok(scalar_type(schema, slot))
}

fn referenced_key(
    schema: &CompiledSchema,
    class: &str,
    slot: &InducedSlot,
    target: &str,
    opts: &GeneratorOptions,
) -> Result<Key, GeneratorError> {
    match table_key(schema, target, opts) {
        Some(key) if !key.column.is_empty() => Ok(key),
        _ => Err(GeneratorError::NoKey {
            class: class.to_string(),
            slot: slot.name.clone(),
            range: target.to_string(),
        }),
    }
}

/// Inline `REFERENCES` and `CHECK` clauses for a value column.
fn constraints(
    schema: &CompiledSchema,
    slot: &InducedSlot,
    opts: &GeneratorOptions,
    class: &str,
) -> Result<String, GeneratorError> {
    let column = quote(&slot.name);
    Ok(match &slot.effective_range {
        RangeRef::Class(target) => {
            let key = referenced_key(schema, class, slot, target, opts)?;
            // abstract classes have no table to reference
            if schema.class(target).is_some_and(|c| c.abstract_) {
                String::new()
            } else {
                format!(" REFERENCES {}({})", quote(target), quote(&key.column))
            }
        }
        RangeRef::Enum(e) => {
            let texts: Vec<String> = schema.source.enums[e]
                .permissible_values
                .keys()
                .map(|t| format!("'{}'", t.replace('\'', "''")))
                .collect();
            if texts.is_empty() {
                String::new()
            } else {
                format!(" CHECK ({column} IN ({}))", texts.join(", "))
            }
        }
        RangeRef::Type { .. } => String::new(),
    })
}

fn aux_table(
    schema: &CompiledSchema,
    class: &str,
    key: &Key,
    slot: &InducedSlot,
    opts: &GeneratorOptions,
) -> Result<String, GeneratorError> {
    if key.column.is_empty() {
        return Err(GeneratorError::NoKey {
            class: class.to_string(),
            slot: slot.name.clone(),
            range: class.to_string(),
        });
    }
    let owner = format!("{class}_{}", key.column);
    let owner_col = format!(
        "{} {} NOT NULL REFERENCES {}({})",
        quote(&owner),
        key.ty,
        quote(class),
        quote(&key.column)
    );
    let value_col = format!(
        "{} {} NOT NULL{}",
        quote(&slot.name),
        column_type(schema, slot, opts, class)?,
        constraints(schema, slot, opts, class)?
    );
    Ok(format!(
        "CREATE TABLE {} ({owner_col}, {value_col});",
        quote(&format!("{class}_{}", slot.name))
    ))
}

/// Kahn's algorithm, always picking the earliest declared ready table.
fn topological<'a>(classes: &[&'a str], deps: &HashMap<&'a str, BTreeSet<&'a str>>) -> Vec<&'a str> {
    let mut done: Vec<&str> = Vec::new();
    let mut pending: Vec<&str> = classes.to_vec();
    while !pending.is_empty() {
        let ready = pending.iter().position(|c| {
            deps.get(c)
                .is_none_or(|d| d.iter().all(|t| done.contains(t)))
        });
        // a reference cycle: emit the earliest remaining table
        let idx = ready.unwrap_or(0);
        done.push(pending.remove(idx));
    }
    done
}

/// Identifiers are quoted only when they are not plain words.
fn quote(name: &str) -> String {
    let plain = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}
