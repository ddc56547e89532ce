//! Prefix maps and CURIE expansion/contraction.

use indexmap::IndexMap;

use crate::error::SchemaError;
use crate::metamodel::{is_absolute_uri, split_curie};

/// Declared associations from prefix to absolute URI base, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixMap {
    entries: IndexMap<String, String>,
}

/// Outcome of [`contract_uri`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Contracted {
    Curie(String),
    /// No declared base matched; the URI is returned unchanged.
    PassThrough(String),
}

impl Contracted {
    pub fn as_str(&self) -> &str {
        match self {
            Contracted::Curie(s) | Contracted::PassThrough(s) => s,
        }
    }

    pub fn is_pass_through(&self) -> bool {
        matches!(self, Contracted::PassThrough(_))
    }
}

impl PrefixMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a declaration. Re-declaring with the same base is a no-op; with a
    /// different base it is an error.
    pub fn insert(&mut self, prefix: &str, base: &str) -> Result<(), SchemaError> {
        if !is_absolute_uri(base) {
            return Err(SchemaError::InvalidUri {
                what: format!("prefix {prefix}"),
                value: base.to_string(),
            });
        }
        match self.entries.get(prefix) {
            Some(existing) if existing != base => Err(SchemaError::PrefixConflict {
                prefix: prefix.to_string(),
                first: existing.clone(),
                second: base.to_string(),
            }),
            Some(_) => Ok(()),
            None => {
                self.entries.insert(prefix.to_string(), base.to_string());
                Ok(())
            }
        }
    }

    pub fn union(&mut self, other: &IndexMap<String, String>) -> Result<(), SchemaError> {
        for (prefix, base) in other {
            self.insert(prefix, base)?;
        }
        Ok(())
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.entries.get(prefix).map(String::as_str)
    }

    pub fn contains(&self, prefix: &str) -> bool {
        self.entries.contains_key(prefix)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(p, b)| (p.as_str(), b.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_map(&self) -> &IndexMap<String, String> {
        &self.entries
    }
}

impl FromIterator<(String, String)> for PrefixMap {
    /// Later duplicates are ignored; use [`PrefixMap::insert`] for checked construction.
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        let mut entries = IndexMap::new();
        for (p, b) in iter {
            entries.entry(p).or_insert(b);
        }
        Self { entries }
    }
}

/// Expands `prefix:local` to the prefix's base followed by `local`.
pub fn expand_curie(prefixes: &PrefixMap, curie: &str) -> Result<String, SchemaError> {
    let (prefix, local) =
        split_curie(curie).ok_or_else(|| SchemaError::MalformedCurie(curie.to_string()))?;
    let base = prefixes
        .get(prefix)
        .ok_or_else(|| SchemaError::UndeclaredPrefix {
            prefix: prefix.to_string(),
            curie: curie.to_string(),
        })?;
    Ok(format!("{base}{local}"))
}

/// Contracts a URI using the longest matching base. Ties between equal
/// bases go to the first declared prefix.
pub fn contract_uri(prefixes: &PrefixMap, uri: &str) -> Contracted {
    let mut best: Option<(&str, &str)> = None;
    for (prefix, base) in prefixes.iter() {
        if uri.len() > base.len() && uri.starts_with(base) {
            match best {
                Some((_, b)) if b.len() >= base.len() => {}
                _ => best = Some((prefix, base)),
            }
        }
    }
    match best {
        Some((prefix, base)) => Contracted::Curie(format!("{prefix}:{}", &uri[base.len()..])),
        None => Contracted::PassThrough(uri.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(pairs: &[(&str, &str)]) -> PrefixMap {
        let mut m = PrefixMap::new();
        for (p, b) in pairs {
            m.insert(p, b).unwrap();
        }
        m
    }

    #[test]
    fn expand_examples() {
        let m = map(&[("ENVO", "http://example.org/envo/")]);
        assert_eq!(
            expand_curie(&m, "ENVO:00001998").unwrap(),
            "http://example.org/envo/00001998"
        );
        let m = map(&[("MIXS", "https://w3id.org/mixs/")]);
        assert_eq!(
            expand_curie(&m, "MIXS:0000009").unwrap(),
            "https://w3id.org/mixs/0000009"
        );
        assert!(matches!(
            expand_curie(&PrefixMap::new(), "nosuch:1"),
            Err(SchemaError::UndeclaredPrefix { .. })
        ));
        assert!(matches!(
            expand_curie(&m, "nocolon"),
            Err(SchemaError::MalformedCurie(_))
        ));
        assert!(matches!(
            expand_curie(&m, ":x"),
            Err(SchemaError::MalformedCurie(_))
        ));
    }

    #[test]
    fn contract_prefers_longest_base() {
        let m = map(&[
            ("ex", "http://example.org/"),
            ("exa", "http://example.org/a/"),
        ]);
        assert_eq!(
            contract_uri(&m, "http://example.org/a/thing"),
            Contracted::Curie("exa:thing".into())
        );
        assert_eq!(
            contract_uri(&m, "http://example.org/b"),
            Contracted::Curie("ex:b".into())
        );
        let unmatched = contract_uri(&m, "https://other.org/x");
        assert!(unmatched.is_pass_through());
        assert_eq!(unmatched.as_str(), "https://other.org/x");
    }

    #[test]
    fn prefix_union_policy() {
        let mut m = map(&[("linkml", "https://w3id.org/linkml/")]);
        m.insert("linkml", "https://w3id.org/linkml/").unwrap();
        assert_eq!(m.len(), 1);
        let err = m.insert("linkml", "https://elsewhere.org/").unwrap_err();
        assert!(matches!(err, SchemaError::PrefixConflict { .. }));
    }

    proptest! {
        #[test]
        fn contract_inverts_expand(
            words in proptest::collection::btree_set("[a-z]{1,8}", 1..8),
            locals in proptest::collection::vec("[A-Za-z0-9_]{1,12}", 1..5),
        ) {
            let mut m = PrefixMap::new();
            for w in &words {
                m.insert(&w.to_uppercase(), &format!("http://example.org/{w}/")).unwrap();
            }
            for (prefix, _) in m.iter() {
                for local in &locals {
                    let curie = format!("{prefix}:{local}");
                    let uri = expand_curie(&m, &curie).unwrap();
                    prop_assert_eq!(contract_uri(&m, &uri), Contracted::Curie(curie));
                }
            }
        }
    }
}
