//! Deterministic entity resolution.
//!
//! Names are reduced to a [`ResolutionKey`]: NFKC, case folding, whitespace
//! collapsing and stripping of surrounding `.`, `,` and `"`. No fuzzy
//! matching is attempted.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use unicode_normalization::UnicodeNormalization;

use crate::store::Store;
use crate::value::AttrValue;

use super::IngestError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ResolutionKey {
    pub class_name: String,
    pub key: String,
}

impl ResolutionKey {
    pub fn new(class_name: &str, display_name: &str) -> Option<Self> {
        let key = normalize_name(display_name);
        (!key.is_empty()).then(|| ResolutionKey { class_name: class_name.to_string(), key })
    }
}

pub fn normalize_name(name: &str) -> String {
    let nfkc: String = name.nfkc().collect();
    let folded = caseless::default_case_fold_str(&nfkc);
    let collapsed = folded.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_matches(|c: char| matches!(c, '.' | ',' | '"') || c.is_whitespace())
        .to_string()
}

pub fn id_prefix(class_name: &str) -> &'static str {
    match class_name {
        "Organization" => "org",
        "Talent" => "talent",
        "Patent" => "patent",
        "Article" => "article",
        "Project" => "proj",
        "Funding" => "funding",
        "KnowledgeArea" => "area",
        "Event" => "event",
        "Connector" => "connector",
        "InnovationEcosystem" => "eco",
        _ => "x",
    }
}

/// Map an externally supplied identifier onto the id alphabet: every
/// character outside `[A-Za-z0-9._-]` becomes `-`.
pub fn sanitize_explicit(raw: &str) -> String {
    raw.trim()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '-' })
        .collect()
}

/// Spaces become `-`; any other character outside `[a-z0-9.-]` is written as
/// `_<hex codepoint>_`.
fn encode_key(key: &str) -> String {
    let mut out = String::with_capacity(key.len());
    for c in key.chars() {
        match c {
            ' ' => out.push('-'),
            c if c.is_ascii_alphanumeric() || c == '.' || c == '-' => out.push(c),
            c => {
                let _ = write!(out, "_{:x}_", c as u32);
            }
        }
    }
    out
}

/// Pure id derivation: an explicit id wins, otherwise the id comes from the
/// normalized display name.
pub fn resolve(
    class_name: &str,
    explicit_id: Option<&str>,
    display_name: &str,
) -> Result<String, IngestError> {
    let prefix = id_prefix(class_name);
    if let Some(explicit) = explicit_id.map(sanitize_explicit).filter(|s| !s.is_empty()) {
        return Ok(format!("{prefix}:{explicit}"));
    }
    let key = ResolutionKey::new(class_name, display_name).ok_or(IngestError::EmptyName)?;
    Ok(format!("{prefix}:auto-{}", encode_key(&key.key)))
}

/// Split a person or organization cell of the form `Display Name <id>`.
pub fn split_named_cell(cell: &str) -> (&str, Option<&str>) {
    let cell = cell.trim();
    if let Some(body) = cell.strip_suffix('>') {
        if let Some((name, id)) = body.rsplit_once('<') {
            let id = id.trim();
            if !id.is_empty() {
                return (name.trim(), Some(id));
            }
        }
    }
    (cell, None)
}

fn is_auto(id: &str) -> bool {
    id.split_once(':').is_some_and(|(_, rest)| rest.starts_with("auto-"))
}

/// Name index over stored entities that carry a `name` attribute. When several
/// entities share a key, explicit ids beat derived ones, then the smallest id
/// wins.
#[derive(Debug, Default, Clone)]
pub struct NameIndex {
    by_key: BTreeMap<ResolutionKey, String>,
}

impl NameIndex {
    pub fn build(store: &Store) -> Self {
        let mut index = NameIndex::default();
        for e in store.entities() {
            if let Some(AttrValue::Text(name)) = e.attributes.get("name") {
                index.offer(&e.class_name, name, &e.id);
            }
        }
        index
    }

    pub fn offer(&mut self, class_name: &str, name: &str, id: &str) {
        let Some(key) = ResolutionKey::new(class_name, name) else {
            return;
        };
        let rank = |id: &str| (is_auto(id), id.to_string());
        match self.by_key.get(&key) {
            Some(current) if rank(current) <= rank(id) => {}
            _ => {
                self.by_key.insert(key, id.to_string());
            }
        }
    }

    pub fn lookup(&self, class_name: &str, name: &str) -> Option<&str> {
        let key = ResolutionKey::new(class_name, name)?;
        self.by_key.get(&key).map(String::as_str)
    }

    /// Explicit id, else an existing entity with the same key, else the
    /// derived id.
    pub fn resolve(
        &self,
        class_name: &str,
        explicit_id: Option<&str>,
        display_name: &str,
    ) -> Result<String, IngestError> {
        let has_explicit = explicit_id.is_some_and(|s| !sanitize_explicit(s).is_empty());
        if !has_explicit {
            if let Some(found) = self.lookup(class_name, display_name) {
                return Ok(found.to_string());
            }
        }
        resolve(class_name, explicit_id, display_name)
    }
}
