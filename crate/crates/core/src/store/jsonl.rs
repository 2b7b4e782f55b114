//! Canonical JSON Lines exchange format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Edge, Entity, GraphSnapshot, Store, StoreError};
use crate::schema::Schema;
use crate::value::{format_date, parse_date, AttrMap, AttrValue};

#[derive(Serialize)]
struct EntityLine<'a> {
    kind: &'static str,
    id: &'a str,
    class: &'a str,
    attrs: &'a AttrMap,
    #[serde(skip_serializing_if = "Option::is_none")]
    valid_from: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    valid_to: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<&'a str>,
}

#[derive(Serialize)]
struct EdgeLine<'a> {
    kind: &'static str,
    id: &'a str,
    predicate: &'a str,
    src: &'a str,
    dst: &'a str,
    attrs: &'a AttrMap,
    #[serde(skip_serializing_if = "Option::is_none")]
    valid_from: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    valid_to: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<&'a str>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    kind: String,
    id: String,
    class: Option<String>,
    predicate: Option<String>,
    src: Option<String>,
    dst: Option<String>,
    #[serde(default)]
    attrs: BTreeMap<String, serde_json::Value>,
    valid_from: Option<String>,
    valid_to: Option<String>,
    source: Option<String>,
}

/// Serialize a snapshot in canonical form: entities by id, then edges by id,
/// one LF-terminated record per line.
pub fn export_jsonl(snapshot: &GraphSnapshot) -> String {
    let mut out = String::new();
    for e in snapshot.entities() {
        let line = EntityLine {
            kind: "entity",
            id: &e.id,
            class: &e.class_name,
            attrs: &e.attributes,
            valid_from: e.valid_from.map(format_date),
            valid_to: e.valid_to.map(format_date),
            source: e.source.as_deref(),
        };
        out.push_str(&serde_json::to_string(&line).expect("entity line serializes"));
        out.push('\n');
    }
    for e in snapshot.edges() {
        let line = EdgeLine {
            kind: "edge",
            id: &e.id,
            predicate: &e.predicate,
            src: &e.src,
            dst: &e.dst,
            attrs: &e.attributes,
            valid_from: e.valid_from.map(format_date),
            valid_to: e.valid_to.map(format_date),
            source: e.source.as_deref(),
        };
        out.push_str(&serde_json::to_string(&line).expect("edge line serializes"));
        out.push('\n');
    }
    out
}

/// Load a JSONL stream into a fresh store under `schema`.
pub fn import_jsonl(schema: Schema, text: &str) -> Result<Store, StoreError> {
    let mut store = Store::new(schema);
    import_jsonl_into(&mut store, text)?;
    Ok(store)
}

/// Load a JSONL stream into `store`. Entities are written before edges, so
/// record order in the stream does not matter. On error the store is left
/// as it was.
pub fn import_jsonl_into(store: &mut Store, text: &str) -> Result<(), StoreError> {
    let mut entities = Vec::new();
    let mut edges = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.is_empty() {
            continue;
        }
        let parse_err = |message: String| StoreError::Parse { line: line_no, message };
        let line: RawLine = serde_json::from_str(raw).map_err(|e| parse_err(e.to_string()))?;
        let valid_from = opt_date(line.valid_from.as_deref()).map_err(parse_err)?;
        let valid_to = opt_date(line.valid_to.as_deref()).map_err(parse_err)?;
        match line.kind.as_str() {
            "entity" => {
                if line.predicate.is_some() || line.src.is_some() || line.dst.is_some() {
                    return Err(parse_err("entity record carries edge fields".into()));
                }
                let class = line.class.ok_or_else(|| parse_err("missing `class`".into()))?;
                let attributes = decode_attrs(store.schema(), &class, &line.attrs)
                    .map_err(parse_err)?;
                entities.push((
                    line_no,
                    Entity {
                        id: line.id,
                        class_name: class,
                        attributes,
                        valid_from,
                        valid_to,
                        source: line.source,
                    },
                ));
            }
            "edge" => {
                if line.class.is_some() {
                    return Err(parse_err("edge record carries `class`".into()));
                }
                let (Some(predicate), Some(src), Some(dst)) = (line.predicate, line.src, line.dst)
                else {
                    return Err(parse_err("edge record needs `predicate`, `src` and `dst`".into()));
                };
                let attributes = decode_attrs(store.schema(), &predicate, &line.attrs)
                    .map_err(parse_err)?;
                edges.push(Edge {
                    id: line.id,
                    predicate,
                    src,
                    dst,
                    attributes,
                    valid_from,
                    valid_to,
                    source: line.source,
                });
            }
            other => return Err(parse_err(format!("unknown record kind `{other}`"))),
        }
    }

    let mut staged = store.clone();
    for (_, e) in entities {
        staged.upsert_entity(e)?;
    }
    for e in edges {
        staged.upsert_edge(e)?;
    }
    *store = staged;
    Ok(())
}

fn opt_date(value: Option<&str>) -> Result<Option<chrono::NaiveDate>, String> {
    value
        .map(|s| parse_date(s).ok_or_else(|| format!("invalid date `{s}` (expected YYYY-MM-DD)")))
        .transpose()
}

fn decode_attrs(
    schema: &Schema,
    owner: &str,
    raw: &BTreeMap<String, serde_json::Value>,
) -> Result<AttrMap, String> {
    raw.iter()
        .map(|(k, v)| {
            AttrValue::from_json(v, schema.attribute_kind(owner, k))
                .map(|value| (k.clone(), value))
                .ok_or_else(|| format!("attribute `{k}` must be a scalar"))
        })
        .collect()
}
