//! Temporal property graph with schema-gated writes.
//!
//! The store owns copy-on-write maps: [`Store::snapshot`] hands out shared
//! references, and the next write clones whatever a live snapshot still
//! holds. Readers therefore never observe a later write.

mod jsonl;
mod ntriples;
mod snapshot;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::schema::{Schema, ValidationReport};
use crate::value::AttrMap;

pub use jsonl::{export_jsonl, import_jsonl, import_jsonl_into};
pub use ntriples::{export_ntriples, RDF_TYPE};
pub use snapshot::{Direction, GraphSnapshot, Neighbor};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entity {
    pub id: String,
    #[serde(rename = "class")]
    pub class_name: String,
    #[serde(rename = "attrs")]
    pub attributes: AttrMap,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid_from: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid_to: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Entity {
    pub fn new(id: impl Into<String>, class_name: impl Into<String>, attributes: AttrMap) -> Self {
        Entity {
            id: id.into(),
            class_name: class_name.into(),
            attributes,
            valid_from: None,
            valid_to: None,
            source: None,
        }
    }

    pub fn with_interval(mut self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Self {
        self.valid_from = from;
        self.valid_to = to;
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn valid_at(&self, date: NaiveDate) -> bool {
        covers(self.valid_from, self.valid_to, date)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub id: String,
    pub predicate: String,
    pub src: String,
    pub dst: String,
    #[serde(rename = "attrs")]
    pub attributes: AttrMap,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid_from: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid_to: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Edge {
    /// Edge with the conventional id `predicate|src|dst`.
    pub fn new(predicate: &str, src: &str, dst: &str) -> Self {
        Edge {
            id: edge_id(predicate, src, dst),
            predicate: predicate.to_string(),
            src: src.to_string(),
            dst: dst.to_string(),
            attributes: AttrMap::new(),
            valid_from: None,
            valid_to: None,
            source: None,
        }
    }

    pub fn with_attributes(mut self, attributes: AttrMap) -> Self {
        self.attributes = attributes;
        self
    }

    pub fn with_interval(mut self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Self {
        self.valid_from = from;
        self.valid_to = to;
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn valid_at(&self, date: NaiveDate) -> bool {
        covers(self.valid_from, self.valid_to, date)
    }

    /// The endpoint opposite `id`.
    pub fn other(&self, id: &str) -> &str {
        if self.src == id {
            &self.dst
        } else {
            &self.src
        }
    }
}

pub fn edge_id(predicate: &str, src: &str, dst: &str) -> String {
    format!("{predicate}|{src}|{dst}")
}

/// Half-open interval membership; a missing bound is unbounded.
pub fn covers(from: Option<NaiveDate>, to: Option<NaiveDate>, date: NaiveDate) -> bool {
    from.is_none_or(|f| f <= date) && to.is_none_or(|t| date < t)
}

/// `[a-z]+:[A-Za-z0-9._-]+`
pub fn is_valid_entity_id(id: &str) -> bool {
    let Some((prefix, rest)) = id.split_once(':') else {
        return false;
    };
    !prefix.is_empty()
        && prefix.bytes().all(|b| b.is_ascii_lowercase())
        && !rest.is_empty()
        && rest.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-'))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UpsertResult {
    Created,
    Replaced,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoreError {
    #[error("schema violation on `{id}`: {report}")]
    SchemaViolation { id: String, report: ValidationReport },
    #[error("entity `{id}` is a `{existing}` and cannot become a `{requested}`")]
    ClassChangeRejected { id: String, existing: String, requested: String },
    #[error("edge `{edge}` references missing entity `{endpoint}`")]
    DanglingEndpoint { edge: String, endpoint: String },
    #[error("`{0}` not found")]
    NotFound(String),
    #[error("invalid id `{0}`")]
    InvalidId(String),
    #[error("`{0}` has valid_from after valid_to")]
    InvalidInterval(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("base IRI `{0}` must be absolute and end with `/`")]
    InvalidBaseIri(String),
}

/// A member that no longer passes validation, as found by [`Store::revalidate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inconsistency {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Store {
    schema: Arc<Schema>,
    entities: Arc<BTreeMap<String, Entity>>,
    edges: Arc<BTreeMap<String, Edge>>,
    incident: Arc<BTreeMap<String, BTreeSet<String>>>,
}

impl Default for Store {
    fn default() -> Self {
        Store::new(Schema::default())
    }
}

impl Store {
    pub fn new(schema: Schema) -> Self {
        Store {
            schema: Arc::new(schema),
            entities: Arc::default(),
            edges: Arc::default(),
            incident: Arc::default(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Swap in an extended schema. Stored members stay valid as long as the
    /// new schema only adds layers.
    pub fn set_schema(&mut self, schema: Schema) {
        self.schema = Arc::new(schema);
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn upsert_entity(&mut self, entity: Entity) -> Result<UpsertResult, StoreError> {
        if !is_valid_entity_id(&entity.id) {
            return Err(StoreError::InvalidId(entity.id));
        }
        check_interval(&entity.id, entity.valid_from, entity.valid_to)?;
        let report = self.schema.validate_entity(&entity.class_name, &entity.attributes);
        if !report.ok {
            return Err(StoreError::SchemaViolation { id: entity.id, report });
        }
        let result = match self.entities.get(&entity.id) {
            Some(existing) if existing.class_name != entity.class_name => {
                return Err(StoreError::ClassChangeRejected {
                    id: entity.id.clone(),
                    existing: existing.class_name.clone(),
                    requested: entity.class_name,
                });
            }
            Some(existing) if *existing == entity => return Ok(UpsertResult::Replaced),
            Some(_) => UpsertResult::Replaced,
            None => UpsertResult::Created,
        };
        Arc::make_mut(&mut self.entities).insert(entity.id.clone(), entity);
        Ok(result)
    }

    pub fn upsert_edge(&mut self, edge: Edge) -> Result<UpsertResult, StoreError> {
        if edge.id.is_empty() {
            return Err(StoreError::InvalidId(edge.id));
        }
        check_interval(&edge.id, edge.valid_from, edge.valid_to)?;
        let classes = [&edge.src, &edge.dst].map(|end| {
            self.entities.get(end.as_str()).map(|e| e.class_name.clone()).ok_or_else(|| {
                StoreError::DanglingEndpoint { edge: edge.id.clone(), endpoint: end.clone() }
            })
        });
        let [src_class, dst_class] = classes;
        let (src_class, dst_class) = (src_class?, dst_class?);
        let report =
            self.schema.validate_edge(&edge.predicate, &src_class, &dst_class, &edge.attributes);
        if !report.ok {
            return Err(StoreError::SchemaViolation { id: edge.id, report });
        }

        let result = match self.edges.get(&edge.id) {
            Some(existing) if *existing == edge => return Ok(UpsertResult::Replaced),
            Some(_) => UpsertResult::Replaced,
            None => UpsertResult::Created,
        };
        if let Some(old) = Arc::make_mut(&mut self.edges).insert(edge.id.clone(), edge.clone()) {
            self.unlink(&old);
        }
        let incident = Arc::make_mut(&mut self.incident);
        incident.entry(edge.src.clone()).or_default().insert(edge.id.clone());
        incident.entry(edge.dst.clone()).or_default().insert(edge.id.clone());
        Ok(result)
    }

    fn unlink(&mut self, edge: &Edge) {
        let incident = Arc::make_mut(&mut self.incident);
        for end in [&edge.src, &edge.dst] {
            if let Some(set) = incident.get_mut(end) {
                set.remove(&edge.id);
                if set.is_empty() {
                    incident.remove(end);
                }
            }
        }
    }

    /// Remove an entity and every incident edge. Returns the number of edges
    /// removed.
    pub fn delete_entity(&mut self, id: &str) -> Result<usize, StoreError> {
        if !self.entities.contains_key(id) {
            return Err(StoreError::NotFound(id.to_string()));
        }
        let incident: Vec<String> =
            self.incident.get(id).map(|s| s.iter().cloned().collect()).unwrap_or_default();
        for edge_id in &incident {
            if let Some(edge) = Arc::make_mut(&mut self.edges).remove(edge_id) {
                self.unlink(&edge);
            }
        }
        Arc::make_mut(&mut self.entities).remove(id);
        Ok(incident.len())
    }

    /// Immutable view. With `as_of`, only members whose interval covers the
    /// date are kept, and edges additionally need both endpoints kept.
    pub fn snapshot(&self, as_of: Option<NaiveDate>) -> GraphSnapshot {
        match as_of {
            None => GraphSnapshot::from_parts(
                None,
                self.schema.clone(),
                self.entities.clone(),
                self.edges.clone(),
                self.incident.clone(),
            ),
            Some(date) => {
                let entities: BTreeMap<String, Entity> = self
                    .entities
                    .iter()
                    .filter(|(_, e)| e.valid_at(date))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                let edges: BTreeMap<String, Edge> = self
                    .edges
                    .iter()
                    .filter(|(_, e)| {
                        e.valid_at(date)
                            && entities.contains_key(&e.src)
                            && entities.contains_key(&e.dst)
                    })
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                let mut incident: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
                for e in edges.values() {
                    incident.entry(e.src.clone()).or_default().insert(e.id.clone());
                    incident.entry(e.dst.clone()).or_default().insert(e.id.clone());
                }
                GraphSnapshot::from_parts(
                    Some(date),
                    self.schema.clone(),
                    Arc::new(entities),
                    Arc::new(edges),
                    Arc::new(incident),
                )
            }
        }
    }

    /// Re-check every stored member against the current schema and the
    /// referential-integrity rule.
    pub fn revalidate(&self) -> Vec<Inconsistency> {
        let mut out = Vec::new();
        for e in self.entities.values() {
            let r = self.schema.validate_entity(&e.class_name, &e.attributes);
            if !r.ok {
                out.push(Inconsistency { id: e.id.clone(), message: r.to_string() });
            }
            if !is_valid_entity_id(&e.id) {
                out.push(Inconsistency { id: e.id.clone(), message: "invalid id".into() });
            }
        }
        for e in self.edges.values() {
            let (Some(src), Some(dst)) = (self.entities.get(&e.src), self.entities.get(&e.dst))
            else {
                out.push(Inconsistency { id: e.id.clone(), message: "dangling endpoint".into() });
                continue;
            };
            let r = self.schema.validate_edge(
                &e.predicate,
                &src.class_name,
                &dst.class_name,
                &e.attributes,
            );
            if !r.ok {
                out.push(Inconsistency { id: e.id.clone(), message: r.to_string() });
            }
        }
        out
    }
}

fn check_interval(
    id: &str,
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
) -> Result<(), StoreError> {
    match (from, to) {
        (Some(f), Some(t)) if f > t => Err(StoreError::InvalidInterval(id.to_string())),
        _ => Ok(()),
    }
}
