use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::Serialize;

use super::{Edge, Entity, StoreError};
use crate::schema::Schema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Out,
    In,
    Both,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "out" => Ok(Direction::Out),
            "in" => Ok(Direction::In),
            "both" => Ok(Direction::Both),
            other => Err(format!("unknown direction `{other}` (expected out, in or both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor<'a> {
    pub edge: &'a Edge,
    pub entity: &'a Entity,
}

/// Read-only view of the graph, optionally restricted to one date.
#[derive(Debug, Clone)]
pub struct GraphSnapshot {
    as_of: Option<NaiveDate>,
    schema: Arc<Schema>,
    entities: Arc<BTreeMap<String, Entity>>,
    edges: Arc<BTreeMap<String, Edge>>,
    incident: Arc<BTreeMap<String, BTreeSet<String>>>,
}

impl GraphSnapshot {
    pub(super) fn from_parts(
        as_of: Option<NaiveDate>,
        schema: Arc<Schema>,
        entities: Arc<BTreeMap<String, Entity>>,
        edges: Arc<BTreeMap<String, Edge>>,
        incident: Arc<BTreeMap<String, BTreeSet<String>>>,
    ) -> Self {
        GraphSnapshot { as_of, schema, entities, edges, incident }
    }

    pub fn as_of(&self) -> Option<NaiveDate> {
        self.as_of
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.get(id)
    }

    /// Entities in id order.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    /// Edges in id order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entities.contains_key(id)
    }

    /// Edges touching `id`, in edge-id order. Self-loops appear once.
    pub fn incident_edges<'a>(&'a self, id: &str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.incident
            .get(id)
            .into_iter()
            .flat_map(|set| set.iter())
            .filter_map(|eid| self.edges.get(eid))
    }

    pub fn class_of(&self, id: &str) -> Option<&str> {
        self.entities.get(id).map(|e| e.class_name.as_str())
    }

    /// Adjacent edges and the entity at the far end, ordered by
    /// `(predicate, other id, edge id)`.
    pub fn neighbors(
        &self,
        id: &str,
        direction: Direction,
        predicates: Option<&BTreeSet<String>>,
    ) -> Result<Vec<Neighbor<'_>>, StoreError> {
        if !self.contains(id) {
            return Err(StoreError::NotFound(id.to_string()));
        }
        let mut out: Vec<Neighbor<'_>> = self
            .incident_edges(id)
            .filter(|e| match direction {
                Direction::Out => e.src == id,
                Direction::In => e.dst == id,
                Direction::Both => true,
            })
            .filter(|e| predicates.is_none_or(|p| p.contains(&e.predicate)))
            .filter_map(|edge| {
                let other = match direction {
                    Direction::Out => &edge.dst,
                    Direction::In => &edge.src,
                    Direction::Both => edge.other(id),
                };
                self.entities.get(other).map(|entity| Neighbor { edge, entity })
            })
            .collect();
        out.sort_by(|a, b| {
            (a.edge.predicate.as_str(), a.entity.id.as_str(), a.edge.id.as_str()).cmp(&(
                b.edge.predicate.as_str(),
                b.entity.id.as_str(),
                b.edge.id.as_str(),
            ))
        });
        Ok(out)
    }

    /// Targets of outgoing `predicate` edges from `id`.
    pub fn out_targets<'a>(&'a self, id: &'a str, predicate: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.incident_edges(id)
            .filter(move |e| e.src == id && e.predicate == predicate)
            .map(|e| e.dst.as_str())
    }

    /// Sources of incoming `predicate` edges into `id`.
    pub fn in_sources<'a>(&'a self, id: &'a str, predicate: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.incident_edges(id)
            .filter(move |e| e.dst == id && e.predicate == predicate)
            .map(|e| e.src.as_str())
    }
}
