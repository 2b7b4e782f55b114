//! Competency-question queries and relationship explanation.
//!
//! Every query reads a [`GraphSnapshot`] and nothing else. "Area" arguments
//! denote a `KnowledgeArea` together with its descendants, where
//! `broaderThan(parent, child)` edges define the taxonomy.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::schema::KNOWLEDGE_AREA;
use crate::store::GraphSnapshot;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("unknown knowledge area `{0}`")]
    UnknownArea(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepDirection {
    /// The edge was traversed from its source to its target.
    #[serde(rename = "→")]
    Forward,
    #[serde(rename = "←")]
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathStep {
    pub from: String,
    pub predicate: String,
    pub direction: StepDirection,
    pub to: String,
    pub edge: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExplanationPath {
    pub found: bool,
    pub length: usize,
    pub steps: Vec<PathStep>,
}

impl ExplanationPath {
    fn not_found() -> Self {
        ExplanationPath { found: false, length: 0, steps: Vec::new() }
    }

    /// Entities visited in order, starting with the source.
    pub fn entities(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.steps.first().map(|s| s.from.as_str()).into_iter().collect();
        out.extend(self.steps.iter().map(|s| s.to.as_str()));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankedOrg {
    pub org: String,
    pub score: u64,
}

fn require(snapshot: &GraphSnapshot, id: &str) -> Result<(), QueryError> {
    if snapshot.contains(id) {
        Ok(())
    } else {
        Err(QueryError::UnknownEntity(id.to_string()))
    }
}

/// The area itself plus every area reachable through `broaderThan`.
pub fn area_closure(snapshot: &GraphSnapshot, area: &str) -> Result<BTreeSet<String>, QueryError> {
    if snapshot.class_of(area) != Some(KNOWLEDGE_AREA) {
        return Err(QueryError::UnknownArea(area.to_string()));
    }
    let mut seen = BTreeSet::from([area.to_string()]);
    let mut queue = VecDeque::from([area.to_string()]);
    while let Some(current) = queue.pop_front() {
        for child in snapshot.out_targets(&current, "broaderThan") {
            if seen.insert(child.to_string()) {
                queue.push_back(child.to_string());
            }
        }
    }
    Ok(seen)
}

fn collect<'a>(ids: impl Iterator<Item = &'a str>) -> BTreeSet<String> {
    ids.map(str::to_string).collect()
}

/// Organizations employing authors of articles classified in the area.
pub fn orgs_in_area_scientific(
    snapshot: &GraphSnapshot,
    area: &str,
) -> Result<BTreeSet<String>, QueryError> {
    let mut out = BTreeSet::new();
    for a in area_closure(snapshot, area)? {
        for article in snapshot.in_sources(&a, "articleClassifiedIn") {
            for talent in snapshot.in_sources(article, "authorOf") {
                out.extend(collect(snapshot.in_sources(talent, "employs")));
            }
        }
    }
    Ok(out)
}

pub fn shared_patents(
    snapshot: &GraphSnapshot,
    org_x: &str,
    org_y: &str,
) -> Result<BTreeSet<String>, QueryError> {
    require(snapshot, org_x)?;
    require(snapshot, org_y)?;
    let x = collect(snapshot.out_targets(org_x, "applicantOf"));
    let y = collect(snapshot.out_targets(org_y, "applicantOf"));
    Ok(x.intersection(&y).cloned().collect())
}

pub fn patenting_technologies(
    snapshot: &GraphSnapshot,
    org: &str,
) -> Result<BTreeSet<String>, QueryError> {
    require(snapshot, org)?;
    let mut out = BTreeSet::new();
    for patent in snapshot.out_targets(org, "applicantOf") {
        out.extend(collect(snapshot.out_targets(patent, "patentClassifiedIn")));
    }
    Ok(out)
}

/// Organizations awarded a `Funding` whose `year` equals `year`.
pub fn funded_orgs(snapshot: &GraphSnapshot, year: i64) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for f in snapshot.entities().filter(|e| e.class_name == "Funding") {
        if f.attributes.get("year").and_then(|v| v.as_integer()) == Some(year) {
            out.extend(collect(snapshot.out_targets(&f.id, "awardedTo")));
        }
    }
    out
}

pub fn hiring_orgs(snapshot: &GraphSnapshot, area: &str) -> Result<BTreeSet<String>, QueryError> {
    let mut out = BTreeSet::new();
    for a in area_closure(snapshot, area)? {
        for talent in snapshot.in_sources(&a, "talentClassifiedIn") {
            out.extend(collect(snapshot.in_sources(talent, "employs")));
        }
    }
    Ok(out)
}

/// Per-organization evidence inside an area: patents, articles via employees,
/// and projects.
#[derive(Debug, Default, Clone)]
pub(crate) struct AreaManifestations {
    pub patents: BTreeMap<String, BTreeSet<String>>,
    pub articles: BTreeMap<String, BTreeSet<String>>,
    pub projects: BTreeMap<String, BTreeSet<String>>,
}

impl AreaManifestations {
    fn gather(snapshot: &GraphSnapshot, closure: &BTreeSet<String>) -> Self {
        let mut m = AreaManifestations::default();
        for a in closure {
            for patent in snapshot.in_sources(a, "patentClassifiedIn") {
                for org in snapshot.in_sources(patent, "applicantOf") {
                    m.patents.entry(org.to_string()).or_default().insert(patent.to_string());
                }
            }
            for article in snapshot.in_sources(a, "articleClassifiedIn") {
                for talent in snapshot.in_sources(article, "authorOf") {
                    for org in snapshot.in_sources(talent, "employs") {
                        m.articles.entry(org.to_string()).or_default().insert(article.to_string());
                    }
                }
            }
            for project in snapshot.in_sources(a, "projectClassifiedIn") {
                for org in snapshot.in_sources(project, "participatesIn") {
                    m.projects.entry(org.to_string()).or_default().insert(project.to_string());
                }
            }
        }
        m
    }

    fn score(&self, org: &str) -> u64 {
        [&self.patents, &self.articles, &self.projects]
            .iter()
            .map(|m| m.get(org).map_or(0, |s| s.len() as u64))
            .sum()
    }

    fn orgs(&self) -> BTreeSet<&str> {
        self.patents
            .keys()
            .chain(self.articles.keys())
            .chain(self.projects.keys())
            .map(String::as_str)
            .collect()
    }
}

/// Organizations already working with `org` through a shared project or a
/// co-applied patent.
fn existing_partners(snapshot: &GraphSnapshot, org: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for project in snapshot.out_targets(org, "participatesIn") {
        out.extend(collect(snapshot.in_sources(project, "participatesIn")));
    }
    for patent in snapshot.out_targets(org, "applicantOf") {
        out.extend(collect(snapshot.in_sources(patent, "applicantOf")));
    }
    out
}

/// Potential partners of `org` in the area, best evidence first.
pub fn collaboration_candidates(
    snapshot: &GraphSnapshot,
    org: &str,
    area: &str,
) -> Result<Vec<RankedOrg>, QueryError> {
    require(snapshot, org)?;
    let closure = area_closure(snapshot, area)?;
    let manifestations = AreaManifestations::gather(snapshot, &closure);
    let partners = existing_partners(snapshot, org);
    let mut ranked: Vec<RankedOrg> = manifestations
        .orgs()
        .into_iter()
        .filter(|o| *o != org && !partners.contains(*o))
        .map(|o| RankedOrg { org: o.to_string(), score: manifestations.score(o) })
        .filter(|r| r.score > 0)
        .collect();
    ranked.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.org.cmp(&b.org)));
    Ok(ranked)
}

/// Shortest undirected path from `src` to `dst`. Among shortest paths the one
/// with the bytewise-smallest sequence of edge ids is returned.
pub fn explain_relationship(
    snapshot: &GraphSnapshot,
    src: &str,
    dst: &str,
) -> Result<ExplanationPath, QueryError> {
    require(snapshot, src)?;
    require(snapshot, dst)?;
    if src == dst {
        return Ok(ExplanationPath { found: true, length: 0, steps: Vec::new() });
    }

    // distances to dst
    let mut dist: BTreeMap<&str, usize> = BTreeMap::from([(dst, 0)]);
    let mut queue = VecDeque::from([dst]);
    while let Some(u) = queue.pop_front() {
        if u == src {
            break;
        }
        let d = dist[u];
        for e in snapshot.incident_edges(u) {
            let v = e.other(u);
            if v != u && !dist.contains_key(v) {
                dist.insert(v, d + 1);
                queue.push_back(v);
            }
        }
    }
    let Some(&total) = dist.get(src) else {
        return Ok(ExplanationPath::not_found());
    };

    // Greedy descent: edge ids are unique, so taking the smallest admissible
    // edge at each hop yields the lexicographically smallest id sequence.
    let mut steps = Vec::with_capacity(total);
    let mut current = src;
    for remaining in (1..=total).rev() {
        let edge = snapshot
            .incident_edges(current)
            .filter(|e| {
                let v = e.other(current);
                v != current && dist.get(v) == Some(&(remaining - 1))
            })
            .min_by(|a, b| a.id.cmp(&b.id))
            .expect("a neighbor one hop closer exists on a shortest path");
        let next = edge.other(current);
        steps.push(PathStep {
            from: current.to_string(),
            predicate: edge.predicate.clone(),
            direction: if edge.src == current {
                StepDirection::Forward
            } else {
                StepDirection::Backward
            },
            to: next.to_string(),
            edge: edge.id.clone(),
        });
        current = next;
    }
    Ok(ExplanationPath { found: true, length: steps.len(), steps })
}
