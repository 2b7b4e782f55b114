//! Network indicators and the knowledge-manifestation indicator.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::store::GraphSnapshot;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("weights must be finite and non-negative")]
    InvalidWeights,
}

/// Undirected degree; parallel edges count individually, self-loops twice.
pub fn degree_centrality(snapshot: &GraphSnapshot) -> BTreeMap<String, u64> {
    let mut degree: BTreeMap<String, u64> =
        snapshot.entities().map(|e| (e.id.clone(), 0)).collect();
    for e in snapshot.edges() {
        for end in [&e.src, &e.dst] {
            if let Some(d) = degree.get_mut(end) {
                *d += 1;
            }
        }
    }
    degree
}

/// Index-based simple undirected projection: no loops, no parallel edges.
struct SimpleGraph {
    ids: Vec<String>,
    adjacency: Vec<Vec<usize>>,
}

impl SimpleGraph {
    fn project(snapshot: &GraphSnapshot) -> Self {
        let ids: Vec<String> = snapshot.entities().map(|e| e.id.clone()).collect();
        let index: BTreeMap<&str, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ids.len()];
        for e in snapshot.edges() {
            let (Some(&a), Some(&b)) = (index.get(e.src.as_str()), index.get(e.dst.as_str())) else {
                continue;
            };
            if a != b {
                sets[a].insert(b);
                sets[b].insert(a);
            }
        }
        let adjacency = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        SimpleGraph { ids, adjacency }
    }
}

/// Exact unnormalized betweenness over unordered pairs, endpoints excluded.
pub fn betweenness_centrality(snapshot: &GraphSnapshot) -> BTreeMap<String, f64> {
    let g = SimpleGraph::project(snapshot);
    let n = g.ids.len();
    let mut centrality = vec![0.0f64; n];

    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        stack.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = 0.0;
            dist[v] = -1;
            delta[v] = 0.0;
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &g.adjacency[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                centrality[w] += delta[w];
            }
        }
    }

    // each unordered pair was counted from both ends
    g.ids.into_iter().zip(centrality).map(|(id, c)| (id, c / 2.0)).collect()
}

/// Partition by undirected connectivity. Components are ordered by their
/// smallest member, members sorted.
pub fn connected_components(snapshot: &GraphSnapshot) -> Vec<Vec<String>> {
    let g = SimpleGraph::project(snapshot);
    let mut seen = vec![false; g.ids.len()];
    let mut components = Vec::new();
    for start in 0..g.ids.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &g.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    members.push(w);
                    queue.push_back(w);
                }
            }
        }
        // ids are sorted, so index order is id order
        members.sort_unstable();
        components.push(members.into_iter().map(|i| g.ids[i].clone()).collect());
    }
    components
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weights {
    pub patents: f64,
    pub articles: f64,
    pub projects: f64,
    pub talent: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { patents: 1.0, articles: 1.0, projects: 1.0, talent: 1.0 }
    }
}

impl Weights {
    pub fn new(patents: f64, articles: f64, projects: f64, talent: f64) -> Result<Self, AnalyticsError> {
        let w = Weights { patents, articles, projects, talent };
        if [patents, articles, projects, talent].iter().all(|x| x.is_finite() && *x >= 0.0) {
            Ok(w)
        } else {
            Err(AnalyticsError::InvalidWeights)
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, AnalyticsError> {
        Weights::new(
            self.patents * factor,
            self.articles * factor,
            self.projects * factor,
            self.talent * factor,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorBreakdown {
    pub org: String,
    pub patents: u64,
    pub articles: u64,
    pub projects: u64,
    pub talent: u64,
    pub score: f64,
}

/// Count an organization's knowledge manifestations and weight them.
pub fn knowledge_indicator(
    snapshot: &GraphSnapshot,
    org: &str,
    weights: &Weights,
) -> Result<IndicatorBreakdown, AnalyticsError> {
    if !snapshot.contains(org) {
        return Err(AnalyticsError::UnknownEntity(org.to_string()));
    }
    let distinct = |pred: &'static str| snapshot.out_targets(org, pred).collect::<BTreeSet<_>>();
    let patents = distinct("applicantOf").len() as u64;
    let projects = distinct("participatesIn").len() as u64;
    let employees = distinct("employs");
    let articles: BTreeSet<&str> =
        employees.iter().flat_map(|t| snapshot.out_targets(t, "authorOf")).collect();
    let talent = employees.len() as u64;
    let articles = articles.len() as u64;
    let score = weights.patents * patents as f64
        + weights.articles * articles as f64
        + weights.projects * projects as f64
        + weights.talent * talent as f64;
    Ok(IndicatorBreakdown { org: org.to_string(), patents, articles, projects, talent, score })
}
