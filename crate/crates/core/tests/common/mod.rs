//! Shared fixtures, random graph generators and brute-force oracles.
//!
//! Oracles here deliberately avoid the store's adjacency index: they scan the
//! full edge list of a snapshot.

#![allow(dead_code)]

pub mod checks;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;

use chrono::{Duration, NaiveDate};
use inneo::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

pub const FIXTURE_ORDER: [(&str, SourceKind); 4] = [
    ("organizations", SourceKind::Organizations),
    ("projects", SourceKind::Projects),
    ("patents", SourceKind::Patents),
    ("articles", SourceKind::Articles),
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.csv"))
}

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).expect("fixture present")
}

pub fn ingest_fixtures(store: &mut Store) {
    for (name, kind) in FIXTURE_ORDER {
        let report = ingest(store, kind, fixture_bytes(name).as_slice()).expect("fixture ingests");
        assert!(report.rejected.is_empty(), "{name}: {:?}", report.rejected);
    }
}

pub fn fixture_store() -> Store {
    let mut store = Store::default();
    ingest_fixtures(&mut store);
    store
}

// ---------------------------------------------------------------- generators

const CLASSES: [&str; 7] =
    ["Organization", "Talent", "Article", "Patent", "Project", "KnowledgeArea", "Funding"];

fn attrs_for(class: &str, i: usize, rng: &mut impl Rng) -> AttrMap {
    let mut a = AttrMap::new();
    let text = |s: String| AttrValue::Text(s);
    match class {
        "Organization" | "Talent" => {
            a.insert("name".into(), text(format!("{class} {i}")));
        }
        "Article" | "Patent" | "Project" => {
            a.insert("title".into(), text(format!("{class} {i}")));
        }
        "KnowledgeArea" => {
            a.insert("code".into(), text(format!("C{i}")));
        }
        "Funding" => {
            a.insert("funder".into(), text(format!("Funder {}", i % 3)));
            a.insert("year".into(), AttrValue::Integer(rng.gen_range(2000..2003)));
        }
        _ => unreachable!(),
    }
    a
}

fn prefix(class: &str) -> &'static str {
    match class {
        "Organization" => "org",
        "Talent" => "talent",
        "Article" => "article",
        "Patent" => "patent",
        "Project" => "proj",
        "KnowledgeArea" => "area",
        "Funding" => "funding",
        _ => unreachable!(),
    }
}

/// Predicates of the base schema whose signature accepts `(src, dst)`.
fn predicates_between(schema: &Schema, src: &str, dst: &str) -> Vec<String> {
    schema
        .predicate_names()
        .filter(|p| {
            let def = schema.predicate(p).unwrap();
            schema.conforms(src, &def.domain) && schema.conforms(dst, &def.range)
        })
        .map(str::to_string)
        .collect()
}

pub struct GenOptions {
    pub max_entities: usize,
    pub edge_factor: f64,
    /// Attach random validity intervals drawn from this many days after
    /// [`epoch`].
    pub interval_days: Option<i64>,
}

pub fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 1).unwrap()
}

fn random_interval(rng: &mut impl Rng, days: i64) -> (Option<NaiveDate>, Option<NaiveDate>) {
    let from = rng.gen_bool(0.7).then(|| epoch() + Duration::days(rng.gen_range(0..days)));
    let to = rng.gen_bool(0.6).then(|| {
        let lo = from.map_or(0, |f| (f - epoch()).num_days() + 1);
        epoch() + Duration::days(rng.gen_range(lo..=days))
    });
    (from, to)
}

/// A random schema-valid store. Every write goes through the normal upsert
/// path, so the generator cannot smuggle invalid members in.
pub fn random_store(rng: &mut impl Rng, opts: &GenOptions) -> Store {
    let mut store = Store::default();
    let schema = store.schema().clone();
    let n = rng.gen_range(1..=opts.max_entities);
    let mut ids: Vec<(String, &str)> = Vec::new();
    for i in 0..n {
        let class = *CLASSES.choose(rng).unwrap();
        let id = format!("{}:n{i}", prefix(class));
        let mut entity = Entity::new(id.clone(), class, attrs_for(class, i, rng));
        if let Some(days) = opts.interval_days {
            let (f, t) = random_interval(rng, days);
            entity = entity.with_interval(f, t);
        }
        store.upsert_entity(entity).expect("generated entity is valid");
        ids.push((id, class));
    }
    let target = (n as f64 * opts.edge_factor).round() as usize;
    let mut attempts = 0;
    let mut added = 0;
    while added < target && attempts < target * 20 {
        attempts += 1;
        let (a, ca) = ids.choose(rng).unwrap();
        let (b, cb) = ids.choose(rng).unwrap();
        let preds = predicates_between(&schema, ca, cb);
        let Some(pred) = preds.choose(rng) else { continue };
        let mut edge = Edge::new(pred, a, b);
        if pred == "awardedTo" {
            let year = store.entity(a).unwrap().attributes["year"].clone();
            edge = edge.with_attributes(AttrMap::from([("year".to_string(), year)]));
        }
        if let Some(days) = opts.interval_days {
            let (f, t) = random_interval(rng, days);
            edge = edge.with_interval(f, t);
        }
        store.upsert_edge(edge).expect("generated edge is valid");
        added += 1;
    }
    store
}

pub fn ids_of_class(snap: &GraphSnapshot, class: &str) -> Vec<String> {
    snap.entities().filter(|e| e.class_name == class).map(|e| e.id.clone()).collect()
}

// ------------------------------------------------------------------- oracles

/// All edges as (predicate, src, dst) triples, scanned once.
fn triples(snap: &GraphSnapshot) -> Vec<(String, String, String)> {
    snap.edges().map(|e| (e.predicate.clone(), e.src.clone(), e.dst.clone())).collect()
}

fn has(t: &[(String, String, String)], p: &str, s: &str, d: &str) -> bool {
    t.iter().any(|(tp, ts, td)| tp == p && ts == s && td == d)
}

/// Fixed-point closure over `broaderThan`.
pub fn oracle_closure(snap: &GraphSnapshot, area: &str) -> Option<BTreeSet<String>> {
    if snap.class_of(area) != Some("KnowledgeArea") {
        return None;
    }
    let t = triples(snap);
    let mut set = BTreeSet::from([area.to_string()]);
    loop {
        let before = set.len();
        for (p, s, d) in &t {
            if p == "broaderThan" && set.contains(s) {
                set.insert(d.clone());
            }
        }
        if set.len() == before {
            return Some(set);
        }
    }
}

pub fn oracle_orgs_in_area(snap: &GraphSnapshot, area: &str) -> Option<Vec<String>> {
    let closure = oracle_closure(snap, area)?;
    let t = triples(snap);
    let mut out = BTreeSet::new();
    for (p1, org, talent) in &t {
        if p1 != "employs" {
            continue;
        }
        for (p2, s2, article) in &t {
            if p2 != "authorOf" || s2 != talent {
                continue;
            }
            if closure.iter().any(|a| has(&t, "articleClassifiedIn", article, a)) {
                out.insert(org.clone());
            }
        }
    }
    Some(out.into_iter().collect())
}

pub fn oracle_hiring_orgs(snap: &GraphSnapshot, area: &str) -> Option<Vec<String>> {
    let closure = oracle_closure(snap, area)?;
    let t = triples(snap);
    let mut out = BTreeSet::new();
    for (p, org, talent) in &t {
        if p == "employs" && closure.iter().any(|a| has(&t, "talentClassifiedIn", talent, a)) {
            out.insert(org.clone());
        }
    }
    Some(out.into_iter().collect())
}

pub fn oracle_shared_patents(snap: &GraphSnapshot, x: &str, y: &str) -> Vec<String> {
    let t = triples(snap);
    let mut out: Vec<String> = t
        .iter()
        .filter(|(p, s, d)| p == "applicantOf" && s == x && has(&t, "applicantOf", y, d))
        .map(|(_, _, d)| d.clone())
        .collect();
    out.sort();
    out.dedup();
    out
}

pub fn oracle_patenting_technologies(snap: &GraphSnapshot, org: &str) -> Vec<String> {
    let t = triples(snap);
    let mut out = Vec::new();
    for (p, s, patent) in &t {
        if p == "applicantOf" && s == org {
            for (p2, s2, area) in &t {
                if p2 == "patentClassifiedIn" && s2 == patent {
                    out.push(area.clone());
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn oracle_funded_orgs(snap: &GraphSnapshot, year: i64) -> Vec<String> {
    let mut out = Vec::new();
    for e in snap.edges().filter(|e| e.predicate == "awardedTo") {
        let funding = snap.entity(&e.src).unwrap();
        if funding.attributes.get("year") == Some(&AttrValue::Integer(year)) {
            out.push(e.dst.clone());
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Candidates scored by distinct patents, articles (through employees) and
/// projects in the area closure; existing partners and `org` excluded.
pub fn oracle_collaboration(snap: &GraphSnapshot, org: &str, area: &str) -> Option<Vec<(String, u64)>> {
    let closure = oracle_closure(snap, area)?;
    let t = triples(snap);
    let in_area = |pred: &str, item: &str| closure.iter().any(|a| has(&t, pred, item, a));
    let orgs = ids_of_class(snap, "Organization");
    let mut partners = BTreeSet::new();
    for (p, s, d) in &t {
        if (p == "participatesIn" || p == "applicantOf") && s == org {
            for (p2, s2, d2) in &t {
                if p2 == p && d2 == d {
                    partners.insert(s2.clone());
                }
            }
        }
    }
    let mut out = Vec::new();
    for o in orgs {
        if o == org || partners.contains(&o) {
            continue;
        }
        let patents: BTreeSet<&String> = t
            .iter()
            .filter(|(p, s, d)| p == "applicantOf" && *s == o && in_area("patentClassifiedIn", d))
            .map(|(_, _, d)| d)
            .collect();
        let projects: BTreeSet<&String> = t
            .iter()
            .filter(|(p, s, d)| p == "participatesIn" && *s == o && in_area("projectClassifiedIn", d))
            .map(|(_, _, d)| d)
            .collect();
        let mut articles = BTreeSet::new();
        for (p, s, talent) in &t {
            if p == "employs" && *s == o {
                for (p2, s2, article) in &t {
                    if p2 == "authorOf" && s2 == talent && in_area("articleClassifiedIn", article) {
                        articles.insert(article.clone());
                    }
                }
            }
        }
        let score = (patents.len() + projects.len() + articles.len()) as u64;
        if score > 0 {
            out.push((o, score));
        }
    }
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Some(out)
}

/// Floyd-Warshall hop distances over the undirected projection.
pub fn all_pairs_distances(nodes: &[String], adj: &BTreeSet<(String, String)>) -> Vec<Vec<usize>> {
    const INF: usize = usize::MAX / 4;
    let n = nodes.len();
    let pos: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (a, b) in adj {
        let (i, j) = (pos[a.as_str()], pos[b.as_str()]);
        d[i][j] = 1;
        d[j][i] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

pub const UNREACHABLE: usize = usize::MAX / 4;

/// Undirected, self-loop-free projection of a snapshot as a set of ordered
/// pairs (both directions present).
pub fn projection(snap: &GraphSnapshot) -> (Vec<String>, BTreeSet<(String, String)>) {
    let nodes: Vec<String> = snap.entities().map(|e| e.id.clone()).collect();
    let mut adj = BTreeSet::new();
    for e in snap.edges() {
        if e.src != e.dst {
            adj.insert((e.src.clone(), e.dst.clone()));
            adj.insert((e.dst.clone(), e.src.clone()));
        }
    }
    (nodes, adj)
}

/// Expected result of relationship explanation: the hop count, and the
/// lexicographically smallest sequence of edge ids over all shortest paths,
/// found by enumerating every shortest path.
pub fn oracle_path(snap: &GraphSnapshot, src: &str, dst: &str) -> Option<(usize, Vec<String>)> {
    let (nodes, adj) = projection(snap);
    let d = all_pairs_distances(&nodes, &adj);
    let pos: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let (s, t) = (pos[src], pos[dst]);
    if d[s][t] >= UNREACHABLE {
        return None;
    }
    let edges: Vec<(String, String, String)> = snap
        .edges()
        .filter(|e| e.src != e.dst)
        .map(|e| (e.id.clone(), e.src.clone(), e.dst.clone()))
        .collect();
    let mut best: Option<Vec<String>> = None;
    let mut stack: Vec<(usize, Vec<String>)> = vec![(s, Vec::new())];
    while let Some((u, seq)) = stack.pop() {
        if u == t {
            if best.as_ref().is_none_or(|b| seq < *b) {
                best = Some(seq);
            }
            continue;
        }
        let remaining = d[u][t];
        for (id, a, b) in &edges {
            let next = if pos[a.as_str()] == u {
                pos[b.as_str()]
            } else if pos[b.as_str()] == u {
                pos[a.as_str()]
            } else {
                continue;
            };
            if d[next][t] + 1 == remaining {
                let mut s2 = seq.clone();
                s2.push(id.clone());
                stack.push((next, s2));
            }
        }
    }
    Some((d[s][t], best.unwrap()))
}

/// Betweenness by enumerating every shortest path between every unordered
/// pair and crediting interior nodes with their share.
#[allow(clippy::needless_range_loop)] // pairs (s, t) index the distance matrix
pub fn oracle_betweenness(snap: &GraphSnapshot) -> BTreeMap<String, f64> {
    let (nodes, adj) = projection(snap);
    let n = nodes.len();
    let d = all_pairs_distances(&nodes, &adj);
    let pos: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut nbrs = vec![Vec::new(); n];
    for (a, b) in &adj {
        nbrs[pos[a.as_str()]].push(pos[b.as_str()]);
    }
    let mut score = vec![0.0f64; n];
    for s in 0..n {
        for t in (s + 1)..n {
            if d[s][t] >= UNREACHABLE {
                continue;
            }
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![vec![s]];
            while let Some(p) = stack.pop() {
                let u = *p.last().unwrap();
                if u == t {
                    paths.push(p);
                    continue;
                }
                for &v in &nbrs[u] {
                    if d[v][t] + 1 == d[u][t] {
                        let mut q = p.clone();
                        q.push(v);
                        stack.push(q);
                    }
                }
            }
            let total = paths.len() as f64;
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    score[v] += 1.0 / total;
                }
            }
        }
    }
    nodes.into_iter().zip(score).collect()
}

/// BFS hop count, used by path tests that only need the length.
pub fn bfs_len(snap: &GraphSnapshot, src: &str, dst: &str) -> Option<usize> {
    let (_, adj) = projection(snap);
    let mut dist = BTreeMap::from([(src.to_string(), 0usize)]);
    let mut q = VecDeque::from([src.to_string()]);
    while let Some(u) = q.pop_front() {
        for (a, b) in adj.range((u.clone(), String::new())..) {
            if *a != u {
                break;
            }
            if !dist.contains_key(b) {
                dist.insert(b.clone(), dist[&u] + 1);
                q.push_back(b.clone());
            }
        }
    }
    dist.get(dst).copied()
}

/// Entity and edge ids expected in a snapshot at `date`, computed from the
/// raw interval fields.
pub fn oracle_snapshot_ids(store: &Store, date: NaiveDate) -> (BTreeSet<String>, BTreeSet<String>) {
    let inside = |from: Option<NaiveDate>, to: Option<NaiveDate>| {
        from.is_none_or(|f| f <= date) && to.is_none_or(|t| date < t)
    };
    let entities: BTreeSet<String> = store
        .entities()
        .filter(|e| inside(e.valid_from, e.valid_to))
        .map(|e| e.id.clone())
        .collect();
    let edges = store
        .edges()
        .filter(|e| inside(e.valid_from, e.valid_to))
        .filter(|e| entities.contains(&e.src) && entities.contains(&e.dst))
        .map(|e| e.id.clone())
        .collect();
    (entities, edges)
}
