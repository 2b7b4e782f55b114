//! Request routing shared by the HTTP service, the CLI and the C API.
//!
//! A read is described by a route path plus query parameters, parsed into a
//! [`ReadCall`] and rendered against a snapshot by [`execute_read`]. Every
//! front end goes through this one path, so the bytes they emit agree.

mod http;

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use percent_encoding::percent_decode_str;
use serde::Serialize;

use crate::analytics::{self, Weights};
use crate::error::{Error, Result};
use crate::ingest::{self, IngestReport, SourceKind};
use crate::query;
use crate::store::{export_jsonl, export_ntriples, Direction, GraphSnapshot, Store};
use crate::value::parse_date;

pub use http::{router, serve, AppState};

pub const RESPONSE_CAP: usize = 10_000;
pub const DEFAULT_BASE_IRI: &str = "http://example.org/inneo/";

pub const JSON: &str = "application/json";
pub const NDJSON: &str = "application/x-ndjson";
pub const NTRIPLES: &str = "application/n-triples";

#[derive(Debug, Clone, PartialEq)]
pub enum ReadRequest {
    Health,
    Entity { id: String },
    Neighbors { id: String, direction: Direction, predicates: Option<BTreeSet<String>> },
    Path { src: String, dst: String },
    OrgsInArea { area: String },
    SharedPatents { x: String, y: String },
    PatentingTechnologies { org: String },
    FundedOrgs { year: i64 },
    HiringOrgs { area: String },
    Collaboration { org: String, area: String },
    Degree,
    Betweenness,
    Components,
    Knowledge { org: String, weights: Weights },
    ExportJsonl,
    ExportNtriples { base_iri: String },
}

/// A read plus the snapshot date it should run against.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadCall {
    pub request: ReadRequest,
    pub as_of: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub content_type: &'static str,
    pub body: String,
}

impl Rendered {
    fn json<T: Serialize + ?Sized>(value: &T) -> Self {
        let mut body = serde_json::to_string(value).expect("response serializes");
        body.push('\n');
        Rendered { content_type: JSON, body }
    }
}

/// Query-string parameters. Repeated keys keep every value in order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Params(BTreeMap<String, Vec<String>>);

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.0.entry(key.into()).or_default().push(value.into());
        self
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.insert(key, value);
        self
    }

    /// Parse `a=1&b=2`, percent-decoding keys and values (`+` is a space).
    pub fn from_query(query: &str) -> Self {
        let mut params = Params::new();
        for pair in query.split('&').filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
            let decode = |s: &str| percent_decode_str(&s.replace('+', " ")).decode_utf8_lossy().into_owned();
            params.insert(decode(k), decode(v));
        }
        params
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).and_then(|v| v.last()).map(String::as_str).filter(|s| !s.is_empty())
    }

    pub fn all(&self, key: &str) -> Vec<&str> {
        self.0
            .get(key)
            .map(|v| v.iter().map(String::as_str).filter(|s| !s.is_empty()).collect())
            .unwrap_or_default()
    }

    fn required(&self, key: &str) -> Result<String> {
        self.get(key)
            .map(str::to_string)
            .ok_or_else(|| Error::BadRequest(format!("missing parameter `{key}`")))
    }

    fn weight(&self, key: &str) -> Result<f64> {
        match self.get(key) {
            None => Ok(1.0),
            Some(v) => v
                .parse()
                .map_err(|_| Error::BadRequest(format!("parameter `{key}` must be a number"))),
        }
    }
}

pub fn parse_as_of(value: &str) -> Result<NaiveDate> {
    parse_date(value).ok_or_else(|| Error::BadRequest(format!("as_of must be YYYY-MM-DD, got `{value}`")))
}

pub fn parse_year(value: &str) -> Result<i64> {
    let ok = value.len() == 4 && value.bytes().all(|b| b.is_ascii_digit());
    value
        .parse()
        .ok()
        .filter(|_| ok)
        .ok_or_else(|| Error::BadRequest(format!("year must be a 4-digit integer, got `{value}`")))
}

fn segments(path: &str) -> Vec<String> {
    path.split('/')
        .filter(|s| !s.is_empty())
        .map(|s| percent_decode_str(s).decode_utf8_lossy().into_owned())
        .collect()
}

impl ReadCall {
    /// Map a GET route onto a read.
    pub fn parse(path: &str, params: &Params) -> Result<ReadCall> {
        let segs = segments(path);
        let segs: Vec<&str> = segs.iter().map(String::as_str).collect();
        let request = match segs.as_slice() {
            ["health"] => ReadRequest::Health,
            ["entities", id] => ReadRequest::Entity { id: id.to_string() },
            ["entities", id, "neighbors"] => {
                let direction = match params.get("direction") {
                    None => Direction::Both,
                    Some(d) => d.parse().map_err(Error::BadRequest)?,
                };
                let preds: BTreeSet<String> = params
                    .all("predicate")
                    .into_iter()
                    .flat_map(|p| p.split(','))
                    .filter(|p| !p.is_empty())
                    .map(str::to_string)
                    .collect();
                ReadRequest::Neighbors {
                    id: id.to_string(),
                    direction,
                    predicates: (!preds.is_empty()).then_some(preds),
                }
            }
            ["path"] => ReadRequest::Path { src: params.required("src")?, dst: params.required("dst")? },
            ["query", "orgs-in-area"] => ReadRequest::OrgsInArea { area: params.required("area")? },
            ["query", "shared-patents"] => {
                ReadRequest::SharedPatents { x: params.required("x")?, y: params.required("y")? }
            }
            ["query", "patenting-technologies"] => {
                ReadRequest::PatentingTechnologies { org: params.required("org")? }
            }
            ["query", "funded-orgs"] => {
                ReadRequest::FundedOrgs { year: parse_year(&params.required("year")?)? }
            }
            ["query", "hiring-orgs"] => ReadRequest::HiringOrgs { area: params.required("area")? },
            ["query", "collaboration"] => ReadRequest::Collaboration {
                org: params.required("org")?,
                area: params.required("area")?,
            },
            ["metrics", "degree"] => ReadRequest::Degree,
            ["metrics", "betweenness"] => ReadRequest::Betweenness,
            ["metrics", "components"] => ReadRequest::Components,
            ["metrics", "knowledge"] => ReadRequest::Knowledge {
                org: params.required("org")?,
                weights: Weights::new(
                    params.weight("wp")?,
                    params.weight("wa")?,
                    params.weight("wj")?,
                    params.weight("wt")?,
                )?,
            },
            ["export", "jsonl"] => ReadRequest::ExportJsonl,
            ["export", "ntriples"] => ReadRequest::ExportNtriples {
                base_iri: params.get("base_iri").unwrap_or(DEFAULT_BASE_IRI).to_string(),
            },
            _ => return Err(Error::BadRequest(format!("no such route `{path}`"))),
        };
        let as_of = params.get("as_of").map(parse_as_of).transpose()?;
        Ok(ReadCall { request, as_of })
    }

    pub fn run(&self, store: &Store) -> Result<Rendered> {
        execute_read(&store.snapshot(self.as_of), &self.request)
    }
}

fn capped<T: Serialize>(len: usize, value: &T) -> Result<Rendered> {
    if len > RESPONSE_CAP {
        return Err(Error::TooLarge(len));
    }
    Ok(Rendered::json(value))
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
}

/// Render a read against a snapshot.
pub fn execute_read(snapshot: &GraphSnapshot, request: &ReadRequest) -> Result<Rendered> {
    use ReadRequest::*;
    match request {
        Health => Ok(Rendered::json(&self::Health { status: "ok" })),
        Entity { id } => {
            let entity = snapshot
                .entity(id)
                .ok_or_else(|| query::QueryError::UnknownEntity(id.clone()))?;
            Ok(Rendered::json(entity))
        }
        Neighbors { id, direction, predicates } => {
            let list = snapshot.neighbors(id, *direction, predicates.as_ref())?;
            capped(list.len(), &list)
        }
        Path { src, dst } => Ok(Rendered::json(&query::explain_relationship(snapshot, src, dst)?)),
        OrgsInArea { area } => {
            let set = query::orgs_in_area_scientific(snapshot, area)?;
            capped(set.len(), &set)
        }
        SharedPatents { x, y } => {
            let set = query::shared_patents(snapshot, x, y)?;
            capped(set.len(), &set)
        }
        PatentingTechnologies { org } => {
            let set = query::patenting_technologies(snapshot, org)?;
            capped(set.len(), &set)
        }
        FundedOrgs { year } => {
            let set = query::funded_orgs(snapshot, *year);
            capped(set.len(), &set)
        }
        HiringOrgs { area } => {
            let set = query::hiring_orgs(snapshot, area)?;
            capped(set.len(), &set)
        }
        Collaboration { org, area } => {
            let list = query::collaboration_candidates(snapshot, org, area)?;
            capped(list.len(), &list)
        }
        Degree => {
            let map = analytics::degree_centrality(snapshot);
            capped(map.len(), &map)
        }
        Betweenness => {
            let map = analytics::betweenness_centrality(snapshot);
            capped(map.len(), &map)
        }
        Components => {
            let comps = analytics::connected_components(snapshot);
            capped(comps.iter().map(Vec::len).sum(), &comps)
        }
        Knowledge { org, weights } => {
            Ok(Rendered::json(&analytics::knowledge_indicator(snapshot, org, weights)?))
        }
        ExportJsonl => Ok(Rendered { content_type: NDJSON, body: export_jsonl(snapshot) }),
        ExportNtriples { base_iri } => {
            Ok(Rendered { content_type: NTRIPLES, body: export_ntriples(snapshot, base_iri)? })
        }
    }
}

/// Ingest a CSV body. On a file-level error the store is unchanged.
pub fn execute_ingest(store: &mut Store, kind: &str, body: &[u8]) -> Result<(IngestReport, Rendered)> {
    let kind: SourceKind = kind.parse()?;
    let report = ingest::ingest(store, kind, body)?;
    let rendered = Rendered::json(&report);
    Ok((report, rendered))
}

#[derive(Serialize)]
struct Deleted<'a> {
    id: &'a str,
    removed_edges: usize,
}

pub fn execute_delete(store: &mut Store, id: &str) -> Result<Rendered> {
    let removed_edges = store.delete_entity(id)?;
    Ok(Rendered::json(&Deleted { id, removed_edges }))
}
