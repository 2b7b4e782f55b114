//! CSV source ingestion.
//!
//! Each source file maps rows onto entities and edges of the base layer.
//! Rows are applied atomically: a row either lands completely or is recorded
//! in [`IngestReport::rejected`] and skipped. Merging follows "newest write
//! wins per attribute, union on edges"; provenance tokens of merged members
//! are unioned so that the outcome does not depend on file order.

mod resolve;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::store::{Edge, Entity, Store, StoreError};
use crate::value::{parse_date, AttrMap, AttrValue};

pub use resolve::{
    id_prefix, normalize_name, resolve, sanitize_explicit, split_named_cell, NameIndex,
    ResolutionKey,
};

pub const STUB_SOURCE: &str = "stub";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Patents,
    Articles,
    Projects,
    Organizations,
}

impl SourceKind {
    pub const ALL: [SourceKind; 4] =
        [SourceKind::Patents, SourceKind::Articles, SourceKind::Projects, SourceKind::Organizations];

    pub fn header(self) -> &'static [&'static str] {
        match self {
            SourceKind::Patents => &[
                "patent_id",
                "title",
                "filing_date",
                "classification_codes",
                "inventors",
                "applicants",
                "cited_articles",
            ],
            SourceKind::Articles => &[
                "article_id",
                "title",
                "year",
                "venue",
                "authors",
                "author_affiliations",
                "classification_codes",
                "project_id",
            ],
            SourceKind::Projects => &[
                "project_id",
                "title",
                "start_date",
                "end_date",
                "participants",
                "funder",
                "funding_year",
                "amount",
                "classification_codes",
            ],
            SourceKind::Organizations => &["org_id", "name", "country", "activity_codes"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Patents => "patents",
            SourceKind::Articles => "articles",
            SourceKind::Projects => "projects",
            SourceKind::Organizations => "organizations",
        }
    }

    /// Classification scheme assumed for codes without an explicit one.
    pub fn default_scheme(self) -> &'static str {
        match self {
            SourceKind::Patents => "CPC",
            SourceKind::Articles | SourceKind::Projects => "TOPIC",
            SourceKind::Organizations => "NACE",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceKind {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SourceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| IngestError::UnknownKind(s.to_string()))
    }
}

/// File-level failures. Row-level problems end up in the report instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("unknown source kind `{0}`")]
    UnknownKind(String),
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("csv error: {0}")]
    Csv(String),
    #[error("empty name")]
    EmptyName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RejectCode {
    ParseError,
    SchemaViolation,
    MisalignedColumns,
    BadYear,
    EmptyName,
    ClassChangeRejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub row: u64,
    pub code: RejectCode,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub records_read: u64,
    pub entities_created: u64,
    pub entities_merged: u64,
    pub edges_created: u64,
    pub rejected: Vec<Rejection>,
}

impl IngestReport {
    pub fn accepted(&self) -> u64 {
        self.records_read - self.rejected.len() as u64
    }
}

struct RowError {
    code: RejectCode,
    message: String,
}

impl RowError {
    fn new(code: RejectCode, message: impl Into<String>) -> Self {
        RowError { code, message: message.into() }
    }
}

impl From<IngestError> for RowError {
    fn from(e: IngestError) -> Self {
        let code = match e {
            IngestError::EmptyName => RejectCode::EmptyName,
            _ => RejectCode::ParseError,
        };
        RowError::new(code, e.to_string())
    }
}

impl From<StoreError> for RowError {
    fn from(e: StoreError) -> Self {
        let code = match e {
            StoreError::ClassChangeRejected { .. } => RejectCode::ClassChangeRejected,
            StoreError::Parse { .. } | StoreError::InvalidId(_) | StoreError::InvalidInterval(_) => {
                RejectCode::ParseError
            }
            _ => RejectCode::SchemaViolation,
        };
        RowError::new(code, e.to_string())
    }
}

/// Merge provenance tokens: comma-joined sorted set, `stub` dropped once any
/// real source is known.
fn merge_sources(a: Option<&str>, b: Option<&str>) -> Option<String> {
    let mut tokens: BTreeSet<&str> =
        a.into_iter().chain(b).flat_map(|s| s.split(',')).filter(|t| !t.is_empty()).collect();
    if tokens.len() > 1 {
        tokens.remove(STUB_SOURCE);
    }
    (!tokens.is_empty()).then(|| tokens.into_iter().collect::<Vec<_>>().join(","))
}

/// Pending writes for one row, checked as a whole before being applied.
struct RowPlan<'s> {
    store: &'s Store,
    index: &'s NameIndex,
    source: SourceKind,
    entities: BTreeMap<String, Entity>,
    edges: BTreeMap<String, Edge>,
}

impl<'s> RowPlan<'s> {
    fn new(store: &'s Store, index: &'s NameIndex, source: SourceKind) -> Self {
        RowPlan { store, index, source, entities: BTreeMap::new(), edges: BTreeMap::new() }
    }

    fn current(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id).or_else(|| self.store.entity(id))
    }

    /// Write `entity`, merging attributes over whatever is already known.
    fn put(&mut self, mut entity: Entity) -> Result<String, RowError> {
        entity.source = Some(self.source.as_str().to_string());
        if let Some(prev) = self.current(&entity.id) {
            if prev.class_name != entity.class_name {
                return Err(StoreError::ClassChangeRejected {
                    id: entity.id,
                    existing: prev.class_name.clone(),
                    requested: entity.class_name,
                }
                .into());
            }
            let mut attrs = prev.attributes.clone();
            attrs.extend(std::mem::take(&mut entity.attributes));
            entity.attributes = attrs;
            entity.source = merge_sources(prev.source.as_deref(), entity.source.as_deref());
            entity.valid_from = entity.valid_from.or(prev.valid_from);
            entity.valid_to = entity.valid_to.or(prev.valid_to);
        }
        let id = entity.id.clone();
        self.entities.insert(id.clone(), entity);
        Ok(id)
    }

    /// Create a placeholder only when nothing is known about `id`.
    fn ensure_stub(&mut self, id: String, class_name: &str, title: &str) -> String {
        if self.current(&id).is_none() {
            let mut attrs = AttrMap::new();
            attrs.insert("title".into(), AttrValue::text(title));
            let stub = Entity::new(id.clone(), class_name, attrs).with_source(STUB_SOURCE);
            self.entities.insert(id.clone(), stub);
        }
        id
    }

    fn named(&mut self, class_name: &str, cell: &str) -> Result<String, RowError> {
        let (name, explicit) = split_named_cell(cell);
        let id = self.index.resolve(class_name, explicit, name)?;
        let mut attrs = AttrMap::new();
        if !name.is_empty() {
            attrs.insert("name".into(), AttrValue::text(name));
        }
        self.put(Entity::new(id, class_name, attrs))
    }

    fn area(&mut self, cell: &str) -> Result<String, RowError> {
        let (scheme, code) = split_scheme(cell, self.source.default_scheme());
        let id = format!("area:{}", sanitize_explicit(&format!("{scheme}-{code}")));
        let mut attrs = AttrMap::new();
        attrs.insert("code".into(), AttrValue::text(code));
        attrs.insert("scheme".into(), AttrValue::text(scheme));
        self.put(Entity::new(id, "KnowledgeArea", attrs))
    }

    fn areas(&mut self, cell: &str) -> Result<Vec<String>, RowError> {
        multi(cell).into_iter().filter(|c| !c.is_empty()).map(|c| self.area(c)).collect()
    }

    fn link(&mut self, predicate: &str, src: &str, dst: &str, attributes: AttrMap) {
        let mut edge = Edge::new(predicate, src, dst).with_attributes(attributes);
        edge.source = Some(self.source.as_str().to_string());
        if let Some(prev) = self.edges.get(&edge.id).or_else(|| self.store.edge(&edge.id)) {
            let mut attrs = prev.attributes.clone();
            attrs.extend(std::mem::take(&mut edge.attributes));
            edge.attributes = attrs;
            edge.source = merge_sources(prev.source.as_deref(), edge.source.as_deref());
            edge.valid_from = prev.valid_from;
            edge.valid_to = prev.valid_to;
        }
        self.edges.insert(edge.id.clone(), edge);
    }

    fn into_writes(self) -> (BTreeMap<String, Entity>, BTreeMap<String, Edge>) {
        (self.entities, self.edges)
    }
}

/// Validate every pending write of a row in a scratch store holding only the
/// touched members, then apply them to `store`.
fn commit(
    entities: BTreeMap<String, Entity>,
    edges: BTreeMap<String, Edge>,
    store: &mut Store,
    index: &mut NameIndex,
    report: &mut IngestReport,
) -> Result<(), RowError> {
    let mut scratch = Store::new(store.schema().clone());
    for e in entities.values() {
        scratch.upsert_entity(e.clone())?;
    }
    for e in edges.values() {
        for end in [&e.src, &e.dst] {
            if scratch.entity(end).is_none() {
                let existing = store.entity(end).ok_or_else(|| StoreError::DanglingEndpoint {
                    edge: e.id.clone(),
                    endpoint: end.clone(),
                })?;
                scratch.upsert_entity(existing.clone())?;
            }
        }
        scratch.upsert_edge(e.clone())?;
    }

    for e in entities.into_values() {
        let created = store.entity(&e.id).is_none();
        if let Some(AttrValue::Text(name)) = e.attributes.get("name") {
            index.offer(&e.class_name, name, &e.id);
        }
        store.upsert_entity(e)?;
        if created {
            report.entities_created += 1;
        } else {
            report.entities_merged += 1;
        }
    }
    for e in edges.into_values() {
        if store.edge(&e.id).is_none() {
            report.edges_created += 1;
        }
        store.upsert_edge(e)?;
    }
    Ok(())
}

/// `SCHEME:code` picks the scheme explicitly; a bare code takes the default.
fn split_scheme<'a>(cell: &'a str, default: &'a str) -> (&'a str, &'a str) {
    let cell = cell.trim();
    match cell.split_once(':') {
        Some((scheme, code))
            if !scheme.is_empty()
                && !code.trim().is_empty()
                && scheme.bytes().all(|b| b.is_ascii_uppercase() || b.is_ascii_digit()) =>
        {
            (scheme, code.trim())
        }
        _ => (default, cell),
    }
}

fn multi(cell: &str) -> Vec<&str> {
    if cell.trim().is_empty() {
        return Vec::new();
    }
    cell.split('|').map(str::trim).collect()
}

fn non_empty(cell: &str) -> Option<&str> {
    let t = cell.trim();
    (!t.is_empty()).then_some(t)
}

fn date_cell(cell: &str, column: &str) -> Result<Option<NaiveDate>, RowError> {
    non_empty(cell)
        .map(|s| {
            parse_date(s).ok_or_else(|| {
                RowError::new(RejectCode::ParseError, format!("{column}: invalid date `{s}`"))
            })
        })
        .transpose()
}

fn text_attr(attrs: &mut AttrMap, key: &str, cell: &str) {
    if let Some(v) = non_empty(cell) {
        attrs.insert(key.into(), AttrValue::text(v));
    }
}

fn required_id<'a>(cell: &'a str, column: &str) -> Result<&'a str, RowError> {
    non_empty(cell)
        .ok_or_else(|| RowError::new(RejectCode::ParseError, format!("{column} is empty")))
}

type Row = csv::StringRecord;

fn patent_row(plan: &mut RowPlan<'_>, row: &Row) -> Result<(), RowError> {
    let raw_id = required_id(&row[0], "patent_id")?;
    let filing = date_cell(&row[2], "filing_date")?;
    let mut attrs = AttrMap::new();
    text_attr(&mut attrs, "title", &row[1]);
    attrs.insert("number".into(), AttrValue::text(raw_id));
    if let Some(d) = filing {
        attrs.insert("filing_date".into(), AttrValue::Date(d));
    }
    let patent_id = resolve("Patent", Some(raw_id), "")?;
    let patent = plan.put(Entity::new(patent_id, "Patent", attrs).with_interval(filing, None))?;
    let areas = plan.areas(&row[3])?;
    for area in &areas {
        plan.link("patentClassifiedIn", &patent, area, AttrMap::new());
    }
    for cell in multi(&row[4]) {
        let talent = plan.named("Talent", cell)?;
        plan.link("inventorOf", &talent, &patent, AttrMap::new());
        for area in &areas {
            plan.link("talentClassifiedIn", &talent, area, AttrMap::new());
        }
    }
    for cell in multi(&row[5]) {
        let org = plan.named("Organization", cell)?;
        plan.link("applicantOf", &org, &patent, AttrMap::new());
    }
    for cited in multi(&row[6]) {
        let article_id = resolve("Article", Some(cited), "")?;
        let article = plan.ensure_stub(article_id, "Article", cited);
        plan.link("cites", &patent, &article, AttrMap::new());
    }
    Ok(())
}

fn article_row(plan: &mut RowPlan<'_>, row: &Row) -> Result<(), RowError> {
    let raw_id = required_id(&row[0], "article_id")?;
    let mut attrs = AttrMap::new();
    text_attr(&mut attrs, "title", &row[1]);
    if let Some(y) = non_empty(&row[2]) {
        let year: i64 = y.parse().map_err(|_| {
            RowError::new(RejectCode::ParseError, format!("year: not an integer `{y}`"))
        })?;
        attrs.insert("year".into(), AttrValue::Integer(year));
    }
    text_attr(&mut attrs, "venue", &row[3]);

    let authors = multi(&row[4]);
    let affiliations = multi(&row[5]);
    if !affiliations.is_empty() && affiliations.len() != authors.len() {
        return Err(RowError::new(
            RejectCode::MisalignedColumns,
            format!("{} authors but {} affiliations", authors.len(), affiliations.len()),
        ));
    }

    let article_id = resolve("Article", Some(raw_id), "")?;
    let article = plan.put(Entity::new(article_id, "Article", attrs))?;
    let areas = plan.areas(&row[6])?;
    for area in &areas {
        plan.link("articleClassifiedIn", &article, area, AttrMap::new());
    }
    for (i, cell) in authors.iter().enumerate() {
        let talent = plan.named("Talent", cell)?;
        plan.link("authorOf", &talent, &article, AttrMap::new());
        for area in &areas {
            plan.link("talentClassifiedIn", &talent, area, AttrMap::new());
        }
        if let Some(aff) = affiliations.get(i).filter(|a| !a.is_empty()) {
            let org = plan.named("Organization", aff)?;
            plan.link("employs", &org, &talent, AttrMap::new());
        }
    }
    if let Some(project) = non_empty(&row[7]) {
        let project_id = resolve("Project", Some(project), "")?;
        let project_id = plan.ensure_stub(project_id, "Project", project);
        plan.link("articleResultOf", &article, &project_id, AttrMap::new());
    }
    Ok(())
}

fn project_row(plan: &mut RowPlan<'_>, row: &Row) -> Result<(), RowError> {
    let raw_id = required_id(&row[0], "project_id")?;
    let start = date_cell(&row[2], "start_date")?;
    let end = date_cell(&row[3], "end_date")?;
    let year = non_empty(&row[6])
        .map(|y| {
            y.parse::<i64>().map_err(|_| {
                RowError::new(RejectCode::BadYear, format!("funding_year: not an integer `{y}`"))
            })
        })
        .transpose()?;
    let amount = non_empty(&row[7])
        .map(|a| {
            a.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                RowError::new(RejectCode::ParseError, format!("amount: not a decimal `{a}`"))
            })
        })
        .transpose()?;
    let funder = non_empty(&row[5]);
    if funder.is_some() && year.is_none() {
        return Err(RowError::new(RejectCode::BadYear, "funding_year is required with a funder"));
    }

    let mut attrs = AttrMap::new();
    text_attr(&mut attrs, "title", &row[1]);
    if let Some(d) = start {
        attrs.insert("start_date".into(), AttrValue::Date(d));
    }
    if let Some(d) = end {
        attrs.insert("end_date".into(), AttrValue::Date(d));
    }
    let project_id = resolve("Project", Some(raw_id), "")?;
    let project = plan.put(Entity::new(project_id, "Project", attrs).with_interval(start, end))?;

    let mut participants = Vec::new();
    for cell in multi(&row[4]) {
        let org = plan.named("Organization", cell)?;
        plan.link("participatesIn", &org, &project, AttrMap::new());
        participants.push(org);
    }
    if let (Some(funder), Some(year)) = (funder, year) {
        let mut attrs = AttrMap::new();
        attrs.insert("funder".into(), AttrValue::text(funder));
        attrs.insert("year".into(), AttrValue::Integer(year));
        if let Some(a) = amount {
            attrs.insert("amount".into(), AttrValue::Decimal(a));
        }
        let funding_id = resolve("Funding", Some(raw_id), "")?;
        let funding = plan.put(Entity::new(funding_id, "Funding", attrs))?;
        plan.link("finances", &funding, &project, AttrMap::new());
        for org in &participants {
            let mut edge_attrs = AttrMap::new();
            edge_attrs.insert("year".into(), AttrValue::Integer(year));
            plan.link("awardedTo", &funding, org, edge_attrs);
        }
    }
    for area in plan.areas(&row[8])? {
        plan.link("projectClassifiedIn", &project, &area, AttrMap::new());
    }
    Ok(())
}

fn organization_row(plan: &mut RowPlan<'_>, row: &Row) -> Result<(), RowError> {
    let name = non_empty(&row[1]).unwrap_or("");
    let explicit = non_empty(&row[0]);
    let id = plan.index.resolve("Organization", explicit, name)?;
    let mut attrs = AttrMap::new();
    text_attr(&mut attrs, "name", name);
    text_attr(&mut attrs, "country", &row[2]);
    let org = plan.put(Entity::new(id, "Organization", attrs))?;
    for area in plan.areas(&row[3])? {
        plan.link("orgClassifiedIn", &org, &area, AttrMap::new());
    }
    Ok(())
}

/// Parse one source file and load it into `store`.
pub fn ingest<R: Read>(
    store: &mut Store,
    kind: SourceKind,
    input: R,
) -> Result<IngestReport, IngestError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut records = reader.records();
    let expected = kind.header();
    match records.next() {
        // nothing to ingest, not even a header
        None => return Ok(IngestReport::default()),
        Some(Err(e)) => return Err(IngestError::Csv(e.to_string())),
        Some(Ok(header)) => {
            let found: Vec<&str> = header.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
            if found != expected {
                return Err(IngestError::Header {
                    expected: expected.join(","),
                    found: found.join(","),
                });
            }
        }
    }

    let mut index = NameIndex::build(store);
    let mut report = IngestReport::default();
    for record in records {
        report.records_read += 1;
        let (row_no, outcome) = match record {
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                (line, Err(RowError::new(RejectCode::ParseError, e.to_string())))
            }
            Ok(row) => {
                let line = row.position().map(|p| p.line()).unwrap_or(0);
                if row.len() != expected.len() {
                    let msg = format!("expected {} fields, found {}", expected.len(), row.len());
                    (line, Err(RowError::new(RejectCode::ParseError, msg)))
                } else {
                    let mut plan = RowPlan::new(store, &index, kind);
                    let built = match kind {
                        SourceKind::Patents => patent_row(&mut plan, &row),
                        SourceKind::Articles => article_row(&mut plan, &row),
                        SourceKind::Projects => project_row(&mut plan, &row),
                        SourceKind::Organizations => organization_row(&mut plan, &row),
                    };
                    let writes = built.map(|()| plan.into_writes());
                    let outcome = writes.and_then(|(entities, edges)| {
                        commit(entities, edges, store, &mut index, &mut report)
                    });
                    (line, outcome)
                }
            }
        };
        if let Err(e) = outcome {
            log::debug!("{kind} row {row_no} rejected: {}", e.message);
            report.rejected.push(Rejection { row: row_no, code: e.code, message: e.message });
        }
    }
    Ok(report)
}
