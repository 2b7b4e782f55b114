//! Knowledge graph engine for innovation ecosystems.
//!
//! The graph is a temporal property graph whose writes are gated by a layered
//! ontology schema (the INNEO base layer plus optional extensions). On top of
//! the store sit CSV source ingestion with deterministic entity resolution,
//! competency-question queries, relationship explanation, network analytics,
//! and an HTTP/CLI front end that share one rendering path.
//!
//! ```
//! use inneo::prelude::*;
//!
//! let mut store = Store::default();
//! let report = ingest(
//!     &mut store,
//!     SourceKind::Organizations,
//!     "org_id,name,country,activity_codes\ntoyota,Toyota,JP,29.10\n".as_bytes(),
//! )
//! .unwrap();
//! assert_eq!(report.entities_created, 2);
//! let snap = store.snapshot(None);
//! let path = explain_relationship(&snap, "org:toyota", "area:NACE-29.10").unwrap();
//! assert_eq!(path.length, 1);
//! ```

pub mod analytics;
pub mod cli;
pub mod error;
pub mod ingest;
pub mod persist;
pub mod query;
pub mod schema;
pub mod service;
pub mod store;
pub mod value;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analytics::{
        betweenness_centrality, connected_components, degree_centrality, knowledge_indicator,
        IndicatorBreakdown, Weights,
    };
    pub use crate::ingest::{ingest, resolve, IngestReport, SourceKind};
    pub use crate::query::{
        collaboration_candidates, explain_relationship, funded_orgs, hiring_orgs,
        orgs_in_area_scientific, patenting_technologies, shared_patents, ExplanationPath,
        RankedOrg,
    };
    pub use crate::schema::{base_schema, LayerDef, Schema, ValidationReport, ViolationCode};
    pub use crate::store::{
        export_jsonl, export_ntriples, import_jsonl, Direction, Edge, Entity, GraphSnapshot, Store,
        StoreError, UpsertResult,
    };
    pub use crate::value::{AttrMap, AttrValue, ValueKind};
}
