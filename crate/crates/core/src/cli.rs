//! Batch command-line driver.
//!
//! Read commands build the same route + parameters the HTTP service sees and
//! go through [`ReadCall::parse`], so their stdout matches the HTTP body.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::persist::{load_graph, save_graph};
use crate::schema::{base_schema, LayerDef, Schema};
use crate::service::{self, AppState, Params, ReadCall};
use crate::store::{Inconsistency, Store};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "inneo", version, about = "Innovation-ecosystem knowledge graph")]
struct Cli {
    /// Graph file (canonical JSONL).
    #[arg(long, global = true, env = "INNEO_GRAPH", default_value = "graph.jsonl")]
    graph: PathBuf,

    /// Extra schema layer definition files, registered in order.
    #[arg(long = "layer", global = true)]
    layers: Vec<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a source CSV into the graph.
    Ingest {
        #[arg(value_parser = ["patents", "articles", "projects", "organizations"])]
        kind: String,
        file: PathBuf,
    },
    /// Re-check every stored member against the schema.
    Validate,
    /// Run a competency question.
    Query {
        #[arg(value_parser = [
            "orgs-in-area", "shared-patents", "patenting-technologies",
            "funded-orgs", "hiring-orgs", "collaboration",
        ])]
        name: String,
        #[arg(long)]
        area: Option<String>,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        org: Option<String>,
        #[arg(long)]
        year: Option<String>,
        #[arg(long)]
        as_of: Option<String>,
    },
    /// Explain how two entities are related.
    Path {
        src: String,
        dst: String,
        #[arg(long)]
        as_of: Option<String>,
    },
    /// Network and knowledge indicators.
    Metrics {
        #[arg(value_parser = ["degree", "betweenness", "components", "knowledge"])]
        name: String,
        #[arg(long)]
        org: Option<String>,
        #[arg(long)]
        wp: Option<String>,
        #[arg(long)]
        wa: Option<String>,
        #[arg(long)]
        wj: Option<String>,
        #[arg(long)]
        wt: Option<String>,
        #[arg(long)]
        as_of: Option<String>,
    },
    /// Print the graph as JSONL or N-Triples.
    Export {
        #[arg(value_parser = ["jsonl", "ntriples"])]
        format: String,
        #[arg(long)]
        base_iri: Option<String>,
        #[arg(long)]
        as_of: Option<String>,
    },
    /// Print one entity.
    Entity {
        id: String,
        #[arg(long)]
        as_of: Option<String>,
    },
    /// List adjacent edges and entities.
    Neighbors {
        id: String,
        #[arg(long)]
        direction: Option<String>,
        #[arg(long = "predicate")]
        predicates: Vec<String>,
        #[arg(long)]
        as_of: Option<String>,
    },
    /// Remove an entity and its incident edges.
    Delete { id: String },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
    /// Print the graph as of a date (canonical JSONL).
    Snapshot {
        #[arg(long, required = true)]
        as_of: String,
    },
}

fn put(params: &mut Params, key: &str, value: &Option<String>) {
    if let Some(v) = value {
        params.insert(key, v.clone());
    }
}

/// Route and parameters for a read command, exactly as the HTTP service
/// would receive them.
fn read_route(command: &Command) -> Option<(String, Params)> {
    let mut p = Params::new();
    let route = match command {
        Command::Query { name, area, x, y, org, year, as_of } => {
            put(&mut p, "area", area);
            put(&mut p, "x", x);
            put(&mut p, "y", y);
            put(&mut p, "org", org);
            put(&mut p, "year", year);
            put(&mut p, "as_of", as_of);
            format!("/query/{name}")
        }
        Command::Path { src, dst, as_of } => {
            p.insert("src", src.clone());
            p.insert("dst", dst.clone());
            put(&mut p, "as_of", as_of);
            "/path".to_string()
        }
        Command::Metrics { name, org, wp, wa, wj, wt, as_of } => {
            put(&mut p, "org", org);
            put(&mut p, "wp", wp);
            put(&mut p, "wa", wa);
            put(&mut p, "wj", wj);
            put(&mut p, "wt", wt);
            put(&mut p, "as_of", as_of);
            format!("/metrics/{name}")
        }
        Command::Export { format, base_iri, as_of } => {
            put(&mut p, "base_iri", base_iri);
            put(&mut p, "as_of", as_of);
            format!("/export/{format}")
        }
        Command::Entity { id, as_of } => {
            put(&mut p, "as_of", as_of);
            format!("/entities/{}", encode_segment(id))
        }
        Command::Neighbors { id, direction, predicates, as_of } => {
            put(&mut p, "direction", direction);
            for pred in predicates {
                p.insert("predicate", pred.clone());
            }
            put(&mut p, "as_of", as_of);
            format!("/entities/{}/neighbors", encode_segment(id))
        }
        Command::Snapshot { as_of } => {
            p.insert("as_of", as_of.clone());
            "/export/jsonl".to_string()
        }
        _ => return None,
    };
    Some((route, p))
}

fn encode_segment(s: &str) -> String {
    percent_encoding::utf8_percent_encode(s, percent_encoding::NON_ALPHANUMERIC).to_string()
}

fn load_schema(layers: &[PathBuf]) -> Result<Schema> {
    let mut schema = base_schema();
    for path in layers {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        schema = schema.register_layer(LayerDef::from_json(&text)?)?;
    }
    Ok(schema)
}

#[derive(Serialize)]
struct StoreValidation {
    ok: bool,
    violations: Vec<Inconsistency>,
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let schema = load_schema(&cli.layers)?;
    let graph = cli.graph.as_path();

    if let Some((route, params)) = read_route(&cli.command) {
        let call = ReadCall::parse(&route, &params)?;
        let store = load_graph(graph, schema)?;
        let rendered = call.run(&store)?;
        out.write_all(rendered.body.as_bytes())?;
        return Ok(EXIT_OK);
    }

    match cli.command {
        Command::Ingest { kind, file } => {
            let body = std::fs::read(&file)
                .map_err(|e| Error::Io(format!("{}: {e}", file.display())))?;
            let mut store = load_graph(graph, schema)?;
            let (report, rendered) = service::execute_ingest(&mut store, &kind, &body)?;
            save_graph(graph, &store)?;
            writeln!(
                err,
                "{kind}: {} records, {} created, {} merged, {} edges, {} rejected",
                report.records_read,
                report.entities_created,
                report.entities_merged,
                report.edges_created,
                report.rejected.len()
            )?;
            out.write_all(rendered.body.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Delete { id } => {
            let mut store = load_graph(graph, schema)?;
            let rendered = service::execute_delete(&mut store, &id)?;
            save_graph(graph, &store)?;
            out.write_all(rendered.body.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Validate => {
            let store = load_graph(graph, schema)?;
            let violations = store.revalidate();
            let report = StoreValidation { ok: violations.is_empty(), violations };
            serde_json::to_writer(&mut *out, &report).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out)?;
            Ok(if report.ok { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Serve { bind } => {
            let store = load_graph(graph, schema)?;
            serve_blocking(store, graph, bind)?;
            Ok(EXIT_OK)
        }
        _ => unreachable!("read commands are handled above"),
    }
}

fn serve_blocking(store: Store, graph: &Path, bind: SocketAddr) -> Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    let state = Arc::new(AppState::new(store, Some(graph.to_path_buf())));
    runtime.block_on(service::serve(state, bind))
}

/// Run the CLI with explicit output streams; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error [{}]: {e}", e.code());
            if matches!(e, Error::BadRequest(_)) {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}
