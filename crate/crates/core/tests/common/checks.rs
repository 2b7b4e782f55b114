//! Whole-property checks returning a description of the first mismatch.
//! Used both by the focused test files and by the acceptance runner.

use std::collections::BTreeSet;

use chrono::Duration;
use inneo::prelude::*;
use inneo::query::QueryError;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use inneo::{analytics, query};

pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    }};
}

fn sorted(set: BTreeSet<String>) -> Vec<String> {
    set.into_iter().collect()
}

/// Every query-engine operation against its scan oracle on random graphs.
pub fn query_oracles(graphs: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = GenOptions { max_entities: 30, edge_factor: 1.6, interval_days: None };
    let mut comparisons = 0usize;
    for g in 0..graphs {
        let store = random_store(&mut rng, &opts);
        let snap = store.snapshot(None);
        let areas = ids_of_class(&snap, "KnowledgeArea");
        let orgs = ids_of_class(&snap, "Organization");
        let all: Vec<String> = snap.entities().map(|e| e.id.clone()).collect();
        // probe ids: real areas plus a few non-areas and a missing id
        let mut area_probes = areas.clone();
        area_probes.extend(all.iter().take(2).cloned());
        area_probes.push("area:missing".into());

        for area in &area_probes {
            let got = query::orgs_in_area_scientific(&snap, area).ok().map(sorted);
            ensure!(got == oracle_orgs_in_area(&snap, area), "graph {g}: orgs-in-area {area}");
            let got = query::hiring_orgs(&snap, area).ok().map(sorted);
            ensure!(got == oracle_hiring_orgs(&snap, area), "graph {g}: hiring-orgs {area}");
            comparisons += 2;
            for org in &orgs {
                let got = query::collaboration_candidates(&snap, org, area)
                    .ok()
                    .map(|v| v.into_iter().map(|r| (r.org, r.score)).collect::<Vec<_>>());
                ensure!(
                    got == oracle_collaboration(&snap, org, area),
                    "graph {g}: collaboration {org} {area}: {got:?}"
                );
                comparisons += 1;
            }
        }
        for x in &orgs {
            let got = sorted(query::patenting_technologies(&snap, x).unwrap());
            ensure!(got == oracle_patenting_technologies(&snap, x), "graph {g}: technologies {x}");
            for y in &orgs {
                let got = sorted(query::shared_patents(&snap, x, y).unwrap());
                ensure!(got == oracle_shared_patents(&snap, x, y), "graph {g}: shared {x} {y}");
                comparisons += 1;
            }
        }
        ensure!(
            query::patenting_technologies(&snap, "org:missing").is_err(),
            "graph {g}: unknown org accepted"
        );
        for year in 1999..2004 {
            let got = sorted(query::funded_orgs(&snap, year));
            ensure!(got == oracle_funded_orgs(&snap, year), "graph {g}: funded {year}");
            comparisons += 1;
        }
        for _ in 0..20 {
            let src = all.choose(&mut rng).unwrap();
            let dst = all.choose(&mut rng).unwrap();
            let got = query::explain_relationship(&snap, src, dst).unwrap();
            match oracle_path(&snap, src, dst) {
                None => ensure!(!got.found && got.steps.is_empty(), "graph {g}: {src}->{dst} should be unreachable"),
                Some((len, ids)) => {
                    let got_ids: Vec<String> = got.steps.iter().map(|s| s.edge.clone()).collect();
                    ensure!(
                        got.found && got.length == len && got_ids == ids,
                        "graph {g}: path {src}->{dst}: got {got_ids:?}, want {ids:?}"
                    );
                    let mut at = src.to_string();
                    for step in &got.steps {
                        let edge = snap.edge(&step.edge).unwrap();
                        ensure!(step.from == at, "graph {g}: path steps not chained");
                        ensure!(edge.predicate == step.predicate, "graph {g}: step predicate");
                        let forward = edge.src == step.from && edge.dst == step.to;
                        let backward = edge.dst == step.from && edge.src == step.to;
                        ensure!(forward || backward, "graph {g}: step does not follow its edge");
                        at = step.to.clone();
                    }
                    ensure!(at == *dst, "graph {g}: path ends at {at}");
                }
            }
            comparisons += 1;
        }
        ensure!(
            matches!(
                query::explain_relationship(&snap, "org:missing", &all[0]),
                Err(QueryError::UnknownEntity(_))
            ),
            "graph {g}: unknown path endpoint accepted"
        );
        ensure!(store.revalidate().is_empty(), "graph {g}: revalidation failed");
    }
    Ok(format!("{graphs} graphs, {comparisons} comparisons"))
}

/// Brandes output against shortest-path enumeration, plus textbook shapes.
pub fn betweenness_oracle(graphs: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = GenOptions { max_entities: 8, edge_factor: 1.5, interval_days: None };
    let mut worst = 0.0f64;
    for g in 0..graphs {
        let store = random_store(&mut rng, &opts);
        let snap = store.snapshot(None);
        let got = analytics::betweenness_centrality(&snap);
        let want = oracle_betweenness(&snap);
        ensure!(
            got.keys().collect::<Vec<_>>() == want.keys().collect::<Vec<_>>(),
            "graph {g}: node sets differ"
        );
        for (id, w) in &want {
            let diff = (got[id] - w).abs();
            worst = worst.max(diff);
            ensure!(diff <= 1e-9, "graph {g}: {id} got {} want {w}", got[id]);
        }
    }

    // a - b - c : employs(org, talent), authorOf(talent, article)
    let mut path = Store::default();
    add(&mut path, "org:a", "Organization");
    add(&mut path, "talent:b", "Talent");
    add(&mut path, "article:c", "Article");
    path.upsert_edge(Edge::new("employs", "org:a", "talent:b")).unwrap();
    path.upsert_edge(Edge::new("authorOf", "talent:b", "article:c")).unwrap();
    let b = analytics::betweenness_centrality(&path.snapshot(None));
    ensure!((b["talent:b"] - 1.0).abs() <= 1e-9, "path center = {}", b["talent:b"]);
    ensure!(b["org:a"] == 0.0 && b["article:c"] == 0.0, "path leaves nonzero");

    // K1,3 with the talent as hub
    let mut star = Store::default();
    add(&mut star, "talent:hub", "Talent");
    add(&mut star, "org:x", "Organization");
    add(&mut star, "article:y", "Article");
    add(&mut star, "patent:z", "Patent");
    star.upsert_edge(Edge::new("employs", "org:x", "talent:hub")).unwrap();
    star.upsert_edge(Edge::new("authorOf", "talent:hub", "article:y")).unwrap();
    star.upsert_edge(Edge::new("inventorOf", "talent:hub", "patent:z")).unwrap();
    let b = analytics::betweenness_centrality(&star.snapshot(None));
    ensure!((b["talent:hub"] - 3.0).abs() <= 1e-9, "star center = {}", b["talent:hub"]);
    Ok(format!("{graphs} graphs, max |diff| {worst:.1e}; path center 1.0, star center 3.0"))
}

fn add(store: &mut Store, id: &str, class: &str) {
    let key = if class == "Article" || class == "Patent" { "title" } else { "name" };
    let attrs = AttrMap::from([(key.to_string(), AttrValue::Text(id.to_string()))]);
    store.upsert_entity(Entity::new(id, class, attrs)).unwrap();
}

/// `snapshot(as_of)` against a direct interval filter, probing every
/// interval boundary as well as random dates.
pub fn snapshot_oracle(graphs: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let days = 40;
    let opts = GenOptions { max_entities: 25, edge_factor: 1.5, interval_days: Some(days) };
    let mut probes = 0usize;
    let mut boundary_exclusions = 0usize;
    for g in 0..graphs {
        let store = random_store(&mut rng, &opts);
        let mut dates: BTreeSet<_> = (0..5).map(|_| epoch() + Duration::days(rng.gen_range(-2..days + 2))).collect();
        for e in store.entities() {
            dates.extend(e.valid_from);
            dates.extend(e.valid_to);
        }
        for e in store.edges() {
            dates.extend(e.valid_from);
            dates.extend(e.valid_to);
        }
        for date in dates {
            let snap = store.snapshot(Some(date));
            let (want_entities, want_edges) = oracle_snapshot_ids(&store, date);
            let got_entities: BTreeSet<String> = snap.entities().map(|e| e.id.clone()).collect();
            let got_edges: BTreeSet<String> = snap.edges().map(|e| e.id.clone()).collect();
            ensure!(got_entities == want_entities, "graph {g} at {date}: entities differ");
            ensure!(got_edges == want_edges, "graph {g} at {date}: edges differ");
            for e in snap.entities() {
                ensure!(store.entity(&e.id) == Some(e), "graph {g}: entity {} altered", e.id);
                if e.valid_to == Some(date) {
                    return Err(format!("graph {g}: {} kept at its valid_to", e.id));
                }
            }
            boundary_exclusions += store.entities().filter(|e| e.valid_to == Some(date)).count();
            // neighbors must agree with the filtered edge list
            for id in &got_entities {
                let n = snap.neighbors(id, Direction::Both, None).unwrap();
                let want = want_edges
                    .iter()
                    .filter(|eid| {
                        let e = store.edge(eid).unwrap();
                        e.src == *id || e.dst == *id
                    })
                    .count();
                ensure!(n.len() == want, "graph {g} at {date}: neighbors of {id}");
            }
            probes += 1;
        }
    }
    ensure!(boundary_exclusions > 0, "no as_of = valid_to case was exercised");
    Ok(format!("{graphs} graphs, {probes} dates, {boundary_exclusions} valid_to boundaries excluded"))
}

/// Writes that break the ontology are refused and the store is unchanged.
pub fn validation_gate() -> Check {
    let mut store = fixture_store();
    let before = export_jsonl(&store.snapshot(None));

    let knowledge = Entity::new(
        "area:k",
        "Knowledge",
        AttrMap::from([("code".to_string(), AttrValue::Text("k".into()))]),
    );
    match store.upsert_entity(knowledge) {
        Err(StoreError::SchemaViolation { report, .. }) => ensure!(
            report.has(ViolationCode::AbstractClassInstantiation),
            "Knowledge rejected for the wrong reason: {report}"
        ),
        other => return Err(format!("Knowledge instantiation: {other:?}")),
    }

    // employs(Talent, Organization) has domain and range swapped
    let swapped = Edge::new("employs", "talent:antonio-luque-lopez", "org:upm");
    match store.upsert_edge(swapped) {
        Err(StoreError::SchemaViolation { report, .. }) => ensure!(
            report.has(ViolationCode::DomainMismatch),
            "domain mismatch rejected for the wrong reason: {report}"
        ),
        other => return Err(format!("domain mismatch: {other:?}")),
    }

    let dangling = Edge::new("employs", "org:upm", "talent:nobody");
    ensure!(
        matches!(store.upsert_edge(dangling), Err(StoreError::DanglingEndpoint { .. })),
        "dangling endpoint accepted"
    );
    let unknown = Edge::new("likes", "org:upm", "org:toyota");
    ensure!(store.upsert_edge(unknown).is_err(), "unknown predicate accepted");

    ensure!(export_jsonl(&store.snapshot(None)) == before, "rejected writes changed the store");
    let problems = store.revalidate();
    ensure!(problems.is_empty(), "stored members fail re-validation: {problems:?}");
    Ok("abstract class, domain mismatch, dangling endpoint and unknown predicate refused".into())
}

/// Re-ingesting fixtures is a no-op; JSONL import/export is the identity;
/// N-Triples parses under an independent grammar and is sorted.
pub fn idempotence_and_round_trip() -> Check {
    for (name, kind) in FIXTURE_ORDER {
        let mut store = Store::default();
        ingest(&mut store, kind, fixture_bytes(name).as_slice()).map_err(|e| e.to_string())?;
        let once = export_jsonl(&store.snapshot(None));
        let report = ingest(&mut store, kind, fixture_bytes(name).as_slice()).map_err(|e| e.to_string())?;
        ensure!(report.entities_created == 0, "{name}: re-ingest created entities");
        ensure!(export_jsonl(&store.snapshot(None)) == once, "{name}: re-ingest changed the graph");
    }
    let mut store = fixture_store();
    let once = export_jsonl(&store.snapshot(None));
    ingest_fixtures(&mut store);
    ensure!(export_jsonl(&store.snapshot(None)) == once, "full re-ingest changed the graph");

    let reimported = import_jsonl(Schema::default(), &once).map_err(|e| e.to_string())?;
    ensure!(export_jsonl(&reimported.snapshot(None)) == once, "import/export is not the identity");

    let nt = export_ntriples(&store.snapshot(None), "http://example.org/inneo/").map_err(|e| e.to_string())?;
    let triples = parse_ntriples(&nt)?;
    let lines: Vec<&str> = nt.lines().collect();
    ensure!(lines.windows(2).all(|w| w[0] < w[1]), "N-Triples lines not strictly sorted");
    ensure!(triples == lines.len(), "parser saw {triples} triples in {} lines", lines.len());
    Ok(format!("4 fixtures idempotent, {} JSONL lines round-trip, {triples} triples parsed", once.lines().count()))
}

/// Count triples using an independent N-Triples parser.
pub fn parse_ntriples(text: &str) -> Result<usize, String> {
    use rio_api::parser::TriplesParser;
    let mut count = 0usize;
    let mut parser = rio_turtle::NTriplesParser::new(text.as_bytes());
    parser
        .parse_all(&mut |_t| -> Result<(), rio_turtle::TurtleError> {
            count += 1;
            Ok(())
        })
        .map_err(|e| format!("N-Triples grammar: {e}"))?;
    Ok(count)
}

/// The worked example: Luque reaches the automotive NACE class in four hops
/// through Toyota and the concentrator project.
pub fn fixture_reproduction() -> Check {
    let store = fixture_store();
    let snap = store.snapshot(None);
    let path = query::explain_relationship(&snap, "talent:antonio-luque-lopez", "area:NACE-29.10")
        .map_err(|e| e.to_string())?;
    ensure!(path.found && path.length == 4, "found={} length={}", path.found, path.length);
    let entities = path.entities();
    for id in ["org:toyota", "proj:concentrator-pv"] {
        ensure!(entities.contains(&id), "{id} not on the path {entities:?}");
    }
    let title = |id: &str| snap.entity(id).and_then(|e| e.attributes.get("title")).map(|v| v.to_string());
    ensure!(
        title("proj:concentrator-pv").as_deref()
            == Some("A new generation of concentrator photovoltaic cells, modules and systems"),
        "project title"
    );
    let patent = snap
        .entities()
        .find(|e| e.class_name == "Patent" && e.attributes.get("number").map(|v| v.to_string()).as_deref() == Some("PCT/ES2000/000209"));
    ensure!(patent.is_some(), "patent PCT/ES2000/000209 missing");
    let article = snap
        .entities()
        .find(|e| e.class_name == "Article" && title(&e.id).as_deref() == Some("Understanding intermediate-band solar cells"));
    ensure!(article.is_some(), "article missing");
    // deterministic: an independently rebuilt graph yields the same steps
    let again = query::explain_relationship(&fixture_store().snapshot(None), "talent:antonio-luque-lopez", "area:NACE-29.10")
        .map_err(|e| e.to_string())?;
    ensure!(again == path, "path differs between runs");
    Ok(entities.join(" -> "))
}

// ------------------------------------------------------------ service checks

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use inneo::service::{router, AppState};
use tower::ServiceExt;

pub fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().worker_threads(8).enable_all().build().unwrap()
}

pub async fn call(state: &Arc<AppState>, method: &str, uri: &str, body: Vec<u8>) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri).body(Body::from(body)).unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("inneo").chain(args.iter().copied());
    let code = inneo::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Every read operation, as (CLI arguments, HTTP target).
pub fn read_operations() -> Vec<(Vec<&'static str>, &'static str)> {
    vec![
        (vec!["entity", "org:upm"], "/entities/org%3Aupm"),
        (vec!["entity", "proj:concentrator-pv", "--as-of", "2001-05-01"], "/entities/proj:concentrator-pv?as_of=2001-05-01"),
        (vec!["neighbors", "talent:antonio-luque-lopez"], "/entities/talent%3Aantonio-luque-lopez/neighbors"),
        (
            vec!["neighbors", "talent:antonio-luque-lopez", "--direction", "out", "--predicate", "authorOf", "--predicate", "inventorOf"],
            "/entities/talent%3Aantonio-luque-lopez/neighbors?direction=out&predicate=authorOf&predicate=inventorOf",
        ),
        (vec!["neighbors", "org:toyota", "--direction", "in"], "/entities/org%3Atoyota/neighbors?direction=in"),
        (vec!["path", "talent:antonio-luque-lopez", "area:NACE-29.10"], "/path?src=talent:antonio-luque-lopez&dst=area:NACE-29.10"),
        (vec!["path", "org:newco", "org:toyota", "--as-of", "2010-01-01"], "/path?src=org:newco&dst=org:toyota&as_of=2010-01-01"),
        (vec!["query", "orgs-in-area", "--area", "area:TOPIC-photovoltaics"], "/query/orgs-in-area?area=area:TOPIC-photovoltaics"),
        (vec!["query", "shared-patents", "--x", "org:upm", "--y", "org:toyota"], "/query/shared-patents?x=org:upm&y=org:toyota"),
        (vec!["query", "patenting-technologies", "--org", "org:upm"], "/query/patenting-technologies?org=org:upm"),
        (vec!["query", "funded-orgs", "--year", "2000"], "/query/funded-orgs?year=2000"),
        (vec!["query", "hiring-orgs", "--area", "area:TOPIC-photovoltaics"], "/query/hiring-orgs?area=area:TOPIC-photovoltaics"),
        (
            vec!["query", "collaboration", "--org", "org:newco", "--area", "area:TOPIC-photovoltaics"],
            "/query/collaboration?org=org:newco&area=area:TOPIC-photovoltaics",
        ),
        (vec!["metrics", "degree"], "/metrics/degree"),
        (vec!["metrics", "betweenness"], "/metrics/betweenness"),
        (vec!["metrics", "components"], "/metrics/components"),
        (vec!["metrics", "knowledge", "--org", "org:upm"], "/metrics/knowledge?org=org:upm"),
        (
            vec!["metrics", "knowledge", "--org", "org:upm", "--wp", "2", "--wa", "0.5", "--wj", "1", "--wt", "0"],
            "/metrics/knowledge?org=org:upm&wp=2&wa=0.5&wj=1&wt=0",
        ),
        (vec!["export", "jsonl"], "/export/jsonl"),
        (vec!["export", "ntriples"], "/export/ntriples"),
        (vec!["export", "ntriples", "--base-iri", "https://kg.example.com/x/"], "/export/ntriples?base_iri=https://kg.example.com/x/"),
        (vec!["snapshot", "--as-of", "2001-01-01"], "/export/jsonl?as_of=2001-01-01"),
    ]
}

/// Build the fixture graph through the CLI, then compare every read with
/// the HTTP body served from the same file.
pub fn api_cli_parity() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let graph = dir.path().join("graph.jsonl");
    let graph_arg = graph.to_str().unwrap().to_string();
    for (name, _) in FIXTURE_ORDER {
        let file = fixture_path(name);
        let (code, _, err) = run_cli(&["--graph", &graph_arg, "ingest", name, file.to_str().unwrap()]);
        ensure!(code == 0, "cli ingest {name}: {err}");
    }
    let on_disk = std::fs::read_to_string(&graph).map_err(|e| e.to_string())?;
    ensure!(on_disk == export_jsonl(&fixture_store().snapshot(None)), "CLI-built graph differs");

    let store = inneo::persist::load_graph(&graph, Schema::default()).map_err(|e| e.to_string())?;
    let state = Arc::new(AppState::new(store, None));
    let rt = runtime();
    let ops = read_operations();
    for (args, uri) in &ops {
        let mut full = vec!["--graph", graph_arg.as_str()];
        full.extend(args.iter().copied());
        let (code, stdout, stderr) = run_cli(&full);
        let (status, body) = rt.block_on(call(&state, "GET", uri, Vec::new()));
        ensure!(code == 0 && status == StatusCode::OK, "{uri}: exit {code} status {status} {stderr}{body}");
        ensure!(stdout == body, "{uri}: CLI and HTTP bodies differ");
    }
    Ok(format!("{} read operations byte-identical", ops.len()))
}

pub fn bulk_organizations(rows: usize) -> Vec<u8> {
    let mut csv = String::from("org_id,name,country,activity_codes\n");
    for i in 0..rows {
        csv.push_str(&format!("bulk-{i:05},Bulk Org {i},ES,72.19|62.01\n"));
    }
    csv.into_bytes()
}

/// Readers running while a large ingest is in flight see the graph either
/// wholly before or wholly after it; a snapshot taken before the ingest is
/// unaffected by it.
pub fn snapshot_isolation() -> Check {
    let base = fixture_store();
    let before = export_jsonl(&base.snapshot(None));
    let bulk = bulk_organizations(4000);
    let mut expected_after = base.clone();
    ingest(&mut expected_after, SourceKind::Organizations, bulk.as_slice()).map_err(|e| e.to_string())?;
    let after = export_jsonl(&expected_after.snapshot(None));

    let state = Arc::new(AppState::new(base, None));
    let held = state.store().snapshot(None);
    let rt = runtime();
    let (seen_before, seen_after) = rt.block_on(async {
        let done = Arc::new(std::sync::atomic::AtomicBool::new(false));
        let mut readers = Vec::new();
        for _ in 0..4 {
            let state = state.clone();
            let done = done.clone();
            readers.push(tokio::spawn(async move {
                let mut bodies = Vec::new();
                loop {
                    let finished = done.load(std::sync::atomic::Ordering::SeqCst);
                    let (status, body) = call(&state, "GET", "/export/jsonl", Vec::new()).await;
                    assert_eq!(status, StatusCode::OK);
                    bodies.push(body);
                    if finished {
                        return bodies;
                    }
                    tokio::task::yield_now().await;
                }
            }));
        }
        let writer = {
            let state = state.clone();
            tokio::spawn(async move { call(&state, "POST", "/ingest/organizations", bulk).await })
        };
        let (status, _) = writer.await.unwrap();
        done.store(true, std::sync::atomic::Ordering::SeqCst);
        assert_eq!(status, StatusCode::OK);
        let mut seen = (0usize, 0usize);
        for r in readers {
            for body in r.await.unwrap() {
                if body == before {
                    seen.0 += 1;
                } else if body == after {
                    seen.1 += 1;
                } else {
                    return Err(format!("reader saw a partial graph ({} lines)", body.lines().count()));
                }
            }
        }
        Ok(seen)
    })?;
    ensure!(seen_after > 0, "no reader observed the finished ingest");
    ensure!(export_jsonl(&held) == before, "pre-ingest snapshot changed");
    ensure!(state.store().revalidate().is_empty(), "store fails re-validation after ingest");
    Ok(format!("{} reads before, {} after, none partial", seen_before, seen_after))
}
