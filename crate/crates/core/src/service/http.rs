//! JSON-over-HTTP facade.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, post};
use axum::Router;

use super::{execute_delete, execute_ingest, Params, ReadCall, Rendered};
use crate::error::Error;
use crate::persist::save_graph;
use crate::store::Store;

/// Shared service state. Writers take the lock exclusively; readers only
/// hold it long enough to take a snapshot.
pub struct AppState {
    store: RwLock<Store>,
    persist_to: Option<PathBuf>,
}

impl AppState {
    pub fn new(store: Store, persist_to: Option<PathBuf>) -> Self {
        AppState { store: RwLock::new(store), persist_to }
    }

    pub fn store(&self) -> std::sync::RwLockReadGuard<'_, Store> {
        self.store.read().unwrap_or_else(|p| p.into_inner())
    }

    fn store_mut(&self) -> std::sync::RwLockWriteGuard<'_, Store> {
        self.store.write().unwrap_or_else(|p| p.into_inner())
    }

    /// Apply a mutation under the writer lock and persist it. If persisting
    /// fails the in-memory store is rolled back.
    fn mutate<T>(&self, f: impl FnOnce(&mut Store) -> Result<T, Error>) -> Result<T, Error> {
        let mut guard = self.store_mut();
        let before = guard.clone();
        let out = f(&mut guard)?;
        if let Some(path) = &self.persist_to {
            if let Err(e) = save_graph(path, &guard) {
                *guard = before;
                return Err(e);
            }
        }
        Ok(out)
    }
}

fn ok(rendered: Rendered) -> Response {
    ([(header::CONTENT_TYPE, rendered.content_type)], rendered.body).into_response()
}

fn fail(err: Error) -> Response {
    let status = StatusCode::from_u16(err.status()).unwrap_or(StatusCode::UNPROCESSABLE_ENTITY);
    let mut body = serde_json::to_string(&err.body()).expect("error body serializes");
    body.push('\n');
    (status, [(header::CONTENT_TYPE, super::JSON)], body).into_response()
}

async fn read(State(state): State<Arc<AppState>>, method: Method, uri: Uri) -> Response {
    if method != Method::GET {
        return fail(Error::BadRequest(format!("method {method} not allowed on {}", uri.path())));
    }
    let params = Params::from_query(uri.query().unwrap_or(""));
    let call = match ReadCall::parse(uri.path(), &params) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let snapshot = state.store().snapshot(call.as_of);
    match super::execute_read(&snapshot, &call.request) {
        Ok(r) => ok(r),
        Err(e) => fail(e),
    }
}

async fn ingest(State(state): State<Arc<AppState>>, Path(kind): Path<String>, body: Bytes) -> Response {
    match state.mutate(|store| execute_ingest(store, &kind, &body)) {
        Ok((report, rendered)) => {
            log::info!(
                "ingested {kind}: {} read, {} rejected",
                report.records_read,
                report.rejected.len()
            );
            ok(rendered)
        }
        Err(e) => fail(e),
    }
}

async fn remove(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match state.mutate(|store| execute_delete(store, &id)) {
        Ok(r) => ok(r),
        Err(e) => fail(e),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/ingest/{kind}", post(ingest))
        .route("/entities/{id}", delete(remove).get(read))
        .fallback(read)
        .with_state(state)
}

/// Bind and serve until ctrl-c.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> Result<(), Error> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::Io(format!("bind {addr}: {e}")))?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
