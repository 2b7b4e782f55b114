//! Graph file persistence: the canonical JSONL export, written atomically.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::schema::Schema;
use crate::store::{export_jsonl, import_jsonl, Store};

/// Load a graph file. A missing file yields an empty store.
pub fn load_graph(path: &Path, schema: Schema) -> Result<Store> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(import_jsonl(schema, &text)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Store::new(schema)),
        Err(e) => Err(e.into()),
    }
}

/// Write the canonical export next to `path` and rename it into place.
pub fn save_graph(path: &Path, store: &Store) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(export_jsonl(&store.snapshot(None)).as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
