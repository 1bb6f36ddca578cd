//! Reading and writing graph files.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use semetl_core::ntriples::{parse_ntriples, serialize_ntriples};
use semetl_core::turtle::{parse_turtle, TurtleDocument};
use semetl_core::Graph;

use crate::error::{EtlError, Result};

fn is_turtle(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "ttl")
}

/// Reads `.ttl` files as Turtle and everything else as N-Triples.
pub fn read_graph(path: &Path) -> Result<Graph> {
    let bytes = fs::read(path).map_err(|e| EtlError::io(path, e))?;
    if is_turtle(path) {
        parse_turtle(&bytes)
            .map(|d| d.graph)
            .map_err(|e| EtlError::parse(path, e))
    } else {
        parse_ntriples(&bytes).map_err(|e| EtlError::parse(path, e))
    }
}

/// Like [`read_graph`], but a missing file is an empty graph.
pub fn read_graph_or_empty(path: &Path) -> Result<Graph> {
    match fs::metadata(path) {
        Ok(_) => read_graph(path),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Graph::new()),
        Err(e) => Err(EtlError::io(path, e)),
    }
}

pub fn read_turtle(path: &Path) -> Result<TurtleDocument> {
    let bytes = fs::read(path).map_err(|e| EtlError::io(path, e))?;
    parse_turtle(&bytes).map_err(|e| EtlError::parse(path, e))
}

/// Writes `g` as sorted N-Triples, atomically.
pub fn write_graph(path: &Path, g: &Graph) -> Result<()> {
    write_atomic(path, serialize_ntriples(g).as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic_with(path, bytes, |_| Ok(()))
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp"))
}

/// Writes to a sibling temporary file, then renames it over `path`.
/// `before_rename` runs between the two steps; an error from it aborts the
/// write and leaves `path` untouched.
pub fn write_atomic_with(
    path: &Path,
    bytes: &[u8],
    before_rename: impl FnOnce(&Path) -> io::Result<()>,
) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| EtlError::io(dir, e))?;
    }
    let tmp = temp_path(path);
    let written = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        before_rename(&tmp)?;
        fs::rename(&tmp, path)
    })();
    written.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        EtlError::io(path, e)
    })
}
