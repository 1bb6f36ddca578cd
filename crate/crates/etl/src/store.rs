//! A file-backed triple store: one default graph in `data.nt`, plus the
//! IRI graph (`iri-graph.nt`) and its counters (`counters.tsv`).

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use semetl_core::ntriples::serialize_ntriples;
use semetl_core::ops::IriGraph;
use semetl_core::query::{execute_query, OutputHeader, Pattern, QueryResult};
use semetl_core::Graph;

use crate::error::{EtlError, Result};
use crate::io::{read_graph, read_graph_or_empty, write_atomic, write_atomic_with, write_graph};

pub const DATA_FILE: &str = "data.nt";
pub const IRI_GRAPH_FILE: &str = "iri-graph.nt";
pub const COUNTERS_FILE: &str = "counters.tsv";

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    data: Option<Graph>,
    iri_graph: IriGraph,
}

impl Store {
    /// Opens the store at `root`, creating the directory if needed. The
    /// data file is read on first use.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| EtlError::io(&root, e))?;
        let ig_path = root.join(IRI_GRAPH_FILE);
        let mut iri_graph = IriGraph::from_graph(&read_graph_or_empty(&ig_path)?)
            .map_err(|e| EtlError::parse(&ig_path, e))?;
        let counters = root.join(COUNTERS_FILE);
        match fs::read_to_string(&counters) {
            Ok(text) => iri_graph
                .load_counters_tsv(&text)
                .map_err(|e| EtlError::parse(&counters, e))?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(EtlError::io(&counters, e)),
        }
        Ok(Self {
            root,
            data: None,
            iri_graph,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn data_path(&self) -> PathBuf {
        self.root.join(DATA_FILE)
    }

    pub fn data(&mut self) -> Result<&Graph> {
        if self.data.is_none() {
            let path = self.data_path();
            let g = if path.exists() { read_graph(&path)? } else { Graph::new() };
            self.data = Some(g);
        }
        Ok(self.data.as_ref().expect("loaded above"))
    }

    pub fn len(&mut self) -> Result<usize> {
        Ok(self.data()?.len())
    }

    pub fn is_empty(&mut self) -> Result<bool> {
        Ok(self.data()?.is_empty())
    }

    /// Adds `g` to the store and persists the result.
    pub fn merge(&mut self, g: &Graph) -> Result<()> {
        let merged = self.data()?.union(g);
        self.replace(merged)
    }

    /// Removes `deleted`, then adds `inserted`.
    pub fn apply(&mut self, deleted: &Graph, inserted: &Graph) -> Result<()> {
        let next = self.data()?.difference(deleted).union(inserted);
        self.replace(next)
    }

    pub fn replace(&mut self, g: Graph) -> Result<()> {
        self.replace_with(g, |_| Ok(()))
    }

    /// [`Store::replace`] with a hook run after the temporary file is
    /// written and before it is renamed into place. A hook error leaves the
    /// previous state on disk and in memory.
    pub fn replace_with(&mut self, g: Graph, before_rename: impl FnOnce(&Path) -> io::Result<()>) -> Result<()> {
        write_atomic_with(&self.data_path(), serialize_ntriples(&g).as_bytes(), before_rename)?;
        self.data = Some(g);
        Ok(())
    }

    pub fn query(&mut self, q: &Pattern, header: &OutputHeader) -> Result<QueryResult> {
        execute_query(q, self.data()?, header).map_err(|e| EtlError::Config(e.to_string()))
    }

    pub fn iri_graph(&self) -> &IriGraph {
        &self.iri_graph
    }

    pub fn iri_graph_mut(&mut self) -> &mut IriGraph {
        &mut self.iri_graph
    }

    /// Persists the IRI graph and its counters.
    pub fn save_iri_graph(&self) -> Result<()> {
        write_graph(&self.root.join(IRI_GRAPH_FILE), &self.iri_graph.to_graph())?;
        write_atomic(&self.root.join(COUNTERS_FILE), self.iri_graph.counters_tsv().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use semetl_core::ntriples::parse_ntriples;
    use semetl_core::query::Variable;
    use semetl_core::{Iri, Term};

    fn g(text: &str) -> Graph {
        parse_ntriples(text.as_bytes()).unwrap()
    }

    const A: &str = "<http://x/a> <http://x/p> \"1\" .\n";
    const B: &str = "<http://x/b> <http://x/p> \"2\" .\n";

    #[test]
    fn merge_persists_and_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Store::open(dir.path().join("sdw")).unwrap();
        assert!(s.is_empty().unwrap());
        s.merge(&g(A)).unwrap();
        s.merge(&g(A)).unwrap();
        assert_eq!(s.len().unwrap(), 1);
        let mut again = Store::open(dir.path().join("sdw")).unwrap();
        assert_eq!(again.data().unwrap(), &g(A));
    }

    #[test]
    fn merge_commutes() {
        let dir = tempfile::tempdir().unwrap();
        let mut s1 = Store::open(dir.path().join("1")).unwrap();
        let mut s2 = Store::open(dir.path().join("2")).unwrap();
        s1.merge(&g(A)).unwrap();
        s1.merge(&g(B)).unwrap();
        s2.merge(&g(B)).unwrap();
        s2.merge(&g(A)).unwrap();
        assert_eq!(
            fs::read(s1.data_path()).unwrap(),
            fs::read(s2.data_path()).unwrap()
        );
    }

    #[test]
    fn crash_before_rename_keeps_previous_state() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Store::open(dir.path()).unwrap();
        s.merge(&g(A)).unwrap();
        let before = fs::read(s.data_path()).unwrap();
        let r = s.replace_with(g(&format!("{A}{B}")), |_| Err(io::Error::other("power loss")));
        assert!(r.is_err());
        assert_eq!(fs::read(s.data_path()).unwrap(), before);
        assert_eq!(s.data().unwrap(), &g(A));
        let mut reopened = Store::open(dir.path()).unwrap();
        assert_eq!(reopened.data().unwrap(), &g(A));
    }

    #[test]
    fn corrupt_data_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(DATA_FILE), "not triples").unwrap();
        let mut s = Store::open(dir.path()).unwrap();
        let e = s.data().unwrap_err();
        assert!(e.to_string().contains(DATA_FILE), "{e}");
    }

    #[test]
    fn query_delegates() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Store::open(dir.path()).unwrap();
        s.merge(&g(&format!("{A}{B}"))).unwrap();
        let x = Variable::new("x");
        let q = Pattern::triple(x.clone(), Iri::new_unchecked("http://x/p"), Term::string("2"));
        let r = s.query(&q, &OutputHeader::variables(["x"])).unwrap();
        assert_eq!(r.rows.len(), 1);
    }

    #[test]
    fn iri_graph_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Store::open(dir.path()).unwrap();
        s.iri_graph_mut().set_counter(Iri::new_unchecked("http://x/D"), 7);
        s.save_iri_graph().unwrap();
        let again = Store::open(dir.path()).unwrap();
        assert_eq!(again.iri_graph(), s.iri_graph());
        let tsv = fs::read_to_string(dir.path().join(COUNTERS_FILE)).unwrap();
        assert_eq!(tsv, "http://x/D\t7\n");
    }
}
