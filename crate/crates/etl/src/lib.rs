//! File-backed triple store, plan execution and the `semetl` command line
//! on top of `semetl-core`.

pub mod cli;
pub mod error;
pub mod exec;
pub mod io;
pub mod store;

use std::path::{Path, PathBuf};

use semetl_core::mapping::{parse_mapping, MappingFile};
use semetl_core::plan::{create_etl, FlowPlan, PlanConfig};
use semetl_core::turtle::Prefixes;
use semetl_core::Iri;

pub use error::{EtlError, Result};
pub use exec::{execute_plan, execute_plans, EtlRunReport, Executor, RunConfig, StepReport};
pub use store::Store;

/// A parsed mapping file and the directory its relative paths resolve
/// against.
#[derive(Clone, Debug)]
pub struct LoadedMapping {
    pub mapping: MappingFile,
    pub prefixes: Prefixes,
    pub base_dir: PathBuf,
}

impl LoadedMapping {
    pub fn load(path: &Path) -> Result<Self> {
        let doc = io::read_turtle(path)?;
        let mapping = parse_mapping(&doc.graph, &doc.prefixes).map_err(|e| EtlError::parse(path, e))?;
        Ok(Self {
            mapping,
            prefixes: doc.prefixes,
            base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    /// Resolves a mapping-relative path.
    pub fn resolve(&self, path: &str) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn plan_config(&self, workspace: &Path) -> PlanConfig {
        PlanConfig {
            workspace: workspace.to_string_lossy().into_owned(),
            base_dir: self.base_dir.to_string_lossy().into_owned(),
        }
    }

    /// Parses `<iri>`, an absolute IRI, or a prefixed name declared in the
    /// mapping file.
    pub fn iri(&self, text: &str) -> Result<Iri> {
        let text = text.trim();
        let full = if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            inner.to_string()
        } else if text.contains("://") {
            text.to_string()
        } else {
            self.prefixes
                .expand_pname(text)
                .ok_or_else(|| EtlError::Config(format!("cannot expand {text}: undeclared prefix")))?
        };
        Iri::new(&full).map_err(|e| EtlError::Config(format!("{full}: {e}")))
    }

    pub fn plans(&self, target: &Iri, workspace: &Path) -> Result<Vec<FlowPlan>> {
        Ok(create_etl(target, &self.mapping, &self.plan_config(workspace))?)
    }
}

/// Plans and runs every flow for `target`.
pub fn run_target(target: &Iri, loaded: &LoadedMapping, cfg: &RunConfig) -> Result<Vec<EtlRunReport>> {
    let plans = loaded.plans(target, &cfg.workspace)?;
    execute_plans(&plans, &loaded.mapping, cfg)
}
