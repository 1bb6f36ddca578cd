//! Plan execution over materialized N-Triples files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use semetl_core::mapping::{ConceptMapping, MappingFile, PropertyMapping, SourceValue};
use semetl_core::operation::Operation;
use semetl_core::ops::{
    changed_data_capture, external_linking, extraction_query, graph_extractor, join_transformation,
    level_member_generator, materialize_inference, observation_generator, transformation_on_literal,
    update_level, GeneratorParams, JoinParams, TransformParams, UpdateParams,
};
use semetl_core::plan::{check_plan, FlowPlan, OpInvocation};
use semetl_core::schema::{extract_tbox, TargetTBox};
use semetl_core::{Clock, Date, FixedClock, Graph, Term};

use crate::error::{EtlError, Result};
use crate::io::{read_graph, read_graph_or_empty, write_graph};
use crate::store::Store;

pub const DEFAULT_CHUNK_SIZE: usize = 500_000;
pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_TOP_K: usize = 5;

/// Settings shared by every command that runs operations.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mapping: Option<PathBuf>,
    pub tboxes: Vec<PathBuf>,
    pub workspace: PathBuf,
    /// Overrides the store of every Loader when set.
    pub store: Option<PathBuf>,
    /// Fixed "today" for versioning; the system date otherwise.
    pub clock: Option<Date>,
    pub chunk_size: usize,
    pub theta: f64,
    pub top_k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mapping: None,
            tboxes: Vec::new(),
            workspace: PathBuf::from("workspace"),
            store: None,
            clock: None,
            chunk_size: DEFAULT_CHUNK_SIZE,
            theta: DEFAULT_THETA,
            top_k: DEFAULT_TOP_K,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(EtlError::Config(format!("theta {} is outside [0, 1]", self.theta)));
        }
        if self.chunk_size == 0 {
            return Err(EtlError::Config("chunk size must be positive".into()));
        }
        let mut paths: Vec<&Path> = self.tboxes.iter().map(PathBuf::as_path).collect();
        paths.extend(self.mapping.as_deref());
        paths.push(&self.workspace);
        paths.extend(self.store.as_deref());
        let mut seen = std::collections::BTreeSet::new();
        for p in paths {
            if !seen.insert(p) {
                return Err(EtlError::Config(format!("path {} is given twice", p.display())));
            }
        }
        Ok(())
    }

    pub fn clock(&self) -> Box<dyn Clock> {
        match self.clock {
            Some(d) => Box::new(FixedClock(d)),
            None => Box::new(SystemClock),
        }
    }
}

/// Today's UTC date.
#[derive(Clone, Copy, Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn today(&self) -> Date {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Date::from_days((secs / 86_400) as i64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub index: usize,
    pub op: Operation,
    pub triples_read: usize,
    pub triples_written: usize,
    pub duration: Duration,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EtlRunReport {
    pub flow_id: String,
    /// One entry per step after StartOp.
    pub steps: Vec<StepReport>,
    pub output: Option<PathBuf>,
}

impl fmt::Display for EtlRunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "flow {}", self.flow_id)?;
        for s in &self.steps {
            writeln!(
                f,
                "  {:>2} {:<24} read {:>8} wrote {:>8} in {:>8.3} ms",
                s.index,
                s.op.name(),
                s.triples_read,
                s.triples_written,
                s.duration.as_secs_f64() * 1000.0
            )?;
            for w in &s.warnings {
                writeln!(f, "     warning: {w}")?;
            }
        }
        if let Some(o) = &self.output {
            writeln!(f, "  output {}", o.display())?;
        }
        Ok(())
    }
}

/// Splits `g` into graphs of at most about `size` triples without
/// separating the triples of one subject.
pub fn subject_chunks(g: &Graph, size: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    let mut current = Graph::new();
    let mut last: Option<Term> = None;
    for t in g.iter() {
        if current.len() >= size && last.as_ref() != Some(&t.subject) {
            out.push(std::mem::take(&mut current));
        }
        last = Some(t.subject.clone());
        current.insert(t);
    }
    if !current.is_empty() || out.is_empty() {
        out.push(current);
    }
    out
}

/// Target properties copied to themselves, for operations that run after
/// a transformation already applied the property-mappings.
pub fn identity_mappings(pms: &[PropertyMapping]) -> Vec<PropertyMapping> {
    pms.iter()
        .map(|pm| PropertyMapping {
            source: SourceValue::Property(pm.target_property.clone()),
            ..pm.clone()
        })
        .collect()
}

/// Path of the graph of triples an UpdateLevel step removed.
pub fn deleted_sidecar(output: &Path) -> PathBuf {
    let name = output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    output.with_file_name(format!("{name}.deleted.nt"))
}

struct StepOutcome {
    read: usize,
    written: usize,
    warnings: Vec<String>,
}

/// Runs plans against a mapping file. Stores are opened once and shared
/// by all plans of one executor.
pub struct Executor<'a> {
    mapping: &'a MappingFile,
    cfg: &'a RunConfig,
    clock: Box<dyn Clock>,
    stores: BTreeMap<PathBuf, Store>,
    tboxes: BTreeMap<PathBuf, Graph>,
}

impl<'a> Executor<'a> {
    pub fn new(mapping: &'a MappingFile, cfg: &'a RunConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            mapping,
            cfg,
            clock: cfg.clock(),
            stores: BTreeMap::new(),
            tboxes: BTreeMap::new(),
        })
    }

    pub fn store(&mut self, path: &Path) -> Result<&mut Store> {
        if !self.stores.contains_key(path) {
            let s = Store::open(path)?;
            self.stores.insert(path.to_path_buf(), s);
        }
        Ok(self.stores.get_mut(path).expect("opened above"))
    }

    /// The store whose IRI graph the plan's generators use: the configured
    /// store, else the first Loader's, else `<workspace>/store`.
    fn run_store_path(&self, plan: &FlowPlan) -> PathBuf {
        if let Some(s) = &self.cfg.store {
            return s.clone();
        }
        plan.steps
            .iter()
            .filter(|s| s.op == Operation::Loader)
            .find_map(|s| s.get_text("store"))
            .map(PathBuf::from)
            .unwrap_or_else(|| self.cfg.workspace.join("store"))
    }

    fn tbox(&mut self, path: &Path) -> Result<Graph> {
        if let Some(g) = self.tboxes.get(path) {
            return Ok(g.clone());
        }
        let g = read_graph(path)?;
        self.tboxes.insert(path.to_path_buf(), g.clone());
        Ok(g)
    }

    fn target_tbox(&mut self, path: &Path) -> Result<TargetTBox> {
        let g = self.tbox(path)?;
        TargetTBox::load(&g).map_err(|e| EtlError::parse(path, e))
    }

    /// Runs the steps of `plan` in order. Intermediate files written before
    /// a failing step are left in place.
    pub fn execute(&mut self, plan: &FlowPlan) -> Result<EtlRunReport> {
        check_plan(&plan.steps)?;
        let mut report = EtlRunReport {
            flow_id: plan.flow_id.clone(),
            ..EtlRunReport::default()
        };
        if plan.steps.len() == 1 {
            return Ok(report);
        }
        let run_store = self.run_store_path(plan);
        for index in 1..plan.steps.len() {
            let step = &plan.steps[index];
            let prev = plan.steps[index - 1].op;
            let started = Instant::now();
            let outcome = self
                .run_step(step, prev, &run_store)
                .map_err(|e| match e {
                    EtlError::Step { .. } | EtlError::Io { .. } | EtlError::Parse { .. } => e,
                    other => EtlError::Step {
                        step: index,
                        op: step.op,
                        message: other.to_string(),
                    },
                })?;
            report.steps.push(StepReport {
                index,
                op: step.op,
                triples_read: outcome.read,
                triples_written: outcome.written,
                duration: started.elapsed(),
                warnings: outcome.warnings,
            });
        }
        if plan.steps.iter().any(|s| {
            matches!(
                s.op,
                Operation::LevelMemberGenerator
                    | Operation::ObservationGenerator
                    | Operation::UpdateLevel
                    | Operation::Loader
            )
        }) {
            self.store(&run_store)?.save_iri_graph()?;
        }
        report.output = plan
            .steps
            .last()
            .and_then(|s| match (s.op, &self.cfg.store) {
                (Operation::Loader, Some(store)) => Some(store.clone()),
                _ => s.output().map(PathBuf::from),
            });
        Ok(report)
    }

    fn concept_mapping(&self, step: &OpInvocation) -> Result<&'a ConceptMapping> {
        let id = step
            .get_term("cm")
            .ok_or_else(|| EtlError::Config(format!("{} has no cm parameter", step.op)))?;
        self.mapping
            .concept_mappings
            .get(id)
            .ok_or_else(|| EtlError::Config(format!("concept-mapping {id} is not in the mapping file")))
    }

    fn property_mappings(&self, step: &OpInvocation, cm: &ConceptMapping) -> Vec<PropertyMapping> {
        if step.get_text("identity") == Some("true") {
            identity_mappings(&cm.property_mappings)
        } else {
            cm.property_mappings.clone()
        }
    }

    fn run_step(&mut self, step: &OpInvocation, prev: Operation, run_store: &Path) -> Result<StepOutcome> {
        let text = |key: &str| {
            step.get_text(key)
                .ok_or_else(|| EtlError::Config(format!("{} has no {key} parameter", step.op)))
        };
        let iri = |key: &str| {
            step.get_iri(key)
                .cloned()
                .ok_or_else(|| EtlError::Config(format!("{} has no {key} parameter", step.op)))
        };
        let op_err = |e: semetl_core::ops::OpError| EtlError::Config(e.to_string());
        let chunk = self.cfg.chunk_size;
        let input_path = PathBuf::from(text("input")?);
        let input = read_graph(&input_path)?;
        let read = input.len();
        let mut warnings = Vec::new();

        let output: Graph = match step.op {
            Operation::StartOp => return Ok(StepOutcome { read: 0, written: 0, warnings }),
            Operation::GraphExtractor => {
                let cm = self.concept_mapping(step)?;
                let (q, pattern) = extraction_query(&iri("concept")?, &cm.mapped_instances).map_err(op_err)?;
                let mut out = Graph::new();
                for part in subject_chunks(&input, chunk) {
                    out.extend(graph_extractor(&q, &part, &pattern).iter());
                }
                out
            }
            Operation::TBoxExtraction => {
                let extracted = extract_tbox(&input).map_err(|e| EtlError::Config(e.to_string()))?;
                warnings.extend(extracted.diagnostics.iter().map(ToString::to_string));
                extracted.tbox
            }
            Operation::TransformationOnLiteral => {
                let cm = self.concept_mapping(step)?;
                let pms = self.property_mappings(step, cm);
                let stbox = self.tbox(Path::new(text("stbox")?))?;
                let (source, target) = (iri("source")?, iri("target")?);
                let params = TransformParams {
                    source_concept: &source,
                    target_concept: &target,
                    stbox: &stbox,
                    property_mappings: &pms,
                };
                let mut out = Graph::new();
                for part in subject_chunks(&input, chunk) {
                    let (g, w) = transformation_on_literal(&params, &part).map_err(op_err)?;
                    out.extend(g.iter());
                    warnings.extend(w);
                }
                out
            }
            Operation::JoinTransformation => {
                let cm = self.concept_mapping(step)?;
                let pms = self.property_mappings(step, cm);
                let stbox = self.tbox(Path::new(text("stbox")?))?;
                let ttbox = self.tbox(Path::new(text("ttbox")?))?;
                let tabox = read_graph_or_empty(Path::new(text("tabox")?))?;
                let (source, target) = (iri("source")?, iri("target")?);
                let params = JoinParams {
                    source_concept: &source,
                    target_concept: &target,
                    stbox: &stbox,
                    ttbox: &ttbox,
                    relation: cm.relation,
                    common: &cm.common_properties,
                    property_mappings: &pms,
                };
                let (g, w) = join_transformation(&params, &input, &tabox).map_err(op_err)?;
                warnings.extend(w);
                g
            }
            Operation::LevelMemberGenerator | Operation::ObservationGenerator => {
                let cm = self.concept_mapping(step)?;
                let pms = self.property_mappings(step, cm);
                let ttbox = self.target_tbox(Path::new(text("ttbox")?))?;
                let (source, target) = (iri("source")?, iri("target")?);
                let params = GeneratorParams {
                    source_concept: &source,
                    target_concept: &target,
                    ttbox: &ttbox,
                    iri_value: &cm.iri_value,
                    property_mappings: &pms,
                };
                let generate = if step.op == Operation::LevelMemberGenerator {
                    level_member_generator
                } else {
                    observation_generator
                };
                let ig = self.store(run_store)?.iri_graph_mut();
                let mut out = Graph::new();
                for part in subject_chunks(&input, chunk) {
                    let (g, w) = generate(&params, &part, ig).map_err(op_err)?;
                    out.extend(g.iter());
                    warnings.extend(w);
                }
                out
            }
            Operation::ChangedDataCapture => {
                let old_path = PathBuf::from(text("old")?);
                let old = read_graph_or_empty(&old_path)?;
                let flag = match text("flag")? {
                    "0" => 0,
                    "1" => 1,
                    other => return Err(EtlError::Config(format!("flag must be 0 or 1, not {other}"))),
                };
                if let Some(snapshot) = step.get_text("snapshot") {
                    write_graph(Path::new(snapshot), &old)?;
                }
                let out = changed_data_capture(&old, &input, flag);
                let output = PathBuf::from(text("output")?);
                write_graph(&output, &out)?;
                // The new snapshot becomes the old one for the next run.
                if output != old_path {
                    write_graph(&old_path, &input)?;
                }
                return Ok(StepOutcome {
                    read,
                    written: out.len(),
                    warnings,
                });
            }
            Operation::UpdateLevel => {
                let cm = self.concept_mapping(step)?;
                let ttbox = self.target_tbox(Path::new(text("ttbox")?))?;
                let sabox = read_graph_or_empty(Path::new(text("sabox")?))?;
                let level = iri("level")?;
                let clock = &*self.clock;
                let params = UpdateParams {
                    level: &level,
                    ttbox: &ttbox,
                    property_mappings: &cm.property_mappings,
                    clock,
                };
                let store = self.stores.entry(run_store.to_path_buf());
                let store = match store {
                    std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::btree_map::Entry::Vacant(e) => e.insert(Store::open(run_store)?),
                };
                let tabox = store.data()?.clone();
                let outcome =
                    update_level(&params, &input, &sabox, &tabox, store.iri_graph_mut()).map_err(op_err)?;
                let output = PathBuf::from(text("output")?);
                if output.is_dir() {
                    // The flow ends at the store itself.
                    self.store(&output)?.apply(&outcome.deleted, &outcome.inserted)?;
                } else {
                    write_graph(&output, &outcome.graph)?;
                    write_graph(&deleted_sidecar(&output), &outcome.deleted)?;
                }
                return Ok(StepOutcome {
                    read,
                    written: outcome.inserted.len() + outcome.deleted.len(),
                    warnings,
                });
            }
            Operation::MaterializeInference => {
                let tbox = self.tbox(Path::new(text("tbox")?))?;
                materialize_inference(&input, &tbox)
            }
            Operation::ExternalLinking => {
                let external = read_graph(Path::new(text("external")?))?;
                external_linking(&input, &external, self.cfg.top_k, self.cfg.theta).map_err(op_err)?
            }
            Operation::Loader => {
                let target = match &self.cfg.store {
                    Some(s) => s.clone(),
                    None => PathBuf::from(text("store")?),
                };
                let sidecar = deleted_sidecar(&input_path);
                let store = self.store(&target)?;
                if prev == Operation::UpdateLevel && sidecar.exists() {
                    let deleted = read_graph(&sidecar)?;
                    store.apply(&deleted, &input)?;
                } else {
                    store.merge(&input)?;
                }
                return Ok(StepOutcome {
                    read,
                    written: read,
                    warnings,
                });
            }
        };
        write_graph(Path::new(text("output")?), &output)?;
        Ok(StepOutcome {
            read,
            written: output.len(),
            warnings,
        })
    }
}

/// Runs `plan` with a fresh executor.
pub fn execute_plan(plan: &FlowPlan, mapping: &MappingFile, cfg: &RunConfig) -> Result<EtlRunReport> {
    Executor::new(mapping, cfg)?.execute(plan)
}

/// Runs plans one after another; a failure stops the remaining plans.
pub fn execute_plans(plans: &[FlowPlan], mapping: &MappingFile, cfg: &RunConfig) -> Result<Vec<EtlRunReport>> {
    let mut ex = Executor::new(mapping, cfg)?;
    plans.iter().map(|p| ex.execute(p)).collect()
}
