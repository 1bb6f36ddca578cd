//! The `semetl` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use semetl_core::mapping::validate_mapping;
use semetl_core::ntriples::serialize_ntriples;
use semetl_core::operation::Operation;
use semetl_core::ops::{changed_data_capture, update_level, UpdateParams};
use semetl_core::plan::{parse_plans, write_plans};
use semetl_core::schema::{extract_tbox, TargetTBox};
use semetl_core::{Date, Graph};

use crate::error::{EtlError, Result};
use crate::exec::{execute_plans, RunConfig, DEFAULT_CHUNK_SIZE, DEFAULT_THETA, DEFAULT_TOP_K};
use crate::io::{read_graph, read_graph_or_empty, write_atomic};
use crate::store::Store;
use crate::LoadedMapping;

#[derive(Debug, Parser)]
#[command(name = "semetl", version, about = "Semantic ETL into a QB4OLAP data warehouse")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Opts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Opts {
    /// Source-to-target mapping file (Turtle).
    #[arg(short = 'm', long = "mapping", global = true)]
    pub mapping: Option<PathBuf>,
    /// TBox file; repeat for several.
    #[arg(short = 't', long = "tbox", global = true)]
    pub tbox: Vec<PathBuf>,
    /// Directory for intermediate results.
    #[arg(short = 'w', long = "workspace", global = true, default_value = "workspace")]
    pub workspace: PathBuf,
    /// Store directory; overrides the store named in the mapping.
    #[arg(short = 's', long = "store", global = true)]
    pub store: Option<PathBuf>,
    /// Fixed current date, YYYY-MM-DD.
    #[arg(long = "clock", global = true, value_parser = parse_date)]
    pub clock: Option<Date>,
    /// Triples per subject-partitioned chunk.
    #[arg(long = "chunk-size", global = true, default_value_t = DEFAULT_CHUNK_SIZE)]
    pub chunk_size: usize,
    /// Jaccard threshold for external linking.
    #[arg(long = "theta", global = true, default_value_t = DEFAULT_THETA)]
    pub theta: f64,
    /// Candidates compared per resource in external linking.
    #[arg(long = "top-k", global = true, default_value_t = DEFAULT_TOP_K)]
    pub top_k: usize,
    /// Write machine output here instead of stdout.
    #[arg(long = "out", global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive a TBox from an ABox.
    ExtractTbox { abox: PathBuf },
    /// Check a mapping file against TBoxes.
    Validate,
    /// Print the ETL flows for a target construct.
    Plan { target: String },
    /// Run the ETL flows for a target construct, or a saved plan file.
    Run {
        target: Option<String>,
        #[arg(long = "plan", conflicts_with = "target")]
        plan: Option<PathBuf>,
    },
    /// Compare a new source snapshot with the old one.
    Diff {
        new: PathBuf,
        old: PathBuf,
        /// 0 for new instances, 1 for changed triples.
        #[arg(long = "flag", value_parser = clap::value_parser!(u8).range(0..=1))]
        flag: u8,
    },
    /// Apply changed source triples to a level in the store.
    Update { level: String, changed: PathBuf },
}

fn parse_date(s: &str) -> std::result::Result<Date, String> {
    Date::parse(s).map_err(|_| format!("{s} is not a YYYY-MM-DD date"))
}

impl Opts {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            mapping: self.mapping.clone(),
            tboxes: self.tbox.clone(),
            workspace: self.workspace.clone(),
            store: self.store.clone(),
            clock: self.clock,
            chunk_size: self.chunk_size,
            theta: self.theta,
            top_k: self.top_k,
        }
    }

    fn mapping(&self) -> Result<LoadedMapping> {
        let path = self
            .mapping
            .as_deref()
            .ok_or_else(|| EtlError::Config("this command needs -m/--mapping".into()))?;
        LoadedMapping::load(path)
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            if let EtlError::Diagnostics(ds) = &e {
                for d in ds {
                    let _ = writeln!(stderr, "{d}");
                }
            }
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(opts: &Opts, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match &opts.out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| EtlError::io("<stdout>", e)),
    }
}

/// The TBoxes validation checks against: `-t` files, else the TBoxes the
/// mapping's datasets name.
fn validation_tboxes(opts: &Opts, loaded: &LoadedMapping) -> Result<Vec<Graph>> {
    let paths: Vec<PathBuf> = if opts.tbox.is_empty() {
        let mut ps: Vec<PathBuf> = loaded
            .mapping
            .datasets
            .values()
            .flat_map(|d| [d.source_tbox.as_deref(), d.target_tbox.as_deref()])
            .flatten()
            .map(|p| loaded.resolve(p))
            .collect();
        ps.sort();
        ps.dedup();
        ps
    } else {
        opts.tbox.clone()
    };
    paths.iter().map(|p| read_graph(p)).collect()
}

fn validate(opts: &Opts, loaded: &LoadedMapping) -> Result<()> {
    let tboxes = validation_tboxes(opts, loaded)?;
    let refs: Vec<&Graph> = tboxes.iter().collect();
    let diagnostics = validate_mapping(&loaded.mapping, &refs);
    if diagnostics.is_empty() {
        Ok(())
    } else {
        Err(EtlError::Diagnostics(diagnostics))
    }
}

fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8> {
    let opts = &cli.opts;
    let cfg = opts.run_config();
    match &cli.command {
        Command::ExtractTbox { abox } => {
            let g = read_graph(abox)?;
            let extracted = extract_tbox(&g).map_err(|e| EtlError::parse(abox, e))?;
            for d in &extracted.diagnostics {
                let _ = writeln!(stderr, "warning: {d}");
            }
            emit(opts, stdout, &serialize_ntriples(&extracted.tbox))?;
        }
        Command::Validate => {
            let loaded = opts.mapping()?;
            validate(opts, &loaded)?;
            let _ = writeln!(stderr, "mapping is valid");
        }
        Command::Plan { target } => {
            let loaded = opts.mapping()?;
            let x = loaded.iri(target)?;
            let plans = loaded.plans(&x, &opts.workspace)?;
            if plans.is_empty() {
                let _ = writeln!(stderr, "no concept-mapping targets {x}");
            }
            emit(opts, stdout, &write_plans(&plans))?;
        }
        Command::Run { target, plan } => {
            cfg.validate()?;
            let loaded = opts.mapping()?;
            if !opts.tbox.is_empty() {
                validate(opts, &loaded)?;
            }
            let plans = match (target, plan) {
                (_, Some(file)) => {
                    let text = fs::read_to_string(file).map_err(|e| EtlError::io(file, e))?;
                    parse_plans(&text).map_err(|e| EtlError::parse(file, e))?
                }
                (Some(t), None) => loaded.plans(&loaded.iri(t)?, &opts.workspace)?,
                (None, None) => return Err(EtlError::Config("run needs a target or --plan".into())),
            };
            for report in execute_plans(&plans, &loaded.mapping, &cfg)? {
                let _ = write!(stderr, "{report}");
            }
        }
        Command::Diff { new, old, flag } => {
            let n = read_graph(new)?;
            let o = read_graph_or_empty(old)?;
            emit(opts, stdout, &serialize_ntriples(&changed_data_capture(&o, &n, *flag)))?;
        }
        Command::Update { level, changed } => {
            cfg.validate()?;
            let loaded = opts.mapping()?;
            let level = loaded.iri(level)?;
            let candidates = loaded.mapping.targeting(&level);
            let cm = candidates
                .iter()
                .find(|c| c.operations.contains(&Operation::UpdateLevel))
                .or_else(|| candidates.first())
                .ok_or_else(|| EtlError::Config(format!("no concept-mapping targets {level}")))?;
            let ttbox_path = loaded
                .mapping
                .dataset_of(cm)
                .and_then(|d| d.target_tbox.as_deref())
                .map(|p| loaded.resolve(p))
                .ok_or_else(|| EtlError::Config("the concept-mapping's dataset has no target TBox".into()))?;
            let ttbox = TargetTBox::load(&read_graph(&ttbox_path)?).map_err(|e| EtlError::parse(&ttbox_path, e))?;
            let store_path = opts.store.clone().unwrap_or_else(|| loaded.resolve(&cm.target_location));
            let updated = read_graph(changed)?;
            let sabox = read_graph_or_empty(&loaded.resolve(&cm.source_location))?;
            let clock = cfg.clock();
            let params = UpdateParams {
                level: &level,
                ttbox: &ttbox,
                property_mappings: &cm.property_mappings,
                clock: &*clock,
            };
            let mut store = Store::open(&store_path)?;
            let tabox = store.data()?.clone();
            let outcome = update_level(&params, &updated, &sabox, &tabox, store.iri_graph_mut())
                .map_err(|e| EtlError::Config(e.to_string()))?;
            store.apply(&outcome.deleted, &outcome.inserted)?;
            store.save_iri_graph()?;
            let _ = writeln!(
                stderr,
                "{}: deleted {} and inserted {} triples",
                display(&store_path),
                outcome.deleted.len(),
                outcome.inserted.len()
            );
            if opts.out.is_some() {
                emit(opts, stdout, &serialize_ntriples(&outcome.graph))?;
            }
        }
    }
    Ok(0)
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
