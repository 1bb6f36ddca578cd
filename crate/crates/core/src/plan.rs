//! ETL flow generation (CreateETL, CreateAFlow, Parameterize) and the
//! line-oriented plan format.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::mapping::{ConceptMapping, MappingFile};
use crate::operation::Operation;
use crate::term::{BlankNode, Iri, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Param {
    Term(Term),
    Text(String),
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Term(t @ (Term::Iri(_) | Term::Blank(_))) => write!(f, "{t}"),
            Param::Term(t) => write!(f, "\"{}\"", escape(t.value_str())),
            Param::Text(s) => write!(f, "\"{}\"", escape(s)),
        }
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// One parameterized operation of a flow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpInvocation {
    pub op: Operation,
    /// In insertion order, as serialized.
    pub params: Vec<(String, Param)>,
}

impl OpInvocation {
    pub fn new(op: Operation) -> Self {
        Self {
            op,
            params: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: Param) -> Self {
        self.params.push((key.to_string(), value));
        self
    }

    fn text(self, key: &str, value: &str) -> Self {
        self.with(key, Param::Text(value.to_string()))
    }

    fn iri(self, key: &str, value: &Iri) -> Self {
        self.with(key, Param::Term(Term::Iri(value.clone())))
    }

    pub fn get(&self, key: &str) -> Option<&Param> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// A text parameter, or the lexical form of a term.
    pub fn get_text(&self, key: &str) -> Option<&str> {
        match self.get(key)? {
            Param::Text(s) => Some(s),
            Param::Term(Term::Literal(l)) => Some(l.lexical()),
            Param::Term(_) => None,
        }
    }

    pub fn get_term(&self, key: &str) -> Option<&Term> {
        match self.get(key)? {
            Param::Term(t) => Some(t),
            Param::Text(_) => None,
        }
    }

    pub fn get_iri(&self, key: &str) -> Option<&Iri> {
        self.get_term(key).and_then(Term::as_iri)
    }

    /// The materialized output path: `output`, or the store of a Loader.
    pub fn output(&self) -> Option<&str> {
        self.get_text("output").or_else(|| self.get_text("store"))
    }
}

impl fmt::Display for OpInvocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.op.name())?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// A flow for one target construct; `steps[0]` is StartOp.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowPlan {
    pub target: Iri,
    pub flow_id: String,
    pub workspace: String,
    pub steps: Vec<OpInvocation>,
}

impl fmt::Display for FlowPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanError {
    UnknownConstruct(Iri),
    /// An intermediate concept is the target of several concept-mappings.
    Ambiguous { concept: Iri, mappings: Vec<String> },
    Cycle(String),
    MissingField { mapping: String, field: &'static str },
    EmptySequence(String),
    NotStarted,
    Incompatible { index: usize, from: Operation, to: Operation },
    Syntax { line: usize, message: String },
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::UnknownConstruct(x) => write!(f, "{x} does not occur in the mapping file"),
            PlanError::Ambiguous { concept, mappings } => write!(
                f,
                "intermediate concept {concept} is targeted by {}",
                mappings.join(", ")
            ),
            PlanError::Cycle(cm) => write!(f, "concept-mapping chain through {cm} is cyclic"),
            PlanError::MissingField { mapping, field } => write!(f, "{mapping}: missing {field}"),
            PlanError::EmptySequence(cm) => write!(f, "{cm}: empty operation sequence"),
            PlanError::NotStarted => f.write_str("plan does not begin with StartOp"),
            PlanError::Incompatible { index, from, to } => {
                write!(f, "step {index}: {to} cannot follow {from}")
            }
            PlanError::Syntax { line, message } => write!(f, "plan line {line}: {message}"),
        }
    }
}

/// Where relative mapping paths resolve and intermediates go.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanConfig {
    pub workspace: String,
    pub base_dir: String,
}

impl PlanConfig {
    fn resolve(&self, path: &str) -> String {
        if path.starts_with('/') || self.base_dir.is_empty() {
            path.to_string()
        } else {
            format!("{}/{}", self.base_dir.trim_end_matches('/'), path)
        }
    }
}

fn label(t: &Term) -> String {
    match t {
        Term::Iri(i) => i.local_name().to_string(),
        other => other.value_str().to_string(),
    }
}

/// Flow identifier derived from the final concept-mapping.
fn flow_id(cm: &ConceptMapping) -> String {
    label(&cm.id)
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// One plan per concept-mapping targeting `x`, in identifier order.
pub fn create_etl(x: &Iri, m: &MappingFile, cfg: &PlanConfig) -> Result<Vec<FlowPlan>, PlanError> {
    if !m.mentions(x) {
        return Err(PlanError::UnknownConstruct(x.clone()));
    }
    m.targeting(x)
        .into_iter()
        .map(|cm| {
            let id = flow_id(cm);
            let steps = create_a_flow(cm, m, cfg, &id, x)?;
            Ok(FlowPlan {
                target: x.clone(),
                flow_id: id,
                workspace: cfg.workspace.clone(),
                steps,
            })
        })
        .collect()
}

/// The chain of concept-mappings feeding `cm`, upstream first, then the
/// parameterized steps of each after a StartOp.
pub fn create_a_flow(
    cm: &ConceptMapping,
    m: &MappingFile,
    cfg: &PlanConfig,
    flow: &str,
    target: &Iri,
) -> Result<Vec<OpInvocation>, PlanError> {
    let mut chain = alloc::vec![cm];
    let mut seen = BTreeSet::new();
    seen.insert(&cm.id);
    let mut current = cm;
    loop {
        let feeders: Vec<&ConceptMapping> = m
            .targeting(&current.source_concept)
            .into_iter()
            .filter(|c| c.id != current.id)
            .collect();
        match feeders.as_slice() {
            [] => break,
            [next] => {
                if !seen.insert(&next.id) {
                    return Err(PlanError::Cycle(label(&next.id)));
                }
                chain.push(next);
                current = next;
            }
            many => {
                return Err(PlanError::Ambiguous {
                    concept: current.source_concept.clone(),
                    mappings: many.iter().map(|c| label(&c.id)).collect(),
                })
            }
        }
    }
    let ws = format!("{}/{}", cfg.workspace.trim_end_matches('/'), flow);
    let mut steps = alloc::vec![OpInvocation::new(Operation::StartOp)
        .iri("target", target)
        .text("flow", flow)
        .text("workspace", &cfg.workspace)];
    let total: usize = chain.iter().map(|c| c.operations.len()).sum();
    for c in chain.into_iter().rev() {
        let input = steps.last().and_then(|s| s.output().map(String::from));
        let first = steps.len();
        let ops = parameterize(c, m, cfg, input.as_deref(), &ws, first, first + c.operations.len() - 1 == total)?;
        steps.extend(ops);
    }
    Ok(steps)
}

/// Parameterizes the operation sequence of `cm`. The first operation reads
/// `input` when given, else the concept-mapping's source location; each
/// later one reads its predecessor's output. `first_index` numbers the
/// workspace files; `ends_flow` marks the sequence whose last step keeps
/// the authored target location.
pub fn parameterize(
    cm: &ConceptMapping,
    m: &MappingFile,
    cfg: &PlanConfig,
    input: Option<&str>,
    ws: &str,
    first_index: usize,
    ends_flow: bool,
) -> Result<Vec<OpInvocation>, PlanError> {
    let name = label(&cm.id);
    if cm.operations.is_empty() {
        return Err(PlanError::EmptySequence(name));
    }
    let missing = |field| PlanError::MissingField {
        mapping: name.clone(),
        field,
    };
    let dataset = m.dataset_of(cm);
    let stbox = dataset.and_then(|d| d.source_tbox.as_deref()).map(|p| cfg.resolve(p));
    let ttbox = dataset.and_then(|d| d.target_tbox.as_deref()).map(|p| cfg.resolve(p));
    let target_location = cfg.resolve(&cm.target_location);
    let cm_term = Param::Term(cm.id.clone());

    let mut out: Vec<OpInvocation> = Vec::new();
    let mut input = input.map(String::from).unwrap_or_else(|| cfg.resolve(&cm.source_location));
    // After a transformation the data is typed with the target concept and
    // carries the target properties.
    let mut transformed = false;
    let last = cm.operations.len() - 1;
    for (k, &op) in cm.operations.iter().enumerate() {
        let index = first_index + k;
        let output = if ends_flow && k == last {
            target_location.clone()
        } else {
            format!("{ws}/{index}.nt")
        };
        let (source, source_tbox) = if transformed {
            (&cm.target_concept, ttbox.clone())
        } else {
            (&cm.source_concept, stbox.clone())
        };
        let base = OpInvocation::new(op).with("cm", cm_term.clone());
        let with_schema = |inv: OpInvocation, needs_target: bool| -> Result<OpInvocation, PlanError> {
            let mut inv = inv
                .iri("source", source)
                .iri("target", &cm.target_concept)
                .text("stbox", source_tbox.as_deref().ok_or_else(|| missing("sourceTBox"))?);
            if needs_target {
                inv = inv.text("ttbox", ttbox.as_deref().ok_or_else(|| missing("targetTBox"))?);
            }
            if transformed {
                inv = inv.text("identity", "true");
            }
            Ok(inv)
        };
        let inv = match op {
            Operation::StartOp => base,
            Operation::GraphExtractor => base.iri("concept", source).text("input", &input).text("output", &output),
            Operation::TBoxExtraction => OpInvocation::new(op).text("input", &input).text("output", &output),
            Operation::TransformationOnLiteral => {
                with_schema(base, false)?.text("input", &input).text("output", &output)
            }
            Operation::JoinTransformation => {
                if cm.common_properties.is_empty() {
                    return Err(missing("commonProperty"));
                }
                with_schema(base, true)?
                    .text("input", &input)
                    .text("tabox", &target_location)
                    .text("output", &output)
            }
            Operation::LevelMemberGenerator | Operation::ObservationGenerator => {
                with_schema(base, true)?.text("input", &input).text("output", &output)
            }
            Operation::ChangedDataCapture => {
                let next = cm.operations.get(k + 1).copied();
                let flag = if next == Some(Operation::LevelMemberGenerator) { "0" } else { "1" };
                base.text("input", &input)
                    .text("old", &target_location)
                    .text("flag", flag)
                    .text("snapshot", &format!("{ws}/{index}.old.nt"))
                    .text("output", &output)
            }
            Operation::UpdateLevel => {
                let sabox = out
                    .last()
                    .filter(|p| p.op == Operation::ChangedDataCapture)
                    .and_then(|p| p.get_text("snapshot"))
                    .map(String::from)
                    .unwrap_or_else(|| cfg.resolve(&cm.source_location));
                base.iri("level", &cm.target_concept)
                    .text("ttbox", ttbox.as_deref().ok_or_else(|| missing("targetTBox"))?)
                    .text("input", &input)
                    .text("sabox", &sabox)
                    .text("output", &output)
            }
            Operation::MaterializeInference => base
                .text("tbox", ttbox.as_deref().or(stbox.as_deref()).ok_or_else(|| missing("targetTBox"))?)
                .text("input", &input)
                .text("output", &output),
            Operation::ExternalLinking => base
                .text("input", &input)
                .text("external", &target_location)
                .text("output", &output),
            Operation::Loader => OpInvocation::new(op).text("input", &input).text(
                "store",
                &if ends_flow && k == last {
                    target_location.clone()
                } else {
                    output.clone()
                },
            ),
        };
        if matches!(op, Operation::TransformationOnLiteral | Operation::JoinTransformation) {
            transformed = true;
        }
        if let Some(o) = inv.output() {
            input = o.to_string();
        }
        out.push(inv);
    }
    Ok(out)
}

/// Refuses plans that do not start with StartOp or pair incompatible
/// operations.
pub fn check_plan(steps: &[OpInvocation]) -> Result<(), PlanError> {
    if steps.first().map(|s| s.op) != Some(Operation::StartOp) {
        return Err(PlanError::NotStarted);
    }
    for (index, w) in steps.windows(2).enumerate() {
        if !w[0].op.accepts_successor(w[1].op) {
            return Err(PlanError::Incompatible {
                index: index + 1,
                from: w[0].op,
                to: w[1].op,
            });
        }
    }
    Ok(())
}

/// Serializes plans, one step per line, a blank line between plans.
pub fn write_plans(plans: &[FlowPlan]) -> String {
    plans
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Parses the output of [`write_plans`]. Lines starting with `#` are
/// comments; each StartOp line opens a new plan.
pub fn parse_plans(text: &str) -> Result<Vec<FlowPlan>, PlanError> {
    let mut plans: Vec<FlowPlan> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let inv = parse_step(line).map_err(|message| PlanError::Syntax { line: n + 1, message })?;
        if inv.op == Operation::StartOp {
            plans.push(FlowPlan {
                target: inv.get_iri("target").cloned().unwrap_or_else(|| Iri::new_unchecked("")),
                flow_id: inv.get_text("flow").unwrap_or_default().to_string(),
                workspace: inv.get_text("workspace").unwrap_or_default().to_string(),
                steps: alloc::vec![inv],
            });
        } else {
            match plans.last_mut() {
                Some(p) => p.steps.push(inv),
                None => return Err(PlanError::NotStarted),
            }
        }
    }
    Ok(plans)
}

fn parse_step(line: &str) -> Result<OpInvocation, String> {
    let (name, mut rest) = line.split_once(' ').unwrap_or((line, ""));
    let op = Operation::from_name(name).ok_or_else(|| format!("unknown operation {name}"))?;
    let mut inv = OpInvocation::new(op);
    loop {
        rest = rest.trim_start();
        if rest.is_empty() {
            return Ok(inv);
        }
        let (key, after) = rest.split_once('=').ok_or_else(|| format!("expected key=value at {rest}"))?;
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(format!("bad parameter name {key:?}"));
        }
        let (value, remaining) = parse_value(after)?;
        inv.params.push((key.to_string(), value));
        rest = remaining;
    }
}

fn parse_value(s: &str) -> Result<(Param, &str), String> {
    if let Some(body) = s.strip_prefix('<') {
        let end = body.find('>').ok_or("unterminated IRI")?;
        let iri = Iri::new(&body[..end]).map_err(|e| e.to_string())?;
        return Ok((Param::Term(Term::Iri(iri)), &body[end + 1..]));
    }
    if let Some(body) = s.strip_prefix("_:") {
        let end = body.find(char::is_whitespace).unwrap_or(body.len());
        if end == 0 {
            return Err("empty blank node label".into());
        }
        return Ok((Param::Term(Term::Blank(BlankNode::new(&body[..end]))), &body[end..]));
    }
    let body = s.strip_prefix('"').ok_or("expected <iri>, _:label or \"text\"")?;
    let mut out = String::new();
    let mut chars = body.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '"' => return Ok((Param::Text(out), &body[i + 1..])),
            '\\' => match chars.next().map(|(_, c)| c) {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(c @ ('"' | '\\')) => out.push(c),
                _ => return Err("invalid escape".into()),
            },
            c => out.push(c),
        }
    }
    Err("unterminated string".into())
}
