//! The spec file: a JSON document naming algebras, elements, inclusions,
//! traces, groups and actions, plus an ordered list of tasks.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major lists of
//! rows. Every name is resolved and every shape checked at load time, so a
//! task only ever fails on mathematics.

use std::collections::BTreeMap;
use std::fmt;

use fdcstar::group::{CocycleAction, FiniteGroup};
use fdcstar::linalg::{c, CMat};
use fdcstar::standard::action_catalog;
use fdcstar::{Element, MultiMatrixAlgebra, StarHomomorphism, TraceState};
use serde::Deserialize;

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

/// A schema or reference error, with the section and entry it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError(pub String);

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SpecError {}

fn at(section: &str, entry: &str, msg: impl fmt::Display) -> SpecError {
    SpecError(format!("section `{section}`, entry `{entry}`: {msg}"))
}

/// An element given by name or inline as per-block matrices.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ElementRef {
    Name(String),
    Blocks(Vec<Matrix>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDef {
    pub algebra: String,
    pub blocks: Vec<Matrix>,
}

/// Unit images `ι(e⁽ᵇ⁾ᵢⱼ)` listed block by block, row-major within a block.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionDef {
    pub sub: String,
    pub ambient: String,
    pub images: Vec<ElementRef>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceDef {
    pub algebra: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDef {
    pub labels: Vec<String>,
    pub table: Vec<Vec<usize>>,
}

/// Either a catalogued action, or `α_g` unit images per group element and an
/// optional cocycle `σ[g][h]` (identity when absent).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDef {
    pub catalog: Option<String>,
    pub group: Option<String>,
    pub algebra: Option<String>,
    pub alpha: Option<Vec<Vec<ElementRef>>>,
    pub sigma: Option<Vec<Vec<ElementRef>>>,
}

/// A task as written; `trace` selects the expectation preserving that trace
/// on the ambient algebra, otherwise the minimal expectation is used.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskDef {
    VerifyInclusion {
        inclusion: String,
    },
    MarkovTrace {
        inclusion: String,
    },
    Expectation {
        inclusion: String,
        trace: Option<String>,
    },
    Index {
        inclusion: String,
        trace: Option<String>,
        expect: Option<f64>,
    },
    QuasiBasis {
        inclusion: String,
        trace: Option<String>,
        elements: Vec<ElementRef>,
    },
    Tower {
        inclusion: String,
        trace: Option<String>,
        levels: Option<usize>,
    },
    Depth {
        inclusion: String,
        trace: Option<String>,
        max_level: Option<usize>,
        expect_at_most: Option<usize>,
    },
    UnitarySearch {
        trace: String,
    },
    Cocycle {
        action: String,
    },
    CrossedProduct {
        action: String,
    },
    RoundTrip {
        action: String,
    },
    RegularIndex {
        inclusion: String,
        witnesses: Vec<ElementRef>,
    },
}

impl TaskDef {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskDef::VerifyInclusion { .. } => "verify_inclusion",
            TaskDef::MarkovTrace { .. } => "markov_trace",
            TaskDef::Expectation { .. } => "expectation",
            TaskDef::Index { .. } => "index",
            TaskDef::QuasiBasis { .. } => "quasi_basis",
            TaskDef::Tower { .. } => "tower",
            TaskDef::Depth { .. } => "depth",
            TaskDef::UnitarySearch { .. } => "unitary_search",
            TaskDef::Cocycle { .. } => "cocycle",
            TaskDef::CrossedProduct { .. } => "crossed_product",
            TaskDef::RoundTrip { .. } => "round_trip",
            TaskDef::RegularIndex { .. } => "regular_index",
        }
    }

    /// The primary object the task acts on.
    pub fn subject(&self) -> &str {
        match self {
            TaskDef::VerifyInclusion { inclusion }
            | TaskDef::MarkovTrace { inclusion }
            | TaskDef::Expectation { inclusion, .. }
            | TaskDef::Index { inclusion, .. }
            | TaskDef::QuasiBasis { inclusion, .. }
            | TaskDef::Tower { inclusion, .. }
            | TaskDef::Depth { inclusion, .. }
            | TaskDef::RegularIndex { inclusion, .. } => inclusion,
            TaskDef::UnitarySearch { trace } => trace,
            TaskDef::Cocycle { action }
            | TaskDef::CrossedProduct { action }
            | TaskDef::RoundTrip { action } => action,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(default)]
    pub algebras: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub elements: BTreeMap<String, ElementDef>,
    #[serde(default)]
    pub inclusions: BTreeMap<String, InclusionDef>,
    #[serde(default)]
    pub traces: BTreeMap<String, TraceDef>,
    #[serde(default)]
    pub groups: BTreeMap<String, GroupDef>,
    #[serde(default)]
    pub actions: BTreeMap<String, ActionDef>,
    pub tasks: Vec<TaskDef>,
}

/// An embedding whose *-homomorphism identities are checked by the tasks,
/// not at load time.
#[derive(Debug, Clone)]
pub struct InclusionData {
    pub embedding: StarHomomorphism,
}

/// A task with every reference resolved.
#[derive(Debug, Clone)]
pub struct Job {
    pub def: TaskDef,
    pub inclusion: Option<InclusionData>,
    pub trace: Option<TraceState>,
    pub action: Option<CocycleAction>,
    /// Inline or named elements of the ambient algebra.
    pub elements: Vec<Element>,
}

#[derive(Debug)]
pub struct Spec {
    pub jobs: Vec<Job>,
}

/// Parses and resolves a spec; JSON errors carry line and column.
pub fn parse(text: &str) -> Result<Spec, SpecError> {
    let file: SpecFile =
        serde_json::from_str(text).map_err(|e| SpecError(format!("schema: {e}")))?;
    resolve(file)
}

fn matrix(m: &Matrix, n: usize, what: &str) -> Result<CMat, String> {
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(format!("{what} must be {n}x{n}"));
    }
    if m.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(format!("{what} has a non-finite entry"));
    }
    Ok(CMat::from_fn(n, n, |i, j| c(m[i][j][0], m[i][j][1])))
}

fn element_from_blocks(a: &MultiMatrixAlgebra, blocks: &[Matrix]) -> Result<Element, String> {
    if blocks.len() != a.num_blocks() {
        return Err(format!(
            "{} blocks given for an algebra with {}",
            blocks.len(),
            a.num_blocks()
        ));
    }
    let ms = blocks
        .iter()
        .zip(a.dims())
        .enumerate()
        .map(|(b, (m, &n))| matrix(m, n, &format!("block {b}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Element::from_blocks(ms))
}

struct Resolver {
    algebras: BTreeMap<String, MultiMatrixAlgebra>,
    elements: BTreeMap<String, (String, Element)>,
    inclusions: BTreeMap<String, InclusionData>,
    traces: BTreeMap<String, TraceState>,
    actions: BTreeMap<String, CocycleAction>,
}

impl Resolver {
    fn algebra(&self, name: &str) -> Result<&MultiMatrixAlgebra, String> {
        self.algebras
            .get(name)
            .ok_or_else(|| format!("unknown algebra `{name}`"))
    }

    fn element(&self, algebra: &str, r: &ElementRef) -> Result<Element, String> {
        let a = self.algebra(algebra)?;
        match r {
            ElementRef::Name(name) => {
                let (home, x) = self
                    .elements
                    .get(name)
                    .ok_or_else(|| format!("unknown element `{name}`"))?;
                if home != algebra && self.algebras.get(home) != Some(a) {
                    return Err(format!(
                        "element `{name}` lives in `{home}`, not `{algebra}`"
                    ));
                }
                Ok(x.clone())
            }
            ElementRef::Blocks(blocks) => element_from_blocks(a, blocks),
        }
    }

    fn elements(&self, algebra: &str, rs: &[ElementRef]) -> Result<Vec<Element>, String> {
        rs.iter()
            .enumerate()
            .map(|(k, r)| {
                self.element(algebra, r)
                    .map_err(|e| format!("item {k}: {e}"))
            })
            .collect()
    }

    fn inclusion(&self, name: &str) -> Result<InclusionData, String> {
        self.inclusions
            .get(name)
            .cloned()
            .ok_or_else(|| format!("unknown inclusion `{name}`"))
    }

    fn trace(&self, name: &str) -> Result<TraceState, String> {
        self.traces
            .get(name)
            .cloned()
            .ok_or_else(|| format!("unknown trace `{name}`"))
    }

    /// A trace on the ambient algebra of `inc`.
    fn ambient_trace(
        &self,
        inc: &InclusionData,
        name: &Option<String>,
    ) -> Result<Option<TraceState>, String> {
        let Some(name) = name else { return Ok(None) };
        let t = self.trace(name)?;
        if t.algebra() != inc.embedding.target() {
            return Err(format!("trace `{name}` is not on the ambient algebra"));
        }
        Ok(Some(t))
    }

    fn action(&self, name: &str) -> Result<CocycleAction, String> {
        self.actions
            .get(name)
            .cloned()
            .ok_or_else(|| format!("unknown action `{name}`"))
    }
}

fn resolve(file: SpecFile) -> Result<Spec, SpecError> {
    let mut r = Resolver {
        algebras: BTreeMap::new(),
        elements: BTreeMap::new(),
        inclusions: BTreeMap::new(),
        traces: BTreeMap::new(),
        actions: BTreeMap::new(),
    };
    for (name, dims) in file.algebras {
        let a = MultiMatrixAlgebra::new(dims).map_err(|e| at("algebras", &name, e))?;
        r.algebras.insert(name, a);
    }
    for (name, def) in file.elements {
        let a = r
            .algebra(&def.algebra)
            .map_err(|e| at("elements", &name, e))?;
        let x = element_from_blocks(a, &def.blocks).map_err(|e| at("elements", &name, e))?;
        r.elements.insert(name, (def.algebra, x));
    }
    for (name, def) in file.inclusions {
        let err = |e: String| at("inclusions", &name, e);
        let sub = r.algebra(&def.sub).map_err(err)?.clone();
        let amb = r.algebra(&def.ambient).map_err(err)?.clone();
        let images = r.elements(&def.ambient, &def.images).map_err(err)?;
        let embedding = StarHomomorphism::new(sub, amb, images).map_err(|e| err(e.to_string()))?;
        r.inclusions.insert(name, InclusionData { embedding });
    }
    for (name, def) in file.traces {
        let a = r
            .algebra(&def.algebra)
            .map_err(|e| at("traces", &name, e))?;
        let t = TraceState::new(a, def.vector).map_err(|e| at("traces", &name, e))?;
        r.traces.insert(name, t);
    }
    let mut groups = BTreeMap::new();
    for (name, def) in file.groups {
        let g = FiniteGroup::new(def.labels, def.table).map_err(|e| at("groups", &name, e))?;
        groups.insert(name, g);
    }
    for (name, def) in file.actions {
        let act = resolve_action(&r, &groups, def).map_err(|e| at("actions", &name, e))?;
        r.actions.insert(name, act);
    }
    let jobs = file
        .tasks
        .into_iter()
        .enumerate()
        .map(|(k, def)| resolve_task(&r, def).map_err(|e| at("tasks", &k.to_string(), e)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Spec { jobs })
}

fn resolve_action(
    r: &Resolver,
    groups: &BTreeMap<String, FiniteGroup>,
    def: ActionDef,
) -> Result<CocycleAction, String> {
    if let Some(name) = def.catalog {
        if def.group.is_some()
            || def.algebra.is_some()
            || def.alpha.is_some()
            || def.sigma.is_some()
        {
            return Err("a catalogued action takes no other fields".into());
        }
        return action_catalog()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, a)| a)
            .ok_or_else(|| {
                let known: Vec<&str> = action_catalog().into_iter().map(|(n, _)| n).collect();
                format!("unknown catalogued action `{name}`; known: {known:?}")
            });
    }
    let gname = def.group.ok_or("missing `group`")?;
    let aname = def.algebra.ok_or("missing `algebra`")?;
    let alpha_defs = def.alpha.ok_or("missing `alpha`")?;
    let group = groups
        .get(&gname)
        .cloned()
        .ok_or_else(|| format!("unknown group `{gname}`"))?;
    let algebra = r.algebra(&aname)?.clone();
    let n = group.order();
    if alpha_defs.len() != n {
        return Err(format!(
            "`alpha` needs {n} entries, got {}",
            alpha_defs.len()
        ));
    }
    let alpha = alpha_defs
        .iter()
        .enumerate()
        .map(|(g, imgs)| {
            let images = r
                .elements(&aname, imgs)
                .map_err(|e| format!("alpha {g}: {e}"))?;
            StarHomomorphism::new(algebra.clone(), algebra.clone(), images)
                .map_err(|e| format!("alpha {g}: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sigma = match def.sigma {
        None => vec![vec![algebra.one(); n]; n],
        Some(rows) => {
            if rows.len() != n {
                return Err(format!("`sigma` needs {n} rows, got {}", rows.len()));
            }
            rows.iter()
                .enumerate()
                .map(|(g, row)| {
                    r.elements(&aname, row)
                        .map_err(|e| format!("sigma row {g}: {e}"))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    CocycleAction::new(group, algebra, alpha, sigma).map_err(|e| e.to_string())
}

fn resolve_task(r: &Resolver, def: TaskDef) -> Result<Job, String> {
    let mut job = Job {
        def: def.clone(),
        inclusion: None,
        trace: None,
        action: None,
        elements: Vec::new(),
    };
    match &def {
        TaskDef::VerifyInclusion { inclusion } | TaskDef::MarkovTrace { inclusion } => {
            job.inclusion = Some(r.inclusion(inclusion)?);
        }
        TaskDef::Expectation { inclusion, trace }
        | TaskDef::Index {
            inclusion, trace, ..
        }
        | TaskDef::Tower {
            inclusion, trace, ..
        }
        | TaskDef::Depth {
            inclusion, trace, ..
        } => {
            let inc = r.inclusion(inclusion)?;
            job.trace = r.ambient_trace(&inc, trace)?;
            job.inclusion = Some(inc);
        }
        TaskDef::QuasiBasis {
            inclusion,
            trace,
            elements,
        } => {
            let inc = r.inclusion(inclusion)?;
            job.trace = r.ambient_trace(&inc, trace)?;
            let amb = ambient_name(r, &inc);
            job.elements = r.elements(&amb, elements)?;
            job.inclusion = Some(inc);
        }
        TaskDef::RegularIndex {
            inclusion,
            witnesses,
        } => {
            let inc = r.inclusion(inclusion)?;
            let amb = ambient_name(r, &inc);
            job.elements = r.elements(&amb, witnesses)?;
            job.inclusion = Some(inc);
        }
        TaskDef::UnitarySearch { trace } => job.trace = Some(r.trace(trace)?),
        TaskDef::Cocycle { action }
        | TaskDef::CrossedProduct { action }
        | TaskDef::RoundTrip { action } => job.action = Some(r.action(action)?),
    }
    Ok(job)
}

/// A registered name of the ambient algebra of `inc`.
fn ambient_name(r: &Resolver, inc: &InclusionData) -> String {
    r.algebras
        .iter()
        .find(|(_, a)| *a == inc.embedding.target())
        .map(|(n, _)| n.clone())
        .expect("inclusions are built from registered algebras")
}
