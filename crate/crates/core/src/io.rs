//! JSON encodings of the external interfaces: set-function descriptors,
//! instance files, solutions, graphs, and formulas.
//!
//! Agent/action indices are 1-based in every JSON surface; graph vertices
//! and coverage universe elements are 0-based. Exact rationals are written
//! as `"p/q"` strings, floats as JSON numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gadgets::{CliqueGadgetFn, Formula3Cnf5, HiddenSetFn};
use crate::graph::Graph;
use crate::itemset::ItemSet;
use crate::multiaction::{MultiActionInstance, MultiActionSolution, NumericMode};
use crate::multiagent::{MultiAgentInstance, MultiAgentSolution};
use crate::setfn::{CoverageFn, SetFnKind, SetFunction};
use crate::value::Value;

fn parse_err(e: serde_json::Error) -> Error {
    Error::parse(e.to_string())
}

/// 1-based indices of a set, ascending.
pub fn indices_one_based(set: &ItemSet) -> Vec<usize> {
    set.iter().map(|i| i + 1).collect()
}

/// Builds a set from 1-based indices.
pub fn set_from_one_based(n: usize, indices: &[usize]) -> Result<ItemSet> {
    let mut s = ItemSet::empty(n);
    for &i in indices {
        if i == 0 || i > n {
            return Err(Error::parse(format!(
                "index {i} outside the 1-based range 1..={n}"
            )));
        }
        s.insert(i - 1);
    }
    Ok(s)
}

#[derive(Clone, Serialize, Deserialize)]
pub struct GraphDto {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GraphDto {
    pub fn to_graph(&self) -> Result<Graph> {
        Graph::from_edges(self.vertices, &self.edges)
    }

    pub fn from_graph(g: &Graph) -> Self {
        GraphDto {
            vertices: g.vertex_count(),
            edges: g.edges(),
        }
    }
}

pub fn graph_from_json(s: &str) -> Result<Graph> {
    let dto: GraphDto = serde_json::from_str(s).map_err(parse_err)?;
    dto.to_graph()
}

pub fn graph_to_json(g: &Graph) -> String {
    serde_json::to_string_pretty(&GraphDto::from_graph(g)).expect("graph serializes")
}

#[derive(Serialize, Deserialize)]
struct FormulaDto {
    n_vars: usize,
    clauses: Vec<[i32; 3]>,
}

pub fn formula_from_json(s: &str) -> Result<Formula3Cnf5> {
    let dto: FormulaDto = serde_json::from_str(s).map_err(parse_err)?;
    Formula3Cnf5::new(dto.n_vars, dto.clauses)
}

pub fn formula_to_json(f: &Formula3Cnf5) -> String {
    serde_json::to_string_pretty(&FormulaDto {
        n_vars: f.n_vars(),
        clauses: f.clauses().to_vec(),
    })
    .expect("formula serializes")
}

/// Wire form of a set function.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetFnDescriptor {
    Additive {
        weights: Vec<Value>,
        #[serde(skip_serializing_if = "Option::is_none")]
        normalize_by: Option<Value>,
    },
    Coverage {
        universe_size: usize,
        covers: Vec<Vec<usize>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        normalize_by: Option<Value>,
    },
    Xos {
        clauses: Vec<Vec<Value>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        normalize_by: Option<Value>,
    },
    Table {
        values: Vec<Value>,
        #[serde(skip_serializing_if = "Option::is_none")]
        normalize_by: Option<Value>,
    },
    HiddenSet {
        n: usize,
        good: Vec<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        normalize_by: Option<Value>,
    },
    CliqueGadget {
        graph: GraphDto,
        delta: usize,
        beta: Value,
        #[serde(skip_serializing_if = "Option::is_none")]
        normalize_by: Option<Value>,
    },
}

impl SetFnDescriptor {
    pub fn to_set_function(&self) -> Result<SetFunction> {
        let (f, norm) = match self {
            SetFnDescriptor::Additive {
                weights,
                normalize_by,
            } => (SetFunction::additive(weights.clone())?, normalize_by),
            SetFnDescriptor::Coverage {
                universe_size,
                covers,
                normalize_by,
            } => (
                SetFunction::coverage(CoverageFn::from_index_covers(*universe_size, covers)?),
                normalize_by,
            ),
            SetFnDescriptor::Xos {
                clauses,
                normalize_by,
            } => (SetFunction::xos(clauses.clone())?, normalize_by),
            SetFnDescriptor::Table {
                values,
                normalize_by,
            } => (SetFunction::table(values.clone())?, normalize_by),
            SetFnDescriptor::HiddenSet {
                n,
                good,
                normalize_by,
            } => {
                let good = set_from_one_based(*n, good)?;
                (
                    SetFunction::hidden_set(HiddenSetFn::new(*n, good)?),
                    normalize_by,
                )
            }
            SetFnDescriptor::CliqueGadget {
                graph,
                delta,
                beta,
                normalize_by,
            } => {
                let beta = beta
                    .as_exact()
                    .ok_or_else(|| Error::parse("gadget beta must be exact".to_string()))?;
                let gadget = CliqueGadgetFn::build(&graph.to_graph()?, *delta, beta)?;
                (SetFunction::clique_gadget(gadget), normalize_by)
            }
        };
        match norm {
            Some(v) => f.with_normalization(v.clone()),
            None => Ok(f),
        }
    }

    pub fn from_set_function(f: &SetFunction) -> Self {
        let normalize_by = if *f.normalize_by() == Value::one() {
            None
        } else {
            Some(f.normalize_by().clone())
        };
        match f.kind() {
            SetFnKind::Additive(a) => SetFnDescriptor::Additive {
                weights: a.weights().to_vec(),
                normalize_by,
            },
            SetFnKind::Coverage(c) => SetFnDescriptor::Coverage {
                universe_size: c.universe_size(),
                covers: (0..c.item_count()).map(|i| c.cover_indices(i)).collect(),
                normalize_by,
            },
            SetFnKind::Xos(x) => SetFnDescriptor::Xos {
                clauses: x.clauses().to_vec(),
                normalize_by,
            },
            SetFnKind::Table(t) => SetFnDescriptor::Table {
                values: t.values().to_vec(),
                normalize_by,
            },
            SetFnKind::HiddenSet(h) => SetFnDescriptor::HiddenSet {
                n: h.ground_size(),
                good: indices_one_based(h.good()),
                normalize_by,
            },
            SetFnKind::CliqueGadget(g) => {
                let base = g.base_vertices();
                let ext = g.extended_graph();
                let edges: Vec<(usize, usize)> = ext
                    .edges()
                    .into_iter()
                    .filter(|&(u, v)| u < base && v < base)
                    .collect();
                SetFnDescriptor::CliqueGadget {
                    graph: GraphDto {
                        vertices: base,
                        edges,
                    },
                    delta: g.delta(),
                    beta: Value::Exact(g.beta()),
                    normalize_by,
                }
            }
        }
    }
}

pub fn set_function_from_json(s: &str) -> Result<SetFunction> {
    let dto: SetFnDescriptor = serde_json::from_str(s).map_err(parse_err)?;
    dto.to_set_function()
}

pub fn set_function_to_json(f: &SetFunction) -> String {
    serde_json::to_string_pretty(&SetFnDescriptor::from_set_function(f))
        .expect("set function serializes")
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "model")]
enum InstanceDto {
    #[serde(rename = "multi-agent")]
    MultiAgent {
        costs: Vec<Value>,
        f: SetFnDescriptor,
    },
    #[serde(rename = "multi-action")]
    MultiAction {
        costs: Vec<Value>,
        f: SetFnDescriptor,
        #[serde(skip_serializing_if = "Option::is_none")]
        mode: Option<NumericMode>,
    },
}

pub enum ParsedInstance {
    MultiAgent(MultiAgentInstance),
    MultiAction(MultiActionInstance),
}

impl ParsedInstance {
    pub fn model_name(&self) -> &'static str {
        match self {
            ParsedInstance::MultiAgent(_) => "multi-agent",
            ParsedInstance::MultiAction(_) => "multi-action",
        }
    }
}

pub fn instance_from_json(s: &str) -> Result<ParsedInstance> {
    let dto: InstanceDto = serde_json::from_str(s).map_err(parse_err)?;
    match dto {
        InstanceDto::MultiAgent { costs, f } => Ok(ParsedInstance::MultiAgent(
            MultiAgentInstance::new(costs, f.to_set_function()?)?,
        )),
        InstanceDto::MultiAction { costs, f, mode } => {
            let f = f.to_set_function()?;
            let mode = mode.unwrap_or({
                if f.is_exact() && costs.iter().all(Value::is_exact) {
                    NumericMode::Rational
                } else {
                    NumericMode::Real
                }
            });
            Ok(ParsedInstance::MultiAction(MultiActionInstance::new(
                costs, f, mode,
            )?))
        }
    }
}

pub fn multiagent_instance_to_json(inst: &MultiAgentInstance) -> String {
    serde_json::to_string_pretty(&InstanceDto::MultiAgent {
        costs: inst.costs().to_vec(),
        f: SetFnDescriptor::from_set_function(inst.f()),
    })
    .expect("instance serializes")
}

pub fn multiaction_instance_to_json(inst: &MultiActionInstance) -> String {
    serde_json::to_string_pretty(&InstanceDto::MultiAction {
        costs: inst.costs().to_vec(),
        f: SetFnDescriptor::from_set_function(inst.f()),
        mode: Some(inst.mode()),
    })
    .expect("instance serializes")
}

#[derive(Serialize)]
#[serde(tag = "model")]
enum SolutionDto {
    #[serde(rename = "multi-agent")]
    MultiAgent {
        #[serde(rename = "S")]
        s: Vec<usize>,
        payments: Vec<Value>,
        objective: Value,
    },
    #[serde(rename = "multi-action")]
    MultiAction {
        alpha: Value,
        best_response: Vec<usize>,
        principal_utility: Value,
    },
}

pub fn multiagent_solution_to_json(sol: &MultiAgentSolution) -> String {
    serde_json::to_string_pretty(&SolutionDto::MultiAgent {
        s: indices_one_based(&sol.set),
        payments: sol.payments.clone(),
        objective: sol.objective.clone(),
    })
    .expect("solution serializes")
}

pub fn multiaction_solution_to_json(sol: &MultiActionSolution) -> String {
    serde_json::to_string_pretty(&SolutionDto::MultiAction {
        alpha: sol.alpha.clone(),
        best_response: indices_one_based(&sol.best_response),
        principal_utility: sol.principal_utility.clone(),
    })
    .expect("solution serializes")
}
