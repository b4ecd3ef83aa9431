//! Integer programs for broadcast scheduling over the arc set.
//!
//! Variable `x_<u>_<v>_<k>` says that `u` informs `v` in round `k`. Rows are
//! tagged with the constraint family they come from:
//!
//! | tag | rows |
//! |-----|------|
//! | `1b` | every non-source receives exactly once |
//! | `2b` | every non-source receives at most once |
//! | `1c` | a non-source sends in round k only if informed before k |
//! | `1d` | at most one send per node and round, coupled with `z_k` |
//! | `1e` | `z_k <= z_{k-1}` |
//! | `cap` | at most one send per node and round |
//! | `R2` | `y` dominates the round in which a node is informed |
//!
//! Tags `1f` (no sends by non-sources in round 1) and `1g` (nothing sent to a
//! source) are variable fixings, kept as `= 0` bounds.

mod lp;
mod relax;
mod solver;

use std::fmt;

use thiserror::Error;

use crate::graph::{Instance, NodeId};

pub use lp::{export_lp, export_lp_with, parse_lp, LpNaming, LpSummary};
pub use relax::{lp_tstar, lp_zeta, RelaxationResult, TStar};
pub use solver::{
    parse_solution_file, Capabilities, ExternalSolver, Solution, SolveStatus, Solver,
    SolverConfig, SolverError, SolverHandle, SolverKind, SOLVER_CMD_ENV,
};
#[cfg(feature = "highs")]
pub use solver::HighsSolver;

/// Integrality and feasibility tolerance used when reading solver output.
pub const TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MilpError {
    #[error("horizon must be at least 1, got {0}")]
    ZeroHorizon(usize),
    #[error("solver lacks the {0} capability")]
    Missing(&'static str),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowTag {
    SingleIn,
    InformedBefore,
    CoupledCapacity,
    RoundOrder,
    NoEarlySend,
    NoSendToSource,
    AtMostOneIn,
    Capacity,
    Makespan,
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowTag::SingleIn => "1b",
            RowTag::InformedBefore => "1c",
            RowTag::CoupledCapacity => "1d",
            RowTag::RoundOrder => "1e",
            RowTag::NoEarlySend => "1f",
            RowTag::NoSendToSource => "1g",
            RowTag::AtMostOneIn => "2b",
            RowTag::Capacity => "cap",
            RowTag::Makespan => "R2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Optimization,
    Decision { capacity_rows: bool },
    Makespan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
    /// Set when a `1f`/`1g` rule fixes the variable to zero.
    pub fixed_by: Option<RowTag>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub tag: RowTag,
    pub terms: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub kind: ModelKind,
    pub horizon: usize,
    pub sense: Sense,
    pub objective: Vec<(usize, f64)>,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    arcs: Vec<(NodeId, NodeId)>,
}

impl MilpModel {
    fn with_arcs(inst: &Instance, t: usize, kind: ModelKind, sense: Sense) -> Result<Self, MilpError> {
        if t == 0 {
            return Err(MilpError::ZeroHorizon(t));
        }
        let arcs: Vec<_> = inst.graph.arcs().collect();
        let mut variables = Vec::with_capacity(arcs.len() * t);
        for &(u, v) in &arcs {
            for k in 1..=t {
                let fixed_by = if inst.is_source(v) {
                    Some(RowTag::NoSendToSource)
                } else if k == 1 && !inst.is_source(u) {
                    Some(RowTag::NoEarlySend)
                } else {
                    None
                };
                variables.push(Variable {
                    name: format!("x_{u}_{v}_{k}"),
                    lower: 0.0,
                    upper: if fixed_by.is_some() { 0.0 } else { 1.0 },
                    integer: true,
                    fixed_by,
                });
            }
        }
        Ok(Self {
            kind,
            horizon: t,
            sense,
            objective: Vec::new(),
            variables,
            constraints: Vec::new(),
            arcs,
        })
    }

    /// Index of `x_<u>_<v>_<k>`.
    pub fn x(&self, u: NodeId, v: NodeId, k: usize) -> Option<usize> {
        if k == 0 || k > self.horizon {
            return None;
        }
        let a = self.arcs.binary_search(&(u, v)).ok()?;
        Some(a * self.horizon + k - 1)
    }

    pub fn arcs(&self) -> &[(NodeId, NodeId)] {
        &self.arcs
    }

    pub fn x_count(&self) -> usize {
        self.arcs.len() * self.horizon
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn add_variable(&mut self, var: Variable) -> usize {
        self.variables.push(var);
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, row: Constraint) {
        self.constraints.push(row);
    }

    pub fn is_relaxed(&self) -> bool {
        self.variables.iter().all(|v| !v.integer)
    }

    /// Same model with every integrality requirement dropped.
    pub fn relaxed(mut self) -> Self {
        for v in &mut self.variables {
            v.integer = false;
        }
        self
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * values[j]).sum()
    }

    /// Largest violation of any row or bound by `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (var, &x) in self.variables.iter().zip(values) {
            worst = worst.max(var.lower - x).max(x - var.upper);
        }
        for row in &self.constraints {
            let lhs: f64 = row.terms.iter().map(|&(j, c)| c * values[j]).sum();
            let gap = match row.sense {
                RowSense::Le => lhs - row.rhs,
                RowSense::Ge => row.rhs - lhs,
                RowSense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }

    fn sends(&self, inst: &Instance, u: NodeId, k: usize) -> Vec<(usize, f64)> {
        inst.graph
            .neighbors(u)
            .iter()
            .map(|&v| (self.x(u, v, k).expect("arc exists"), 1.0))
            .collect()
    }

    fn receives(&self, inst: &Instance, v: NodeId, rounds: std::ops::RangeInclusive<usize>) -> Vec<(usize, f64)> {
        let mut terms = Vec::new();
        for &u in inst.graph.neighbors(v) {
            for k in rounds.clone() {
                terms.push((self.x(u, v, k).expect("arc exists"), 1.0));
            }
        }
        terms
    }

    fn push_row(&mut self, name: String, tag: RowTag, terms: Vec<(usize, f64)>, sense: RowSense, rhs: f64) {
        self.constraints.push(Constraint { name, tag, terms, sense, rhs });
    }

    fn add_receive_rows(&mut self, inst: &Instance, tag: RowTag, sense: RowSense) {
        let t = self.horizon;
        for v in inst.graph.nodes().filter(|&v| !inst.is_source(v)) {
            let terms = self.receives(inst, v, 1..=t);
            self.push_row(format!("{tag}_{v}"), tag, terms, sense, 1.0);
        }
    }

    fn add_informed_before_rows(&mut self, inst: &Instance) {
        let t = self.horizon;
        for u in inst.graph.nodes().filter(|&u| !inst.is_source(u)) {
            for k in 2..=t {
                let mut terms = self.sends(inst, u, k);
                terms.extend(self.receives(inst, u, 1..=k - 1).into_iter().map(|(j, _)| (j, -1.0)));
                self.push_row(format!("1c_{u}_{k}"), RowTag::InformedBefore, terms, RowSense::Le, 0.0);
            }
        }
    }

    fn add_capacity_rows(&mut self, inst: &Instance) {
        let t = self.horizon;
        for u in inst.graph.nodes() {
            for k in 1..=t {
                let terms = self.sends(inst, u, k);
                self.push_row(format!("cap_{u}_{k}"), RowTag::Capacity, terms, RowSense::Le, 1.0);
            }
        }
    }

    /// Adds `z_1..z_t` with the coupling rows `1d` and the ordering rows `1e`;
    /// returns the index of `z_1`.
    pub fn add_round_indicators(&mut self, inst: &Instance) -> usize {
        let t = self.horizon;
        let first = self.variables.len();
        for k in 1..=t {
            self.add_variable(Variable {
                name: format!("z_{k}"),
                lower: 0.0,
                upper: 1.0,
                integer: true,
                fixed_by: None,
            });
        }
        for u in inst.graph.nodes() {
            for k in 1..=t {
                let mut terms = self.sends(inst, u, k);
                terms.push((first + k - 1, -1.0));
                self.push_row(format!("1d_{u}_{k}"), RowTag::CoupledCapacity, terms, RowSense::Le, 0.0);
            }
        }
        for k in 2..=t {
            let terms = vec![(first + k - 1, 1.0), (first + k - 2, -1.0)];
            self.push_row(format!("1e_{k}"), RowTag::RoundOrder, terms, RowSense::Le, 0.0);
        }
        first
    }

    /// Objective terms counting every transmission into a non-source node.
    pub fn informed_count_terms(&self, inst: &Instance) -> Vec<(usize, f64)> {
        let mut terms = Vec::new();
        for (a, &(_, v)) in self.arcs.iter().enumerate() {
            if !inst.is_source(v) {
                for k in 1..=self.horizon {
                    terms.push((a * self.horizon + k - 1, 1.0));
                }
            }
        }
        terms
    }
}

/// Minimize the number of used rounds subject to a complete broadcast.
pub fn build_optimization_model(inst: &Instance, t: usize) -> Result<MilpModel, MilpError> {
    let mut m = MilpModel::with_arcs(inst, t, ModelKind::Optimization, Sense::Minimize)?;
    m.add_receive_rows(inst, RowTag::SingleIn, RowSense::Eq);
    m.add_informed_before_rows(inst);
    let z1 = m.add_round_indicators(inst);
    m.objective = (0..t).map(|k| (z1 + k, 1.0)).collect();
    Ok(m)
}

/// Maximize the number of informed non-sources within `t` rounds, with the
/// per-round send capacity rows included.
pub fn build_decision_model(inst: &Instance, t: usize) -> Result<MilpModel, MilpError> {
    build_decision_model_with(inst, t, true)
}

/// Decision model; `capacity_rows = false` gives the variant without any
/// per-round send limit.
pub fn build_decision_model_with(inst: &Instance, t: usize, capacity_rows: bool) -> Result<MilpModel, MilpError> {
    let kind = ModelKind::Decision { capacity_rows };
    let mut m = MilpModel::with_arcs(inst, t, kind, Sense::Maximize)?;
    m.add_receive_rows(inst, RowTag::AtMostOneIn, RowSense::Le);
    m.add_informed_before_rows(inst);
    if capacity_rows {
        m.add_capacity_rows(inst);
    }
    m.objective = m.informed_count_terms(inst);
    Ok(m)
}

/// Minimize a single integer `y` bounding the round in which each
/// non-source is informed.
pub fn build_makespan_model(inst: &Instance, t: usize) -> Result<MilpModel, MilpError> {
    let mut m = MilpModel::with_arcs(inst, t, ModelKind::Makespan, Sense::Minimize)?;
    let y = m.add_variable(Variable {
        name: "y".into(),
        lower: 0.0,
        upper: t as f64,
        integer: true,
        fixed_by: None,
    });
    for v in inst.graph.nodes().filter(|&v| !inst.is_source(v)) {
        let mut terms = vec![(y, 1.0)];
        for &u in inst.graph.neighbors(v) {
            for k in 1..=t {
                terms.push((m.x(u, v, k).expect("arc exists"), -(k as f64)));
            }
        }
        m.push_row(format!("R2_{v}"), RowTag::Makespan, terms, RowSense::Ge, 0.0);
    }
    m.add_receive_rows(inst, RowTag::SingleIn, RowSense::Eq);
    m.add_informed_before_rows(inst);
    m.add_capacity_rows(inst);
    m.objective = vec![(y, 1.0)];
    Ok(m)
}
