//! Upper bounds by lookahead: plan `k` rounds ahead from the current informed
//! set, commit the first planned round, repeat.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bounds::{BoundName, BoundReport, BoundStatus, BoundValue};
use crate::graph::{Instance, NodeId};
use crate::matching::{max_cardinality_matching, max_vertex_weight_matching, BipartiteGraph};
use crate::milp::{build_decision_model_with, SolveStatus, SolverHandle, TOL};
use crate::schedule::{validate_schedule, BroadcastSchedule, ScheduleViolation, Transmission};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Matcher {
    #[default]
    Cardinality,
    VertexWeight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LookaheadConfig {
    pub k: usize,
    /// Used for single-round planning.
    pub matcher: Matcher,
    /// Budget for the whole construction; split evenly over the remaining
    /// uninformed nodes at each step.
    pub time_limit: Option<Duration>,
}

impl LookaheadConfig {
    pub fn new(k: usize) -> Self {
        Self { k, matcher: Matcher::Cardinality, time_limit: None }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeuristicError {
    #[error("lookahead must be at least 1")]
    ZeroLookahead,
    #[error("lookahead {0} needs a solver with integer programming support")]
    MissingMip(usize),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("no uninformed node is adjacent to an informed one after {0} rounds")]
    Stalled(usize),
    #[error("constructed schedule is invalid: {0:?}")]
    Invalid(Vec<ScheduleViolation>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub schedule: BroadcastSchedule,
    /// Rounds committed from an interrupted solve or from the matching
    /// fallback instead of an optimal plan.
    pub degraded_rounds: usize,
    pub elapsed: Duration,
}

/// `1 +` the number of uninformed neighbours, for each uninformed node.
/// `informed` is indexed by `id - 1`.
pub fn vertex_weights(inst: &Instance, informed: &[bool]) -> BTreeMap<NodeId, u64> {
    inst.graph
        .nodes()
        .filter(|&v| !informed[v - 1])
        .map(|v| {
            let open = inst.graph.neighbors(v).iter().filter(|&&u| !informed[u - 1]).count();
            (v, 1 + open as u64)
        })
        .collect()
}

fn frontier(inst: &Instance, informed: &[bool]) -> BipartiteGraph {
    let mut edges = Vec::new();
    for u in inst.graph.nodes().filter(|&u| informed[u - 1]) {
        for &v in inst.graph.neighbors(u) {
            if !informed[v - 1] {
                edges.push((u, v));
            }
        }
    }
    let left: Vec<NodeId> = edges.iter().map(|e| e.0).collect();
    let right: Vec<NodeId> = edges.iter().map(|e| e.1).collect();
    BipartiteGraph::new(left, right, edges).expect("informed and uninformed sides are disjoint")
}

fn matching_round(inst: &Instance, informed: &[bool], matcher: Matcher) -> Vec<Transmission> {
    let bg = frontier(inst, informed);
    let m = match matcher {
        Matcher::Cardinality => max_cardinality_matching(&bg),
        Matcher::VertexWeight => max_vertex_weight_matching(&bg, &vertex_weights(inst, informed))
            .expect("every uninformed node has a positive weight"),
    };
    m.pairs.into_iter().map(|(u, v)| Transmission::new(u, v)).collect()
}

enum Planned {
    Round(Vec<Transmission>),
    Degraded(Vec<Transmission>),
}

/// Plans `h` rounds by integer programming and returns the first one.
///
/// The objective counts informed nodes, then (with weight below one) prefers
/// plans that use fewer rounds, then (with a smaller weight) prefers lower
/// arcs in round one.
fn mip_round(
    inst: &Instance,
    informed: &[bool],
    h: usize,
    solver: &mut SolverHandle,
    limit: Option<Duration>,
) -> Result<Planned, HeuristicError> {
    let graph = inst.graph.without_internal_edges(informed);
    let sources: Vec<NodeId> = inst.graph.nodes().filter(|&v| informed[v - 1]).collect();
    let sub = Instance::new(graph, sources, inst.name.clone());
    let mut model = build_decision_model_with(&sub, h, false).map_err(|e| HeuristicError::Solver(e.to_string()))?;
    let z1 = model.add_round_indicators(&sub);
    let round_weight = 1.0 / (h as f64 + 1.0);
    for k in 0..h {
        model.objective.push((z1 + k, -round_weight));
    }
    let arcs = model.arcs().to_vec();
    let a_count = arcs.len() as f64;
    let eps = 1.0 / (4.0 * sub.graph.edge_count().max(1) as f64 * h as f64);
    for (a, &(u, v)) in arcs.iter().enumerate() {
        let j = model.x(u, v, 1).expect("arc exists");
        if model.variables[j].fixed_by.is_none() {
            model.objective.push((j, eps * (a_count - a as f64) / a_count));
        }
    }

    let sol = solver.solve_within(&model, limit).map_err(|e| HeuristicError::Solver(e.to_string()))?;
    let first_round = |values: &[f64]| -> Option<Vec<Transmission>> {
        let mut round = Vec::new();
        for &(u, v) in &arcs {
            let x = values[model.x(u, v, 1).expect("arc exists")];
            if (x - 1.0).abs() <= TOL {
                round.push(Transmission::new(u, v));
            } else if x.abs() > TOL {
                return None;
            }
        }
        Some(round)
    };
    match sol.status {
        SolveStatus::Optimal => match first_round(&sol.values) {
            Some(r) => Ok(Planned::Round(r)),
            None => Err(HeuristicError::Solver("optimal plan is not integral".into())),
        },
        SolveStatus::Timeout if !sol.values.is_empty() => {
            Ok(Planned::Degraded(first_round(&sol.values).unwrap_or_default()))
        }
        SolveStatus::Timeout => Ok(Planned::Degraded(Vec::new())),
        SolveStatus::Infeasible => Err(HeuristicError::Solver("lookahead model infeasible".into())),
    }
}

/// Builds a schedule round by round from `k`-round plans.
///
/// `k = 1` uses the configured matcher; larger `k` needs `solver`. The
/// horizon never exceeds the number of uninformed nodes.
pub fn construct(
    inst: &Instance,
    cfg: &LookaheadConfig,
    mut solver: Option<&mut SolverHandle>,
) -> Result<Construction, HeuristicError> {
    let start = Instant::now();
    if cfg.k == 0 {
        return Err(HeuristicError::ZeroLookahead);
    }
    if cfg.k >= 2 && inst.uninformed_count() > 1 && !solver.as_ref().is_some_and(|s| s.capabilities().mip_solve) {
        return Err(HeuristicError::MissingMip(cfg.k));
    }
    let mut informed = inst.source_mask().to_vec();
    let mut left = inst.uninformed_count();
    let mut schedule = BroadcastSchedule::default();
    let mut degraded_rounds = 0;
    while left > 0 {
        let h = cfg.k.min(left);
        let mut round = if h == 1 {
            matching_round(inst, &informed, cfg.matcher)
        } else {
            let limit = cfg.time_limit.map(|b| b.saturating_sub(start.elapsed()) / left as u32);
            let handle = solver.as_deref_mut().expect("checked above");
            match mip_round(inst, &informed, h, handle, limit)? {
                Planned::Round(r) => r,
                Planned::Degraded(r) => {
                    degraded_rounds += 1;
                    r
                }
            }
        };
        if round.is_empty() {
            // an interrupted plan may not move; a matching always does
            round = matching_round(inst, &informed, cfg.matcher);
        }
        if round.is_empty() {
            return Err(HeuristicError::Stalled(schedule.len()));
        }
        for t in &round {
            informed[t.to - 1] = true;
        }
        left -= round.len();
        schedule.push_round(round);
    }
    validate_schedule(inst, &schedule).map_err(HeuristicError::Invalid)?;
    Ok(Construction { schedule, degraded_rounds, elapsed: start.elapsed() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBound {
    pub k: usize,
    pub result: Result<Construction, HeuristicError>,
}

/// Runs [`construct`] for each lookahead in `ks`. Failures are kept per `k`.
pub fn upper_bound_suite(
    inst: &Instance,
    ks: &[usize],
    matcher: Matcher,
    time_limit: Option<Duration>,
    mut solver: Option<&mut SolverHandle>,
) -> Vec<UpperBound> {
    ks.iter()
        .map(|&k| {
            let cfg = LookaheadConfig { k, matcher, time_limit };
            UpperBound { k, result: construct(inst, &cfg, solver.as_deref_mut()) }
        })
        .collect()
}

/// Adds one `ub_k` entry per successful construction.
pub fn record_upper_bounds(report: &mut BoundReport, bounds: &[UpperBound]) {
    for ub in bounds {
        if let Ok(c) = &ub.result {
            let status = if c.degraded_rounds > 0 { BoundStatus::Timeout } else { BoundStatus::Exact };
            report.insert(BoundName::Ub(ub.k), BoundValue::Int(c.schedule.len()), c.elapsed, status);
        }
    }
}
