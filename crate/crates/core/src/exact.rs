//! Exact broadcast time: repeated decision solves over growing horizons, and
//! an exhaustive search for small graphs.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bounds::{best_combinatorial_lower, BoundStatus};
use crate::graph::{Instance, NodeId};
use crate::matching::{max_cardinality_matching, BipartiteGraph};
use crate::milp::{build_decision_model, lp_tstar, MilpModel, SolveStatus, SolverHandle, TOL};
use crate::schedule::{validate_schedule, BroadcastSchedule, ScheduleViolation, Transmission};

/// Default node limit for [`brute_force_tau`].
pub const BRUTE_FORCE_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactStatus {
    Optimal,
    /// Stopped early; `tau` is a certified lower bound.
    LowerBoundOnly,
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: ExactStatus,
    pub tau: usize,
    pub schedule: Option<BroadcastSchedule>,
    pub elapsed: Duration,
    /// Decision optimum per solved horizon, in order.
    pub iterations: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartFrom {
    #[default]
    Combinatorial,
    /// Also run the relaxation search and start from its result.
    Lp,
}

#[derive(Debug, Clone, Default)]
pub struct ExactOptions {
    /// Budget for the whole call; `None` means the solver's own setting.
    pub time_limit: Option<Duration>,
    pub start_from: StartFrom,
    /// A known schedule; its length caps the search.
    pub upper: Option<BroadcastSchedule>,
    /// A lower bound certified elsewhere, such as an earlier relaxation search.
    pub lower: Option<usize>,
}

fn outcome(status: ExactStatus, tau: usize, start: Instant, iterations: Vec<(usize, f64)>) -> SolveOutcome {
    SolveOutcome { status, tau, schedule: None, elapsed: start.elapsed(), iterations }
}

/// Broadcast time by solving the decision model for `t = lb, lb + 1, ...`
/// until every non-source can be informed.
pub fn solve_exact(inst: &Instance, solver: &mut SolverHandle, opts: &ExactOptions) -> SolveOutcome {
    let start = Instant::now();
    let target = inst.uninformed_count();
    if target == 0 {
        let mut out = outcome(ExactStatus::Optimal, 0, start, Vec::new());
        out.schedule = Some(BroadcastSchedule::default());
        return out;
    }
    if !solver.capabilities().mip_solve {
        return outcome(ExactStatus::Error("solver cannot solve integer programs".into()), 0, start, Vec::new());
    }
    let budget = opts.time_limit.or(solver.config.time_limit);
    let remaining = |start: Instant| budget.map(|b| b.saturating_sub(start.elapsed()));

    let mut t = match best_combinatorial_lower(inst) {
        Ok((lb, _)) => lb.max(opts.lower.unwrap_or(0)).max(1),
        Err(e) => return outcome(ExactStatus::Error(e.to_string()), 0, start, Vec::new()),
    };
    if opts.start_from == StartFrom::Lp {
        let saved = solver.config.time_limit;
        solver.config.time_limit = remaining(start);
        let ts = lp_tstar(inst, solver, t);
        solver.config.time_limit = saved;
        match ts {
            Ok(ts) if ts.status == BoundStatus::Timeout => {
                return outcome(ExactStatus::LowerBoundOnly, ts.value.max(t), start, Vec::new())
            }
            Ok(ts) => t = t.max(ts.value),
            Err(e) => return outcome(ExactStatus::Error(e.to_string()), t, start, Vec::new()),
        }
    }

    let upper = match &opts.upper {
        Some(s) => {
            if let Err(v) = validate_schedule(inst, s) {
                let msg = format!("supplied schedule is invalid: {} violation(s)", v.len());
                return outcome(ExactStatus::Error(msg), t, start, Vec::new());
            }
            Some((s.len(), s))
        }
        None => None,
    };

    let mut iterations = Vec::new();
    loop {
        if let Some((ub, sched)) = upper {
            // every horizon below ub is refuted, or ub is already a lower bound
            if t >= ub {
                let mut out = outcome(ExactStatus::Optimal, ub, start, iterations);
                out.schedule = Some(sched.clone());
                return out;
            }
        }
        if t > target {
            let msg = format!("no broadcast within {target} rounds; is the graph connected?");
            return outcome(ExactStatus::Error(msg), t, start, iterations);
        }
        let left = remaining(start);
        if left == Some(Duration::ZERO) {
            return outcome(ExactStatus::LowerBoundOnly, t, start, iterations);
        }
        let model = match build_decision_model(inst, t) {
            Ok(m) => m,
            Err(e) => return outcome(ExactStatus::Error(e.to_string()), t, start, iterations),
        };
        let sol = match solver.solve_within(&model, left) {
            Ok(s) => s,
            Err(e) => return outcome(ExactStatus::Error(e.to_string()), t, start, iterations),
        };
        let reached = !sol.values.is_empty() && model.objective_value(&sol.values) >= target as f64 - TOL;
        match sol.status {
            // a complete incumbent settles level t even when the solve was cut short
            SolveStatus::Optimal | SolveStatus::Timeout if reached => {
                iterations.push((t, model.objective_value(&sol.values)));
                return match extract_schedule(inst, &model, &sol.values) {
                    Ok(s) => {
                        let mut out = outcome(ExactStatus::Optimal, s.len(), start, iterations);
                        out.schedule = Some(s);
                        out
                    }
                    Err(e) => outcome(ExactStatus::Error(e.to_string()), t, start, iterations),
                };
            }
            SolveStatus::Optimal => {
                iterations.push((t, sol.objective.unwrap_or(f64::NAN)));
                t += 1;
            }
            SolveStatus::Timeout => return outcome(ExactStatus::LowerBoundOnly, t, start, iterations),
            SolveStatus::Infeasible => {
                let msg = format!("decision model infeasible at horizon {t}");
                return outcome(ExactStatus::Error(msg), t, start, iterations);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error("variable {name} has non-integral value {value}")]
    Fractional { name: String, value: f64 },
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("extracted schedule is invalid: {0:?}")]
    Invalid(Vec<ScheduleViolation>),
}

/// Reads the schedule encoded by the `x` part of `values`.
pub fn extract_schedule(inst: &Instance, model: &MilpModel, values: &[f64]) -> Result<BroadcastSchedule, ExtractError> {
    if values.len() != model.variables.len() {
        return Err(ExtractError::Length { expected: model.variables.len(), got: values.len() });
    }
    let t = model.horizon;
    let mut rounds = vec![Vec::new(); t];
    for (a, &(u, v)) in model.arcs().iter().enumerate() {
        for k in 1..=t {
            let j = a * t + k - 1;
            let x = values[j];
            if x.abs() <= TOL {
                continue;
            }
            if (x - 1.0).abs() > TOL {
                return Err(ExtractError::Fractional { name: model.variables[j].name.clone(), value: x });
            }
            rounds[k - 1].push(Transmission::new(u, v));
        }
    }
    let mut sched = BroadcastSchedule::default();
    for r in rounds {
        sched.push_round(r);
    }
    sched.trim_trailing_idle();
    validate_schedule(inst, &sched).map_err(ExtractError::Invalid)?;
    Ok(sched)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BruteForceError {
    #[error("{n} nodes exceed the exhaustive-search cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("not every node can be informed")]
    Unreachable,
}

/// Exact broadcast time and a witness schedule by breadth-first search over
/// informed sets, for at most [`BRUTE_FORCE_CAP`] nodes.
pub fn brute_force_tau(inst: &Instance) -> Result<(usize, BroadcastSchedule), BruteForceError> {
    brute_force_tau_with_cap(inst, BRUTE_FORCE_CAP)
}

pub fn brute_force_tau_with_cap(inst: &Instance, cap: usize) -> Result<(usize, BroadcastSchedule), BruteForceError> {
    let n = inst.node_count();
    if n > cap || n > 30 {
        return Err(BruteForceError::TooLarge { n, cap });
    }
    let bit = |v: NodeId| 1u32 << (v - 1);
    let full: u32 = if n == 0 { 0 } else { u32::MAX >> (32 - n) };
    let nbr: Vec<u32> = (0..=n)
        .map(|v| if v == 0 { 0 } else { inst.graph.neighbors(v).iter().fold(0, |m, &w| m | bit(w)) })
        .collect();
    let start: u32 = inst.sources.iter().fold(0, |m, &s| m | bit(s));

    let mut parent: HashMap<u32, u32> = HashMap::from([(start, start)]);
    let mut layer = vec![start];
    let mut rounds = 0;
    while !parent.contains_key(&full) {
        if layer.is_empty() {
            return Err(BruteForceError::Unreachable);
        }
        rounds += 1;
        let mut next = Vec::new();
        for &state in &layer {
            for informed in successors(state, n, &nbr) {
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(informed) {
                    e.insert(state);
                    next.push(informed);
                }
            }
        }
        next.sort_unstable();
        layer = next;
    }

    // walk back and recover one matching per round
    let mut chain = vec![full];
    while *chain.last().unwrap() != start {
        let prev = parent[chain.last().unwrap()];
        chain.push(prev);
    }
    chain.reverse();
    let mut sched = BroadcastSchedule::default();
    for w in chain.windows(2) {
        let (from, to) = (w[0], w[1]);
        let members = |mask: u32| (1..=n).filter(move |&v| mask & bit(v) != 0);
        let fresh = to & !from;
        let edges = members(from)
            .flat_map(|u| members(fresh & nbr[u]).map(move |v| (u, v)))
            .collect::<Vec<_>>();
        let bg = BipartiteGraph::new(members(from), members(fresh), edges).expect("sides are disjoint");
        let m = max_cardinality_matching(&bg);
        debug_assert_eq!(m.len(), fresh.count_ones() as usize);
        sched.push_round(m.pairs.iter().map(|&(u, v)| Transmission::new(u, v)).collect());
    }
    debug_assert_eq!(sched.len(), rounds);
    Ok((rounds, sched))
}

/// Every informed set reachable in one round: each informed node either idles
/// or whispers to a distinct uninformed neighbour.
fn successors(state: u32, n: usize, nbr: &[u32]) -> Vec<u32> {
    let mut reached: HashSet<u32> = HashSet::from([0]);
    for u in 1..=n {
        if state & (1 << (u - 1)) == 0 {
            continue;
        }
        let options = nbr[u] & !state;
        if options == 0 {
            continue;
        }
        let mut grown = Vec::new();
        for &added in &reached {
            let mut free = options & !added;
            while free != 0 {
                let low = free & free.wrapping_neg();
                grown.push(added | low);
                free &= free - 1;
            }
        }
        reached.extend(grown);
    }
    let mut out: Vec<u32> = reached.into_iter().filter(|&a| a != 0).map(|a| state | a).collect();
    out.sort_unstable();
    out
}
