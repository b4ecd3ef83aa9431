//! Lower bounds from linear relaxations.

use std::time::{Duration, Instant};

use super::{build_decision_model, build_optimization_model, MilpError, SolveStatus, SolverHandle, TOL};
use crate::bounds::BoundStatus;
use crate::graph::Instance;

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationResult {
    /// Present iff the status is optimal.
    pub objective: Option<f64>,
    pub status: SolveStatus,
    pub elapsed: Duration,
}

impl RelaxationResult {
    /// `ceil(objective - tol)`, a lower bound on the broadcast time.
    pub fn integer_bound(&self) -> Option<usize> {
        self.objective.map(|z| (z - TOL).ceil().max(0.0) as usize)
    }
}

/// Optimum of the relaxed round-minimizing model at horizon `t`.
pub fn lp_zeta(inst: &Instance, t: usize, solver: &mut SolverHandle) -> Result<RelaxationResult, MilpError> {
    if !solver.capabilities().lp_solve {
        return Err(MilpError::Missing("lp_solve"));
    }
    let model = build_optimization_model(inst, t)?.relaxed();
    let sol = solver.solve(&model)?;
    Ok(RelaxationResult { objective: sol.objective, status: sol.status, elapsed: sol.elapsed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TStar {
    /// t* when exact; after a timeout, the largest horizon known to be a
    /// lower bound.
    pub value: usize,
    pub status: BoundStatus,
    pub elapsed: Duration,
    /// Relaxed decision optimum per visited horizon.
    pub trace: Vec<(usize, f64)>,
}

/// Smallest horizon `t >= t_start` whose relaxed decision optimum reaches
/// `n - sigma`. `t_start` must itself be a lower bound.
///
/// The handle's time limit is a budget for the whole search.
pub fn lp_tstar(inst: &Instance, solver: &mut SolverHandle, t_start: usize) -> Result<TStar, MilpError> {
    let start = Instant::now();
    let target = inst.uninformed_count();
    let mut out = TStar { value: 0, status: BoundStatus::Exact, elapsed: Duration::ZERO, trace: Vec::new() };
    if target == 0 {
        return Ok(out);
    }
    if !solver.capabilities().lp_solve {
        return Err(MilpError::Missing("lp_solve"));
    }
    let budget = solver.config.time_limit;
    let mut t = t_start.max(1);
    loop {
        let remaining = budget.map(|b| b.saturating_sub(start.elapsed()));
        if remaining == Some(Duration::ZERO) {
            out.value = t;
            out.status = BoundStatus::Timeout;
            break;
        }
        let model = build_decision_model(inst, t)?.relaxed();
        let sol = solver.solve_within(&model, remaining)?;
        match (sol.status, sol.objective) {
            (SolveStatus::Optimal, Some(obj)) => {
                out.trace.push((t, obj));
                if obj >= target as f64 - TOL {
                    out.value = t;
                    break;
                }
            }
            (SolveStatus::Timeout, _) => {
                out.value = t;
                out.status = BoundStatus::Timeout;
                break;
            }
            (status, _) => {
                return Err(super::SolverError::Backend(format!(
                    "relaxed decision model at horizon {t} returned {status:?}"
                ))
                .into())
            }
        }
        if t >= target.max(t_start) {
            return Err(super::SolverError::Backend(format!(
                "relaxation stays below {target} at horizon {t}; is the graph connected?"
            ))
            .into());
        }
        t += 1;
    }
    out.elapsed = start.elapsed();
    Ok(out)
}

#[cfg(all(test, feature = "highs"))]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::milp::{SolverConfig, SolverKind};

    fn handle() -> SolverHandle {
        SolverKind::Highs.handle(SolverConfig::default()).unwrap()
    }

    #[test]
    fn zeta_examples() {
        let mut h = handle();
        let p2 = Instance::new(families::path(2), vec![1], "p2");
        let r = lp_zeta(&p2, 1, &mut h).unwrap();
        assert!((r.objective.unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(r.integer_bound(), Some(1));
        let all = Instance::new(families::path(3), vec![1, 2, 3], "all");
        assert!(lp_zeta(&all, 2, &mut h).unwrap().objective.unwrap().abs() < 1e-6);
    }

    #[test]
    fn tstar_examples() {
        let mut h = handle();
        let p3 = Instance::new(families::path(3), vec![1], "p3");
        assert_eq!(lp_tstar(&p3, &mut h, 1).unwrap().value, 2);
        let k2 = Instance::new(families::complete(2), vec![1], "k2");
        assert_eq!(lp_tstar(&k2, &mut h, 1).unwrap().value, 1);
        let all = Instance::new(families::complete(3), vec![1, 2, 3], "all");
        let r = lp_tstar(&all, &mut h, 1).unwrap();
        assert_eq!(r.value, 0);
        assert!(r.trace.is_empty());
    }
}
