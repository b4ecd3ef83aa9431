//! Solver access: an in-process HiGHS backend and a subprocess adapter.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::lp::{export_lp_with, LpNaming};
use super::MilpModel;

/// Environment variable holding the subprocess command template.
pub const SOLVER_CMD_ENV: &str = "MBT_SOLVER_CMD";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("solver backend failed: {0}")]
    Backend(String),
    #[error("solver unavailable: {0}")]
    Unavailable(String),
    #[error("i/o around solver call: {0}")]
    Io(String),
    #[error("solver command `{command}` exited with {status}: {stderr}")]
    Command { command: String, status: String, stderr: String },
    #[error("solution file line {line}: {msg}")]
    SolutionFormat { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub lp_solve: bool,
    pub mip_solve: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub time_limit: Option<Duration>,
    /// Feasibility and integrality tolerance.
    pub tolerance: f64,
    pub mip_rel_gap: f64,
    pub threads: Option<u32>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { time_limit: None, tolerance: super::TOL, mip_rel_gap: 0.0, threads: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    /// Present iff the status is optimal.
    pub objective: Option<f64>,
    /// Primal values by variable index; empty when the solver has none.
    pub values: Vec<f64>,
    pub elapsed: Duration,
}

pub trait Solver: Send {
    fn capabilities(&self) -> Capabilities;
    fn solve(&mut self, model: &MilpModel, config: &SolverConfig) -> Result<Solution, SolverError>;
}

/// One solver plus its configuration; not meant to be shared between
/// concurrent solves.
pub struct SolverHandle {
    solver: Box<dyn Solver>,
    pub config: SolverConfig,
}

impl std::fmt::Debug for SolverHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolverHandle")
            .field("capabilities", &self.solver.capabilities())
            .field("config", &self.config)
            .finish()
    }
}

impl SolverHandle {
    pub fn new(solver: Box<dyn Solver>, config: SolverConfig) -> Self {
        Self { solver, config }
    }

    pub fn capabilities(&self) -> Capabilities {
        self.solver.capabilities()
    }

    pub fn solve(&mut self, model: &MilpModel) -> Result<Solution, SolverError> {
        self.solver.solve(model, &self.config)
    }

    /// Solve with the time limit replaced by `limit`.
    pub fn solve_within(&mut self, model: &MilpModel, limit: Option<Duration>) -> Result<Solution, SolverError> {
        let config = SolverConfig { time_limit: limit, ..self.config.clone() };
        self.solver.solve(model, &config)
    }
}

/// Which backend to build handles for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverKind {
    Highs,
    External { command: String },
}

impl SolverKind {
    /// The subprocess adapter when [`SOLVER_CMD_ENV`] is set, else HiGHS.
    pub fn from_env() -> Self {
        match std::env::var(SOLVER_CMD_ENV) {
            Ok(command) if !command.trim().is_empty() => SolverKind::External { command },
            _ => SolverKind::Highs,
        }
    }

    pub fn handle(&self, config: SolverConfig) -> Result<SolverHandle, SolverError> {
        let solver: Box<dyn Solver> = match self {
            #[cfg(feature = "highs")]
            SolverKind::Highs => Box::new(HighsSolver),
            #[cfg(not(feature = "highs"))]
            SolverKind::Highs => {
                return Err(SolverError::Unavailable(format!(
                    "built without HiGHS; set {SOLVER_CMD_ENV}"
                )))
            }
            SolverKind::External { command } => Box::new(ExternalSolver::new(command.clone())),
        };
        Ok(SolverHandle::new(solver, config))
    }
}

#[cfg(feature = "highs")]
pub use in_process::HighsSolver;

#[cfg(feature = "highs")]
mod in_process {
    use super::*;
    use crate::milp::{RowSense, Sense};
    use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem};

    /// HiGHS linked into the process.
    #[derive(Debug, Default, Clone, Copy)]
    pub struct HighsSolver;

    impl Solver for HighsSolver {
        fn capabilities(&self) -> Capabilities {
            Capabilities { lp_solve: true, mip_solve: true }
        }

        fn solve(&mut self, model: &MilpModel, config: &SolverConfig) -> Result<Solution, SolverError> {
            let start = Instant::now();
            let mut cost = vec![0.0; model.variables.len()];
            for &(j, c) in &model.objective {
                cost[j] += c;
            }
            let mut pb = RowProblem::default();
            let cols: Vec<_> = model
                .variables
                .iter()
                .zip(&cost)
                .map(|(v, &c)| {
                    if v.integer {
                        pb.add_integer_column(c, v.lower..=v.upper)
                    } else {
                        pb.add_column(c, v.lower..=v.upper)
                    }
                })
                .collect();
            for row in &model.constraints {
                let factors: Vec<_> = row.terms.iter().map(|&(j, c)| (cols[j], c)).collect();
                match row.sense {
                    RowSense::Le => pb.add_row(..=row.rhs, &factors),
                    RowSense::Ge => pb.add_row(row.rhs.., &factors),
                    RowSense::Eq => pb.add_row(row.rhs..=row.rhs, &factors),
                }
            }
            let sense = match model.sense {
                Sense::Minimize => highs::Sense::Minimise,
                Sense::Maximize => highs::Sense::Maximise,
            };
            let mut m = pb.optimise(sense);
            m.make_quiet();
            if let Some(limit) = config.time_limit {
                m.set_option("time_limit", limit.as_secs_f64().max(1e-3));
            }
            m.set_option("mip_rel_gap", config.mip_rel_gap);
            m.set_option("primal_feasibility_tolerance", config.tolerance.min(1e-7));
            m.set_option("mip_feasibility_tolerance", config.tolerance);
            if let Some(threads) = config.threads {
                m.set_option("threads", threads as i32);
            }
            let solved = m.try_solve().map_err(|e| SolverError::Backend(format!("{e:?}")))?;
            let elapsed = start.elapsed();
            let status = solved.status();
            let has_primal = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
            let values = if has_primal { solved.get_solution().columns().to_vec() } else { Vec::new() };
            let sol = match status {
                HighsModelStatus::Optimal => Solution {
                    status: SolveStatus::Optimal,
                    objective: Some(solved.objective_value()),
                    values,
                    elapsed,
                },
                HighsModelStatus::ModelEmpty => Solution {
                    status: SolveStatus::Optimal,
                    objective: Some(0.0),
                    values: vec![0.0; model.variables.len()],
                    elapsed,
                },
                HighsModelStatus::Infeasible => {
                    Solution { status: SolveStatus::Infeasible, objective: None, values: Vec::new(), elapsed }
                }
                HighsModelStatus::ReachedTimeLimit | HighsModelStatus::ReachedInterrupt => {
                    Solution { status: SolveStatus::Timeout, objective: None, values, elapsed }
                }
                other => return Err(SolverError::Backend(format!("model status {other:?}"))),
            };
            Ok(sol)
        }
    }
}

/// Runs an external solver on exported LP text.
///
/// The command template is run through `sh -c` after substituting `{lp}`,
/// `{sol}` and `{time}` (seconds, empty without a limit). The solver must
/// write a solution file in HiGHS format, or in the `name value` format with
/// a `# Objective value = ...` line that Gurobi writes.
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    command: String,
}

impl ExternalSolver {
    pub fn new(command: impl Into<String>) -> Self {
        Self { command: command.into() }
    }
}

fn io_err(context: &str, e: std::io::Error) -> SolverError {
    SolverError::Io(format!("{context}: {e}"))
}

impl Solver for ExternalSolver {
    fn capabilities(&self) -> Capabilities {
        Capabilities { lp_solve: true, mip_solve: true }
    }

    fn solve(&mut self, model: &MilpModel, config: &SolverConfig) -> Result<Solution, SolverError> {
        let start = Instant::now();
        let dir = tempfile::tempdir().map_err(|e| io_err("temporary directory", e))?;
        let lp = dir.path().join("model.lp");
        let sol = dir.path().join("model.sol");
        std::fs::write(&lp, export_lp_with(model, LpNaming::SolverSafe)).map_err(|e| io_err("writing LP", e))?;
        let time = config.time_limit.map(|d| format!("{:.3}", d.as_secs_f64())).unwrap_or_default();
        let command = self
            .command
            .replace("{lp}", &lp.display().to_string())
            .replace("{sol}", &sol.display().to_string())
            .replace("{time}", &time);
        log::debug!("running solver command: {command}");
        let out = Command::new("sh")
            .arg("-c")
            .arg(&command)
            .output()
            .map_err(|e| io_err("spawning solver", e))?;
        if !out.status.success() {
            return Err(SolverError::Command {
                command,
                status: out.status.to_string(),
                stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
            });
        }
        let mut parsed = read_solution(&sol, model)?;
        parsed.elapsed = start.elapsed();
        Ok(parsed)
    }
}

fn read_solution(path: &Path, model: &MilpModel) -> Result<Solution, SolverError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err("reading solution", e))?;
    parse_solution_file(&text, model)
}

/// Parses a HiGHS or Gurobi-style solution file against `model`'s names.
pub fn parse_solution_file(text: &str, model: &MilpModel) -> Result<Solution, SolverError> {
    let index: HashMap<&str, usize> =
        model.variables.iter().enumerate().map(|(j, v)| (v.name.as_str(), j)).collect();
    let fmt_err = |line: usize, msg: String| SolverError::SolutionFormat { line, msg };
    let mut lines = text.lines().enumerate().peekable();
    let mut values = vec![0.0; model.variables.len()];
    let mut seen_any = false;
    let mut objective = None;
    let status: Option<SolveStatus>;

    if text.starts_with("Model status") {
        // HiGHS layout
        lines.next();
        let (_, s) = lines.next().ok_or_else(|| fmt_err(2, "missing model status".into()))?;
        status = Some(match s.trim() {
            "Optimal" => SolveStatus::Optimal,
            "Infeasible" => SolveStatus::Infeasible,
            "Time limit reached" => SolveStatus::Timeout,
            "Empty" => SolveStatus::Optimal,
            other => return Err(fmt_err(2, format!("unsupported model status `{other}`"))),
        });
        while let Some((i, line)) = lines.next() {
            let line = line.trim();
            if let Some(v) = line.strip_prefix("Objective ") {
                objective = Some(v.trim().parse::<f64>().map_err(|e| fmt_err(i + 1, e.to_string()))?);
            } else if let Some(count) = line.strip_prefix("# Columns ") {
                let count: usize = count.trim().parse().map_err(|_| fmt_err(i + 1, "bad column count".into()))?;
                for _ in 0..count {
                    let (j, entry) = lines.next().ok_or_else(|| fmt_err(i + 1, "truncated columns".into()))?;
                    let (name, v) = entry
                        .rsplit_once(' ')
                        .ok_or_else(|| fmt_err(j + 1, format!("expected `name value`, got `{entry}`")))?;
                    let v: f64 = v.parse().map_err(|_| fmt_err(j + 1, format!("bad value `{v}`")))?;
                    if let Some(&col) = index.get(name.trim()) {
                        values[col] = v;
                    }
                }
                seen_any = true;
            } else if line.starts_with("# Dual solution") {
                break;
            }
        }
    } else {
        for (i, line) in lines {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((_, v)) = rest.split_once('=') {
                    if rest.to_ascii_lowercase().contains("objective") {
                        objective = Some(v.trim().parse().map_err(|_| fmt_err(i + 1, "bad objective".into()))?);
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let (Some(name), Some(v), None) = (toks.next(), toks.next(), toks.next()) else {
                return Err(fmt_err(i + 1, format!("expected `name value`, got `{line}`")));
            };
            let v: f64 = v.parse().map_err(|_| fmt_err(i + 1, format!("bad value `{v}`")))?;
            if let Some(&col) = index.get(name) {
                values[col] = v;
                seen_any = true;
            }
        }
        status = Some(if objective.is_some() { SolveStatus::Optimal } else { SolveStatus::Infeasible });
    }

    let status = status.expect("status set on both branches");
    let values = if seen_any || model.variables.is_empty() { values } else { Vec::new() };
    let objective = match status {
        SolveStatus::Optimal => Some(objective.unwrap_or_else(|| model.objective_value(&values))),
        _ => None,
    };
    if status == SolveStatus::Optimal && values.len() != model.variables.len() {
        return Err(fmt_err(0, "optimal status without primal values".into()));
    }
    Ok(Solution { status, objective, values, elapsed: Duration::ZERO })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{families, Instance};
    use crate::milp::{build_decision_model, build_makespan_model, build_optimization_model};

    fn p(n: usize) -> Instance {
        Instance::new(families::path(n), vec![1], "p")
    }

    #[test]
    fn highs_solution_file() {
        let m = build_decision_model(&p(2), 1).unwrap();
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 1\n# Columns 2\nx_1_2_1 1\nx_2_1_1 0\n# Rows 1\nc_2b_2 1\n\n# Dual solution values\nNone\n";
        let s = parse_solution_file(text, &m).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.objective, Some(1.0));
        assert_eq!(s.values, vec![1.0, 0.0]);
    }

    #[test]
    fn gurobi_style_solution_file() {
        let m = build_decision_model(&p(2), 1).unwrap();
        let s = parse_solution_file("# Objective value = 1\nx_1_2_1 1\nx_2_1_1 -0\n", &m).unwrap();
        assert_eq!(s.objective, Some(1.0));
        assert_eq!(s.values, vec![1.0, 0.0]);
        assert!(parse_solution_file("x_1_2_1\n", &m).is_err());
    }

    #[test]
    fn infeasible_and_timeout_files() {
        let m = build_decision_model(&p(2), 1).unwrap();
        let s = parse_solution_file("Model status\nInfeasible\n\n# Primal solution values\nNone\n", &m).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
        assert!(s.objective.is_none());
        let s = parse_solution_file("Model status\nTime limit reached\n", &m).unwrap();
        assert_eq!(s.status, SolveStatus::Timeout);
        assert!(parse_solution_file("Model status\nWeird\n", &m).is_err());
    }

    #[test]
    fn failing_command_is_reported() {
        let mut h = SolverKind::External { command: "exit 3".into() }.handle(SolverConfig::default()).unwrap();
        let m = build_decision_model(&p(2), 1).unwrap();
        assert!(matches!(h.solve(&m), Err(SolverError::Command { .. })));
    }

    #[cfg(feature = "highs")]
    #[test]
    fn highs_small_models() {
        let mut h = SolverKind::Highs.handle(SolverConfig::default()).unwrap();
        let obj = |h: &mut SolverHandle, m: &MilpModel| h.solve(m).unwrap().objective.unwrap();
        let p3 = p(3);
        assert_eq!(obj(&mut h, &build_optimization_model(&p3, 2).unwrap()).round(), 2.0);
        assert_eq!(obj(&mut h, &build_decision_model(&p3, 2).unwrap()).round(), 2.0);
        assert_eq!(obj(&mut h, &build_decision_model(&p3, 1).unwrap()).round(), 1.0);
        let k3 = Instance::new(families::complete(3), vec![1], "k3");
        assert_eq!(obj(&mut h, &build_decision_model(&k3, 1).unwrap()).round(), 1.0);
        assert_eq!(obj(&mut h, &build_makespan_model(&p(2), 1).unwrap()).round(), 1.0);
        assert_eq!(obj(&mut h, &build_makespan_model(&p3, 2).unwrap()).round(), 2.0);
        assert_eq!(obj(&mut h, &build_makespan_model(&p3, 3).unwrap()).round(), 2.0);
        // one round is not enough for P_3 with a complete broadcast
        let infeasible = h.solve(&build_optimization_model(&p3, 1).unwrap()).unwrap();
        assert_eq!(infeasible.status, SolveStatus::Infeasible);
    }
}
