//! Subprocess adapter driven by a small highspy script. Skipped when python3
//! or highspy is missing.

use std::path::PathBuf;
use std::process::Command;

use mbt_core::graph::{families, Instance};
use mbt_core::milp::{
    build_decision_model, build_makespan_model, build_optimization_model, MilpModel, SolveStatus,
    SolverConfig, SolverHandle, SolverKind,
};

fn shim_handle() -> Option<SolverHandle> {
    let ok = Command::new("python3")
        .args(["-c", "import highspy"])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false);
    if !ok {
        eprintln!("skipping: python3 with highspy not available");
        return None;
    }
    let shim = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/highs_shim.py");
    let command = format!("python3 {} {{lp}} {{sol}} {{time}}", shim.display());
    Some(SolverKind::External { command }.handle(SolverConfig::default()).unwrap())
}

fn objective(h: &mut SolverHandle, m: &MilpModel) -> f64 {
    let s = h.solve(m).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert_eq!(s.values.len(), m.variables.len());
    assert!(m.max_violation(&s.values) < 1e-6);
    s.objective.unwrap()
}

#[test]
fn external_matches_known_optima() {
    let Some(mut h) = shim_handle() else { return };
    let p3 = Instance::new(families::path(3), vec![1], "p3");
    assert_eq!(objective(&mut h, &build_decision_model(&p3, 2).unwrap()).round(), 2.0);
    assert_eq!(objective(&mut h, &build_decision_model(&p3, 1).unwrap()).round(), 1.0);
    assert_eq!(objective(&mut h, &build_optimization_model(&p3, 3).unwrap()).round(), 2.0);
    assert_eq!(objective(&mut h, &build_makespan_model(&p3, 3).unwrap()).round(), 2.0);
    let relaxed = objective(&mut h, &build_optimization_model(&p3, 2).unwrap().relaxed());
    assert!(relaxed <= 2.0 + 1e-6);
}

#[test]
fn external_reports_infeasible() {
    let Some(mut h) = shim_handle() else { return };
    let p3 = Instance::new(families::path(3), vec![1], "p3");
    let s = h.solve(&build_optimization_model(&p3, 1).unwrap()).unwrap();
    assert_eq!(s.status, SolveStatus::Infeasible);
    assert!(s.objective.is_none());
}

#[test]
fn fixed_variables_stay_fixed_in_the_export() {
    let Some(mut h) = shim_handle() else { return };
    // push the objective onto variables fixed to zero; a reader that dropped
    // the `= 0` bounds would return a positive value
    let k3 = Instance::new(families::complete(3), vec![1], "k3");
    let mut m = build_decision_model(&k3, 2).unwrap();
    let fixed: Vec<usize> = (0..m.variables.len()).filter(|&j| m.variables[j].fixed_by.is_some()).collect();
    assert!(!fixed.is_empty());
    m.objective = fixed.iter().map(|&j| (j, 1.0)).collect();
    assert_eq!(objective(&mut h, &m), 0.0);
}
