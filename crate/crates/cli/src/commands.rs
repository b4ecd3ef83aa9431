use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};

use mbt_core::bounds::{
    degree_bound, fibonacci_bound, trivial_bounds, BoundName, BoundReport, BoundStatus, BoundValue,
};
use mbt_core::exact::{solve_exact, ExactOptions, ExactStatus, StartFrom};
use mbt_core::graph::io::{read_instance, write_edge_list, write_stp};
use mbt_core::graph::{generate_random, ordered_degree_sequence, GeneratorConfig, Instance};
use mbt_core::heuristic::{construct, record_upper_bounds, upper_bound_suite, LookaheadConfig, Matcher};
use mbt_core::milp::{
    build_decision_model_with, build_makespan_model, build_optimization_model, export_lp, lp_tstar, lp_zeta,
    SolverConfig, SolverHandle, SolverKind, SOLVER_CMD_ENV,
};
use mbt_core::schedule::BroadcastSchedule;

use crate::args::*;
use crate::table::{render, Cell};

pub fn resolve_instance(args: &InstanceArgs) -> Result<Instance> {
    if let Some(path) = &args.input {
        return read_instance(path, args.sources.clone()).with_context(|| format!("reading {}", path.display()));
    }
    let n = args.n.ok_or_else(|| anyhow!("give an instance file or --n for a random instance"))?;
    let cfg = GeneratorConfig::new(n, args.p, args.sigma, args.seed);
    cfg.check().map_err(|e| anyhow!(e))?;
    let inst = generate_random(&cfg);
    match &args.sources {
        Some(s) => Ok(Instance::checked(inst.graph, s.clone(), inst.name)?),
        None => Ok(inst),
    }
}

pub fn solver_kind(args: &SolverArgs) -> Result<SolverKind> {
    let external = |cmd: Option<String>| -> Result<SolverKind> {
        let command = cmd
            .or_else(|| std::env::var(SOLVER_CMD_ENV).ok())
            .filter(|c| !c.trim().is_empty())
            .ok_or_else(|| anyhow!("external solver needs --solver-cmd or {SOLVER_CMD_ENV}"))?;
        Ok(SolverKind::External { command })
    };
    match args.solver {
        Some(SolverArg::Highs) => Ok(SolverKind::Highs),
        Some(SolverArg::External) => external(args.solver_cmd.clone()),
        None if args.solver_cmd.is_some() => external(args.solver_cmd.clone()),
        None => Ok(SolverKind::from_env()),
    }
}

pub fn time_limit(args: &SolverArgs) -> Result<Duration> {
    if !(args.time_limit >= 0.0 && args.time_limit.is_finite()) {
        bail!("time limit must be a non-negative number of seconds");
    }
    Ok(Duration::from_secs_f64(args.time_limit))
}

pub fn solver_handle(args: &SolverArgs) -> Result<SolverHandle> {
    let config = SolverConfig { time_limit: Some(time_limit(args)?), ..SolverConfig::default() };
    Ok(solver_kind(args)?.handle(config)?)
}

pub fn matcher(m: MatcherArg) -> Matcher {
    match m {
        MatcherArg::Cardinality => Matcher::Cardinality,
        MatcherArg::VertexWeight => Matcher::VertexWeight,
    }
}

fn write_target(path: &Path, text: &str, out: &mut dyn Write) -> Result<()> {
    if path.as_os_str() == "-" {
        out.write_all(text.as_bytes())?;
    } else {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Upper bound used by the collapse rule: `ub_4` when present, else the one
/// with the largest lookahead.
pub fn collapse_reference(report: &BoundReport) -> Option<usize> {
    let ubs = report.entries.iter().filter_map(|(name, e)| match (name, e.value) {
        (BoundName::Ub(k), BoundValue::Int(v)) => Some((*k, v)),
        _ => None,
    });
    let ubs: Vec<_> = ubs.collect();
    ubs.iter().find(|(k, _)| *k == 4).or(ubs.last()).map(|&(_, v)| v)
}

/// log, fib and deg entries with their timings.
pub fn combinatorial_report(inst: &Instance, report: &mut BoundReport) -> Result<()> {
    let (n, sigma) = (inst.node_count(), inst.source_count());
    let t = Instant::now();
    let log = trivial_bounds(n, sigma)?.0;
    report.insert(BoundName::Log, BoundValue::Int(log), t.elapsed(), BoundStatus::Exact);
    let t = Instant::now();
    let fib = fibonacci_bound(n, sigma, inst.graph.max_degree())?;
    report.insert(BoundName::Fib, BoundValue::Int(fib), t.elapsed(), BoundStatus::Exact);
    let t = Instant::now();
    let deg = degree_bound(sigma, &ordered_degree_sequence(inst))?;
    report.insert(BoundName::Deg, BoundValue::Int(deg), t.elapsed(), BoundStatus::Exact);
    Ok(())
}

fn value_cell(report: &BoundReport, name: BoundName) -> Cell {
    match report.get(name) {
        None => Cell::Empty,
        Some(e) => match e.value {
            BoundValue::Int(v) => Cell::Int(v),
            BoundValue::Real(x) => Cell::Real(x),
        },
    }
}

pub fn cmd_bounds(args: &BoundsArgs, out: &mut dyn Write) -> Result<()> {
    let inst = resolve_instance(&args.instance)?;
    let mut report = BoundReport::default();
    combinatorial_report(&inst, &mut report)?;

    let needs_solver = args.lp || args.zeta || args.ks.iter().any(|&k| k >= 2);
    let mut handle = if needs_solver { Some(solver_handle(&args.solver)?) } else { None };
    let mut ks = args.ks.clone();
    ks.sort_unstable();
    ks.dedup();
    let limit = Some(time_limit(&args.solver)?);
    let ubs = upper_bound_suite(&inst, &ks, matcher(args.matcher), limit, handle.as_mut());
    for ub in &ubs {
        if let Err(e) = &ub.result {
            log::error!("{}: ub_{} failed: {e}", inst.name, ub.k);
        }
    }
    record_upper_bounds(&mut report, &ubs);

    if args.lp {
        let start = best_lower(&report);
        let h = handle.as_mut().expect("created when lp is requested");
        let ts = lp_tstar(&inst, h, start)?;
        report.insert(BoundName::LpTstar, BoundValue::Int(ts.value), ts.elapsed, ts.status);
    }
    if args.zeta {
        let horizon = ubs
            .iter()
            .filter_map(|u| u.result.as_ref().ok().map(|c| c.schedule.len()))
            .min()
            .unwrap_or(inst.uninformed_count());
        if horizon >= 1 {
            let h = handle.as_mut().expect("created when zeta is requested");
            let z = lp_zeta(&inst, horizon, h)?;
            if let Some(v) = z.objective {
                report.insert(BoundName::LpZeta, BoundValue::Real(v), z.elapsed, BoundStatus::Exact);
            }
        }
    }

    let mut names = vec![BoundName::Log, BoundName::Fib, BoundName::Deg];
    if args.lp {
        names.push(BoundName::LpTstar);
    }
    if args.zeta {
        names.push(BoundName::LpZeta);
    }
    names.extend(ks.iter().rev().map(|&k| BoundName::Ub(k)));

    let mut header: Vec<String> = ["instance", "n", "edges", "sigma"].iter().map(|s| s.to_string()).collect();
    header.extend(names.iter().map(|n| n.to_string()));
    header.push("collapsed".into());
    let mut row = vec![
        Cell::Text(inst.name.clone()),
        Cell::Int(inst.node_count()),
        Cell::Int(inst.graph.edge_count()),
        Cell::Int(inst.source_count()),
    ];
    row.extend(names.iter().map(|&n| value_cell(&report, n)));
    let deg = match report.get(BoundName::Deg).map(|e| e.value) {
        Some(BoundValue::Int(d)) => Some(d),
        _ => None,
    };
    let collapsed = deg.is_some() && deg == collapse_reference(&report);
    row.push(Cell::Text(collapsed.to_string()));
    out.write_all(render(&header, &[row], args.format).as_bytes())?;
    Ok(())
}

fn best_lower(report: &BoundReport) -> usize {
    report
        .entries
        .iter()
        .filter(|(n, _)| matches!(n, BoundName::Log | BoundName::Fib | BoundName::Deg))
        .filter_map(|(_, e)| match e.value {
            BoundValue::Int(v) => Some(v),
            BoundValue::Real(_) => None,
        })
        .max()
        .unwrap_or(0)
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<ExactStatus> {
    let inst = resolve_instance(&args.instance)?;
    let mut handle = solver_handle(&args.solver)?;
    let limit = time_limit(&args.solver)?;
    let start = Instant::now();
    let upper = match args.ub {
        Some(k) => {
            let cfg = LookaheadConfig { k, matcher: Matcher::Cardinality, time_limit: Some(limit) };
            Some(construct(&inst, &cfg, Some(&mut handle))?.schedule)
        }
        None => None,
    };
    let opts = ExactOptions {
        time_limit: Some(limit.saturating_sub(start.elapsed())),
        start_from: match args.start_from {
            StartFromArg::Deg => StartFrom::Combinatorial,
            StartFromArg::Lp => StartFrom::Lp,
        },
        upper,
        lower: None,
    };
    let outcome = solve_exact(&inst, &mut handle, &opts);
    match &outcome.status {
        ExactStatus::Optimal => writeln!(out, "OPT {}", outcome.tau)?,
        ExactStatus::LowerBoundOnly => writeln!(out, "LB {} (interrupted)", outcome.tau)?,
        ExactStatus::Error(e) => bail!("solve failed: {e}"),
    }
    writeln!(out, "instance: {}", inst.name)?;
    writeln!(out, "elapsed: {:.3}s", start.elapsed().as_secs_f64())?;
    let trace: Vec<String> = outcome.iterations.iter().map(|(t, v)| format!("{t}:{v}")).collect();
    writeln!(out, "iterations: {}", if trace.is_empty() { "-".to_string() } else { trace.join(" ") })?;
    if let (Some(path), Some(s)) = (&args.emit_schedule, &outcome.schedule) {
        write_target(path, &s.to_string(), out)?;
    }
    Ok(outcome.status)
}

pub fn cmd_heuristic(args: &HeuristicArgs, out: &mut dyn Write) -> Result<BroadcastSchedule> {
    let inst = resolve_instance(&args.instance)?;
    let mut handle = if args.k >= 2 { Some(solver_handle(&args.solver)?) } else { None };
    let cfg = LookaheadConfig {
        k: args.k,
        matcher: matcher(args.matcher),
        time_limit: Some(time_limit(&args.solver)?),
    };
    let c = construct(&inst, &cfg, handle.as_mut())?;
    writeln!(out, "UB-{} {}", args.k, c.schedule.len())?;
    writeln!(out, "instance: {}", inst.name)?;
    writeln!(out, "elapsed: {:.3}s", c.elapsed.as_secs_f64())?;
    if c.degraded_rounds > 0 {
        writeln!(out, "rounds committed after a timeout: {}", c.degraded_rounds)?;
    }
    if let Some(path) = &args.emit_schedule {
        write_target(path, &c.schedule.to_string(), out)?;
    }
    Ok(c.schedule)
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = GeneratorConfig::new(args.n, args.p, args.sigma, args.seed);
    cfg.check().map_err(|e| anyhow!(e))?;
    let inst = generate_random(&cfg);
    let text = match args.format {
        InstanceFormat::EdgeList => write_edge_list(&inst),
        InstanceFormat::Stp => write_stp(&inst),
    };
    match &args.output {
        Some(path) => write_target(path, &text, out),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

pub fn cmd_export_lp(args: &ExportLpArgs, out: &mut dyn Write) -> Result<()> {
    let inst = resolve_instance(&args.instance)?;
    let model = match args.model {
        ModelArg::Opt => build_optimization_model(&inst, args.t)?,
        ModelArg::Dec => build_decision_model_with(&inst, args.t, !args.without_capacity)?,
        ModelArg::Makespan => build_makespan_model(&inst, args.t)?,
    };
    let model = if args.relaxed { model.relaxed() } else { model };
    let text = export_lp(&model);
    match &args.output {
        Some(path) => write_target(path, &text, out),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}
