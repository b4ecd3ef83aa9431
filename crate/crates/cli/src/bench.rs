//! Batch evaluation: one CSV row per instance plus one mean row per group.
//!
//! Columns (see [`BenchRow`]): `kind` is `instance` or `mean`. Per-instance
//! rows hold integers and 0/1 flags. Mean rows hold arithmetic means over the
//! rows of the group where the column is present, except `interrupted` (the
//! percentage of interrupted exact solves among the instances where the exact
//! solver ran) and `bounds_collapsed` (a count). Times are seconds; an
//! interrupted exact solve is charged the full time limit.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use mbt_core::bounds::{BoundName, BoundReport, BoundStatus, BoundValue};
use mbt_core::exact::{solve_exact, ExactOptions, ExactStatus, StartFrom};
use mbt_core::graph::io::read_instance;
use mbt_core::graph::{generate_random, GeneratorConfig, Instance};
use mbt_core::heuristic::{record_upper_bounds, upper_bound_suite, Matcher};
use mbt_core::milp::{lp_tstar, SolverConfig, SolverKind};

use crate::args::{BenchArgs, StartFromArg};
use crate::commands::{collapse_reference, combinatorial_report, matcher, solver_kind, time_limit};

/// An instance with the labels it is reported under.
#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub inst: Instance,
    pub group: String,
    pub p_or_dataset: String,
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub ks: Vec<usize>,
    pub lp: bool,
    pub opt: bool,
    pub start_from: StartFrom,
    pub matcher: Matcher,
    pub time_limit: Duration,
    pub solver: SolverKind,
}

fn num<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_str(&format!("{x}")),
        None => s.serialize_str(""),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BenchRow {
    pub kind: String,
    pub group: String,
    pub instance: String,
    pub count: usize,
    #[serde(serialize_with = "num")]
    pub n: Option<f64>,
    #[serde(serialize_with = "num")]
    pub edges: Option<f64>,
    #[serde(serialize_with = "num")]
    pub sigma: Option<f64>,
    pub p_or_dataset: String,
    #[serde(serialize_with = "num")]
    pub fib: Option<f64>,
    #[serde(serialize_with = "num")]
    pub deg: Option<f64>,
    #[serde(serialize_with = "num")]
    pub lp: Option<f64>,
    pub lp_status: String,
    #[serde(serialize_with = "num")]
    pub opt: Option<f64>,
    pub opt_status: String,
    #[serde(serialize_with = "num")]
    pub ub_4: Option<f64>,
    #[serde(serialize_with = "num")]
    pub ub_3: Option<f64>,
    #[serde(serialize_with = "num")]
    pub ub_2: Option<f64>,
    #[serde(serialize_with = "num")]
    pub ub_1: Option<f64>,
    #[serde(serialize_with = "num")]
    pub t_fib: Option<f64>,
    #[serde(serialize_with = "num")]
    pub t_deg: Option<f64>,
    #[serde(serialize_with = "num")]
    pub t_lp: Option<f64>,
    #[serde(serialize_with = "num")]
    pub t_opt: Option<f64>,
    #[serde(serialize_with = "num")]
    pub t_ub_4: Option<f64>,
    #[serde(serialize_with = "num")]
    pub t_ub_3: Option<f64>,
    #[serde(serialize_with = "num")]
    pub t_ub_2: Option<f64>,
    #[serde(serialize_with = "num")]
    pub t_ub_1: Option<f64>,
    #[serde(serialize_with = "num")]
    pub interrupted: Option<f64>,
    #[serde(serialize_with = "num")]
    pub bounds_collapsed: Option<f64>,
}

impl BenchRow {
    fn ub_mut(&mut self, k: usize) -> Option<(&mut Option<f64>, &mut Option<f64>)> {
        match k {
            1 => Some((&mut self.ub_1, &mut self.t_ub_1)),
            2 => Some((&mut self.ub_2, &mut self.t_ub_2)),
            3 => Some((&mut self.ub_3, &mut self.t_ub_3)),
            4 => Some((&mut self.ub_4, &mut self.t_ub_4)),
            _ => None,
        }
    }

    /// Numeric columns that are averaged in mean rows, by name.
    fn averaged(&self) -> [(&'static str, Option<f64>); 20] {
        [
            ("n", self.n),
            ("edges", self.edges),
            ("sigma", self.sigma),
            ("fib", self.fib),
            ("deg", self.deg),
            ("lp", self.lp),
            ("opt", self.opt),
            ("ub_4", self.ub_4),
            ("ub_3", self.ub_3),
            ("ub_2", self.ub_2),
            ("ub_1", self.ub_1),
            ("t_fib", self.t_fib),
            ("t_deg", self.t_deg),
            ("t_lp", self.t_lp),
            ("t_opt", self.t_opt),
            ("t_ub_4", self.t_ub_4),
            ("t_ub_3", self.t_ub_3),
            ("t_ub_2", self.t_ub_2),
            ("t_ub_1", self.t_ub_1),
            ("bounds_collapsed", self.bounds_collapsed),
        ]
    }

    fn set(&mut self, name: &str, v: Option<f64>) {
        let slot = match name {
            "n" => &mut self.n,
            "edges" => &mut self.edges,
            "sigma" => &mut self.sigma,
            "fib" => &mut self.fib,
            "deg" => &mut self.deg,
            "lp" => &mut self.lp,
            "opt" => &mut self.opt,
            "ub_4" => &mut self.ub_4,
            "ub_3" => &mut self.ub_3,
            "ub_2" => &mut self.ub_2,
            "ub_1" => &mut self.ub_1,
            "t_fib" => &mut self.t_fib,
            "t_deg" => &mut self.t_deg,
            "t_lp" => &mut self.t_lp,
            "t_opt" => &mut self.t_opt,
            "t_ub_4" => &mut self.t_ub_4,
            "t_ub_3" => &mut self.t_ub_3,
            "t_ub_2" => &mut self.t_ub_2,
            "t_ub_1" => &mut self.t_ub_1,
            "bounds_collapsed" => &mut self.bounds_collapsed,
            other => unreachable!("unknown column {other}"),
        };
        *slot = v;
    }
}

fn int(report: &BoundReport, name: BoundName) -> Option<usize> {
    match report.get(name)?.value {
        BoundValue::Int(v) => Some(v),
        BoundValue::Real(_) => None,
    }
}

fn secs(report: &BoundReport, name: BoundName) -> Option<f64> {
    report.get(name).map(|e| e.elapsed.as_secs_f64())
}

/// Computes every requested column for one instance.
pub fn evaluate(bi: &BenchInstance, opts: &BenchOptions) -> Result<BenchRow> {
    let inst = &bi.inst;
    let mut row = BenchRow {
        kind: "instance".into(),
        group: bi.group.clone(),
        instance: inst.name.clone(),
        count: 1,
        n: Some(inst.node_count() as f64),
        edges: Some(inst.graph.edge_count() as f64),
        sigma: Some(inst.source_count() as f64),
        p_or_dataset: bi.p_or_dataset.clone(),
        ..BenchRow::default()
    };
    let mut report = BoundReport::default();
    combinatorial_report(inst, &mut report)?;
    row.fib = int(&report, BoundName::Fib).map(|v| v as f64);
    row.deg = int(&report, BoundName::Deg).map(|v| v as f64);
    row.t_fib = secs(&report, BoundName::Fib);
    row.t_deg = secs(&report, BoundName::Deg);

    let needs_solver = opts.lp || opts.opt || opts.ks.iter().any(|&k| k >= 2);
    let mut handle = if needs_solver {
        // one thread per solve; the worker pool supplies the parallelism
        let config = SolverConfig { time_limit: Some(opts.time_limit), threads: Some(1), ..SolverConfig::default() };
        Some(opts.solver.handle(config)?)
    } else {
        None
    };

    let ubs = upper_bound_suite(inst, &opts.ks, opts.matcher, Some(opts.time_limit), handle.as_mut());
    for ub in &ubs {
        if let Err(e) = &ub.result {
            log::error!("{}: ub_{} failed: {e}", inst.name, ub.k);
        }
    }
    record_upper_bounds(&mut report, &ubs);
    for &k in &opts.ks {
        let (v, t) = (int(&report, BoundName::Ub(k)), secs(&report, BoundName::Ub(k)));
        if let Some((slot, tslot)) = row.ub_mut(k) {
            *slot = v.map(|v| v as f64);
            *tslot = t;
        }
    }
    let best_schedule = ubs
        .iter()
        .filter_map(|u| u.result.as_ref().ok())
        .min_by_key(|c| c.schedule.len())
        .map(|c| c.schedule.clone());

    let deg = int(&report, BoundName::Deg);
    let collapsed = deg.is_some() && deg == collapse_reference(&report);
    row.bounds_collapsed = Some(if collapsed { 1.0 } else { 0.0 });
    row.lp_status = "not_run".into();
    row.opt_status = "not_run".into();
    if collapsed {
        // the optimum is known; no relaxation or integer program is solved
        if opts.lp {
            row.lp = row.deg;
            row.lp_status = "collapsed".into();
        }
        if opts.opt {
            row.opt = row.deg;
            row.opt_status = "collapsed".into();
        }
        return Ok(row);
    }

    let lower = [BoundName::Log, BoundName::Fib, BoundName::Deg]
        .iter()
        .filter_map(|&b| int(&report, b))
        .max()
        .unwrap_or(0);
    let mut lp_value = None;
    if opts.lp {
        let h = handle.as_mut().expect("created when lp is requested");
        match lp_tstar(inst, h, lower) {
            Ok(ts) => {
                row.lp = Some(ts.value as f64);
                row.t_lp = Some(ts.elapsed.as_secs_f64());
                row.lp_status = match ts.status {
                    BoundStatus::Exact => "exact",
                    BoundStatus::Timeout => "timeout",
                }
                .into();
                lp_value = Some(ts.value);
            }
            Err(e) => {
                log::error!("{}: relaxation failed: {e}", inst.name);
                row.lp_status = "error".into();
            }
        }
    }
    if opts.opt {
        let h = handle.as_mut().expect("created when opt is requested");
        let (start_from, lower) = match (opts.start_from, lp_value) {
            (StartFrom::Lp, Some(v)) => (StartFrom::Combinatorial, Some(v)),
            (s, _) => (s, None),
        };
        let out = solve_exact(
            inst,
            h,
            &ExactOptions { time_limit: Some(opts.time_limit), start_from, upper: best_schedule, lower },
        );
        match out.status {
            ExactStatus::Optimal => {
                row.opt = Some(out.tau as f64);
                row.opt_status = "optimal".into();
                row.t_opt = Some(out.elapsed.as_secs_f64());
                row.interrupted = Some(0.0);
            }
            ExactStatus::LowerBoundOnly => {
                row.opt = Some(out.tau as f64);
                row.opt_status = "lower_bound".into();
                row.t_opt = Some(opts.time_limit.as_secs_f64());
                row.interrupted = Some(1.0);
            }
            ExactStatus::Error(e) => {
                log::error!("{}: exact solve failed: {e}", inst.name);
                row.opt_status = "error".into();
            }
        }
    }
    Ok(row)
}

/// Mean rows, one per group in order of first appearance.
pub fn aggregate(rows: &[BenchRow]) -> Vec<BenchRow> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&BenchRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.kind == "instance") {
        if !groups.contains_key(r.group.as_str()) {
            order.push(&r.group);
        }
        groups.entry(&r.group).or_default().push(r);
    }
    order
        .into_iter()
        .map(|g| {
            let members = &groups[g];
            let mut mean = BenchRow {
                kind: "mean".into(),
                group: g.to_string(),
                count: members.len(),
                p_or_dataset: members[0].p_or_dataset.clone(),
                ..BenchRow::default()
            };
            let columns = members[0].averaged().map(|(name, _)| name);
            for (i, name) in columns.iter().enumerate() {
                let present: Vec<f64> = members.iter().filter_map(|r| r.averaged()[i].1).collect();
                let v = if present.is_empty() {
                    None
                } else if *name == "bounds_collapsed" {
                    Some(present.iter().sum())
                } else {
                    Some(present.iter().sum::<f64>() / present.len() as f64)
                };
                mean.set(name, v);
            }
            let ran: Vec<f64> = members.iter().filter_map(|r| r.interrupted).collect();
            if !ran.is_empty() {
                mean.interrupted = Some(100.0 * ran.iter().sum::<f64>() / ran.len() as f64);
            }
            mean
        })
        .collect()
}

/// The CSV header line, taken from the field names of [`BenchRow`].
pub fn csv_header() -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(BenchRow::default()).expect("writing to memory");
    let text = String::from_utf8(w.into_inner().expect("flushing to memory")).expect("utf-8");
    text.lines().next().expect("header line").to_string()
}

pub fn write_csv(rows: &[BenchRow], out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{}", csv_header())?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Instances of a random sweep, seeds `seed, seed + 1, ...` within each
/// `(n, p)` pair.
pub fn sweep_instances(ns: &[usize], ps: &[f64], sigma: usize, count: usize, seed: u64) -> Result<Vec<BenchInstance>> {
    let mut out = Vec::new();
    for &n in ns {
        for &p in ps {
            for i in 0..count {
                let cfg = GeneratorConfig::new(n, p, sigma, seed + i as u64);
                if let Err(e) = cfg.check() {
                    bail!("invalid sweep point: {e}");
                }
                out.push(BenchInstance {
                    inst: generate_random(&cfg),
                    group: format!("n{n}_p{p}_s{sigma}"),
                    p_or_dataset: p.to_string(),
                });
            }
        }
    }
    Ok(out)
}

/// Instance files of `dir` in name order, optionally filtered by size.
/// Unreadable files are logged and skipped.
pub fn dataset_instances(dir: &Path, nodes: Option<usize>, edges: Option<usize>) -> Result<Vec<BenchInstance>> {
    let label = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into());
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let inst = match read_instance(&path, None) {
            Ok(i) => i,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                continue;
            }
        };
        if nodes.is_some_and(|n| n != inst.node_count()) || edges.is_some_and(|m| m != inst.graph.edge_count()) {
            continue;
        }
        let group = format!("{label}_n{}_m{}", inst.node_count(), inst.graph.edge_count());
        out.push(BenchInstance { inst, group, p_or_dataset: label.clone() });
    }
    Ok(out)
}

/// Evaluates `instances` on `jobs` worker threads (0 = all cores), keeping
/// their order. Failed instances are logged and left out.
pub fn run(instances: &[BenchInstance], opts: &BenchOptions, jobs: usize) -> Result<Vec<BenchRow>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let results: Vec<Result<BenchRow>> = pool.install(|| instances.par_iter().map(|bi| evaluate(bi, opts)).collect());
    let mut rows = Vec::with_capacity(results.len());
    for (bi, r) in instances.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => log::error!("{}: {e:#}", bi.inst.name),
        }
    }
    Ok(rows)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<Vec<BenchRow>> {
    if let Some(&k) = args.ks.iter().find(|&&k| !(1..=4).contains(&k)) {
        bail!("bench reports lookahead 1 to 4, got {k}");
    }
    let mut ks = args.ks.clone();
    ks.sort_unstable();
    ks.dedup();
    let instances = match &args.dataset {
        Some(dir) => dataset_instances(dir, args.nodes, args.edges)?,
        None => sweep_instances(&args.n, &args.p, args.sigma, args.count, args.seed)?,
    };
    let opts = BenchOptions {
        ks,
        lp: !args.skip_lp,
        opt: !args.skip_opt,
        start_from: match args.start_from {
            StartFromArg::Deg => StartFrom::Combinatorial,
            StartFromArg::Lp => StartFrom::Lp,
        },
        matcher: matcher(args.matcher),
        time_limit: time_limit(&args.solver)?,
        solver: solver_kind(&args.solver)?,
    };
    let mut rows = run(&instances, &opts, args.jobs)?;
    rows.extend(aggregate(&rows));
    match &args.output {
        Some(path) => {
            let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&rows, &mut f)?;
        }
        None => write_csv(&rows, out)?,
    }
    Ok(rows)
}
