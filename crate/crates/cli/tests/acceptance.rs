//! Acceptance criteria, one PASS/FAIL line each on stderr.
//!
//! Criterion 6 needs the I160 SteinLib files in `MBT_STEINLIB_DIR` and is
//! reported as SKIP otherwise.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use clap::Parser;
use rayon::prelude::*;

use mbt_cli::args::{Cli, Command};
use mbt_cli::bench::{cmd_bench, dataset_instances, evaluate, BenchOptions, BenchRow};
use mbt_core::bounds::{degree_bound, fib_sequence, fibonacci_bound, trivial_bounds};
use mbt_core::exact::{brute_force_tau, solve_exact, ExactOptions, ExactStatus, StartFrom};
use mbt_core::graph::{families, generate_random, ordered_degree_sequence, GeneratorConfig, Instance};
use mbt_core::heuristic::{construct, LookaheadConfig, Matcher};
use mbt_core::milp::{lp_tstar, lp_zeta, SolverConfig, SolverHandle, SolverKind};
use mbt_core::schedule::validate_schedule;

const ZETA_TOL: f64 = 1e-6;
const DEG_MEAN_RANGE: (f64, f64) = (7.0, 8.2);
const UB1_MEAN_RANGE: (f64, f64) = (9.5, 11.5);
const UB1_I160_TOL: f64 = 0.5;

type Criterion = (&'static str, fn() -> Verdict);

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn handle(limit: Option<Duration>) -> SolverHandle {
    SolverKind::from_env()
        .handle(SolverConfig { time_limit: limit, threads: Some(1), ..SolverConfig::default() })
        .expect("a MIP backend")
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn closed_forms() -> Verdict {
    let start = Instant::now();
    let mut h = handle(None);
    let mut cases: Vec<(Instance, usize)> = Vec::new();
    for n in 2..=8 {
        cases.push((Instance::new(families::path(n), vec![1], format!("P{n}")), n - 1));
    }
    for j in 1..=4u32 {
        cases.push((Instance::new(families::hypercube(j), vec![1], format!("C{j}")), j as usize));
    }
    for n in 2..=10 {
        let inst = Instance::new(families::complete(n), vec![1], format!("K{n}"));
        let want = common::reference_tau(&inst);
        cases.push((inst, want));
    }
    for leaves in 1..=8 {
        let inst = Instance::new(families::star(leaves), vec![1], format!("star{leaves}"));
        let want = common::reference_tau(&inst);
        cases.push((inst, want));
    }
    let mut bad = Vec::new();
    for (inst, want) in &cases {
        let out = solve_exact(inst, &mut h, &ExactOptions::default());
        if out.status != ExactStatus::Optimal || out.tau != *want {
            bad.push(format!("{}: got {} want {want}", inst.name, out.tau));
        }
    }
    // the derived values must be the textbook ones
    for n in 2..=10usize {
        if common::reference_tau(&Instance::new(families::complete(n), vec![1], "k")) != n.next_power_of_two().trailing_zeros() as usize {
            bad.push(format!("reference disagrees with ceil(log2 {n})"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        bad.push(format!("took {secs:.1}s"));
    }
    check(bad.is_empty(), format!("{} instances in {secs:.1}s {}", cases.len(), bad.join("; ")))
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let bad: Vec<String> = (0..50u64)
        .into_par_iter()
        .filter_map(|i| {
            let n = 5 + (i as usize % 5);
            let sigma = 1 + (i as usize / 5) % 2;
            let p = [0.0, 0.15, 0.3, 0.5][(i % 4) as usize];
            let inst = generate_random(&GeneratorConfig::new(n, p, sigma, 7000 + i));
            let mut h = handle(None);
            let (bf, _) = brute_force_tau(&inst).ok()?;
            let ex = solve_exact(&inst, &mut h, &ExactOptions::default());
            let full = construct(&inst, &LookaheadConfig::new(n - sigma), Some(&mut h)).ok().map(|c| c.schedule.len());
            let refv = common::reference_tau(&inst);
            (ex.status != ExactStatus::Optimal || ex.tau != bf || full != Some(bf) || refv != bf)
                .then(|| format!("{}: exact {} brute {bf} full {full:?} reference {refv}", inst.name, ex.tau))
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    check(bad.is_empty() && secs < 600.0, format!("50 instances in {secs:.1}s {}", bad.join("; ")))
}

fn bound_hierarchy() -> Verdict {
    let start = Instant::now();
    let limit = Duration::from_secs(20);
    let results: Vec<(bool, Option<String>)> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let n = 5 + (i as usize * 11) % 56;
            let p = [0.02, 0.05, 0.1, 0.2][(i % 4) as usize];
            let sigma = 1 + (i as usize / 4) % 3;
            let inst = generate_random(&GeneratorConfig::new(n, p, sigma, 9000 + i));
            let mut h = handle(Some(limit));
            let mut errs = Vec::new();
            let (log, trivial_ub) = trivial_bounds(n, sigma).unwrap();
            let fib = fibonacci_bound(n, sigma, inst.graph.max_degree()).unwrap();
            let deg = degree_bound(sigma, &ordered_degree_sequence(&inst)).unwrap();
            let mut ub = [0usize; 5];
            for k in [1, 4] {
                match construct(&inst, &LookaheadConfig { time_limit: Some(limit), ..LookaheadConfig::new(k) }, Some(&mut h)) {
                    Ok(c) => {
                        if validate_schedule(&inst, &c.schedule).is_err() {
                            errs.push(format!("ub_{k} invalid"));
                        }
                        ub[k] = c.schedule.len();
                    }
                    Err(e) => errs.push(format!("ub_{k}: {e}")),
                }
            }
            if !(log <= fib && fib <= deg && deg <= ub[1] && ub[1] <= trivial_ub) {
                errs.push(format!("log {log} fib {fib} deg {deg} ub_1 {}", ub[1]));
            }
            let mut mip_ran = false;
            if deg != ub[4] && errs.is_empty() {
                let ts = lp_tstar(&inst, &mut h, deg).unwrap();
                let ex = solve_exact(
                    &inst,
                    &mut h,
                    &ExactOptions { time_limit: Some(limit), lower: Some(ts.value), ..ExactOptions::default() },
                );
                if let Some(s) = &ex.schedule {
                    if validate_schedule(&inst, s).is_err() || s.len() != ex.tau {
                        errs.push("exact schedule invalid".into());
                    }
                }
                match ex.status {
                    ExactStatus::Optimal => {
                        mip_ran = true;
                        if !(deg <= ts.value && ts.value <= ex.tau && ex.tau <= ub[4] && ex.tau <= ub[1]) {
                            errs.push(format!("deg {deg} t* {} tau {} ub_4 {} ub_1 {}", ts.value, ex.tau, ub[4], ub[1]));
                        }
                    }
                    ExactStatus::LowerBoundOnly => {
                        if ex.tau > ub[4] || ts.value > ub[4] {
                            errs.push(format!("lower {} above ub_4 {}", ex.tau.max(ts.value), ub[4]));
                        }
                    }
                    ExactStatus::Error(e) => errs.push(e),
                }
            }
            (mip_ran, (!errs.is_empty()).then(|| format!("{}: {}", inst.name, errs.join(", "))))
        })
        .collect();
    let solved = results.iter().filter(|r| r.0).count();
    let bad: Vec<String> = results.into_iter().filter_map(|r| r.1).collect();
    let secs = start.elapsed().as_secs_f64();
    check(
        bad.is_empty() && secs < 900.0,
        format!("200 instances, {solved} solved exactly, {secs:.1}s {}", bad.join("; ")),
    )
}

fn fibonacci_values() -> Verdict {
    let seq = fib_sequence(2, 10).unwrap().values;
    let a = fibonacci_bound(8, 1, 4).unwrap();
    let b = fibonacci_bound(10, 1, 2).unwrap();
    check(
        seq == [1, 1, 2, 3, 5, 8, 13, 21, 34, 55] && a == 3 && b == 5,
        format!("f^2 = {seq:?}, fib(8,1,4) = {a}, fib(10,1,2) = {b}"),
    )
}

fn relaxation_behaviour() -> Verdict {
    let mut h = handle(None);
    let mut bad = Vec::new();
    for i in 0..20u64 {
        let inst = common::small_instance(i, 4..=9);
        let tau = common::reference_tau(&inst);
        let z: Vec<f64> = (tau..=tau + 2).map(|t| lp_zeta(&inst, t, &mut h).unwrap().objective.unwrap()).collect();
        if z.windows(2).any(|w| w[1] > w[0] + ZETA_TOL) {
            bad.push(format!("{}: zeta {z:?}", inst.name));
        }
        let ts = lp_tstar(&inst, &mut h, 1).unwrap();
        if ts.value > tau {
            bad.push(format!("{}: t* {} > tau {tau}", inst.name, ts.value));
        }
    }
    check(bad.is_empty(), format!("20 instances {}", bad.join("; ")))
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn steinlib_i160() -> Verdict {
    let Ok(dir) = std::env::var("MBT_STEINLIB_DIR") else {
        return Verdict::Skip("MBT_STEINLIB_DIR not set".into());
    };
    let start = Instant::now();
    let instances = match dataset_instances(std::path::Path::new(&dir), Some(160), Some(320)) {
        Ok(v) if !v.is_empty() => v,
        Ok(_) => return Verdict::Skip(format!("no 160-node, 320-edge instances in {dir}")),
        Err(e) => return Verdict::Skip(format!("{e:#}")),
    };
    let opts = BenchOptions {
        ks: vec![1],
        lp: true,
        opt: true,
        start_from: StartFrom::Lp,
        matcher: Matcher::Cardinality,
        time_limit: Duration::from_secs(300),
        solver: SolverKind::from_env(),
    };
    let rows: Vec<BenchRow> = match instances.par_iter().map(|bi| evaluate(bi, &opts)).collect() {
        Ok(r) => r,
        Err(e) => return Verdict::Skip(format!("solver unavailable: {e:#}")),
    };
    let col = |f: fn(&BenchRow) -> Option<f64>| mean(rows.iter().filter_map(f));
    let (fib, deg, lp, opt, ub1) = (col(|r| r.fib), col(|r| r.deg), col(|r| r.lp), col(|r| r.opt), col(|r| r.ub_1));
    let all_optimal = rows.iter().all(|r| r.opt_status == "optimal" || r.opt_status == "collapsed");
    check(
        rows.len() == 20 && all_optimal && [fib, deg, lp, opt].iter().all(|&v| v == 8.0) && (ub1 - 10.85).abs() <= UB1_I160_TOL,
        format!(
            "{} instances: fib {fib:.2} deg {deg:.2} lp {lp:.2} opt {opt:.2} ub_1 {ub1:.2} in {:.0}s",
            rows.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn random_table_plausibility() -> Verdict {
    let start = Instant::now();
    let pairs: Vec<(usize, usize)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let inst = generate_random(&GeneratorConfig::new(125, 0.016, 1, seed));
            let deg = degree_bound(1, &ordered_degree_sequence(&inst)).unwrap();
            let ub1 = construct(&inst, &LookaheadConfig::new(1), None).unwrap().schedule.len();
            (deg, ub1)
        })
        .collect();
    let deg = mean(pairs.iter().map(|p| p.0 as f64));
    let ub1 = mean(pairs.iter().map(|p| p.1 as f64));
    let secs = start.elapsed().as_secs_f64();
    check(
        (DEG_MEAN_RANGE.0..=DEG_MEAN_RANGE.1).contains(&deg)
            && (UB1_MEAN_RANGE.0..=UB1_MEAN_RANGE.1).contains(&ub1)
            && secs < 600.0,
        format!("mean deg {deg:.2} in {DEG_MEAN_RANGE:?}, mean ub_1 {ub1:.2} in {UB1_MEAN_RANGE:?}, {secs:.1}s"),
    )
}

fn bench_determinism() -> Verdict {
    let argv = ["mbt", "bench", "--n", "12,30", "--p", "0.05,0.2", "--count", "3", "--seed", "5", "--ks", "1,2", "--jobs", "3"];
    let Command::Bench(args) = Cli::try_parse_from(argv).unwrap().command else { unreachable!() };
    let run = || {
        let mut buf = Vec::new();
        cmd_bench(&args, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let h = r.headers().unwrap().clone();
        let idx: Vec<usize> = ["kind", "instance", "fib", "deg", "ub_1"]
            .iter()
            .map(|c| h.iter().position(|x| x == *c).unwrap())
            .collect();
        r.records()
            .map(|rec| {
                let rec = rec.unwrap();
                idx.iter().map(|&i| rec[i].to_string()).collect::<Vec<_>>().join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let (a, b) = (run(), run());
    check(a == b && !a.is_empty(), format!("{} rows compared", a.lines().count()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 closed-form broadcast times", closed_forms),
        ("2 exact, exhaustive and full-lookahead agree", oracle_equivalence),
        ("3 bound hierarchy", bound_hierarchy),
        ("4 Fibonacci bound values", fibonacci_values),
        ("5 relaxation monotonicity and t* <= tau", relaxation_behaviour),
        ("6 I160 with 320 edges", steinlib_i160),
        ("7 random n=125 p=0.016 plausibility", random_table_plausibility),
        ("8 bench determinism", bench_determinism),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr().lock();
    for (name, f) in criteria {
        let line = match f() {
            Verdict::Pass(d) => format!("PASS  {name}: {d}"),
            Verdict::Skip(d) => format!("SKIP  {name}: {d}"),
            Verdict::Fail(d) => {
                failed.push(name);
                format!("FAIL  {name}: {d}")
            }
        };
        writeln!(err, "{}", line.trim_end()).unwrap();
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
