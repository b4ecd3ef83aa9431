mod common;

use proptest::prelude::*;

use mbt_core::bounds::{degree_bound, fib_sequence, fibonacci_bound, trivial_bounds};
use mbt_core::exact::{solve_exact, ExactOptions};
use mbt_core::graph::{generate_random, ordered_degree_sequence, GeneratorConfig, Instance};
use mbt_core::heuristic::{construct, LookaheadConfig, Matcher};
use mbt_core::milp::{
    build_decision_model, build_decision_model_with, build_makespan_model, build_optimization_model, export_lp,
    lp_tstar, lp_zeta, parse_lp, SolverConfig, SolverHandle, SolverKind,
};
use mbt_core::schedule::{broadcast_forest, validate_schedule, BroadcastSchedule, Transmission};

fn arb_instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, 0.0f64..0.6, any::<u64>())
        .prop_flat_map(|(n, p, seed)| (Just(n), Just(p), 1..=n, Just(seed)))
        .prop_map(|(n, p, sigma, seed)| generate_random(&GeneratorConfig::new(n, p, sigma, seed)))
}

fn handle() -> SolverHandle {
    SolverKind::Highs.handle(SolverConfig { threads: Some(1), ..SolverConfig::default() }).unwrap()
}

fn greedy(inst: &Instance) -> BroadcastSchedule {
    construct(inst, &LookaheadConfig::new(1), None).unwrap().schedule
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjacency_is_symmetric_and_degrees_sum(inst in arb_instance(40)) {
        let g = &inst.graph;
        let mut sum = 0;
        for v in g.nodes() {
            prop_assert!(!g.neighbors(v).contains(&v));
            for &u in g.neighbors(v) {
                prop_assert!(g.neighbors(u).contains(&v));
            }
            prop_assert_eq!(g.degree(v), g.neighbors(v).len());
            sum += g.degree(v);
        }
        prop_assert_eq!(sum, 2 * g.edge_count());
    }

    #[test]
    fn matching_schedules_double_at_most(inst in arb_instance(40), vw in any::<bool>()) {
        let matcher = if vw { Matcher::VertexWeight } else { Matcher::Cardinality };
        let c = construct(&inst, &LookaheadConfig { matcher, ..LookaheadConfig::new(1) }, None).unwrap();
        prop_assert!(c.schedule.len() <= inst.uninformed_count());
        let mut informed = inst.source_count();
        for r in &c.schedule.rounds {
            prop_assert!(!r.is_empty());
            prop_assert!(informed + r.len() <= 2 * informed);
            informed += r.len();
        }
        prop_assert_eq!(informed, inst.node_count());
        let forest = broadcast_forest(&inst, &c.schedule).unwrap();
        for v in inst.graph.nodes() {
            prop_assert_eq!(forest.in_degree(v) == 0, inst.is_source(v));
            prop_assert!(inst.is_source(forest.root(v)));
        }
    }

    #[test]
    fn verdict_ignores_order_within_rounds(
        inst in arb_instance(20),
        shift in any::<usize>(),
        extra in (1usize..=20, 1usize..=20, 0usize..20),
    ) {
        let mut s = greedy(&inst);
        // sometimes break it so both verdicts are exercised
        let (u, v, at) = extra;
        if !s.is_empty() && u <= inst.node_count() && v <= inst.node_count() {
            let k = at % s.len();
            s.rounds[k].push(Transmission::new(u, v));
        }
        let before = validate_schedule(&inst, &s).map_err(|e| e.len());
        let mut permuted = s.clone();
        for r in &mut permuted.rounds {
            if !r.is_empty() {
                let len = r.len();
                r.rotate_left(shift % len);
                r.reverse();
            }
        }
        prop_assert_eq!(before, validate_schedule(&inst, &permuted).map_err(|e| e.len()));
    }

    #[test]
    fn bound_hierarchy(inst in arb_instance(60)) {
        let (n, sigma) = (inst.node_count(), inst.source_count());
        let (log, ub) = trivial_bounds(n, sigma).unwrap();
        let fib = fibonacci_bound(n, sigma, inst.graph.max_degree()).unwrap();
        let deg = degree_bound(sigma, &ordered_degree_sequence(&inst)).unwrap();
        let greedy_len = greedy(&inst).len();
        prop_assert!(log <= fib && fib <= deg && deg <= greedy_len && greedy_len <= ub,
            "{} {} {} {} {}", log, fib, deg, greedy_len, ub);
    }

    #[test]
    fn degree_bound_ignores_source_order(inst in arb_instance(30), rot in any::<usize>()) {
        let mut sources = inst.sources.clone();
        let len = sources.len();
        sources.rotate_left(rot % len);
        let other = Instance::new(inst.graph.clone(), sources, "rotated");
        let a = degree_bound(inst.source_count(), &ordered_degree_sequence(&inst)).unwrap();
        let b = degree_bound(other.source_count(), &ordered_degree_sequence(&other)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn many_steps_give_the_doubling_bound(n in 2usize..5000, sigma_frac in 0.0f64..1.0) {
        let sigma = 1 + ((n - 1) as f64 * sigma_frac) as usize;
        prop_assume!(sigma < n);
        let log = trivial_bounds(n, sigma).unwrap().0;
        prop_assert_eq!(fibonacci_bound(n, sigma, log + 2).unwrap(), log);
    }

    #[test]
    fn fib_terms_follow_the_recurrence(m in 1usize..6, t in 1usize..40) {
        let f = fib_sequence(m, t).unwrap().values;
        let at = |k: isize| if k <= 0 { 0 } else { f[k as usize - 1] };
        prop_assert_eq!(f[0], 1);
        for k in 2..=t as isize {
            let s: u64 = (1..=m as isize).map(|j| at(k - j)).sum();
            prop_assert_eq!(at(k), s);
        }
    }

    #[test]
    fn model_shapes_and_lp_round_trip(inst in arb_instance(12), t in 1usize..5, relaxed in any::<bool>()) {
        let arcs = 2 * inst.graph.edge_count();
        let models = [
            (build_optimization_model(&inst, t).unwrap(), arcs * t + t),
            (build_decision_model(&inst, t).unwrap(), arcs * t),
            (build_decision_model_with(&inst, t, false).unwrap(), arcs * t),
            (build_makespan_model(&inst, t).unwrap(), arcs * t + 1),
        ];
        for (m, vars) in models {
            let m = if relaxed { m.relaxed() } else { m };
            prop_assert_eq!(m.variables.len(), vars);
            let tags = ["1b", "1c", "1d", "1e", "1f", "1g", "2b", "cap", "R2"];
            prop_assert!(m.constraints.iter().all(|c| tags.contains(&c.tag.to_string().as_str())));
            let summary = parse_lp(&export_lp(&m)).unwrap();
            prop_assert_eq!(summary.variables.len(), m.variables.len());
            prop_assert_eq!(summary.rows.len(), m.constraints.len());
            let ints = m.variables.iter().filter(|v| v.integer).count();
            prop_assert_eq!(summary.binaries + summary.generals, ints);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn relaxations_are_monotone_and_below_the_optimum(i in 0u64..500) {
        let inst = common::small_instance(i, 3..=8);
        let tau = common::reference_tau(&inst);
        let mut h = handle();
        let mut prev = f64::NEG_INFINITY;
        for t in 1..=tau + 2 {
            let m = build_decision_model(&inst, t).unwrap().relaxed();
            let v = h.solve(&m).unwrap().objective.unwrap();
            prop_assert!(v >= prev - 1e-6);
            prev = v;
        }
        let ts = lp_tstar(&inst, &mut h, 1).unwrap();
        let zeta = lp_zeta(&inst, tau, &mut h).unwrap();
        prop_assert!(zeta.integer_bound().unwrap() <= ts.value);
        prop_assert!(ts.value <= tau);
    }

    #[test]
    fn exact_trace_is_reproducible(i in 0u64..500) {
        let inst = common::small_instance(i, 3..=8);
        let a = solve_exact(&inst, &mut handle(), &ExactOptions::default());
        let b = solve_exact(&inst, &mut handle(), &ExactOptions::default());
        let ts = |o: &mbt_core::exact::SolveOutcome| o.iterations.iter().map(|x| x.0).collect::<Vec<_>>();
        prop_assert_eq!(ts(&a), ts(&b));
        prop_assert_eq!(a.tau, b.tau);
    }
}
