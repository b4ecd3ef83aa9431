//! Test-side reference: broadcast time by breadth-first search over informed
//! sets, enumerating every whispering round directly.

#![allow(dead_code)]

use std::collections::HashSet;

use mbt_core::graph::{generate_random, GeneratorConfig, Instance};

/// Every informed set reachable from `informed` in one round.
fn next_sets(adj: &[Vec<usize>], informed: u64) -> HashSet<u64> {
    let n = adj.len();
    let receivers: Vec<usize> = (0..n).filter(|&v| informed & (1 << v) == 0).collect();
    let mut out = HashSet::new();
    fn go(adj: &[Vec<usize>], receivers: &[usize], i: usize, informed: u64, used: u64, acc: u64, out: &mut HashSet<u64>) {
        if i == receivers.len() {
            out.insert(acc);
            return;
        }
        let v = receivers[i];
        go(adj, receivers, i + 1, informed, used, acc, out);
        for &u in &adj[v] {
            if informed & (1 << u) != 0 && used & (1 << u) == 0 {
                go(adj, receivers, i + 1, informed, used | (1 << u), acc | (1 << v), out);
            }
        }
    }
    go(adj, &receivers, 0, informed, 0, informed, &mut out);
    out
}

/// Minimum number of rounds; panics on graphs with more than 16 nodes.
pub fn reference_tau(inst: &Instance) -> usize {
    let n = inst.node_count();
    assert!(n <= 16, "reference search is exponential");
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in inst.graph.edges() {
        adj[u - 1].push(v - 1);
        adj[v - 1].push(u - 1);
    }
    let full = (1u64 << n) - 1;
    let start = inst.sources.iter().fold(0u64, |m, &s| m | 1 << (s - 1));
    let mut seen = HashSet::from([start]);
    let mut frontier = vec![start];
    let mut t = 0;
    while !seen.contains(&full) {
        let mut next = Vec::new();
        for &m in &frontier {
            for s in next_sets(&adj, m) {
                if seen.insert(s) {
                    next.push(s);
                }
            }
        }
        assert!(!next.is_empty(), "instance is not connected");
        frontier = next;
        t += 1;
    }
    t
}

/// Connected random instance; `i` selects size, density and source count.
pub fn small_instance(i: u64, n_range: std::ops::RangeInclusive<usize>) -> Instance {
    let (lo, hi) = (*n_range.start(), *n_range.end());
    let n = lo + (i as usize * 7 + 3) % (hi - lo + 1);
    let sigma = 1 + (i as usize % 2).min(n - 1);
    let p = [0.0, 0.1, 0.25, 0.5][(i % 4) as usize];
    generate_random(&GeneratorConfig::new(n, p, sigma, 1000 + i))
}
