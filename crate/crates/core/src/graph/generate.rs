//! Seeded random instances: a uniform labeled spanning tree plus independent
//! extra edges.
//!
//! The random stream is fixed so that a configuration always yields the same
//! instance:
//!
//! * generator: xoshiro256** seeded through SplitMix64 from the 64-bit seed
//!   (`rand_xoshiro::Xoshiro256StarStar::seed_from_u64`);
//! * integer in `0..m`: draw `next_u64()`, reject values `>= m * floor(2^64 / m)`,
//!   return the value modulo `m`;
//! * probability draw: `(next_u64() >> 11) * 2^-53 < p`.
//!
//! The tree is decoded from a Prüfer sequence of `n - 2` such integers. Every
//! non-tree pair `u < v` then consumes exactly one probability draw, visited in
//! ascending lexicographic order.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use super::{Graph, Instance, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub n: usize,
    pub p: f64,
    pub sigma: usize,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(n: usize, p: f64, sigma: usize, seed: u64) -> Self {
        Self { n, p, sigma, seed }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.n == 0 {
            return Err("n must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(format!("edge probability {} outside [0, 1]", self.p));
        }
        if self.sigma == 0 || self.sigma > self.n {
            return Err(format!("sigma {} outside 1..={}", self.sigma, self.n));
        }
        Ok(())
    }

    pub fn instance_name(&self) -> String {
        format!("rand_n{}_p{}_s{}_seed{}", self.n, self.p, self.sigma, self.seed)
    }
}

fn uniform_below(rng: &mut Xoshiro256StarStar, m: u64) -> u64 {
    let zone = (u64::MAX / m) * m;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % m;
        }
    }
}

fn unit_interval(rng: &mut Xoshiro256StarStar) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Edges of the labeled tree on `1..=n` encoded by a Prüfer sequence.
pub(crate) fn prufer_decode(n: usize, seq: &[NodeId]) -> Vec<(NodeId, NodeId)> {
    debug_assert_eq!(seq.len() + 2, n.max(2));
    if n < 2 {
        return Vec::new();
    }
    let mut degree = vec![1usize; n + 1];
    for &v in seq {
        degree[v] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<NodeId>> =
        (1..=n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &v in seq {
        let Reverse(leaf) = leaves.pop().expect("a leaf always exists");
        edges.push((leaf.min(v), leaf.max(v)));
        degree[v] -= 1;
        if degree[v] == 1 {
            leaves.push(Reverse(v));
        }
    }
    let Reverse(a) = leaves.pop().expect("two leaves remain");
    let Reverse(b) = leaves.pop().expect("two leaves remain");
    edges.push((a.min(b), a.max(b)));
    edges
}

/// Random connected instance with sources `1..=sigma`.
///
/// Panics if the configuration fails [`GeneratorConfig::check`].
pub fn generate_random(cfg: &GeneratorConfig) -> Instance {
    if let Err(e) = cfg.check() {
        panic!("invalid generator configuration: {e}");
    }
    let n = cfg.n;
    let mut rng = Xoshiro256StarStar::seed_from_u64(cfg.seed);
    let seq: Vec<NodeId> = (0..n.saturating_sub(2))
        .map(|_| uniform_below(&mut rng, n as u64) as NodeId + 1)
        .collect();
    let tree = prufer_decode(n, &seq);

    let mut in_tree = vec![Vec::<NodeId>::new(); n + 1];
    for &(u, v) in &tree {
        in_tree[u].push(v);
    }
    for row in &mut in_tree {
        row.sort_unstable();
    }
    let mut edges = tree;
    for u in 1..=n {
        for v in u + 1..=n {
            if in_tree[u].binary_search(&v).is_ok() {
                continue;
            }
            if unit_interval(&mut rng) < cfg.p {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::from_edges(n, edges).expect("generated edges are simple");
    Instance::new(graph, (1..=cfg.sigma).collect(), cfg.instance_name())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate_instance;
    use proptest::prelude::*;

    #[test]
    fn prufer_known_tree() {
        // sequence [4, 4, 4, 5] on 6 nodes: leaves 1, 2, 3 hang off 4, then 4-5, 5-6
        let edges = prufer_decode(6, &[4, 4, 4, 5]);
        let mut sorted = edges.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![(1, 4), (2, 4), (3, 4), (4, 5), (5, 6)]);
    }

    #[test]
    fn prufer_is_a_bijection_for_small_n() {
        // Cayley: n^(n-2) distinct trees for n = 5
        let n: usize = 5;
        let mut trees = std::collections::BTreeSet::new();
        for code in 0..n.pow(3) {
            let seq = [code % n + 1, code / n % n + 1, code / (n * n) + 1];
            let mut e = prufer_decode(n, &seq);
            e.sort_unstable();
            let g = Graph::from_edges(n, e.iter().copied()).unwrap();
            assert!(g.is_connected());
            trees.insert(e);
        }
        assert_eq!(trees.len(), 125);
    }

    #[test]
    fn single_node() {
        let inst = generate_random(&GeneratorConfig::new(1, 0.0, 1, 99));
        assert_eq!(inst.node_count(), 1);
        assert_eq!(inst.graph.edge_count(), 0);
        assert_eq!(inst.sources, vec![1]);
    }

    #[test]
    fn p_zero_gives_a_tree_and_p_one_a_clique() {
        for seed in 0..10 {
            let tree = generate_random(&GeneratorConfig::new(5, 0.0, 1, seed));
            assert_eq!(tree.graph.edge_count(), 4);
            assert!(tree.graph.is_connected());
            let full = generate_random(&GeneratorConfig::new(5, 1.0, 1, seed));
            assert_eq!(full.graph.edge_count(), 10);
        }
    }

    #[test]
    fn config_check() {
        assert!(GeneratorConfig::new(0, 0.1, 1, 0).check().is_err());
        assert!(GeneratorConfig::new(3, 1.5, 1, 0).check().is_err());
        assert!(GeneratorConfig::new(3, 0.5, 4, 0).check().is_err());
        assert!(GeneratorConfig::new(3, 0.5, 0, 0).check().is_err());
        assert!(GeneratorConfig::new(3, 0.5, 3, 0).check().is_ok());
    }

    proptest! {
        #[test]
        fn generated_instances_are_valid_and_reproducible(
            n in 1usize..40, p in 0.0f64..=1.0, sigma_frac in 0.0f64..1.0, seed: u64
        ) {
            let sigma = 1 + ((n - 1) as f64 * sigma_frac) as usize;
            let cfg = GeneratorConfig::new(n, p, sigma, seed);
            let a = generate_random(&cfg);
            let b = generate_random(&cfg);
            prop_assert_eq!(&a, &b);
            prop_assert!(validate_instance(&a).is_ok());
            prop_assert_eq!(a.sources.clone(), (1..=sigma).collect::<Vec<_>>());
            let degree_sum: usize = a.graph.nodes().map(|v| a.graph.degree(v)).sum();
            prop_assert_eq!(degree_sum, 2 * a.graph.edge_count());
        }
    }
}
