//! Bipartite matchings between informed and uninformed nodes.
//!
//! Both engines are deterministic: left nodes are scanned in ascending id,
//! adjacency lists are sorted ascending, and equal weights are ordered by id.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("node {0} is on both sides")]
    SidesOverlap(NodeId),
    #[error("edge ({0}, {1}) does not join a left node to a right node")]
    EdgeOutsideSides(NodeId, NodeId),
    #[error("right node {0} has no weight")]
    MissingWeight(NodeId),
    #[error("right node {0} has weight 0; weights must be positive")]
    ZeroWeight(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    left: Vec<NodeId>,
    right: Vec<NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    // adjacency by left index, holding right indices ascending
    adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(
        left: impl IntoIterator<Item = NodeId>,
        right: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, MatchingError> {
        let mut left: Vec<NodeId> = left.into_iter().collect();
        let mut right: Vec<NodeId> = right.into_iter().collect();
        left.sort_unstable();
        left.dedup();
        right.sort_unstable();
        right.dedup();
        if let Some(&v) = left.iter().find(|v| right.binary_search(v).is_ok()) {
            return Err(MatchingError::SidesOverlap(v));
        }
        let mut edges: Vec<(NodeId, NodeId)> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        let mut adj = vec![Vec::new(); left.len()];
        for &(l, r) in &edges {
            match (left.binary_search(&l), right.binary_search(&r)) {
                (Ok(li), Ok(ri)) => adj[li].push(ri),
                _ => return Err(MatchingError::EdgeOutsideSides(l, r)),
            }
        }
        Ok(Self { left, right, edges, adj })
    }

    pub fn left(&self) -> &[NodeId] {
        &self.left
    }

    pub fn right(&self) -> &[NodeId] {
        &self.right
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn has_edge(&self, l: NodeId, r: NodeId) -> bool {
        self.edges.binary_search(&(l, r)).is_ok()
    }

    fn matching_from(&self, mate_of_left: &[Option<usize>]) -> Matching {
        let pairs = mate_of_left
            .iter()
            .enumerate()
            .filter_map(|(li, m)| m.map(|ri| (self.left[li], self.right[ri])))
            .collect();
        Matching { pairs }
    }
}

/// A set of disjoint `(left, right)` pairs, sorted by left node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(NodeId, NodeId)>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn weight(&self, weights: &BTreeMap<NodeId, u64>) -> u64 {
        self.pairs.iter().map(|(_, r)| weights.get(r).copied().unwrap_or(0)).sum()
    }

    /// Whether the pairs are disjoint edges of `bg`.
    pub fn is_valid_for(&self, bg: &BipartiteGraph) -> bool {
        let mut ls: Vec<_> = self.pairs.iter().map(|p| p.0).collect();
        let mut rs: Vec<_> = self.pairs.iter().map(|p| p.1).collect();
        ls.sort_unstable();
        rs.sort_unstable();
        let disjoint = ls.windows(2).all(|w| w[0] != w[1]) && rs.windows(2).all(|w| w[0] != w[1]);
        disjoint && self.pairs.iter().all(|&(l, r)| bg.has_edge(l, r))
    }

    /// Whether an augmenting path exists with respect to this matching.
    pub fn has_augmenting_path(&self, bg: &BipartiteGraph) -> bool {
        let nl = bg.left.len();
        let mut mate_l = vec![None; nl];
        let mut mate_r = vec![None; bg.right.len()];
        for &(l, r) in &self.pairs {
            let li = bg.left.binary_search(&l).expect("matched node on left side");
            let ri = bg.right.binary_search(&r).expect("matched node on right side");
            mate_l[li] = Some(ri);
            mate_r[ri] = Some(li);
        }
        let mut seen = vec![false; nl];
        let mut queue: VecDeque<usize> = (0..nl).filter(|&li| mate_l[li].is_none()).collect();
        for &li in &queue {
            seen[li] = true;
        }
        while let Some(li) = queue.pop_front() {
            for &ri in &bg.adj[li] {
                match mate_r[ri] {
                    None => return true,
                    Some(next) if !seen[next] => {
                        seen[next] = true;
                        queue.push_back(next);
                    }
                    Some(_) => {}
                }
            }
        }
        false
    }
}

/// Maximum cardinality matching by Hopcroft–Karp.
pub fn max_cardinality_matching(bg: &BipartiteGraph) -> Matching {
    const INF: usize = usize::MAX;
    let nl = bg.left.len();
    let nr = bg.right.len();
    let mut mate_l: Vec<Option<usize>> = vec![None; nl];
    let mut mate_r: Vec<Option<usize>> = vec![None; nr];
    let mut dist = vec![INF; nl];

    loop {
        // layer the left side from free left nodes
        let mut queue = VecDeque::new();
        for li in 0..nl {
            if mate_l[li].is_none() {
                dist[li] = 0;
                queue.push_back(li);
            } else {
                dist[li] = INF;
            }
        }
        let mut free_dist = INF;
        while let Some(li) = queue.pop_front() {
            if dist[li] >= free_dist {
                continue;
            }
            for &ri in &bg.adj[li] {
                match mate_r[ri] {
                    None => free_dist = free_dist.min(dist[li] + 1),
                    Some(next) if dist[next] == INF => {
                        dist[next] = dist[li] + 1;
                        queue.push_back(next);
                    }
                    Some(_) => {}
                }
            }
        }
        if free_dist == INF {
            break;
        }

        let mut next_edge = vec![0usize; nl];
        for li in 0..nl {
            if mate_l[li].is_none() {
                augment_layered(
                    li,
                    free_dist,
                    bg,
                    &mut dist,
                    &mut next_edge,
                    &mut mate_l,
                    &mut mate_r,
                );
            }
        }
    }
    bg.matching_from(&mate_l)
}

fn augment_layered(
    start: usize,
    free_dist: usize,
    bg: &BipartiteGraph,
    dist: &mut [usize],
    next_edge: &mut [usize],
    mate_l: &mut [Option<usize>],
    mate_r: &mut [Option<usize>],
) -> bool {
    // iterative DFS along the layering; path holds left indices
    let mut path = vec![start];
    while let Some(&li) = path.last() {
        let adj = &bg.adj[li];
        let mut advanced = false;
        while next_edge[li] < adj.len() {
            let ri = adj[next_edge[li]];
            match mate_r[ri] {
                None if dist[li] + 1 == free_dist => {
                    // flip the path: each left node takes the right node it was scanning
                    let mut r = ri;
                    for &pl in path.iter().rev() {
                        let prev = mate_l[pl];
                        mate_l[pl] = Some(r);
                        mate_r[r] = Some(pl);
                        match prev {
                            Some(p) => r = p,
                            None => break,
                        }
                    }
                    return true;
                }
                Some(next) if dist[next] == dist[li] + 1 => {
                    path.push(next);
                    advanced = true;
                    break;
                }
                _ => next_edge[li] += 1,
            }
        }
        if !advanced {
            dist[li] = usize::MAX;
            path.pop();
            if let Some(&parent) = path.last() {
                next_edge[parent] += 1;
            }
        }
    }
    false
}

/// Matching maximizing the total weight of matched right nodes.
///
/// Right nodes are inserted heaviest first (ties by ascending id), each by an
/// augmenting path that keeps every previously matched right node matched.
pub fn max_vertex_weight_matching(
    bg: &BipartiteGraph,
    weights: &BTreeMap<NodeId, u64>,
) -> Result<Matching, MatchingError> {
    let mut order = Vec::with_capacity(bg.right.len());
    for (ri, &r) in bg.right.iter().enumerate() {
        match weights.get(&r) {
            None => return Err(MatchingError::MissingWeight(r)),
            Some(0) => return Err(MatchingError::ZeroWeight(r)),
            Some(&w) => order.push((std::cmp::Reverse(w), r, ri)),
        }
    }
    order.sort_unstable();

    let nl = bg.left.len();
    let nr = bg.right.len();
    let mut radj = vec![Vec::new(); nr];
    for (li, row) in bg.adj.iter().enumerate() {
        for &ri in row {
            radj[ri].push(li);
        }
    }
    let mut mate_l: Vec<Option<usize>> = vec![None; nl];
    let mut mate_r: Vec<Option<usize>> = vec![None; nr];

    for &(_, _, root) in &order {
        // BFS over alternating paths from the new right node to a free left node
        let mut parent_r: Vec<Option<usize>> = vec![None; nl];
        let mut seen = vec![false; nl];
        let mut queue = VecDeque::from([root]);
        let mut end = None;
        'search: while let Some(ri) = queue.pop_front() {
            for &li in &radj[ri] {
                if seen[li] {
                    continue;
                }
                seen[li] = true;
                parent_r[li] = Some(ri);
                match mate_l[li] {
                    None => {
                        end = Some(li);
                        break 'search;
                    }
                    Some(next) => queue.push_back(next),
                }
            }
        }
        let Some(mut li) = end else { continue };
        loop {
            let ri = parent_r[li].expect("visited left node has a parent");
            let prev = mate_r[ri];
            mate_r[ri] = Some(li);
            mate_l[li] = Some(ri);
            match prev {
                Some(p) if ri != root => li = p,
                _ => break,
            }
        }
    }
    Ok(bg.matching_from(&mate_l))
}
