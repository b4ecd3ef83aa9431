//! Broadcast schedules under the whispering model: validation, the induced
//! broadcast forest, and a line-oriented text format.
//!
//! Text format: line `k` holds the transmissions of round `k` as `u>v`
//! tokens separated by spaces. A round without transmissions is written as
//! `-`. Text after `#` is a comment; blank and comment-only lines are skipped.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{Instance, NodeId};

/// One whisper: `from` tells `to` in some round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transmission {
    pub from: NodeId,
    pub to: NodeId,
}

impl Transmission {
    pub fn new(from: NodeId, to: NodeId) -> Self {
        Self { from, to }
    }
}

impl fmt::Display for Transmission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>{}", self.from, self.to)
    }
}

/// Rounds of transmissions; round `k` (1-based) is `rounds[k - 1]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BroadcastSchedule {
    pub rounds: Vec<Vec<Transmission>>,
}

impl BroadcastSchedule {
    pub fn new(rounds: Vec<Vec<Transmission>>) -> Self {
        Self { rounds }
    }

    pub fn from_pairs(rounds: &[&[(NodeId, NodeId)]]) -> Self {
        Self::new(
            rounds
                .iter()
                .map(|r| r.iter().map(|&(u, v)| Transmission::new(u, v)).collect())
                .collect(),
        )
    }

    /// Number of rounds, idle rounds included.
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn push_round(&mut self, mut round: Vec<Transmission>) {
        round.sort_unstable();
        self.rounds.push(round);
    }

    pub fn transmissions(&self) -> impl Iterator<Item = (usize, Transmission)> + '_ {
        self.rounds
            .iter()
            .enumerate()
            .flat_map(|(k, r)| r.iter().map(move |&t| (k + 1, t)))
    }

    pub fn trim_trailing_idle(&mut self) {
        while self.rounds.last().is_some_and(Vec::is_empty) {
            self.rounds.pop();
        }
    }
}

pub fn schedule_length(sched: &BroadcastSchedule) -> usize {
    sched.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    /// Sender and receiver are not adjacent.
    NotNeighbor,
    /// Sender was not informed before the round.
    SenderUninformed,
    /// Sender whispers more than once in a round.
    SenderBusy,
    /// Receiver is informed more than once.
    ReceiverRepeated,
    /// Some node is never informed.
    Uncovered,
    /// A source appears as a receiver.
    SourceReceives,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ScheduleViolation {
    pub kind: ViolationKind,
    /// 1-based round; for `Uncovered` the schedule length.
    pub round: usize,
    pub nodes: Vec<NodeId>,
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} in round {} at {:?}", self.kind, self.round, self.nodes)
    }
}

/// Checks a schedule against the whispering rules and full coverage.
///
/// Every failure is reported, sorted by kind, round and nodes.
pub fn validate_schedule(
    inst: &Instance,
    sched: &BroadcastSchedule,
) -> Result<(), Vec<ScheduleViolation>> {
    use ViolationKind::*;
    let g = &inst.graph;
    let n = g.node_count();
    let mut informed: Vec<bool> = inst.source_mask().to_vec();
    let mut violations = Vec::new();
    let mut push = |kind, round, nodes: Vec<NodeId>| {
        violations.push(ScheduleViolation { kind, round, nodes })
    };

    for (idx, round) in sched.rounds.iter().enumerate() {
        let k = idx + 1;
        let mut sends = vec![0usize; n + 1];
        let mut receives = vec![0usize; n + 1];
        for t in round {
            let (u, v) = (t.from, t.to);
            if !g.has_edge(u, v) {
                push(NotNeighbor, k, vec![u, v]);
            }
            if g.contains_node(u) {
                if !informed[u - 1] {
                    push(SenderUninformed, k, vec![u]);
                }
                sends[u] += 1;
            }
            if g.contains_node(v) {
                if inst.is_source(v) {
                    push(SourceReceives, k, vec![v]);
                } else if informed[v - 1] {
                    push(ReceiverRepeated, k, vec![v]);
                }
                receives[v] += 1;
            }
        }
        for v in 1..=n {
            if sends[v] > 1 {
                push(SenderBusy, k, vec![v]);
            }
            if receives[v] > 1 && !inst.is_source(v) {
                push(ReceiverRepeated, k, vec![v]);
            }
        }
        for t in round {
            if g.contains_node(t.to) {
                informed[t.to - 1] = true;
            }
        }
    }
    let uncovered: Vec<NodeId> = (1..=n).filter(|&v| !informed[v - 1]).collect();
    if !uncovered.is_empty() {
        push(Uncovered, sched.len(), uncovered);
    }
    if violations.is_empty() {
        Ok(())
    } else {
        violations.sort();
        violations.dedup();
        Err(violations)
    }
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("invalid schedule: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ScheduleViolation>),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Parent arcs `(π(v), v)` of a valid schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BroadcastForest {
    parent: Vec<Option<NodeId>>,
}

impl BroadcastForest {
    /// Arcs in ascending `(parent, child)` order.
    pub fn arcs(&self) -> Vec<(NodeId, NodeId)> {
        let mut arcs: Vec<_> = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (p, i + 1)))
            .collect();
        arcs.sort_unstable();
        arcs
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v - 1]
    }

    /// Source at the root of the communication tree containing `v`.
    pub fn root(&self, mut v: NodeId) -> NodeId {
        while let Some(p) = self.parent(v) {
            v = p;
        }
        v
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        usize::from(self.parent(v).is_some())
    }
}

pub fn broadcast_forest(
    inst: &Instance,
    sched: &BroadcastSchedule,
) -> Result<BroadcastForest, ScheduleError> {
    validate_schedule(inst, sched).map_err(ScheduleError::Invalid)?;
    let mut parent = vec![None; inst.node_count()];
    for (_, t) in sched.transmissions() {
        parent[t.to - 1] = Some(t.from);
    }
    Ok(BroadcastForest { parent })
}

impl fmt::Display for BroadcastSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for round in &self.rounds {
            if round.is_empty() {
                writeln!(f, "-")?;
            } else {
                let toks: Vec<String> = round.iter().map(Transmission::to_string).collect();
                writeln!(f, "{}", toks.join(" "))?;
            }
        }
        Ok(())
    }
}

impl FromStr for BroadcastSchedule {
    type Err = ScheduleError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut rounds = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let mut round = Vec::new();
            for tok in line.split_whitespace() {
                if tok == "-" {
                    continue;
                }
                let parsed = tok
                    .split_once('>')
                    .and_then(|(u, v)| Some(Transmission::new(u.parse().ok()?, v.parse().ok()?)));
                match parsed {
                    Some(t) => round.push(t),
                    None => {
                        return Err(ScheduleError::Parse {
                            line: i + 1,
                            msg: format!("expected `u>v`, found `{tok}`"),
                        })
                    }
                }
            }
            rounds.push(round);
        }
        Ok(Self { rounds })
    }
}
