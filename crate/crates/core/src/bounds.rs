//! Lower bounds that need no LP: the doubling bound, the m-step Fibonacci
//! bound on the maximum degree, and the degree-sequence bound obtained by
//! greedily solving the node-degree relaxation. Also the bound report used to
//! collect every bound computed for one instance.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::graph::{ordered_degree_sequence, Instance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("need 1 <= sigma <= n, got sigma = {sigma}, n = {n}")]
    BadSourceCount { n: usize, sigma: usize },
    #[error("step count m must be at least 1")]
    ZeroSteps,
    #[error("{m}-step Fibonacci term {k} overflows u64")]
    Overflow { m: usize, k: usize },
    #[error("degree relaxation stalls with {informed} of {n} nodes informed")]
    Stalled { informed: usize, n: usize },
}

fn check_counts(n: usize, sigma: usize) -> Result<(), BoundsError> {
    if sigma == 0 || sigma > n {
        Err(BoundsError::BadSourceCount { n, sigma })
    } else {
        Ok(())
    }
}

/// `(⌈log2(n/σ)⌉, n − σ)`, the first computed as the least `t` with
/// `σ·2^t ≥ n`.
pub fn trivial_bounds(n: usize, sigma: usize) -> Result<(usize, usize), BoundsError> {
    check_counts(n, sigma)?;
    let mut t = 0;
    let mut reach = sigma as u128;
    while reach < n as u128 {
        reach *= 2;
        t += 1;
    }
    Ok((t, n - sigma))
}

/// The first terms `f_1..f_t` of the m-step Fibonacci numbers:
/// `f_k = 0` for `k <= 0`, `f_1 = 1`, and `f_k = f_{k-1} + … + f_{k-m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibSequence {
    pub m: usize,
    pub values: Vec<u64>,
}

/// Lazily produces m-step Fibonacci numbers with a running window sum.
struct FibIter {
    m: usize,
    history: Vec<u64>,
    // sum of the last m terms, i.e. the next term for k >= 2
    window: u128,
    k: usize,
}

impl FibIter {
    fn new(m: usize) -> Self {
        Self {
            m,
            history: Vec::new(),
            window: 0,
            k: 0,
        }
    }

    fn next_term(&mut self) -> Result<u64, BoundsError> {
        self.k += 1;
        let term = if self.k == 1 { 1 } else { self.window };
        let term = u64::try_from(term).map_err(|_| BoundsError::Overflow {
            m: self.m,
            k: self.k,
        })?;
        self.window += term as u128;
        self.history.push(term);
        if self.history.len() > self.m {
            self.window -= self.history[self.history.len() - 1 - self.m] as u128;
        }
        Ok(term)
    }
}

pub fn fib_sequence(m: usize, t: usize) -> Result<FibSequence, BoundsError> {
    if m == 0 {
        return Err(BoundsError::ZeroSteps);
    }
    let mut it = FibIter::new(m);
    let values = (0..t).map(|_| it.next_term()).collect::<Result<Vec<_>, _>>()?;
    Ok(FibSequence { m, values })
}

/// Least `t` with `2σ·(f_1 + … + f_t) ≥ n` for the `max(d − 1, 1)`-step
/// Fibonacci numbers; 0 when every node is a source.
pub fn fibonacci_bound(n: usize, sigma: usize, max_degree: usize) -> Result<usize, BoundsError> {
    check_counts(n, sigma)?;
    if n == sigma {
        return Ok(0);
    }
    let m = max_degree.saturating_sub(1).max(1);
    let mut it = FibIter::new(m);
    let (n, twice_sigma) = (n as u128, 2 * sigma as u128);
    let mut partial: u128 = 0;
    let mut t = 0;
    loop {
        t += 1;
        partial += it.next_term()? as u128;
        if twice_sigma * partial >= n {
            return Ok(t);
        }
    }
}

/// Rounds needed by the node-degree relaxation when the nodes are informed in
/// the order of `degrees` (sources first, then non-sources by non-increasing
/// degree). Node `i` may inform at most `d_i` others if it is a source and
/// `d_i − 1` otherwise; every capable informed node informs one new node per
/// round.
pub fn degree_bound(sigma: usize, degrees: &[usize]) -> Result<usize, BoundsError> {
    let n = degrees.len();
    check_counts(n, sigma)?;
    if n == sigma {
        return Ok(0);
    }
    let capacity: Vec<usize> = degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| if i < sigma { d } else { d.saturating_sub(1) })
        .collect();
    let mut sent = vec![0usize; n];
    let mut informed = sigma;
    let mut t = 0;
    loop {
        t += 1;
        let mut active = 0;
        for i in 0..informed {
            if sent[i] < capacity[i] {
                sent[i] += 1;
                active += 1;
            }
        }
        if active == 0 {
            return Err(BoundsError::Stalled { informed, n });
        }
        informed += active;
        if informed >= n {
            return Ok(t);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundName {
    Log,
    Fib,
    Deg,
    LpTstar,
    LpZeta,
    /// Heuristic upper bound with lookahead `k`.
    Ub(usize),
    Opt,
}

impl BoundName {
    pub fn is_upper(self) -> bool {
        matches!(self, BoundName::Ub(_))
    }

    /// Lower bounds on τ; `Opt` counts as both a lower and an upper bound when exact.
    pub fn is_lower(self) -> bool {
        !self.is_upper()
    }
}

impl fmt::Display for BoundName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundName::Log => write!(f, "log"),
            BoundName::Fib => write!(f, "fib"),
            BoundName::Deg => write!(f, "deg"),
            BoundName::LpTstar => write!(f, "lp_tstar"),
            BoundName::LpZeta => write!(f, "lp_zeta"),
            BoundName::Ub(k) => write!(f, "ub_{k}"),
            BoundName::Opt => write!(f, "opt"),
        }
    }
}

/// Max of the log, Fibonacci and degree bounds with the winning name.
/// Ties go to the later bound in the order log, fib, deg.
pub fn best_combinatorial_lower(inst: &Instance) -> Result<(usize, BoundName), BoundsError> {
    let n = inst.node_count();
    let sigma = inst.source_count();
    let candidates = [
        (trivial_bounds(n, sigma)?.0, BoundName::Log),
        (fibonacci_bound(n, sigma, inst.graph.max_degree())?, BoundName::Fib),
        (degree_bound(sigma, &ordered_degree_sequence(inst))?, BoundName::Deg),
    ];
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if c.0 >= best.0 {
            best = *c;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundValue {
    Int(usize),
    Real(f64),
}

impl BoundValue {
    pub fn as_f64(self) -> f64 {
        match self {
            BoundValue::Int(v) => v as f64,
            BoundValue::Real(v) => v,
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Int(v) => write!(f, "{v}"),
            BoundValue::Real(v) => write!(f, "{v:.6}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    Exact,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEntry {
    pub value: BoundValue,
    pub elapsed: Duration,
    pub status: BoundStatus,
}

/// All bounds computed for one instance, keyed by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundReport {
    pub entries: BTreeMap<BoundName, BoundEntry>,
}

impl BoundReport {
    pub fn insert(&mut self, name: BoundName, value: BoundValue, elapsed: Duration, status: BoundStatus) {
        self.entries.insert(
            name,
            BoundEntry {
                value,
                elapsed,
                status,
            },
        );
    }

    pub fn get(&self, name: BoundName) -> Option<&BoundEntry> {
        self.entries.get(&name)
    }

    /// Every lower bound is at most every upper bound. An exact `opt` is also
    /// checked as an upper bound.
    pub fn is_consistent(&self) -> bool {
        let lowers = self.entries.iter().filter(|(k, _)| k.is_lower());
        let mut uppers: Vec<f64> = self
            .entries
            .iter()
            .filter(|(k, _)| k.is_upper())
            .map(|(_, e)| e.value.as_f64())
            .collect();
        if let Some(opt) = self.get(BoundName::Opt) {
            if opt.status == BoundStatus::Exact {
                uppers.push(opt.value.as_f64());
            }
        }
        lowers
            .map(|(_, e)| e.value.as_f64())
            .all(|lo| uppers.iter().all(|&up| lo <= up + 1e-6))
    }
}
