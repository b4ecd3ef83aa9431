pub mod bounds;
pub mod exact;
pub mod graph;
pub mod heuristic;
pub mod matching;
pub mod milp;
pub mod schedule;
