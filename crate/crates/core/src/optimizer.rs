//! Best-first bisection optimizer.
//!
//! The root cell of the wrapped domain is evaluated at its center. Every
//! evaluated cell is bisected along its longest side and both halves are
//! queued with the score `f(center) − L·‖edge‖`, a lower bound of the
//! objective over the parent cell and hence over either half. The queued
//! candidate with the lowest score is evaluated next.
//!
//! Queue order is `(score ↑, ‖edge‖ ↓, seq ↑)`: on exact score ties the
//! shallower cell wins, then the older one. For a constant objective this
//! visits the split tree in level order.
//!
//! ```
//! use lipsplit::objectives::Benchmark;
//! use lipsplit::optimizer::{run, Budget, Settings};
//!
//! let f = Benchmark::cone(1, 1.0, &[0.3]).unwrap();
//! let trace = run(&f, Settings::new(1.0), Budget::horizon(3)).unwrap();
//! let xs: Vec<f64> = trace.records.iter().map(|r| r.x_omega.coords()[0]).collect();
//! assert_eq!(xs, [0.5, 0.25, 0.75]);
//! ```

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{project, wrap_domain, HyperRect, Point};
use crate::objectives::Objective;

/// Which algorithm produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[serde(rename = "lipsplit")]
    LipSplit,
    Grid,
    Random,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::LipSplit => "lipsplit",
            Algorithm::Grid => "grid",
            Algorithm::Random => "random",
        }
    }
}

/// One evaluated query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    /// 1-based query index.
    pub t: usize,
    pub x_theta: Point,
    pub x_omega: Point,
    pub value: f64,
    /// Norm of the half-width vector of the cell the query represents.
    pub edge_norm: Option<f64>,
    /// Score the candidate was popped with; `None` for the root query.
    pub score: Option<f64>,
}

/// Ordered queries of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm: Algorithm,
    pub dim: usize,
    /// Lipschitz constant the optimizer scored with (optimizer traces only).
    pub lipschitz: Option<f64>,
    pub records: Vec<QueryRecord>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.value)
    }
}

#[doc(hidden)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ScoreRule {
    /// `f_a − L‖v_a‖`, the parent's edge norm.
    #[default]
    ParentEdge,
    /// Deliberately unsound variant using the child's (smaller) edge norm.
    /// Exists so the audits can be shown to catch a broken bound.
    ChildEdge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub lipschitz: f64,
    /// Drop candidates whose score is not below the incumbent.
    pub prune: bool,
    #[doc(hidden)]
    pub score_rule: ScoreRule,
}

impl Settings {
    pub fn new(lipschitz: f64) -> Self {
        Settings {
            lipschitz,
            prune: false,
            score_rule: ScoreRule::ParentEdge,
        }
    }

    pub fn with_prune(mut self, prune: bool) -> Self {
        self.prune = prune;
        self
    }
}

/// Stopping rules for [`run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub horizon: usize,
    /// Stop early once `best − min score ≤ gap`.
    pub gap: Option<f64>,
}

impl Budget {
    pub fn horizon(horizon: usize) -> Self {
        Budget { horizon, gap: None }
    }
}

/// A pending query: a cell of the split tree and the lower bound of the
/// objective over it.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub cell: HyperRect,
    pub score: f64,
    pub depth: u32,
    pub seq: u64,
    edge_norm: f64,
}

impl Candidate {
    pub fn edge_norm(&self) -> f64 {
        self.edge_norm
    }

    /// Priority order: `Less` means `self` is asked first.
    pub fn priority_cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.edge_norm.total_cmp(&self.edge_norm))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

struct Queued(Candidate);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // BinaryHeap is a max-heap; invert so the first-to-ask is the greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.priority_cmp(&self.0)
    }
}

/// How a cell was derived from its parent: which axis was halved and which
/// half was kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Lineage {
    pub parent: u64,
    pub axis: u32,
    pub upper: bool,
}

const ROOT: u64 = u64::MAX;

pub struct OptimizerState {
    dim: usize,
    settings: Settings,
    queue: BinaryHeap<Queued>,
    trace: Vec<QueryRecord>,
    best_value: f64,
    best_point: Point,
    lineage: Vec<Lineage>,
    outstanding: Vec<u64>,
}

impl OptimizerState {
    /// The first query: the center of the wrapped domain, projected onto the
    /// unit cube.
    pub fn root_query(dim: usize) -> Result<Point> {
        Ok(project(&wrap_domain(dim)?.center))
    }

    /// Starts a run from the objective value at [`Self::root_query`]. This is
    /// the entry point for callers that evaluate externally via ask/tell.
    pub fn from_root_value(dim: usize, settings: Settings, value: f64) -> Result<Self> {
        let l = settings.lipschitz;
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidLipschitz(l));
        }
        if !value.is_finite() {
            return Err(Error::NonFiniteValue { t: 1, value });
        }
        let root = wrap_domain(dim)?;
        let edge_norm = root.edge.norm();
        let x_omega = project(&root.center);
        let mut state = OptimizerState {
            dim,
            settings,
            queue: BinaryHeap::new(),
            trace: Vec::new(),
            best_value: value,
            best_point: x_omega.clone(),
            lineage: vec![Lineage {
                parent: ROOT,
                axis: 0,
                upper: false,
            }],
            outstanding: Vec::new(),
        };
        state.trace.push(QueryRecord {
            t: 1,
            x_theta: root.center.clone(),
            x_omega,
            value,
            edge_norm: Some(edge_norm),
            score: None,
        });
        let root = Candidate {
            cell: root,
            score: f64::NEG_INFINITY,
            depth: 0,
            seq: 0,
            edge_norm,
        };
        state.spawn_children(&root, value);
        Ok(state)
    }

    /// Evaluates the root cell and queues its two halves.
    pub fn init(objective: &dyn Objective, settings: Settings) -> Result<Self> {
        let x = Self::root_query(objective.dim())?;
        Self::from_root_value(objective.dim(), settings, objective.eval(x.coords()))
    }

    /// Removes and returns the candidate with the lowest score.
    pub fn ask(&mut self) -> Result<Candidate> {
        let Queued(c) = self.queue.pop().ok_or(Error::Exhausted)?;
        self.outstanding.push(c.seq);
        Ok(c)
    }

    /// Records the objective value at `c`'s center and queues its halves.
    pub fn tell(&mut self, c: &Candidate, value: f64) -> Result<&QueryRecord> {
        let slot = self
            .outstanding
            .iter()
            .position(|&s| s == c.seq)
            .ok_or(Error::UnknownCandidate(c.seq))?;
        if !value.is_finite() {
            return Err(Error::NonFiniteValue {
                t: self.trace.len() + 1,
                value,
            });
        }
        self.outstanding.swap_remove(slot);

        let x_omega = project(&c.cell.center);
        if value < self.best_value {
            self.best_value = value;
            self.best_point = x_omega.clone();
            if self.settings.prune {
                let best = self.best_value;
                self.queue.retain(|q| q.0.score < best);
            }
        }
        self.trace.push(QueryRecord {
            t: self.trace.len() + 1,
            x_theta: c.cell.center.clone(),
            x_omega,
            value,
            edge_norm: Some(c.edge_norm),
            score: Some(c.score),
        });
        self.spawn_children(c, value);
        Ok(self.trace.last().expect("just pushed"))
    }

    /// ask → evaluate at the projected center → tell.
    pub fn step(&mut self, objective: &dyn Objective) -> Result<&QueryRecord> {
        let c = self.ask()?;
        let x = project(&c.cell.center);
        let value = objective.eval(x.coords());
        self.tell(&c, value)
    }

    fn spawn_children(&mut self, parent: &Candidate, value: f64) {
        let axis = parent.cell.edge.longest_axis() as u32;
        let (lower, upper) = parent.cell.split();
        let child_norm = lower.edge.norm();
        let radius = match self.settings.score_rule {
            ScoreRule::ParentEdge => parent.edge_norm,
            ScoreRule::ChildEdge => child_norm,
        };
        let score = value - self.settings.lipschitz * radius;
        for (cell, is_upper) in [(lower, false), (upper, true)] {
            let seq = self.lineage.len() as u64;
            self.lineage.push(Lineage {
                parent: parent.seq,
                axis,
                upper: is_upper,
            });
            if self.settings.prune && score >= self.best_value {
                continue;
            }
            self.queue.push(Queued(Candidate {
                cell,
                score,
                depth: parent.depth + 1,
                seq,
                edge_norm: child_norm,
            }));
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn trace(&self) -> &[QueryRecord] {
        &self.trace
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    pub fn best_point(&self) -> &Point {
        &self.best_point
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Queued candidates in no particular order.
    pub fn queued(&self) -> impl Iterator<Item = &Candidate> {
        self.queue.iter().map(|q| &q.0)
    }

    /// Lowest queued score; a lower bound on the minimum while pruning is off.
    pub fn min_score(&self) -> Option<f64> {
        self.queue.peek().map(|q| q.0.score)
    }

    /// Number of candidates ever created (root included).
    pub fn created(&self) -> u64 {
        self.lineage.len() as u64
    }

    pub(crate) fn lineage(&self, seq: u64) -> Lineage {
        self.lineage[seq as usize]
    }

    #[cfg(test)]
    pub(crate) fn push_raw(&mut self, c: Candidate) {
        self.queue.push(Queued(c));
    }

    pub fn into_trace(self) -> RunTrace {
        RunTrace {
            algorithm: Algorithm::LipSplit,
            dim: self.dim,
            lipschitz: Some(self.settings.lipschitz),
            records: self.trace,
        }
    }
}

/// Runs the optimizer for `budget.horizon` queries (fewer if the gap rule
/// fires first).
pub fn run(objective: &dyn Objective, settings: Settings, budget: Budget) -> Result<RunTrace> {
    if budget.horizon == 0 {
        return Err(Error::EmptyHorizon);
    }
    let mut state = OptimizerState::init(objective, settings)?;
    while state.trace.len() < budget.horizon {
        if let (Some(gap), Some(lb)) = (budget.gap, state.min_score()) {
            if state.best_value - lb <= gap {
                break;
            }
        }
        state.step(objective)?;
    }
    Ok(state.into_trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{theta, wrapped_volume};
    use crate::objectives::{Benchmark, FnObjective};
    use approx::assert_relative_eq;

    fn scores(state: &OptimizerState) -> Vec<f64> {
        let mut s: Vec<f64> = state.queued().map(|c| c.score).collect();
        s.sort_by(f64::total_cmp);
        s
    }

    #[test]
    fn init_examples() {
        let lin = FnObjective::new(1, |x: &[f64]| x[0]);
        let st = OptimizerState::init(&lin, Settings::new(1.0)).unwrap();
        assert_eq!(st.trace().len(), 1);
        assert_eq!(st.trace()[0].value, 0.5);
        assert_eq!(scores(&st), [0.0, 0.0]);
        let mut centers: Vec<f64> = st.queued().map(|c| c.cell.center.coords()[0]).collect();
        centers.sort_by(f64::total_cmp);
        assert_eq!(centers, [0.25, 0.75]);

        let zero1 = Benchmark::constant(1, 0.0).unwrap();
        let st = OptimizerState::init(&zero1, Settings::new(1.0)).unwrap();
        assert_eq!(scores(&st), [-0.5, -0.5]);

        let zero2 = Benchmark::constant(2, 0.0).unwrap();
        let st = OptimizerState::init(&zero2, Settings::new(1.0)).unwrap();
        for s in scores(&st) {
            assert_relative_eq!(s, -0.8660254037844386, epsilon = 1e-15);
        }

        assert_eq!(
            OptimizerState::init(&zero1, Settings::new(0.0)).err(),
            Some(Error::InvalidLipschitz(0.0))
        );
        assert!(OptimizerState::init(&zero1, Settings::new(-1.0)).is_err());
        assert!(OptimizerState::init(&zero1, Settings::new(f64::NAN)).is_err());
    }

    fn leaf(score: f64, depth: u32, seq: u64) -> Candidate {
        let mut cell = wrap_domain(1).unwrap();
        for _ in 0..depth {
            cell = cell.split().0;
        }
        let edge_norm = cell.edge.norm();
        Candidate {
            cell,
            score,
            depth,
            seq,
            edge_norm,
        }
    }

    #[test]
    fn ask_order() {
        let zero = Benchmark::constant(1, 0.0).unwrap();
        let mut st = OptimizerState::init(&zero, Settings::new(1.0)).unwrap();
        st.queue.clear();
        st.push_raw(leaf(0.1, 1, 10));
        st.push_raw(leaf(-0.2, 1, 11));
        assert_eq!(st.ask().unwrap().score, -0.2);

        st.queue.clear();
        st.push_raw(leaf(0.0, 5, 3));
        st.push_raw(leaf(0.0, 2, 9));
        assert_eq!(st.ask().unwrap().depth, 2);

        st.queue.clear();
        st.push_raw(leaf(0.0, 2, 9));
        st.push_raw(leaf(0.0, 2, 4));
        assert_eq!(st.ask().unwrap().seq, 4);
        assert_eq!(st.ask().unwrap().seq, 9);
        assert_eq!(st.ask().err(), Some(Error::Exhausted));
    }

    #[test]
    fn tell_scores_children_with_parent_edge() {
        let zero = Benchmark::constant(1, 0.0).unwrap();
        let mut st = OptimizerState::init(&zero, Settings::new(2.0)).unwrap();
        let c = st.ask().unwrap();
        assert_eq!(c.edge_norm(), 0.25);
        let before = st.queue_len();
        st.tell(&c, 0.5).unwrap();
        assert_eq!(st.queue_len(), before + 2);
        let kids: Vec<&Candidate> = st.queued().filter(|q| q.depth == 2).collect();
        assert_eq!(kids.len(), 2);
        for k in kids {
            assert_eq!(k.score, 0.0);
            assert_eq!(k.edge_norm(), 0.125);
        }
        // second tell of the same candidate is rejected
        assert_eq!(st.tell(&c, 0.5).err(), Some(Error::UnknownCandidate(c.seq)));
    }

    #[test]
    fn tell_rejects_non_finite() {
        let zero = Benchmark::constant(2, 0.0).unwrap();
        let mut st = OptimizerState::init(&zero, Settings::new(1.0)).unwrap();
        let c = st.ask().unwrap();
        assert!(matches!(
            st.tell(&c, f64::NAN),
            Err(Error::NonFiniteValue { t: 2, .. })
        ));
        assert!(st.tell(&c, f64::INFINITY).is_err());
        // still outstanding, a finite value goes through
        st.tell(&c, 1.0).unwrap();
    }

    #[test]
    fn children_norms_shrink_by_theta() {
        for n in 1..=4 {
            let zero = Benchmark::constant(n, 0.0).unwrap();
            let mut st = OptimizerState::init(&zero, Settings::new(1.0)).unwrap();
            let c = st.ask().unwrap();
            st.tell(&c, 0.0).unwrap();
            for k in st.queued().filter(|q| q.depth == 2) {
                assert_relative_eq!(
                    k.edge_norm(),
                    c.edge_norm() / theta(n),
                    max_relative = 1e-14
                );
            }
        }
    }

    #[test]
    fn prune_drops_dominated_candidates() {
        let zero = Benchmark::constant(1, 0.0).unwrap();
        let mut st = OptimizerState::init(&zero, Settings::new(1.0).with_prune(true)).unwrap();
        st.push_raw(leaf(-0.5, 3, 100));
        let c = st.ask().unwrap(); // one of the root halves, score -0.5
                                   // best drops to -1: every queued -0.5 goes, the children at -1.25 stay
        st.tell(&c, -1.0).unwrap();
        assert_eq!(st.best_value(), -1.0);
        assert_eq!(scores(&st), [-1.25, -1.25]);
        assert!(st.queued().all(|q| q.seq != 100));
        // a child scored at the incumbent is never queued
        let c = st.ask().unwrap();
        st.tell(&c, -0.875).unwrap();
        assert_eq!(scores(&st), [-1.25]);
        st.ask().unwrap();
        assert_eq!(st.ask().err(), Some(Error::Exhausted));
    }

    #[test]
    fn step_examples() {
        let f = Benchmark::cone(1, 1.0, &[0.3]).unwrap();
        let trace = run(&f, Settings::new(1.0), Budget::horizon(3)).unwrap();
        let xs: Vec<f64> = trace
            .records
            .iter()
            .map(|r| r.x_omega.coords()[0])
            .collect();
        assert_eq!(xs, [0.5, 0.25, 0.75]);
        assert_relative_eq!(trace.records[1].score.unwrap(), -0.3, epsilon = 1e-15);
        assert_relative_eq!(trace.records[2].score.unwrap(), -0.3, epsilon = 1e-15);

        let zero = Benchmark::constant(1, 0.0).unwrap();
        let trace = run(&zero, Settings::new(1.0), Budget::horizon(3)).unwrap();
        let norms: Vec<f64> = trace.records.iter().map(|r| r.edge_norm.unwrap()).collect();
        assert_eq!(norms, [0.5, 0.25, 0.25]);

        let one = run(&zero, Settings::new(1.0), Budget::horizon(1)).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.records[0].score, None);
        assert_eq!(
            run(&zero, Settings::new(1.0), Budget::horizon(0)).err(),
            Some(Error::EmptyHorizon)
        );
    }

    /// Level order on a constant objective: depth is non-decreasing and each
    /// level holds 2^d queries.
    #[test]
    fn constant_objective_is_breadth_first() {
        for n in 1..=3 {
            let zero = Benchmark::constant(n, 0.0).unwrap();
            let mut st = OptimizerState::init(&zero, Settings::new(1.0)).unwrap();
            let mut depths = vec![0u32];
            for _ in 0..(1 << (3 * n)) - 2 {
                let c = st.ask().unwrap();
                depths.push(c.depth);
                st.tell(&c, 0.0).unwrap();
            }
            let mut expected = Vec::new();
            for d in 0..3 * n as u32 {
                expected.extend(std::iter::repeat_n(d, 1 << d));
            }
            expected.truncate(depths.len());
            assert_eq!(depths, expected, "n={n}");
        }
    }

    #[test]
    fn queue_grows_by_one_per_step_and_tiles_the_domain() {
        for f in crate::objectives::suite(2).unwrap() {
            let mut st = OptimizerState::init(&f, Settings::new(f.lipschitz())).unwrap();
            for t in 1..=60 {
                assert_eq!(st.queue_len(), t + 1);
                let vol: f64 = st.queued().map(|c| c.cell.volume()).sum();
                assert_relative_eq!(vol, wrapped_volume(2), max_relative = 1e-12);
                let rec = st.step(&f).unwrap();
                assert!(rec.value >= rec.score.unwrap());
            }
        }
    }

    #[test]
    fn gap_rule_stops_early() {
        let zero = Benchmark::constant(2, 0.0).unwrap();
        let budget = Budget {
            horizon: 10_000,
            gap: Some(0.1),
        };
        let trace = run(&zero, Settings::new(1.0), budget).unwrap();
        assert!(trace.len() > 1 && trace.len() < 10_000);
        // replaying to the same length leaves a certified gap within 0.1
        let mut st = OptimizerState::init(&zero, Settings::new(1.0)).unwrap();
        while st.trace().len() < trace.len() {
            st.step(&zero).unwrap();
        }
        assert!(st.best_value() - st.min_score().unwrap() <= 0.1);
        let mut st_prev = OptimizerState::init(&zero, Settings::new(1.0)).unwrap();
        while st_prev.trace().len() < trace.len() - 1 {
            st_prev.step(&zero).unwrap();
        }
        assert!(st_prev.best_value() - st_prev.min_score().unwrap() > 0.1);
    }

    #[test]
    fn reruns_are_bit_identical() {
        for f in crate::objectives::suite(3).unwrap() {
            let a = run(&f, Settings::new(f.lipschitz()), Budget::horizon(300)).unwrap();
            let b = run(&f, Settings::new(f.lipschitz()), Budget::horizon(300)).unwrap();
            assert_eq!(a, b);
        }
    }
}
