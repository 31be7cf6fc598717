//! Brute-force oracles that audit the optimizer's guarantees on small runs.
//!
//! * [`region_min_oracle`] evaluates a cell on a dense lattice; every queued
//!   score must stay below it (up to the lattice's own Lipschitz slack).
//! * [`partition_audit`] checks that the queued cells tile the wrapped domain,
//!   comparing the dyadic split paths of the cells rather than floats.
//! * [`reference_run`] is a second, linear-scan implementation of the query
//!   loop whose trace must match the optimizer bit for bit.
//! * [`validate_suite`] runs all of the above on the objective suite.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{wrap_domain, wrapped_volume, HyperRect, Point};
use crate::objectives::{suite, Benchmark, Objective};
use crate::optimizer::{Algorithm, OptimizerState, QueryRecord, RunTrace, ScoreRule, Settings};
use crate::regret::{
    cumulative_regret, cumulative_regret_bound, edge_sum, per_query_bound, worstcase_edge_sum,
};

const ORACLE_BUDGET: u128 = 10_000_000;
const REFERENCE_MAX_HORIZON: usize = 10_000;

/// Minimum of `f(project(x))` over the `m^n` lattice spanning `cell`
/// (corners included).
pub fn region_min_oracle(objective: &dyn Objective, cell: &HyperRect, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::param(
            "resolution",
            "need at least 2 lattice points per axis",
        ));
    }
    let n = cell.dim();
    let points = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if points > ORACLE_BUDGET {
        return Err(Error::OracleBudget {
            points,
            limit: ORACLE_BUDGET,
        });
    }
    let lo = cell.lower_corner();
    let hi = cell.upper_corner();
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..m)
                .map(|k| {
                    let x = lo[i] + (hi[i] - lo[i]) * k as f64 / (m - 1) as f64;
                    x.clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();

    let mut idx = vec![0usize; n];
    let mut x: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    let mut best = f64::INFINITY;
    loop {
        best = best.min(objective.eval(&x));
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(best);
            }
            idx[axis] += 1;
            if idx[axis] < m {
                x[axis] = axes[axis][idx[axis]];
                break;
            }
            idx[axis] = 0;
            x[axis] = axes[axis][0];
            axis += 1;
        }
    }
}

/// `L·δ·√n`, with `δ` the widest lattice spacing: how far the lattice
/// minimum can sit above the true minimum of the cell.
pub fn oracle_slack(lipschitz: f64, cell: &HyperRect, m: usize) -> f64 {
    let widest = cell
        .edge
        .half_widths()
        .iter()
        .fold(0.0f64, |a, e| a.max(2.0 * e));
    lipschitz * widest / (m - 1) as f64 * (cell.dim() as f64).sqrt()
}

/// Outcome of a successful [`partition_audit`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub cells: usize,
    pub volume_sum: f64,
    pub expected_volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditFailure {
    #[error("partition audit needs pruning off")]
    PruningEnabled,
    #[error("cells #{first} and #{second} overlap")]
    Overlap { first: u64, second: u64 },
    #[error("cell #{seq} disagrees with its split path on axis {axis}")]
    Geometry { seq: u64, axis: usize },
    #[error("queued volume {volume_sum} differs from domain volume {expected}")]
    Volume { volume_sum: f64, expected: f64 },
}

/// Per-axis split bits of a cell, root to leaf. On each axis the bits select
/// a dyadic subinterval of the root interval.
fn axis_paths(state: &OptimizerState, seq: u64) -> Vec<Vec<bool>> {
    let mut steps = Vec::new();
    let mut cur = seq;
    while cur != 0 {
        let l = state.lineage(cur);
        steps.push((l.axis as usize, l.upper));
        cur = l.parent;
    }
    let mut paths = vec![Vec::new(); state.dim()];
    for (axis, upper) in steps.into_iter().rev() {
        paths[axis].push(upper);
    }
    paths
}

fn is_prefix(a: &[bool], b: &[bool]) -> bool {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    long.starts_with(short)
}

/// Verifies that the queued cells have pairwise disjoint interiors, match
/// their split paths, and fill the wrapped domain.
pub fn partition_audit(state: &OptimizerState) -> Result<PartitionReport, AuditFailure> {
    if state.settings().prune {
        return Err(AuditFailure::PruningEnabled);
    }
    let root = wrap_domain(state.dim()).expect("state has a valid dimension");
    let mut cells: Vec<_> = state.queued().collect();
    cells.sort_by_key(|c| c.seq);
    let paths: Vec<Vec<Vec<bool>>> = cells.iter().map(|c| axis_paths(state, c.seq)).collect();

    for (c, path) in cells.iter().zip(&paths) {
        for (axis, bits) in path.iter().enumerate() {
            let r = root.edge.half_widths()[axis];
            // halving is exact in binary floating point
            let edge = r / (bits.len() as f64).exp2();
            if c.cell.edge.half_widths()[axis] != edge {
                return Err(AuditFailure::Geometry { seq: c.seq, axis });
            }
            if bits.len() <= 52 {
                let index = bits.iter().fold(0u64, |acc, &b| 2 * acc + u64::from(b));
                let center = edge * (2 * index + 1) as f64;
                if (c.cell.center.coords()[axis] - center).abs() > 1e-12 * r {
                    return Err(AuditFailure::Geometry { seq: c.seq, axis });
                }
            }
        }
    }

    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            if paths[i].iter().zip(&paths[j]).all(|(a, b)| is_prefix(a, b)) {
                return Err(AuditFailure::Overlap {
                    first: cells[i].seq,
                    second: cells[j].seq,
                });
            }
        }
    }

    let volume_sum: f64 = cells.iter().map(|c| c.cell.volume()).sum();
    let expected = wrapped_volume(state.dim());
    if (volume_sum - expected).abs() > 1e-9 * expected {
        return Err(AuditFailure::Volume {
            volume_sum,
            expected,
        });
    }
    Ok(PartitionReport {
        cells: cells.len(),
        volume_sum,
        expected_volume: expected,
    })
}

/// Candidate selection rule of [`reference_run_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceOrder {
    /// Lowest score, then widest cell, then oldest.
    Standard,
    /// Lowest score, then widest cell, then newest.
    NewestFirst,
}

struct Pending {
    center: Vec<f64>,
    edge: Vec<f64>,
    norm: f64,
    score: f64,
    seq: u64,
}

/// Linear-scan re-implementation of the optimizer; its trace must equal
/// [`crate::optimizer::run`]'s bit for bit.
pub fn reference_run(
    objective: &dyn Objective,
    lipschitz: f64,
    horizon: usize,
) -> Result<RunTrace> {
    reference_run_with(objective, lipschitz, horizon, ReferenceOrder::Standard)
}

pub fn reference_run_with(
    objective: &dyn Objective,
    lipschitz: f64,
    horizon: usize,
    order: ReferenceOrder,
) -> Result<RunTrace> {
    if horizon == 0 {
        return Err(Error::EmptyHorizon);
    }
    if horizon > REFERENCE_MAX_HORIZON {
        return Err(Error::param(
            "horizon",
            format!("reference run is limited to {REFERENCE_MAX_HORIZON} queries"),
        ));
    }
    if !(lipschitz.is_finite() && lipschitz > 0.0) {
        return Err(Error::InvalidLipschitz(lipschitz));
    }
    let n = objective.dim();
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let nf = n as f64;
    let half: Vec<f64> = (1..=n).map(|i| (-(i as f64) / nf).exp2()).collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut records = Vec::with_capacity(horizon);
    let mut pending: Vec<Pending> = Vec::new();
    let mut next_seq = 0u64;
    let mut current = Pending {
        norm: norm(&half),
        center: half.clone(),
        edge: half,
        score: f64::NAN,
        seq: 0,
    };
    next_seq += 1;

    for t in 1..=horizon {
        let x: Vec<f64> = current.center.iter().map(|c| c.clamp(0.0, 1.0)).collect();
        let value = objective.eval(&x);
        if !value.is_finite() {
            return Err(Error::NonFiniteValue { t, value });
        }
        records.push(QueryRecord {
            t,
            x_theta: Point::new(current.center.clone())?,
            x_omega: Point::new(x)?,
            value,
            edge_norm: Some(current.norm),
            score: (t > 1).then_some(current.score),
        });

        let mut axis = 0;
        for i in 1..n {
            if current.edge[i] > current.edge[axis] {
                axis = i;
            }
        }
        let shift = current.edge[axis] / 2.0;
        let mut edge = current.edge.clone();
        edge[axis] -= shift;
        let child_norm = norm(&edge);
        let score = value - lipschitz * current.norm;
        for sign in [-1.0, 1.0] {
            let mut center = current.center.clone();
            center[axis] += sign * shift;
            pending.push(Pending {
                center,
                edge: edge.clone(),
                norm: child_norm,
                score,
                seq: next_seq,
            });
            next_seq += 1;
        }

        if t == horizon {
            break;
        }
        let mut pick = 0;
        for (i, p) in pending.iter().enumerate().skip(1) {
            if precedes(p, &pending[pick], order) {
                pick = i;
            }
        }
        current = pending.swap_remove(pick);
    }

    Ok(RunTrace {
        algorithm: Algorithm::LipSplit,
        dim: n,
        lipschitz: Some(lipschitz),
        records,
    })
}

fn precedes(a: &Pending, b: &Pending, order: ReferenceOrder) -> bool {
    if a.score != b.score {
        return a.score < b.score;
    }
    if a.norm != b.norm {
        return a.norm > b.norm;
    }
    match order {
        ReferenceOrder::Standard => a.seq < b.seq,
        ReferenceOrder::NewestFirst => a.seq > b.seq,
    }
}

/// First query index at which two traces differ in any bit of any point,
/// value, score or edge norm.
pub fn first_divergence(a: &RunTrace, b: &RunTrace) -> Option<usize> {
    let bits = |v: Option<f64>| v.map(f64::to_bits);
    let same = |x: &QueryRecord, y: &QueryRecord| {
        x.t == y.t
            && x.value.to_bits() == y.value.to_bits()
            && bits(x.score) == bits(y.score)
            && bits(x.edge_norm) == bits(y.edge_norm)
            && x.x_theta.coords().iter().map(|c| c.to_bits()).eq(y
                .x_theta
                .coords()
                .iter()
                .map(|c| c.to_bits()))
            && x.x_omega.coords().iter().map(|c| c.to_bits()).eq(y
                .x_omega
                .coords()
                .iter()
                .map(|c| c.to_bits()))
    };
    let shared = a.records.len().min(b.records.len());
    (0..shared)
        .find(|&i| !same(&a.records[i], &b.records[i]))
        .map(|i| i + 1)
        .or_else(|| (a.records.len() != b.records.len()).then_some(shared + 1))
}

/// Parameters of [`validate_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationConfig {
    pub dims: Vec<usize>,
    pub horizon: usize,
    pub resolution: usize,
    #[doc(hidden)]
    pub score_rule: ScoreRule,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            dims: vec![1, 2, 3],
            horizon: 50,
            resolution: 101,
            score_rule: ScoreRule::ParentEdge,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub check: &'static str,
    pub objective: String,
    pub dim: usize,
    pub passed: bool,
    /// Number of individual assertions that failed.
    pub violations: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub dims: Vec<usize>,
    pub horizon: usize,
    pub resolution: usize,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Runs every audit on the objective suite at each requested dimension.
pub fn validate_suite(config: &ValidationConfig) -> Result<ValidationReport> {
    if config.horizon == 0 {
        return Err(Error::EmptyHorizon);
    }
    let mut checks = Vec::new();
    for &n in &config.dims {
        for objective in suite(n)? {
            checks.extend(audit_objective(&objective, config)?);
        }
    }
    Ok(ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        dims: config.dims.clone(),
        horizon: config.horizon,
        resolution: config.resolution,
        checks,
    })
}

/// Score, partition, per-query, cumulative and reference checks for one
/// objective.
pub fn audit_objective(
    objective: &Benchmark,
    config: &ValidationConfig,
) -> Result<Vec<CheckOutcome>> {
    let n = objective.dim();
    let l = objective.lipschitz();
    let f_min = objective.f_min();
    let settings = Settings {
        score_rule: config.score_rule,
        ..Settings::new(l)
    };
    let mut state = OptimizerState::init(objective, settings)?;

    let mut seen = HashSet::new();
    let mut score_violations = Vec::new();
    let mut partition_failure = None;
    loop {
        let fresh: Vec<_> = state.queued().filter(|c| seen.insert(c.seq)).collect();
        let mins = par_map(&fresh, |c| {
            region_min_oracle(objective, &c.cell, config.resolution)
        });
        for (c, oracle) in fresh.iter().zip(mins) {
            let limit = oracle? + oracle_slack(l, &c.cell, config.resolution) + 1e-9;
            if c.score > limit {
                score_violations.push(format!("#{} score {} > oracle {}", c.seq, c.score, limit));
            }
        }
        if partition_failure.is_none() {
            if let Err(e) = partition_audit(&state) {
                partition_failure = Some(format!("t={}: {e}", state.trace().len()));
            }
        }
        if state.trace().len() >= config.horizon {
            break;
        }
        state.step(objective)?;
    }
    let trace = state.into_trace();

    let per_query: Vec<String> = trace
        .records
        .iter()
        .filter_map(|r| {
            let bound = per_query_bound(r.t, r.edge_norm?, l, n);
            (r.value - f_min > bound + 1e-9)
                .then(|| format!("t={} regret {} > {}", r.t, r.value - f_min, bound))
        })
        .collect();

    let mut cumulative = Vec::new();
    let cum = cumulative_regret(&trace, f_min)?;
    let cum_bound = cumulative_regret_bound(&trace, l, n);
    if cum > cum_bound * (1.0 + 1e-9) + 1e-9 {
        cumulative.push(format!("cumulative regret {cum} > {cum_bound}"));
    }
    let sum = edge_sum(&trace).unwrap_or(f64::NAN);
    let worst = worstcase_edge_sum(trace.len(), n);
    if sum.is_nan() || sum > worst * (1.0 + 1e-9) {
        cumulative.push(format!("edge sum {sum} > worst case {worst}"));
    }

    let reference = reference_run(objective, l, config.horizon)?;
    let divergence = first_divergence(&trace, &reference);

    let outcome = |check: &'static str, failures: Vec<String>| CheckOutcome {
        check,
        objective: objective.id().to_string(),
        dim: n,
        passed: failures.is_empty(),
        violations: failures.len(),
        detail: failures.first().cloned().unwrap_or_default(),
    };
    Ok(vec![
        outcome("score_lower_bound", score_violations),
        outcome("partition", partition_failure.into_iter().collect()),
        outcome("per_query_regret", per_query),
        outcome("cumulative_bound", cumulative),
        outcome(
            "reference_equivalence",
            divergence
                .map(|t| format!("traces diverge at t={t}"))
                .into_iter()
                .collect(),
        ),
    ])
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::Benchmark;
    use crate::optimizer::{run, Budget};
    use approx::assert_relative_eq;

    #[test]
    fn oracle_examples() {
        let cone = Benchmark::cone(1, 1.0, &[0.3]).unwrap();
        let half = HyperRect::new(
            Point::new(vec![0.25]).unwrap(),
            crate::geometry::EdgeVector::new(vec![0.25]).unwrap(),
        )
        .unwrap();
        let v = region_min_oracle(&cone, &half, 501).unwrap();
        assert!(v.abs() < 1e-15);
        assert_relative_eq!(oracle_slack(1.0, &half, 501), 0.001, epsilon = 1e-15);

        let c = Benchmark::constant(3, 2.5).unwrap();
        assert_eq!(
            region_min_oracle(&c, &wrap_domain(3).unwrap(), 5).unwrap(),
            2.5
        );

        assert!(region_min_oracle(&cone, &half, 1).is_err());
        let big = Benchmark::constant(4, 0.0).unwrap();
        assert!(matches!(
            region_min_oracle(&big, &wrap_domain(4).unwrap(), 101),
            Err(Error::OracleBudget { .. })
        ));
    }

    #[test]
    fn oracle_projects_outside_points() {
        // right half of the n=2 root sticks out of the unit cube on axis 0
        let f = Benchmark::cone(2, 1.0, &[1.0, 0.5]).unwrap();
        let (_, right) = wrap_domain(2).unwrap().split();
        assert_eq!(region_min_oracle(&f, &right, 3).unwrap(), 0.0);
    }

    #[test]
    fn fresh_state_partition() {
        for n in 1..=3 {
            let zero = Benchmark::constant(n, 0.0).unwrap();
            let st = OptimizerState::init(&zero, Settings::new(1.0)).unwrap();
            let rep = partition_audit(&st).unwrap();
            assert_eq!(rep.cells, 2);
            for c in st.queued() {
                assert_relative_eq!(
                    c.cell.volume(),
                    wrapped_volume(n) / 2.0,
                    max_relative = 1e-15
                );
            }
        }
    }

    #[test]
    fn partition_after_twenty_steps() {
        let f = Benchmark::random_multicone(2, 3, 7).unwrap();
        let mut st = OptimizerState::init(&f, Settings::new(f.lipschitz())).unwrap();
        for _ in 1..20 {
            st.step(&f).unwrap();
        }
        let rep = partition_audit(&st).unwrap();
        assert_eq!(rep.cells, 21);
        assert_relative_eq!(
            rep.volume_sum,
            std::f64::consts::SQRT_2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn duplicated_candidate_is_named() {
        let f = Benchmark::separable_sine(2, 1).unwrap();
        let mut st = OptimizerState::init(&f, Settings::new(f.lipschitz())).unwrap();
        for _ in 0..10 {
            st.step(&f).unwrap();
        }
        let dup = st.queued().max_by_key(|c| c.seq).unwrap().clone();
        let seq = dup.seq;
        st.push_raw(dup);
        assert_eq!(
            partition_audit(&st),
            Err(AuditFailure::Overlap {
                first: seq,
                second: seq
            })
        );
    }

    #[test]
    fn partition_requires_prune_off() {
        let f = Benchmark::separable_sine(1, 1).unwrap();
        let st = OptimizerState::init(&f, Settings::new(f.lipschitz()).with_prune(true)).unwrap();
        assert_eq!(partition_audit(&st), Err(AuditFailure::PruningEnabled));
    }

    #[test]
    fn reference_matches_optimizer() {
        for n in 1..=3 {
            let mut objectives = suite(n).unwrap();
            objectives.push(Benchmark::constant(n, 0.0).unwrap());
            for f in objectives {
                let l = if f.lipschitz() > 0.0 {
                    f.lipschitz()
                } else {
                    1.0
                };
                let a = run(&f, Settings::new(l), Budget::horizon(200)).unwrap();
                let b = reference_run(&f, l, 200).unwrap();
                assert_eq!(first_divergence(&a, &b), None, "{}", f.id());
            }
        }
    }

    #[test]
    fn reference_level_order_on_constant() {
        let zero = Benchmark::constant(2, 0.0).unwrap();
        let tr = reference_run(&zero, 1.0, 7).unwrap();
        let norms: Vec<f64> = tr.records.iter().map(|r| r.edge_norm.unwrap()).collect();
        let v = wrap_domain(2).unwrap().edge.norm();
        let want = [
            v,
            v / 2f64.sqrt(),
            v / 2f64.sqrt(),
            v / 2.0,
            v / 2.0,
            v / 2.0,
            v / 2.0,
        ];
        for (got, want) in norms.iter().zip(want) {
            assert_relative_eq!(*got, want, max_relative = 1e-14);
        }
        let opt = run(&zero, Settings::new(1.0), Budget::horizon(7)).unwrap();
        assert_eq!(first_divergence(&opt, &tr), None);
    }

    #[test]
    fn different_tie_rule_is_detected() {
        let zero = Benchmark::constant(2, 0.0).unwrap();
        let opt = run(&zero, Settings::new(1.0), Budget::horizon(7)).unwrap();
        let lifo = reference_run_with(&zero, 1.0, 7, ReferenceOrder::NewestFirst).unwrap();
        // level 1 is visited upper half first
        assert_eq!(first_divergence(&opt, &lifo), Some(2));
        assert!(reference_run(&zero, 1.0, 10_001).is_err());
    }

    #[test]
    fn suite_validates_and_fault_is_caught() {
        let quick = ValidationConfig {
            dims: vec![1, 2],
            horizon: 30,
            resolution: 41,
            ..Default::default()
        };
        let rep = validate_suite(&quick).unwrap();
        assert!(rep.passed, "{:?}", rep.failures().collect::<Vec<_>>());

        let broken = ValidationConfig {
            score_rule: ScoreRule::ChildEdge,
            ..quick
        };
        let rep = validate_suite(&broken).unwrap();
        assert!(!rep.passed);
        assert!(rep.failures().any(|c| c.check == "score_lower_bound"));
    }
}
