//! Global minimization of Lipschitz functions on the unit cube with a fixed,
//! bisection-based query rule, plus the tooling to measure its regret.
//!
//! * [`geometry`]: cells of the wrapped domain and the split rule.
//! * [`optimizer`]: the best-first query loop (ask/tell and batch `run`).
//! * [`objectives`]: Lipschitz test functions with exact constants and minima.
//! * [`baselines`]: grid and random search.
//! * [`regret`]: simple/average/cumulative regret and the analytic bounds.
//! * [`validation`]: brute-force oracles that audit all of the above.
//! * [`export`]: CSV/JSON output.

pub mod baselines;
pub mod error;
pub mod export;
pub mod geometry;
pub mod objectives;
pub mod optimizer;
pub mod regret;
pub mod validation;

pub use error::{Error, Result};
pub use objectives::{Benchmark, Objective, ObjectiveSpec};
pub use optimizer::{run, Budget, Candidate, OptimizerState, QueryRecord, RunTrace, Settings};
pub use regret::RegretReport;
