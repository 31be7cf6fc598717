//! Regret metrics and the optimizer's analytic regret bounds as numbers.
//!
//! With `θ = 2^(1/n)`, `V` the root edge norm and `v_t` the edge vector of the
//! t-th query, a run of the optimizer with a valid Lipschitz constant `L`
//! satisfies
//!
//! * per query: `f_1 − f* ≤ L‖v_1‖` and `f_t − f* ≤ (1+θ)·L·‖v_t‖` for `t ≥ 2`;
//! * cumulative: `Σ (f_t − f*) ≤ (1+θ)·L·Σ‖v_t‖`;
//! * edge sum: `Σ‖v_t‖` is at most its value for a level-order traversal,
//!   `Σ_{i<K} 2^i·V·2^(−i/n) + M·V·2^(−K/n)` with `T = 2^K − 1 + M`, `1 ≤ M ≤ 2^K`.
//!
//! Dividing the last two by `T` gives an average-regret bound of order
//! `L·√n·T^(−1/n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{theta, wrap_domain};
use crate::optimizer::{Algorithm, RunTrace};

/// Best value so far minus the minimum.
pub fn simple_regret(trace: &RunTrace, f_min: f64) -> Result<f64> {
    nonempty(trace)?;
    Ok(trace.values().fold(f64::INFINITY, f64::min) - f_min)
}

/// Mean value minus the minimum.
pub fn average_regret(trace: &RunTrace, f_min: f64) -> Result<f64> {
    Ok(cumulative_regret(trace, f_min)? / trace.len() as f64)
}

/// `Σ_t (f_t − f*)`.
pub fn cumulative_regret(trace: &RunTrace, f_min: f64) -> Result<f64> {
    nonempty(trace)?;
    Ok(trace.values().map(|v| v - f_min).sum())
}

fn nonempty(trace: &RunTrace) -> Result<()> {
    if trace.is_empty() {
        Err(Error::EmptyTrace)
    } else {
        Ok(())
    }
}

/// `Σ_t ‖v_t‖`, or `None` when some query has no cell.
pub fn edge_sum(trace: &RunTrace) -> Option<f64> {
    trace.records.iter().map(|r| r.edge_norm).sum()
}

/// Cumulative regret bound `(1+θ)·L·Σ‖v_t‖`.
pub fn cumulative_regret_bound(trace: &RunTrace, lipschitz: f64, n: usize) -> f64 {
    let sum = edge_sum(trace).unwrap_or(f64::NAN);
    if lipschitz == 0.0 {
        return 0.0;
    }
    (1.0 + theta(n)) * lipschitz * sum
}

/// Bound on `f_t − f*` for the t-th query of a run.
pub fn per_query_bound(t: usize, edge_norm: f64, lipschitz: f64, n: usize) -> f64 {
    if t <= 1 {
        lipschitz * edge_norm
    } else {
        (1.0 + theta(n)) * lipschitz * edge_norm
    }
}

/// Largest possible `Σ‖v_t‖` over `T` queries: every level of the split tree
/// filled before the next one starts.
pub fn worstcase_edge_sum(horizon: usize, n: usize) -> f64 {
    assert!(
        horizon >= 1 && n >= 1,
        "horizon and dimension must be positive"
    );
    let v = root_edge_norm(n);
    let k = usize::BITS - 1 - horizon.leading_zeros();
    let m = horizon - (1usize << k) + 1;
    let shrink = |i: u32| (-(i as f64) / n as f64).exp2();
    let full: f64 = (0..k).map(|i| (1u64 << i) as f64 * v * shrink(i)).sum();
    full + m as f64 * v * shrink(k)
}

/// Closed-form relaxation `θ^(n−1)/(θ^(n−1) − 1)·V·T^((n−1)/n)` of
/// [`worstcase_edge_sum`]. Only finite for `n ≥ 2`.
pub fn edge_sum_power_bound(horizon: usize, n: usize) -> Option<f64> {
    if n < 2 {
        return None;
    }
    let a = theta(n).powi(n as i32 - 1);
    let exponent = (n as f64 - 1.0) / n as f64;
    Some(a / (a - 1.0) * root_edge_norm(n) * (horizon as f64).powf(exponent))
}

/// Non-asymptotic average-regret bound `(1+θ)·L·worstcase_edge_sum(T, n)/T`.
pub fn average_regret_bound(horizon: usize, n: usize, lipschitz: f64) -> f64 {
    (1.0 + theta(n)) * lipschitz * worstcase_edge_sum(horizon, n) / horizon as f64
}

fn root_edge_norm(n: usize) -> f64 {
    wrap_domain(n).expect("n >= 1").edge.norm()
}

const REGRET_FLOOR: f64 = 1e-15;

/// Least-squares slope of `log(regret)` against `log(T)`.
///
/// Regrets are floored at `1e-15` before the logarithm. Clearly negative
/// regrets mean the minimum was wrong and are rejected.
pub fn fit_rate(points: &[(usize, f64)]) -> Result<f64> {
    if points.len() < 4 {
        return Err(Error::RateFit(format!(
            "need at least 4 horizons, got {}",
            points.len()
        )));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) || points[0].0 == 0 {
        return Err(Error::RateFit(
            "horizons must be positive and strictly increasing".into(),
        ));
    }
    if let Some((t, r)) = points.iter().find(|(_, r)| !r.is_finite() || *r < -1e-12) {
        return Err(Error::RateFit(format!(
            "regret {r} at T={t} is not a valid regret"
        )));
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|&(t, r)| ((t as f64).ln(), r.max(REGRET_FLOOR).ln()))
        .collect();
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xy.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Regret summary of one trace. Serialized field names are a fixed interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub simple: f64,
    pub average: f64,
    pub cumulative: f64,
    /// `(1+θ)·L·Σ‖v_t‖` (optimizer traces only).
    #[serde(rename = "lemma3_bound")]
    pub cumulative_bound: Option<f64>,
    /// `Σ‖v_t‖` (optimizer traces only).
    pub edge_sum: Option<f64>,
    /// Level-order worst case of `edge_sum` (optimizer traces only).
    pub edge_sum_bound: Option<f64>,
    /// Fitted log–log slope, filled in by sweeps.
    pub slope: Option<f64>,
}

impl RegretReport {
    pub const FIELDS: [&'static str; 8] = [
        "T",
        "simple",
        "average",
        "cumulative",
        "lemma3_bound",
        "edge_sum",
        "edge_sum_bound",
        "slope",
    ];

    pub fn from_trace(trace: &RunTrace, f_min: f64) -> Result<Self> {
        let horizon = trace.len();
        let cumulative = cumulative_regret(trace, f_min)?;
        let mut report = RegretReport {
            horizon,
            simple: simple_regret(trace, f_min)?,
            average: cumulative / horizon as f64,
            cumulative,
            cumulative_bound: None,
            edge_sum: None,
            edge_sum_bound: None,
            slope: None,
        };
        if let (Algorithm::LipSplit, Some(l)) = (trace.algorithm, trace.lipschitz) {
            report.edge_sum = edge_sum(trace);
            report.cumulative_bound = Some(cumulative_regret_bound(trace, l, trace.dim));
            report.edge_sum_bound = Some(worstcase_edge_sum(horizon, trace.dim));
        }
        Ok(report)
    }

    pub fn csv_header() -> String {
        Self::FIELDS.join(",")
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.horizon.to_string(),
            self.simple.to_string(),
            self.average.to_string(),
            self.cumulative.to_string(),
            opt(self.cumulative_bound),
            opt(self.edge_sum),
            opt(self.edge_sum_bound),
            opt(self.slope),
        ]
        .join(",")
    }
}
