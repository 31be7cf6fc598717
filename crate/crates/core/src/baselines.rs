//! Grid search and uniform random search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::objectives::Objective;
use crate::optimizer::{Algorithm, QueryRecord, RunTrace};

const MAX_GRID_POINTS: u128 = 100_000_000;

/// Centers of the `(1/(2·eps))^n` subcubes of side `2·eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub eps: f64,
    per_axis: usize,
}

impl GridSpec {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if !(eps.is_finite() && eps > 0.0 && eps <= 0.5) {
            return Err(Error::param(
                "eps",
                format!("must lie in (0, 0.5], got {eps}"),
            ));
        }
        let cells = 1.0 / (2.0 * eps);
        let per_axis = cells.round();
        if (cells - per_axis).abs() > 1e-9 * per_axis {
            return Err(Error::param(
                "eps",
                format!("1/(2·{eps}) is not an integer"),
            ));
        }
        let per_axis = per_axis as usize;
        let total = (per_axis as u128)
            .checked_pow(n as u32)
            .unwrap_or(u128::MAX);
        if total > MAX_GRID_POINTS {
            return Err(Error::param(
                "eps",
                format!("{total} grid points exceeds the limit"),
            ));
        }
        Ok(GridSpec { n, eps, per_axis })
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid centers in lexicographic order, first coordinate most significant.
    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let m = self.per_axis;
        let denom = 2.0 * m as f64;
        (0..self.len()).map(move |mut idx| {
            let mut x = vec![0.0; self.n];
            for xi in x.iter_mut().rev() {
                *xi = (2 * (idx % m) + 1) as f64 / denom;
                idx /= m;
            }
            x
        })
    }
}

/// Evaluates every grid center once.
pub fn grid_search(objective: &dyn Objective, eps: f64) -> Result<RunTrace> {
    let grid = GridSpec::new(objective.dim(), eps)?;
    let edge_norm = grid.eps * (grid.n as f64).sqrt();
    let records = grid
        .points()
        .enumerate()
        .map(|(i, x)| {
            let value = objective.eval(&x);
            finite(i + 1, value)?;
            let p = Point::new(x)?;
            Ok(QueryRecord {
                t: i + 1,
                x_theta: p.clone(),
                x_omega: p,
                value,
                edge_norm: Some(edge_norm),
                score: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunTrace {
        algorithm: Algorithm::Grid,
        dim: grid.n,
        lipschitz: None,
        records,
    })
}

/// `horizon` i.i.d. uniform points from a ChaCha8 stream seeded with `seed`.
pub fn random_search(objective: &dyn Objective, horizon: usize, seed: u64) -> Result<RunTrace> {
    if horizon == 0 {
        return Err(Error::EmptyHorizon);
    }
    let n = objective.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (1..=horizon)
        .map(|t| {
            let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let value = objective.eval(&x);
            finite(t, value)?;
            let p = Point::new(x)?;
            Ok(QueryRecord {
                t,
                x_theta: p.clone(),
                x_omega: p,
                value,
                edge_norm: None,
                score: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunTrace {
        algorithm: Algorithm::Random,
        dim: n,
        lipschitz: None,
        records,
    })
}

fn finite(t: usize, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteValue { t, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{suite, Benchmark, FnObjective};

    #[test]
    fn grid_points() {
        let g = GridSpec::new(1, 0.25).unwrap();
        assert_eq!(g.points().collect::<Vec<_>>(), [vec![0.25], vec![0.75]]);
        let g2 = GridSpec::new(2, 0.25).unwrap();
        assert_eq!(g2.len(), 4);
        assert_eq!(GridSpec::new(2, 0.125).unwrap().len(), 16);
        let pts: Vec<_> = g2.points().collect();
        assert_eq!(
            pts,
            [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]]
        );
    }

    #[test]
    fn grid_rejects_nonconforming_eps() {
        assert!(GridSpec::new(1, 0.3).is_err());
        assert!(GridSpec::new(1, 0.0).is_err());
        assert!(GridSpec::new(1, 0.6).is_err());
        assert!(GridSpec::new(0, 0.25).is_err());
        assert!(GridSpec::new(9, 0.001).is_err());
        assert!(GridSpec::new(2, 0.1).is_ok());
    }

    #[test]
    fn grid_simple_regret_within_cell_radius() {
        for n in 1..=3 {
            for f in suite(n).unwrap() {
                for m in [2usize, 4, 5, 8] {
                    let eps = 1.0 / (2.0 * m as f64);
                    let trace = grid_search(&f, eps).unwrap();
                    assert_eq!(trace.len(), m.pow(n as u32));
                    let best = trace.values().fold(f64::INFINITY, f64::min);
                    let bound = f.lipschitz() * eps * (n as f64).sqrt();
                    assert!(best - f.f_min() <= bound + 1e-12, "{} m={m}", f.id());
                }
            }
        }
    }

    #[test]
    fn random_search_is_seeded() {
        let f = Benchmark::separable_sine(3, 1).unwrap();
        let a = random_search(&f, 200, 42).unwrap();
        assert_eq!(a, random_search(&f, 200, 42).unwrap());
        assert_ne!(a, random_search(&f, 200, 43).unwrap());
        for r in &a.records {
            assert!(r.x_omega.coords().iter().all(|c| (0.0..=1.0).contains(c)));
        }
        assert_eq!(random_search(&f, 0, 42).err(), Some(Error::EmptyHorizon));
    }

    #[test]
    fn non_finite_values_fail() {
        let f = FnObjective::new(1, |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { 0.0 });
        assert!(matches!(
            grid_search(&f, 0.25),
            Err(Error::NonFiniteValue { t: 2, .. })
        ));
    }
}
