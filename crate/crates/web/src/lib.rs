//! Browser bindings for the lipsplit demo page in `www/`.
//!
//! Three operations are exposed: stepping the optimizer on a 2-D objective and
//! reading back its partition, sampling an objective on a grid for a heatmap,
//! and tracing average regret against its guaranteed bound.

use lipsplit::geometry::theta;
use lipsplit::regret::average_regret_bound;
use lipsplit::{Benchmark, Budget, Objective, ObjectiveSpec, OptimizerState, Result, Settings};
use wasm_bindgen::prelude::*;

const MAX_STEPS: usize = 1 << 16;
const MAX_HORIZON: usize = 1 << 20;

fn objective_2d(spec: &str) -> Result<Benchmark> {
    spec.parse::<ObjectiveSpec>()?.build(Some(2))
}

/// Optimizer state over a 2-D objective.
pub struct PartitionView {
    objective: Benchmark,
    state: OptimizerState,
}

impl PartitionView {
    pub fn new(spec: &str, lipschitz: Option<f64>) -> Result<Self> {
        let objective = objective_2d(spec)?;
        let l = lipschitz.unwrap_or(objective.lipschitz());
        let state = OptimizerState::init(&objective, Settings::new(l))?;
        Ok(PartitionView { objective, state })
    }

    pub fn step(&mut self, k: usize) -> Result<usize> {
        for _ in 0..k.min(MAX_STEPS) {
            self.state.step(&self.objective)?;
        }
        Ok(self.state.trace().len())
    }

    /// Queued cells as `[x0, y0, x1, y1, score]` records, lowest score first.
    pub fn cells(&self) -> Vec<f64> {
        let mut cells: Vec<_> = self.state.queued().collect();
        cells.sort_by(|a, b| a.priority_cmp(b));
        cells
            .iter()
            .flat_map(|c| {
                let (lo, hi) = (c.cell.lower_corner(), c.cell.upper_corner());
                [lo[0], lo[1], hi[0], hi[1], c.score]
            })
            .collect()
    }

    /// Evaluated points as `[x, y, value]` records in query order.
    pub fn queries(&self) -> Vec<f64> {
        self.state
            .trace()
            .iter()
            .flat_map(|r| {
                let x = r.x_omega.coords();
                [x[0], x[1], r.value]
            })
            .collect()
    }

    pub fn best_value(&self) -> f64 {
        self.state.best_value()
    }

    pub fn simple_regret(&self) -> f64 {
        self.state.best_value() - self.objective.f_min()
    }

    pub fn min_score(&self) -> f64 {
        self.state.min_score().unwrap_or(f64::NAN)
    }
}

/// Objective values on a `res × res` grid of cell centers over the unit
/// square, row-major with `y` increasing by row.
pub fn heatmap_values(spec: &str, res: usize) -> Result<Vec<f64>> {
    let f = objective_2d(spec)?;
    let res = res.clamp(2, 512);
    let at = |i: usize| (i as f64 + 0.5) / res as f64;
    Ok((0..res * res)
        .map(|k| f.eval(&[at(k % res), at(k / res)]))
        .collect())
}

/// Running average regret and its bound at log-spaced horizons up to
/// `horizon`, as `[t, average_regret, cumulative_bound / t, rate_bound]`.
pub fn regret_series(spec: &str, dim: usize, horizon: usize) -> Result<Vec<f64>> {
    let f = spec.parse::<ObjectiveSpec>()?.build(Some(dim))?;
    let trace = lipsplit::run(
        &f,
        Settings::new(f.lipschitz()),
        Budget::horizon(horizon.min(MAX_HORIZON)),
    )?;
    let factor = (1.0 + theta(dim)) * f.lipschitz();
    let mut out = Vec::new();
    let (mut regret, mut edges) = (0.0, 0.0);
    let mut next = 1usize;
    for r in &trace.records {
        regret += r.value - f.f_min();
        edges += r.edge_norm.unwrap_or(0.0);
        if r.t == next || r.t == trace.len() {
            let t = r.t as f64;
            out.extend([
                t,
                regret / t,
                factor * edges / t,
                average_regret_bound(r.t, dim, f.lipschitz()),
            ]);
            next = (next + 1).max((next as f64 * 1.25) as usize);
        }
    }
    Ok(out)
}

fn js_err(e: lipsplit::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Explorer(PartitionView);

#[wasm_bindgen]
impl Explorer {
    #[wasm_bindgen(constructor)]
    pub fn new(spec: &str, lipschitz: Option<f64>) -> Result<Explorer, JsError> {
        PartitionView::new(spec, lipschitz)
            .map(Explorer)
            .map_err(js_err)
    }

    pub fn step(&mut self, k: usize) -> Result<usize, JsError> {
        self.0.step(k).map_err(js_err)
    }

    pub fn cells(&self) -> Vec<f64> {
        self.0.cells()
    }

    pub fn queries(&self) -> Vec<f64> {
        self.0.queries()
    }

    #[wasm_bindgen(js_name = bestValue)]
    pub fn best_value(&self) -> f64 {
        self.0.best_value()
    }

    #[wasm_bindgen(js_name = simpleRegret)]
    pub fn simple_regret(&self) -> f64 {
        self.0.simple_regret()
    }

    #[wasm_bindgen(js_name = minScore)]
    pub fn min_score(&self) -> f64 {
        self.0.min_score()
    }
}

#[wasm_bindgen]
pub fn heatmap(spec: &str, res: usize) -> Result<Vec<f64>, JsError> {
    heatmap_values(spec, res).map_err(js_err)
}

#[wasm_bindgen(js_name = regretCurve)]
pub fn regret_curve(spec: &str, dim: usize, horizon: usize) -> Result<Vec<f64>, JsError> {
    regret_series(spec, dim, horizon).map_err(js_err)
}

/// Extent of the wrapped domain in 2-D, `[width, height]`.
#[wasm_bindgen(js_name = wrappedExtent)]
pub fn wrapped_extent() -> Vec<f64> {
    vec![2.0 / theta(2), 2.0 / (theta(2) * theta(2))]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_view_tracks_steps() {
        let mut v = PartitionView::new("cone:L=1,center=0.3;0.7", None).unwrap();
        assert_eq!(v.cells().len(), 2 * 5);
        assert_eq!(v.step(9).unwrap(), 10);
        let cells = v.cells();
        assert_eq!(cells.len(), 11 * 5);
        let area: f64 = cells.chunks(5).map(|c| (c[2] - c[0]) * (c[3] - c[1])).sum();
        let [w, h] = wrapped_extent()[..] else {
            unreachable!()
        };
        assert!((area - w * h).abs() < 1e-12);
        assert!(cells
            .chunks(5)
            .zip(cells.chunks(5).skip(1))
            .all(|(a, b)| a[4] <= b[4]));
        assert_eq!(v.queries().len(), 30);
        assert_eq!(&v.queries()[..2], &[2f64.sqrt() / 2.0, 0.5]);
        assert!(v.min_score() <= 0.0 && v.simple_regret() >= 0.0);
    }

    #[test]
    fn bad_specs_are_errors() {
        assert!(PartitionView::new("nope", None).is_err());
        assert!(PartitionView::new("constant", None).is_err());
        assert!(PartitionView::new("constant", Some(1.0)).is_ok());
        assert!(heatmap_values("cone:center=2;0", 8).is_err());
    }

    #[test]
    fn heatmap_layout() {
        let v = heatmap_values("cone:L=1,center=0;0", 4).unwrap();
        assert_eq!(v.len(), 16);
        assert!((v[0] - (2f64 * 0.125 * 0.125).sqrt()).abs() < 1e-12);
        assert!((v[1] - (0.375f64.powi(2) + 0.125f64.powi(2)).sqrt()).abs() < 1e-12);
        assert!((v[4] - v[1]).abs() < 1e-12);
    }

    #[test]
    fn regret_series_stays_under_bounds() {
        let s = regret_series("sine:k=1", 2, 2000).unwrap();
        assert_eq!(s.len() % 4, 0);
        let rows: Vec<&[f64]> = s.chunks(4).collect();
        assert_eq!(rows[0][0], 1.0);
        assert_eq!(rows.last().unwrap()[0], 2000.0);
        for r in rows {
            assert!(r[1] <= r[2] * (1.0 + 1e-12) + 1e-12, "{r:?}");
            assert!(r[1] <= r[3], "{r:?}");
        }
    }
}
