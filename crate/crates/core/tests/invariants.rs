use lipsplit::geometry::{wrap_domain, wrapped_volume, HyperRect};
use lipsplit::objectives::{suite, Benchmark, FnObjective, Objective};
use lipsplit::optimizer::{run, Budget, OptimizerState, Settings};
use lipsplit::regret::{average_regret, average_regret_bound, RegretReport};
use lipsplit::validation::{oracle_slack, region_min_oracle};
use proptest::prelude::*;

/// External evaluation through ask/tell gives the same trace as `run`.
#[test]
fn ask_tell_matches_batch_run() {
    let f = Benchmark::random_multicone(2, 4, 3).unwrap();
    let settings = Settings::new(f.lipschitz());
    let root = OptimizerState::root_query(2).unwrap();
    let mut state = OptimizerState::from_root_value(2, settings, f.eval(root.coords())).unwrap();
    while state.trace().len() < 150 {
        let c = state.ask().unwrap();
        let x: Vec<f64> = c.cell.center.coords().iter().map(|v| v.min(1.0)).collect();
        state.tell(&c, f.eval(&x)).unwrap();
    }
    let batch = run(&f, settings, Budget::horizon(150)).unwrap();
    assert_eq!(state.into_trace(), batch);
}

#[test]
fn multicone_minimum_is_certified_by_dense_lattice() {
    let f = Benchmark::random_multicone(2, 3, 7).unwrap();
    let unit = HyperRect::new(
        lipsplit::geometry::Point::new(vec![0.5, 0.5]).unwrap(),
        lipsplit::geometry::EdgeVector::new(vec![0.5, 0.5]).unwrap(),
    )
    .unwrap();
    let lattice = region_min_oracle(&f, &unit, 2001).unwrap();
    let slack = f.lipschitz() * 2f64.sqrt() / 2000.0;
    assert!(lattice >= f.f_min());
    assert!(lattice - f.f_min() <= slack, "{lattice} vs {}", f.f_min());
    assert_eq!(f.eval(f.x_min().coords()), f.f_min());
}

/// Scores computed with an overestimate of L stay valid lower bounds.
#[test]
fn overestimated_lipschitz_keeps_scores_valid() {
    for n in 1..=2 {
        for f in suite(n).unwrap() {
            let mut state = OptimizerState::init(&f, Settings::new(2.0 * f.lipschitz())).unwrap();
            for _ in 0..40 {
                state.step(&f).unwrap();
            }
            for c in state.queued() {
                let oracle = region_min_oracle(&f, &c.cell, 41).unwrap();
                assert!(
                    c.score <= oracle + oracle_slack(f.lipschitz(), &c.cell, 41) + 1e-9,
                    "{}",
                    f.id()
                );
            }
        }
    }
}

#[test]
fn min_score_lower_bounds_the_minimum() {
    for n in 1..=3 {
        for f in suite(n).unwrap() {
            let mut state = OptimizerState::init(&f, Settings::new(f.lipschitz())).unwrap();
            for _ in 0..300 {
                assert!(
                    state.min_score().unwrap() <= f.f_min() + 1e-12,
                    "{}",
                    f.id()
                );
                assert!(state.best_value() >= f.f_min() - 1e-12);
                state.step(&f).unwrap();
            }
            let values = state.trace().iter().map(|r| r.value);
            assert_eq!(state.best_value(), values.fold(f64::INFINITY, f64::min));
        }
    }
}

#[test]
fn non_finite_objective_fails_the_run() {
    let f = FnObjective::new(2, |x: &[f64]| if x[0] < 0.3 { f64::NAN } else { x[1] });
    let err = run(&f, Settings::new(1.0), Budget::horizon(20)).unwrap_err();
    assert!(matches!(err, lipsplit::Error::NonFiniteValue { .. }));
}

#[test]
fn report_bounds_hold_across_suite() {
    for n in 1..=3 {
        for f in suite(n).unwrap() {
            let trace = run(&f, Settings::new(f.lipschitz()), Budget::horizon(777)).unwrap();
            let rep = RegretReport::from_trace(&trace, f.f_min()).unwrap();
            assert!(rep.cumulative <= rep.cumulative_bound.unwrap() * (1.0 + 1e-9));
            assert!(rep.edge_sum.unwrap() <= rep.edge_sum_bound.unwrap() * (1.0 + 1e-9));
            assert!(rep.average >= rep.simple);
            let avg = average_regret(&trace, f.f_min()).unwrap();
            assert!(avg <= average_regret_bound(777, n, f.lipschitz()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Random cone apex and dimension: queue size T+1 and full tiling after T steps.
    #[test]
    fn queue_tiles_domain(n in 1usize..=4, apex in proptest::collection::vec(0.0f64..=1.0, 4), steps in 1usize..120) {
        let f = Benchmark::cone(n, 1.5, &apex[..n]).unwrap();
        let mut state = OptimizerState::init(&f, Settings::new(1.5)).unwrap();
        for _ in 1..steps {
            state.step(&f).unwrap();
        }
        prop_assert_eq!(state.queue_len(), steps + 1);
        let vol: f64 = state.queued().map(|c| c.cell.volume()).sum();
        prop_assert!((vol - wrapped_volume(n)).abs() <= 1e-9 * wrapped_volume(n));
        let root = wrap_domain(n).unwrap();
        for c in state.queued() {
            let (lo, hi) = (c.cell.lower_corner(), c.cell.upper_corner());
            for i in 0..n {
                prop_assert!(lo[i] >= -1e-12 && hi[i] <= 2.0 * root.edge.half_widths()[i] + 1e-12);
            }
            let expect = (-(c.depth as f64) / n as f64).exp2() * root.edge.norm();
            prop_assert!((c.edge_norm() - expect).abs() <= 1e-12 * expect);
        }
    }

    #[test]
    fn per_query_values_dominate_scores(seed in 0u64..500, m in 1usize..6) {
        let f = Benchmark::random_multicone(2, m, seed).unwrap();
        let trace = run(&f, Settings::new(f.lipschitz()), Budget::horizon(200)).unwrap();
        for r in &trace.records[1..] {
            prop_assert!(r.value >= r.score.unwrap());
            prop_assert!(r.score.unwrap() <= f.f_min() + 1e-12);
        }
    }
}
