//! Property tests for the algebraic invariants of the estimators and test
//! statistics.

use markedk::hypothesis::observed_curves;
use markedk::summaries::{CurveKind, SecondOrder};
use markedk::{
    boundary_distance, constant_intensity, kappa_tf_hat, kernel_intensity, stat_t, Bandwidth,
    Hypothesis, LocalNormalization, MarkedPattern, Point, RGrid, SummaryCurve, TestConfig, Window,
};
use proptest::prelude::*;

fn arb_pattern(max_n: usize) -> impl Strategy<Value = MarkedPattern> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.05..4.0f64), 2..=max_n).prop_map(|rows| {
        let points = rows.iter().map(|&(x, y, _)| Point::new(x, y)).collect();
        let marks = rows.iter().map(|&(_, _, m)| m).collect();
        MarkedPattern::new(points, marks, Window::unit_square()).unwrap()
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn grid() -> RGrid {
    RGrid::uniform(0.25, 32).unwrap()
}

fn nondecreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn k_type_curves_are_nondecreasing(pat in arb_pattern(40)) {
        let grid = grid();
        let so = SecondOrder::new(&pat, &grid, 0.0).unwrap();
        for lam in [constant_intensity(&pat).unwrap(), kernel_intensity(&pat, Bandwidth::Auto).unwrap()] {
            prop_assert!(nondecreasing(&so.k(&lam).unwrap()));
            prop_assert!(nondecreasing(&so.ktf(pat.marks(), &lam).unwrap()));
            for c in so.local_ktf(pat.marks(), &lam, LocalNormalization::default()).unwrap() {
                prop_assert!(nondecreasing(&c));
                prop_assert!(c.iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn constant_marks_give_unmarked_local_k(pat in arb_pattern(30), c in 0.1..10.0f64) {
        let grid = grid();
        let flat = pat.with_marks(vec![c; pat.len()]).unwrap();
        let unit = pat.with_marks(vec![1.0; pat.len()]).unwrap();
        let lam = constant_intensity(&pat).unwrap();
        let so = SecondOrder::new(&pat, &grid, 0.0).unwrap();
        for norm in [LocalNormalization::MeanSquare, LocalNormalization::PointMark] {
            let a = so.local_ktf(flat.marks(), &lam, norm).unwrap();
            let b = so.local_ktf(unit.marks(), &lam, norm).unwrap();
            for (ca, cb) in a.iter().zip(&b) {
                for (x, y) in ca.iter().zip(cb) {
                    prop_assert!(close(*x, *y, 1e-13));
                }
            }
        }
    }

    #[test]
    fn kappa_is_invariant_under_mark_scaling(pat in arb_pattern(40), s in 0.01..100.0f64) {
        let grid = grid();
        let scaled = pat.with_marks(pat.marks().iter().map(|m| m * s).collect()).unwrap();
        let a = kappa_tf_hat(&pat, &grid, Bandwidth::Auto).unwrap();
        let b = kappa_tf_hat(&scaled, &grid, Bandwidth::Auto).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn observed_statistics_ignore_storage_order(
        (pat, order) in arb_pattern(30).prop_flat_map(|p| {
            let n = p.len();
            (Just(p), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        })
    ) {
        let shuffled = MarkedPattern::new(
            order.iter().map(|&i| pat.points()[i]).collect(),
            order.iter().map(|&i| pat.marks()[i]).collect(),
            *pat.window(),
        ).unwrap();
        let cfg = TestConfig::new(grid(), 1);
        for h in [Hypothesis::H1, Hypothesis::H2, Hypothesis::H3] {
            let a = observed_curves(&pat, h, &cfg).unwrap();
            let b = observed_curves(&shuffled, h, &cfg).unwrap();
            let ta = stat_t(&a.ktf, &a.reference).unwrap();
            let tb = stat_t(&b.ktf, &b.reference).unwrap();
            prop_assert!(close(ta, tb, 1e-12), "{h:?}: {ta} vs {tb}");
        }
    }

    #[test]
    fn t1_is_invariant_under_mark_scaling(pat in arb_pattern(30), s in 0.01..100.0f64) {
        let scaled = pat.with_marks(pat.marks().iter().map(|m| m * s).collect()).unwrap();
        let cfg = TestConfig::new(grid(), 1);
        let a = observed_curves(&pat, Hypothesis::H1, &cfg).unwrap();
        let b = observed_curves(&scaled, Hypothesis::H1, &cfg).unwrap();
        let ta = stat_t(&a.ktf, &a.reference).unwrap();
        let tb = stat_t(&b.ktf, &b.reference).unwrap();
        prop_assert!(close(ta, tb, 1e-12), "{ta} vs {tb}");
    }

    #[test]
    fn stat_t_is_quadratic_in_the_deviation(
        devs in prop::collection::vec(-0.05..0.05f64, 16),
        scale in 0.1..10.0f64,
    ) {
        let grid = RGrid::uniform(0.25, 16).unwrap();
        let reference: Vec<f64> = grid.values().iter().map(|r| std::f64::consts::PI * r * r).collect();
        let mk = |s: f64| {
            let v = reference.iter().zip(&devs).map(|(r, d)| r + s * d).collect();
            SummaryCurve::new(grid.clone(), v, CurveKind::Ktf).unwrap()
        };
        let refc = SummaryCurve::new(grid.clone(), reference.clone(), CurveKind::Reference).unwrap();
        let t1 = stat_t(&mk(1.0), &refc).unwrap();
        let ts = stat_t(&mk(scale), &refc).unwrap();
        prop_assert!(t1 >= 0.0);
        prop_assert!(close(ts, scale * scale * t1, 1e-12));
        prop_assert_eq!(stat_t(&refc, &refc).unwrap(), 0.0);
    }

    #[test]
    fn boundary_distance_is_bounded_and_zero_on_edges(x in 0.0..=2.0f64, y in 0.0..=1.0f64) {
        let w = Window::new(0.0, 2.0, 0.0, 1.0).unwrap();
        let d = boundary_distance(Point::new(x, y), &w).unwrap();
        prop_assert!((0.0..=0.5).contains(&d));
        prop_assert!(d <= boundary_distance(w.center(), &w).unwrap());
        prop_assert_eq!(boundary_distance(Point::new(x, 0.0), &w).unwrap(), 0.0);
        prop_assert_eq!(boundary_distance(Point::new(2.0, y), &w).unwrap(), 0.0);
    }
}

#[test]
fn local_and_global_statistics_agree_through_the_identity() {
    use markedk::rng::rng_from_seed;
    use rand::Rng as _;
    let grid = RGrid::uniform(0.25, 64).unwrap();
    for seed in 0..30 {
        let mut rng = rng_from_seed(seed);
        let n = rng.random_range(20..80);
        let points = (0..n)
            .map(|_| Point::new(rng.random(), rng.random()))
            .collect();
        let marks = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
        let pat = MarkedPattern::new(points, marks, Window::unit_square()).unwrap();
        let so = SecondOrder::new(&pat, &grid, 0.0).unwrap();
        let c_tf = (pat.marks().iter().sum::<f64>() / n as f64).powi(2);
        let mu = c_tf.sqrt();
        for lam in [
            constant_intensity(&pat).unwrap(),
            kernel_intensity(&pat, Bandwidth::Auto).unwrap(),
        ] {
            let reference: Vec<f64> = grid
                .values()
                .iter()
                .map(|r| std::f64::consts::PI * r * r)
                .collect();
            let refc = SummaryCurve::new(grid.clone(), reference, CurveKind::Reference).unwrap();
            let direct = SummaryCurve::new(
                grid.clone(),
                so.ktf(pat.marks(), &lam).unwrap(),
                CurveKind::Ktf,
            )
            .unwrap();
            for norm in [
                LocalNormalization::MeanSquare,
                LocalNormalization::PointMark,
            ] {
                let local = so.local_ktf(pat.marks(), &lam, norm).unwrap();
                let agg: Vec<f64> = (0..grid.len())
                    .map(|k| {
                        local
                            .iter()
                            .enumerate()
                            .map(|(i, c)| {
                                let c_i = match norm {
                                    LocalNormalization::MeanSquare => c_tf,
                                    LocalNormalization::PointMark => pat.marks()[i] * mu,
                                };
                                c_i / c_tf * c[k]
                            })
                            .sum::<f64>()
                            / n as f64
                    })
                    .collect();
                let agg = SummaryCurve::new(grid.clone(), agg, CurveKind::Ktf).unwrap();
                let a = stat_t(&agg, &refc).unwrap();
                let b = stat_t(&direct, &refc).unwrap();
                assert!(close(a, b, 1e-10), "seed {seed}: {a} vs {b}");
            }
        }
    }
}
