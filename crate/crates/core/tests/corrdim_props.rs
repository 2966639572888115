use chaoscope_core::corrdim::{
    correlation_curve_points, correlation_integral, fit_correlation_dimension, log_grid, CurveSource, Metric,
    RadiusGrid,
};
use chaoscope_core::map::{self, MapParams, PhaseState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cloud(n: usize, seed: u64, spread: f64) -> Vec<PhaseState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| PhaseState::new(rng.gen_range(0.0..spread), rng.gen_range(-spread..spread)))
        .collect()
}

fn explicit_grid(points: &[PhaseState], metric: Metric) -> RadiusGrid {
    let d = chaoscope_core::corrdim::diameter(points, metric);
    RadiusGrid {
        r_min: Some(1e-3 * d),
        r_max: Some(2.0 * d),
        count: 64,
    }
}

#[test]
fn histogram_equals_naive_count() {
    let p = MapParams::new(0.3, 3.8).unwrap();
    let attractor = map::orbit(&p, &map::DEFAULT_INITIAL, 1000, 500, true).unwrap().points;
    let sets = [attractor, cloud(500, 1, 6.0), cloud(137, 2, 0.01), cloud(2, 3, 1.0)];
    for pts in &sets {
        for metric in [Metric::Toroidal, Metric::Euclidean] {
            let curve = correlation_curve_points(pts, explicit_grid(pts, metric), metric, CurveSource::synthetic()).unwrap();
            assert_eq!(curve.points.len(), 64);
            for &(r, c) in &curve.points {
                let naive = correlation_integral(pts, r, metric).unwrap();
                assert_eq!(c, naive, "r={r} metric={metric:?} n={}", pts.len());
            }
        }
    }
}

#[test]
fn histogram_counts_pairs_on_grid_radii() {
    // integer spacing puts many distances exactly on grid radii
    let pts: Vec<PhaseState> = (0..40).map(|i| PhaseState::new(0.0, i as f64 * 0.25)).collect();
    let grid = RadiusGrid {
        r_min: Some(0.25),
        r_max: Some(8.0),
        count: 6,
    };
    let curve = correlation_curve_points(&pts, grid, Metric::Euclidean, CurveSource::synthetic()).unwrap();
    for &(r, c) in &curve.points {
        assert_eq!(c, correlation_integral(&pts, r, Metric::Euclidean).unwrap(), "r={r}");
    }
}

#[test]
fn boundary_pairs_count() {
    let pts = [0.0, 1.0, 2.0].map(|x| PhaseState::new(x, 0.0));
    assert_eq!(correlation_integral(&pts, 1.5, Metric::Euclidean).unwrap(), 2.0 / 3.0);
    assert_eq!(correlation_integral(&pts, 1.0, Metric::Euclidean).unwrap(), 2.0 / 3.0);
    assert_eq!(correlation_integral(&pts, 2.0, Metric::Euclidean).unwrap(), 1.0);
}

#[test]
fn known_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let line: Vec<PhaseState> = (0..4000).map(|_| PhaseState::new(rng.gen::<f64>(), 0.0)).collect();
    let square: Vec<PhaseState> = (0..4000).map(|_| PhaseState::new(rng.gen(), rng.gen())).collect();
    for (pts, want, tol) in [(line, 1.0, 0.05), (square, 2.0, 0.1)] {
        let curve = correlation_curve_points(&pts, RadiusGrid::default(), Metric::Euclidean, CurveSource::synthetic()).unwrap();
        let fit = fit_correlation_dimension(&curve, None).unwrap();
        assert!((fit.d_c - want).abs() <= tol, "d_c {} want {want}", fit.d_c);
    }
}

#[test]
fn periodic_set_has_zero_dimension() {
    let p = MapParams::new(0.3, 2.0).unwrap();
    let pts = map::orbit(&p, &map::DEFAULT_INITIAL, 2000, 4000, true).unwrap().points;
    let grid = RadiusGrid {
        r_min: Some(1e-6),
        r_max: Some(1e-2),
        count: 20,
    };
    let curve = correlation_curve_points(&pts, grid, Metric::Toroidal, CurveSource::synthetic()).unwrap();
    let fit = fit_correlation_dimension(&curve, Some((1e-6, 1e-2))).unwrap();
    assert!(fit.slope.abs() < 1e-12, "slope {}", fit.slope);
}

#[test]
fn scaling_shifts_curve_and_keeps_slope() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<PhaseState> = (0..2000)
        .map(|_| {
            let t: f64 = rng.gen();
            PhaseState::new(t, (t * 9.0).sin() * 0.3 + rng.gen::<f64>() * 0.05)
        })
        .collect();
    let c = 2.0;
    let scaled: Vec<PhaseState> = pts.iter().map(|s| PhaseState::new(c * s.phi, c * s.v)).collect();
    let a = correlation_curve_points(&pts, RadiusGrid::default(), Metric::Euclidean, CurveSource::synthetic()).unwrap();
    let b = correlation_curve_points(&scaled, RadiusGrid::default(), Metric::Euclidean, CurveSource::synthetic()).unwrap();
    for (x, y) in a.points.iter().zip(&b.points) {
        assert!((y.0.ln() - x.0.ln() - c.ln()).abs() < 1e-12);
        assert_eq!(x.1, y.1);
    }
    let fa = fit_correlation_dimension(&a, None).unwrap();
    let fb = fit_correlation_dimension(&b, Some((c * fa.fit_window.0, c * fa.fit_window.1))).unwrap();
    assert_eq!(fa.n_used, fb.n_used);
    assert!((fa.slope - fb.slope).abs() <= 1e-9, "{} vs {}", fa.slope, fb.slope);
}

#[test]
fn log_grid_is_geometric() {
    let g = log_grid(1e-3, 10.0, 5);
    assert_eq!(g.len(), 5);
    assert_eq!(g[0], 1e-3);
    assert_eq!(g[4], 10.0);
    for w in g.windows(2) {
        assert!((w[1] / w[0] - 10.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn curve_is_bounded_and_monotone(n in 2usize..300, seed in any::<u64>(), spread in 0.01f64..10.0, toroidal in any::<bool>()) {
        let pts = cloud(n, seed, spread);
        let metric = if toroidal { Metric::Toroidal } else { Metric::Euclidean };
        let curve = correlation_curve_points(&pts, RadiusGrid::default(), metric, CurveSource::synthetic()).unwrap();
        prop_assert!(curve.is_consistent());
        prop_assert!(curve.points.iter().all(|&(_, c)| (0.0..=1.0).contains(&c)));
        prop_assert!(curve.points.windows(2).all(|w| w[0].1 <= w[1].1));
        prop_assert_eq!(curve.points.last().unwrap().1, 1.0);
    }
}
