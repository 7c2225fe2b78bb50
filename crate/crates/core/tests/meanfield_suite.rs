mod common;

use proptest::prelude::*;
use twostar::gibbs::ExactSystem;
use twostar::meanfield::{
    classify, critical_curve, degeneracy, entropy, fixed_points, limiting_variance, objective, phase_grid,
    variance_cross_check, Classification, PhaseRecord,
};
use twostar::Error;

#[test]
fn fixed_point_at_unit_coupling() {
    let p = classify(1.0, 0.0);
    assert_eq!(p.classification, Classification::Unique);
    let u = p.u_star().unwrap();
    let oracle = common::iterate_fixed_point(1.0, 0.0, 0.5);
    assert!((u - oracle).abs() < 1e-12);
    assert!((u - 0.8437).abs() < 1e-3);
    let v = p.variance().unwrap();
    assert!((v - u * (1.0 - u) / (1.0 - 2.0 * u * (1.0 - u))).abs() < 1e-15);
    assert!((v - 0.179).abs() < 1e-3);
}

#[test]
fn uncoupled_root_is_logistic() {
    let p = classify(0.0, 5.0);
    assert_eq!(p.roots.len(), 1);
    assert!((p.u_star().unwrap() - common::sigmoid(5.0)).abs() < 1e-12);
}

#[test]
fn entropy_and_objective_domain() {
    assert_eq!(entropy(0.0).unwrap(), 0.0);
    assert_eq!(entropy(1.0).unwrap(), 0.0);
    assert!((entropy(0.5).unwrap() + 2f64.ln()).abs() < 1e-15);
    assert!(matches!(entropy(1.5), Err(Error::OutOfUnitInterval(_))));
    assert!(objective(-0.1, 1.0, 0.0).is_err());
    assert_eq!(degeneracy(0.5, 2.0), 0.0);
}

#[test]
fn critical_point() {
    let p = classify(2.0, -2.0);
    assert_eq!(p.classification, Classification::Critical);
    assert!((p.maximizers[0] - 0.5).abs() < 1e-3);
    assert!(limiting_variance(2.0, -2.0).is_err());
}

#[test]
fn coexistence_on_symmetry_line() {
    for a in [2.5, 3.0, 4.0] {
        let p = classify(a, -a);
        assert_eq!(p.classification, Classification::Coexistence);
        let (lo, hi) = (p.maximizers[0], p.maximizers[1]);
        assert!((lo + hi - 1.0).abs() < 1e-9);
        for dh in [-1e-3, 1e-3] {
            assert_eq!(classify(a, -a + dh).classification, Classification::Unique);
        }
        let c = critical_curve(a).unwrap();
        assert!((c.q + a).abs() < 1e-6, "{c:?}");
        assert!(c.objective_gap.abs() < 1e-10);
    }
}

#[test]
fn weak_coupling_is_unique() {
    let alphas: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
    let hs: Vec<f64> = (0..=100).map(|i| -4.0 + i as f64 * 0.05).collect();
    for p in phase_grid(&alphas, &hs) {
        assert_eq!(p.classification, Classification::Unique, "({}, {})", p.alpha, p.h);
        assert_eq!(p.roots.len(), 1);
    }
}

#[test]
fn phase_grid_layout() {
    let grid = phase_grid(&[0.0, 3.0], &[-3.0, 0.0, 1.0]);
    let cells: Vec<(f64, f64)> = grid.iter().map(|p| (p.alpha, p.h)).collect();
    assert_eq!(
        cells,
        vec![
            (0.0, -3.0),
            (0.0, 0.0),
            (0.0, 1.0),
            (3.0, -3.0),
            (3.0, 0.0),
            (3.0, 1.0)
        ]
    );
    let r = PhaseRecord::from(&grid[3]);
    assert_eq!(r.classification, Classification::Coexistence);
    assert!(r.u_star_2.is_some() && r.variance.is_none());
    assert_eq!(r.n_roots, 3);
}

#[test]
fn curve_is_below_minus_two() {
    for a in [2.1, 2.25, 2.5, 3.0, 3.5, 4.0] {
        let c = critical_curve(a).unwrap();
        assert!(c.q < -2.0, "{c:?}");
        assert!(c.u_low < 0.5 && c.u_high > 0.5);
    }
    assert!(matches!(critical_curve(2.0), Err(Error::CurveUndefined(_))));
    assert!(critical_curve(f64::NAN).is_err());
}

#[test]
fn variance_matches_finite_difference() {
    for (a, h) in [(1.0, 0.0), (0.0, 0.5), (3.0, 1.0), (1.5, -2.0)] {
        let c = variance_cross_check(a, h).unwrap();
        assert!(c.pass, "{c:?}");
    }
}

/// Exact single-edge means at small n drift toward the fixed point.
#[test]
fn small_systems_approach_fixed_point() {
    let u = classify(1.0, 0.0).u_star().unwrap();
    let gaps: Vec<f64> = (3..=6)
        .map(|n| {
            let p = ExactSystem::scalar(n, 1.0, 0.0)
                .unwrap()
                .expect_monomial(&[0])
                .unwrap();
            (p - u).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    // the gap shrinks like 1/n at these sizes
    for (n, g) in (3..=6).zip(&gaps) {
        assert!(n as f64 * g < 0.8, "{gaps:?}");
    }
}

proptest! {
    #[test]
    fn roots_solve_the_fixed_point_equation(a in 0.0f64..5.0, h in -6.0f64..3.0) {
        let roots = fixed_points(a, h);
        prop_assert!(!roots.is_empty() && roots.len() <= 3);
        for &u in &roots {
            prop_assert!((common::sigmoid(2.0 * a * u + h) - u).abs() < 1e-10);
        }
        prop_assert!(roots.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn objective_symmetry(a in 0.0f64..5.0, u in 0.0f64..=1.0) {
        let f = objective(u, a, -a).unwrap();
        let g = objective(1.0 - u, a, -a).unwrap();
        prop_assert!((f - g).abs() < 1e-12);
    }

    #[test]
    fn variance_is_positive(a in 0.0f64..1.9, h in -4.0f64..4.0) {
        prop_assert!(limiting_variance(a, h).unwrap() > 0.0);
    }

    #[test]
    fn unique_roots_agree_with_iteration(a in 0.0f64..0.9, h in -3.0f64..3.0) {
        let u = classify(a, h).u_star().unwrap();
        prop_assert!((u - common::iterate_fixed_point(a, h, 0.5)).abs() < 1e-10);
    }
}
