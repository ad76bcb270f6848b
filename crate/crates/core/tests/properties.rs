use proptest::prelude::*;
use sharp_embed::extremal::{defect_l1, translated_pair};
use sharp_embed::green::{green_distribution, green_rearranged, split_distribution_sum};
use sharp_embed::norms::{lexp_norm, lexp_quasi_norm, weak_norm, weak_quasi_norm};
use sharp_embed::profile::log_grid;
use sharp_embed::radial::{check_pointwise_bound, rearrange_radial, solve_radial};
use sharp_embed::rearrange::{decreasing_rearrangement, distribution_function, maximal_function};
use sharp_embed::{BallGeometry, CellSample, MonotoneProfile, RadialProfile};

fn cells() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..10.0, 1e-3f64..2.0), 1..60)
}

fn shells() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.01f64..1.0, -1.0f64..1.0), 1..8)
}

fn radial_data(n: u32, radius: f64, raw: &[(f64, f64)]) -> RadialProfile<f64> {
    let geom = BallGeometry::new(n, radius).unwrap();
    let mut r: Vec<f64> = raw.iter().map(|p| p.0 * radius).collect();
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    r.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * radius);
    let mut shells: Vec<(f64, f64)> = r.iter().zip(raw.iter()).map(|(&r, p)| (r, p.1)).collect();
    shells.last_mut().unwrap().0 = radius;
    RadialProfile::piecewise_constant(geom, &shells).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rearrangement_is_equimeasurable(raw in cells(), s in 0.0f64..10.0) {
        let samples: Vec<_> = raw.iter().map(|&(v, m)| CellSample::new(v, m)).collect();
        let u = decreasing_rearrangement(&samples).unwrap();
        let a = u.superlevel_measure(s);
        let b = distribution_function(&samples, s).unwrap();
        // same terms, different summation order
        prop_assert!((a - b).abs() <= 1e-14 * b.max(1e-300));
    }

    #[test]
    fn rearrangement_conserves_mass(raw in cells()) {
        let samples: Vec<_> = raw.iter().map(|&(v, m)| CellSample::new(v, m)).collect();
        let u = decreasing_rearrangement(&samples).unwrap();
        let direct: f64 = raw.iter().map(|&(v, m)| v * m).sum();
        let total = u.integral_to(u.total_measure()).unwrap();
        prop_assert!((total - direct).abs() <= 1e-12 * direct.max(1e-300));
    }

    #[test]
    fn maximal_function_dominates(raw in cells()) {
        let samples: Vec<_> = raw.iter().map(|&(v, m)| CellSample::new(v, m)).collect();
        let u = decreasing_rearrangement(&samples).unwrap();
        let m = maximal_function(&u).unwrap();
        let mut prev = f64::INFINITY;
        for t in u.log_grid(1e-6, 200) {
            let x = m.eval(t);
            prop_assert!(x >= u.eval(t) * (1.0 - 1e-12));
            prop_assert!(x <= prev * (1.0 + 1e-12));
            prev = x;
        }
    }

    #[test]
    fn quasi_norms_below_norms(raw in cells()) {
        let samples: Vec<_> = raw.iter().map(|&(v, m)| CellSample::new(v, m)).collect();
        let u = decreasing_rearrangement(&samples).unwrap();
        prop_assert!(lexp_norm(&u).unwrap().value >= lexp_quasi_norm(&u).value * (1.0 - 1e-12));
        prop_assert!(weak_norm(&u, 3).unwrap().value >= weak_quasi_norm(&u, 3).unwrap().value * (1.0 - 1e-12));
    }

    #[test]
    fn lattice_monotonicity(raw in cells(), c in 1.0f64..3.0) {
        let samples: Vec<_> = raw.iter().map(|&(v, m)| CellSample::new(v, m)).collect();
        let bigger: Vec<_> = raw.iter().map(|&(v, m)| CellSample::new(v * c, m)).collect();
        let u = decreasing_rearrangement(&samples).unwrap();
        let w = decreasing_rearrangement(&bigger).unwrap();
        prop_assert!(lexp_quasi_norm(&w).value >= lexp_quasi_norm(&u).value);
        prop_assert!(lexp_norm(&w).unwrap().value >= lexp_norm(&u).unwrap().value * (1.0 - 1e-12));
    }

    #[test]
    fn split_is_maximal_at_half(s in 1e-2f64..10.0, frac in 0.0f64..1.0, n in 3u32..6) {
        let half = split_distribution_sum(n, 1.0, s, 0.5).unwrap();
        let other = split_distribution_sum(n, 1.0, s, frac).unwrap();
        prop_assert!(other <= half * (1.0 + 1e-12));
    }

    #[test]
    fn distribution_inverts_kernel(s in 1e-3f64..1e3, n in 2u32..6, v in 0.1f64..10.0) {
        let t = green_distribution(n, v, s).unwrap();
        if t > 0.0 && t < v {
            let back = green_rearranged(n, v, t).unwrap();
            prop_assert!((back - s).abs() <= 1e-11 * s);
        }
    }

    #[test]
    fn signed_data_obey_the_pointwise_bound(raw in shells(), n in 2u32..5) {
        let f = radial_data(n, 1.0, &raw);
        let l1 = f.l1_norm().unwrap();
        prop_assume!(l1 > 1e-9);
        let v = solve_radial(f.geom(), &f).unwrap();
        let grid = log_grid(1e-10 * f.geom().volume, f.geom().volume * (1.0 - 1e-9), 80);
        let check = check_pointwise_bound(&v, l1, 1.0, &grid, 1e-9).unwrap();
        prop_assert_eq!(check.violations, 0);
    }

    #[test]
    fn boundary_value_vanishes(raw in shells(), n in 2u32..5) {
        let f = radial_data(n, 2.0, &raw);
        let v = solve_radial(f.geom(), &f).unwrap();
        let scale = v.sup_abs().max(1e-300);
        prop_assert!(v.eval(2.0).abs() <= 1e-12 * scale);
    }

    #[test]
    fn nonnegative_data_give_monotone_potentials(raw in shells(), n in 2u32..5) {
        let pos: Vec<(f64, f64)> = raw.iter().map(|&(r, x)| (r, x.abs())).collect();
        let f = radial_data(n, 1.0, &pos);
        let v = solve_radial(f.geom(), &f).unwrap();
        prop_assert!(v.is_non_increasing(1e-12));
        let u = rearrange_radial(&v).unwrap();
        prop_assert!(u.eval(0.5 * f.geom().volume) >= 0.0);
    }

    #[test]
    fn translated_pair_is_odd(x in -2.0f64..2.5, rho in 0.0f64..2.0) {
        let g = BallGeometry::new(3, 1.0).unwrap();
        let f = translated_pair(&g, 0.05, 0.4).unwrap();
        let a = f.eval(x, rho);
        let b = f.eval(0.4 - x, rho);
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn defect_is_bounded_by_two(lambda in 0.0f64..5.0, n in 2u32..5) {
        let d = defect_l1(n, lambda, 1.0).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d));
    }
}

#[test]
fn equimeasurability_of_closed_form_profiles() {
    let u = MonotoneProfile::green(3, 2.0f64).unwrap();
    for &s in &[0.01, 0.1, 1.0, 10.0] {
        let t: f64 = u.superlevel_measure(s);
        let exact = green_distribution(3, 2.0, s).unwrap();
        assert!((t - exact).abs() <= 1e-12 * exact);
    }
}
