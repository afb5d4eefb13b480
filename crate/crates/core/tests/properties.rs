//! Randomized invariants of the discrete operators, the functional calculus and the symbols.

use lpheat::heat::{semigroup, HeatFlow, Localizer, TimeGrid};
use lpheat::square::besov_dyadic;
use lpheat::symbol::{khintchine_check, make_dyadic_bump, rademacher, DyadicSymbolFamily};
use lpheat::{dirichlet_laplacian, gradient, DomainDescriptor, Field, GridDomain, SpectralDecomposition};
use proptest::prelude::*;

/// Rectangles, rectangles with an interior obstacle, and intervals of random size.
fn domains() -> impl Strategy<Value = DomainDescriptor> {
    prop_oneof![
        (3usize..40, 0.5f64..3.0).prop_map(|(n, l)| DomainDescriptor::interval(l, n)),
        (3usize..12, 3usize..12).prop_map(|(nx, ny)| DomainDescriptor::Rectangle { width: 1.0, height: (ny + 1) as f64 / (nx + 1) as f64, cells: [nx, ny] }),
        (6usize..14, 1usize..4).prop_map(|(n, m)| DomainDescriptor::square_with_obstacle(n, m.min(n - 4))),
    ]
}

fn random_field(d: &GridDomain, values: &[f64]) -> Field {
    Field::scalar((0..d.dof()).map(|i| values[i % values.len()] * (1.0 + i as f64).sqrt().sin()).collect(), d.cell_volume())
}

fn small_domain() -> impl Strategy<Value = DomainDescriptor> {
    prop_oneof![
        (4usize..30).prop_map(|n| DomainDescriptor::interval(1.0, n)),
        (4usize..9).prop_map(DomainDescriptor::square),
        (8usize..11).prop_map(|n| DomainDescriptor::square_with_obstacle(n, 2)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summation_by_parts(desc in domains(), a in prop::collection::vec(-1.0f64..1.0, 1..50), b in prop::collection::vec(-1.0f64..1.0, 1..50)) {
        let d = GridDomain::build(&desc).unwrap();
        let (f, g) = (random_field(&d, &a), random_field(&d, &b));
        let grad = gradient(&d);
        let lhs = grad.apply(&f).dot(&grad.apply(&g));
        let rhs = -f.dot(&dirichlet_laplacian(&d).apply(&g));
        let scale = grad.apply(&f).l2_norm() * grad.apply(&g).l2_norm();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE), "{lhs} vs {rhs}");
    }

    #[test]
    fn dirichlet_bottom_decreases_on_enlargement(nx in 3usize..10, ny in 3usize..10, ex in 1usize..4, ey in 0usize..4) {
        // same spacing, strictly larger rectangle
        let h = 0.1;
        let small = DomainDescriptor::Rectangle { width: (nx + 1) as f64 * h, height: (ny + 1) as f64 * h, cells: [nx, ny] };
        let big = DomainDescriptor::Rectangle {
            width: (nx + ex + 1) as f64 * h,
            height: (ny + ey + 1) as f64 * h,
            cells: [nx + ex, ny + ey],
        };
        let lmin = |desc: &DomainDescriptor| {
            let d = GridDomain::build(desc).unwrap();
            SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume()).unwrap().lambda_min()
        };
        let (s, b) = (lmin(&small), lmin(&big));
        prop_assert!(b > 0.0 && b < s, "{b} !< {s}");
    }

    #[test]
    fn multipliers_compose_and_are_self_adjoint(desc in small_domain(), a in prop::collection::vec(-1.0f64..1.0, 1..20), c in 0.1f64..3.0) {
        let d = GridDomain::build(&desc).unwrap();
        let sd = SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume()).unwrap();
        let f = random_field(&d, &a);
        let g = random_field(&d, &a[1..].iter().chain(&a[..1]).copied().collect::<Vec<_>>());
        let tau = c / sd.lambda_max();
        let m1 = |l: f64| (-tau * l).exp();
        let m2 = move |l: f64| 1.0 / (1.0 + c * tau * l);
        let composed = sd.apply(&sd.apply(&f, m2), m1);
        let direct = sd.apply(&f, |l| m1(l) * m2(l));
        prop_assert!(composed.sub(&direct).l2_norm() <= 1e-10 * f.l2_norm());
        let (x, y) = (sd.apply(&f, m2).dot(&g), f.dot(&sd.apply(&g, m2)));
        prop_assert!((x - y).abs() <= 1e-10 * f.l2_norm() * g.l2_norm());
    }

    #[test]
    fn semigroup_law_and_positivity(desc in small_domain(), s in 0.01f64..2.0, t in 0.01f64..2.0, a in prop::collection::vec(0.0f64..1.0, 1..20)) {
        let d = GridDomain::build(&desc).unwrap();
        let sd = SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume()).unwrap();
        let f = Field::scalar((0..d.dof()).map(|i| a[i % a.len()]).collect(), d.cell_volume());
        let (s, t) = (s / sd.lambda_min(), t / sd.lambda_min());
        let two_step = semigroup(&sd, t, &semigroup(&sd, s, &f).unwrap()).unwrap();
        let one_step = semigroup(&sd, s + t, &f).unwrap();
        prop_assert!(two_step.sub(&one_step).l2_norm() <= 1e-10 * f.l2_norm().max(1e-300));
        prop_assert!(one_step.values().iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn partition_of_unity_on_the_covered_range(a in 0.2f64..5.0, lo_exp in -3.0f64..2.0, decades in 0.5f64..6.0, u in 0.0f64..1.0) {
        let (lo, hi) = (10f64.powf(lo_exp), 10f64.powf(lo_exp + decades));
        let fam = DyadicSymbolFamily::covering(make_dyadic_bump(a, 4).unwrap(), lo, hi).unwrap();
        let lambda = lo * (hi / lo).powf(u);
        prop_assert!((fam.partition_sum(lambda) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn khintchine_is_exact_at_two(coeffs in prop::collection::vec(-10.0f64..10.0, 1..=12)) {
        prop_assume!(coeffs.iter().any(|&c| c != 0.0));
        let (lower, upper) = khintchine_check(&coeffs, 2.0).unwrap();
        prop_assert!((lower - 1.0).abs() <= 1e-12 && (upper - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rademacher_takes_signs(m in 0u32..20, t in 0.0f64..1.0) {
        let v = rademacher(m, t);
        prop_assert!(v == 1.0 || v == -1.0);
    }

    #[test]
    fn time_grid_weights_sum_to_log_ratio(lo in 1e-6f64..1e-2, span in 10.0f64..1e6, ratio in 1.01f64..2.0) {
        let g = TimeGrid::new(lo, lo * span, ratio).unwrap();
        prop_assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        prop_assert!(g.weights().iter().all(|&w| w > 0.0));
        let total: f64 = g.weights().iter().sum();
        prop_assert!((total - span.ln()).abs() <= 1e-10 * span.ln());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dyadic_besov_grows_with_the_k_range(a in prop::collection::vec(-1.0f64..1.0, 1..30), p in prop::sample::select(vec![2.0, 4.0]), lo in -3i32..0, hi in 0i32..3) {
        let d = GridDomain::build(&DomainDescriptor::square_with_obstacle(10, 2)).unwrap();
        let sd = SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume()).unwrap();
        let hf = HeatFlow::new(&d, &sd).unwrap();
        let f = random_field(&d, &a);
        prop_assume!(!f.is_zero());
        let inner = besov_dyadic(&hf, &f, p, lo..=hi, Localizer::Gradient).unwrap();
        let outer = besov_dyadic(&hf, &f, p, lo - 1..=hi + 1, Localizer::Gradient).unwrap();
        prop_assert!(outer >= inner);
    }
}
