use proptest::prelude::*;

use norming_core::bounds::{bg_bound, chebyshev, remez_bound};
use norming_core::entropy::{covering_number, metric_span};
use norming_core::fewnomial::{kd_constant, LogBody};
use norming_core::norming::{lagrange_basis, lebesgue_function, norming_constant, NormingConfig, PointSet};
use norming_core::spaces::{binomial, Space};
use norming_core::stability::hausdorff_distance;

fn coarse() -> NormingConfig {
    NormingConfig {
        grid_spacing: 5e-3,
        ..NormingConfig::default()
    }
}

fn distinct_1d(xs: Vec<f64>) -> Option<PointSet> {
    let mut s = xs.clone();
    s.sort_by(f64::total_cmp);
    if s.windows(2).any(|w| w[1] - w[0] < 1e-3) {
        return None;
    }
    PointSet::from_scalars(&xs).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_is_linear(
        a in prop::collection::vec(-2.0..2.0f64, 6),
        b in prop::collection::vec(-2.0..2.0f64, 6),
        s in -3.0..3.0f64,
        x in prop::collection::vec(-1.0..=1.0f64, 2),
    ) {
        let space = Space::polynomial(2, 2);
        let mix: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u + s * v).collect();
        let lhs = space.evaluate(&mix, &x).unwrap();
        let rhs = space.evaluate(&a, &x).unwrap() + s * space.evaluate(&b, &x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn binomial_symmetry(n in 0usize..40, k in 0usize..40) {
        prop_assume!(k <= n);
        prop_assert_eq!(binomial(n, k), binomial(n, n - k));
        if k >= 1 {
            prop_assert_eq!(binomial(n + 1, k), binomial(n, k) + binomial(n, k - 1));
        }
    }

    #[test]
    fn chebyshev_trig_and_parity(d in 0u32..40, theta in 0.0..std::f64::consts::PI, x in -20.0..20.0f64) {
        prop_assert!((chebyshev(d, theta.cos()) - (d as f64 * theta).cos()).abs() <= 1e-12);
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(chebyshev(d, -x), sign * chebyshev(d, x));
    }

    #[test]
    fn chebyshev_composition(m in 0u32..8, k in 0u32..8, x in 1.0..3.0f64) {
        let lhs = chebyshev(m, chebyshev(k, x));
        let rhs = chebyshev(m * k, x);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs());
    }

    #[test]
    fn measure_bounds_are_monotone(n in 1usize..5, d in 1u32..12, a in 0.01..1.0f64, b in 0.01..1.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(bg_bound(n, d, hi).unwrap() <= bg_bound(n, d, lo).unwrap() * (1.0 + 1e-12));
        prop_assert!(bg_bound(n, d, lo).unwrap() <= bg_bound(n, d + 1, lo).unwrap());
        prop_assert!(bg_bound(n, d, lo).unwrap() <= bg_bound(n + 1, d, lo).unwrap() * (1.0 + 1e-12));
        prop_assert!(remez_bound(d, 2.0).unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn kd_submultiplicative_and_scale_free(
        lo in prop::collection::vec(0.05..3.0f64, 3),
        w in prop::collection::vec(0.01..3.0f64, 3),
        d in 1usize..=3,
        s in 0.01..100.0f64,
    ) {
        let hi: Vec<f64> = lo.iter().zip(&w).map(|(a, b)| a + b).collect();
        let body = LogBody::orthant_box(lo.clone(), hi.clone()).unwrap();
        let kd = kd_constant(&body, d).unwrap();
        prop_assert!(kd >= 1.0);
        prop_assert!(kd <= kd_constant(&body, 1).unwrap().powi(d as i32) * (1.0 + 1e-12));
        let scaled = LogBody::orthant_box(
            lo.iter().map(|v| v * s).collect(),
            hi.iter().map(|v| v * s).collect(),
        ).unwrap();
        prop_assert!((kd_constant(&scaled, d).unwrap() - kd).abs() <= 1e-12 * kd);
    }

    #[test]
    fn span_is_translation_and_reflection_invariant(
        xs in prop::collection::vec(-1.0..1.0f64, 2..7),
        shift in -0.5..0.5f64,
        d in 1usize..4,
    ) {
        let Some(z) = distinct_1d(xs.clone()) else { return Ok(()) };
        let moved = PointSet::from_scalars(&xs.iter().map(|x| x + shift).collect::<Vec<_>>()).unwrap();
        let flipped = PointSet::from_scalars(&xs.iter().map(|x| -x).collect::<Vec<_>>()).unwrap();
        let s = metric_span(&z, d).unwrap().span;
        prop_assert!((metric_span(&moved, d).unwrap().span - s).abs() <= 1e-9);
        prop_assert!((metric_span(&flipped, d).unwrap().span - s).abs() <= 1e-12);
    }

    #[test]
    fn covering_number_decreases_with_radius(
        pts in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 1..10),
        a in 0.01..1.5f64,
        b in 0.01..1.5f64,
    ) {
        let Ok(z) = PointSet::new(pts) else { return Ok(()) };
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let m_lo = covering_number(&z, lo).unwrap();
        prop_assert!(covering_number(&z, hi).unwrap() <= m_lo);
        prop_assert!(m_lo <= z.len());
    }

    #[test]
    fn hausdorff_is_a_metric(
        a in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 1..6),
        b in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 1..6),
        c in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 1..6),
    ) {
        let (Ok(a), Ok(b), Ok(c)) = (PointSet::new(a), PointSet::new(b), PointSet::new(c)) else { return Ok(()) };
        let ab = hausdorff_distance(&a, &b).unwrap();
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(ab, hausdorff_distance(&b, &a).unwrap());
        let ac = hausdorff_distance(&a, &c).unwrap();
        let cb = hausdorff_distance(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-15);
    }

    #[test]
    fn lagrange_functions_interpolate(xs in prop::collection::vec(-1.0..=1.0f64, 4)) {
        let Some(z) = distinct_1d(xs) else { return Ok(()) };
        let space = Space::polynomial(1, 3);
        let lag = lagrange_basis(&space, &z).unwrap();
        for x in z.iter() {
            let phi = space.evaluate_basis(x).unwrap();
            prop_assert!((lebesgue_function(&lag, &phi) - 1.0).abs() <= 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norming_constant_is_order_free_and_at_least_one(
        xs in prop::collection::vec(-1.0..=1.0f64, 3..7),
        rot in 0usize..7,
    ) {
        let Some(z) = distinct_1d(xs.clone()) else { return Ok(()) };
        let space = Space::polynomial(1, 2);
        let mut ys = xs.clone();
        ys.rotate_left(rot % xs.len());
        let r = norming_constant(&space, &z, &coarse()).unwrap();
        let r2 = norming_constant(&space, &PointSet::from_scalars(&ys).unwrap(), &coarse()).unwrap();
        let (a, b) = (r.value.unwrap(), r2.value.unwrap());
        prop_assert!(a >= 1.0);
        prop_assert!((r.reciprocal - 1.0 / a).abs() <= 1e-15);
        prop_assert!((a - b).abs() <= 1e-6 * a);
        if let Some(u) = r.upper {
            prop_assert!(u >= a);
        }
    }
}
