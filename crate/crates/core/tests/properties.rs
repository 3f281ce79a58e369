//! Property tests for the crate's structural invariants: bracket bilinearity
//! and antisymmetry, Hilbert measure preservation and uniform convergence,
//! weight-range preservation, and the norm evaluator's order relations.

use proptest::prelude::*;

use pblab_core::pbnorm::{inf1_norm_exact, inf1_norm_heuristic};
use pblab_core::spacefill::{
    pushforward_weight, DyadicCell, HilbertCurve, PiecewiseConstantWeight,
};
use pblab_core::surface::{poisson_bracket, FdOrder, GridSpec, ScalarField, SurfaceKind};
use pblab_core::ChartedSurface;

fn antisym_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n * (n - 1) / 2).prop_map(move |upper| {
        let mut p = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                p[i * n + j] = upper[k];
                p[j * n + i] = -upper[k];
                k += 1;
            }
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_norm_is_homogeneous_and_dominates_heuristic(
        p in antisym_strategy(6),
        lambda in -3.0f64..3.0,
    ) {
        let (v, _, _) = inf1_norm_exact(&p, 6);
        let scaled: Vec<f64> = p.iter().map(|x| lambda * x).collect();
        let (vs, _, _) = inf1_norm_exact(&scaled, 6);
        prop_assert!((vs - lambda.abs() * v).abs() <= 1e-12 * (1.0 + v));

        let (h, _, _) = inf1_norm_heuristic(&p, 6, 4, 7, &[]);
        prop_assert!(h <= v + 1e-12);
    }

    #[test]
    fn interior_weights_stay_below_box_sup(
        p in antisym_strategy(5),
        a in proptest::collection::vec(-1.0f64..1.0, 5),
        b in proptest::collection::vec(-1.0f64..1.0, 5),
    ) {
        let (v, _, _) = inf1_norm_exact(&p, 5);
        let mut val = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                val += a[i] * p[i * 5 + j] * b[j];
            }
        }
        prop_assert!(val.abs() <= v + 1e-12);
    }

    #[test]
    fn zeroing_a_line_never_increases_the_norm(
        p in antisym_strategy(6),
        k in 0usize..6,
    ) {
        let (v, _, _) = inf1_norm_exact(&p, 6);
        let mut q = p.clone();
        for j in 0..6 {
            q[k * 6 + j] = 0.0;
            q[j * 6 + k] = 0.0;
        }
        let (vq, _, _) = inf1_norm_exact(&q, 6);
        prop_assert!(vq <= v + 1e-12);
    }

    #[test]
    fn bracket_is_bilinear_and_antisymmetric(
        a1 in -2.0f64..2.0,
        a2 in -2.0f64..2.0,
        kx in 1u32..3,
        ky in 1u32..3,
    ) {
        let t = ChartedSurface::make(SurfaceKind::Torus, 1.0, GridSpec::new(32, 32), None).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        let f1 = ScalarField::from_fn(t.clone(), move |x, y| (tau * kx as f64 * x).sin() * (tau * y).cos());
        let f2 = ScalarField::from_fn(t.clone(), move |x, y| (tau * ky as f64 * y).sin() + (tau * x).cos());
        let g = ScalarField::from_fn(t.clone(), move |x, y| (tau * (x + y)).cos());

        // {a1 f1 + a2 f2, g} = a1 {f1, g} + a2 {f2, g} samplewise
        let combo = ScalarField::from_data(
            t.clone(),
            f1.data().iter().zip(f2.data()).map(|(u, v)| a1 * u + a2 * v).collect(),
        ).unwrap();
        let lhs = poisson_bracket(&combo, &g, FdOrder::Two).unwrap();
        let b1 = poisson_bracket(&f1, &g, FdOrder::Two).unwrap();
        let b2 = poisson_bracket(&f2, &g, FdOrder::Two).unwrap();
        let scale = lhs.sup_norm().max(1.0);
        for i in 0..lhs.data().len() {
            let rhs = a1 * b1.data()[i] + a2 * b2.data()[i];
            prop_assert!((lhs.data()[i] - rhs).abs() <= 1e-12 * scale);
        }

        // antisymmetry
        let fg = poisson_bracket(&f1, &g, FdOrder::Two).unwrap();
        let gf = poisson_bracket(&g, &f1, FdOrder::Two).unwrap();
        for i in 0..fg.data().len() {
            prop_assert!((fg.data()[i] + gf.data()[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn hilbert_preimage_measure_is_exact(
        m in 1u32..5,
        level_frac in 0.0f64..1.0,
        cell_seed in 0u64..1_000_000,
    ) {
        let curve = HilbertCurve::new(2, m).unwrap();
        let level = (level_frac * m as f64).floor() as u32;
        let side = 1u64 << level;
        let cx = cell_seed % side;
        let cy = (cell_seed / side) % side;
        let measure = curve.preimage_measure(&DyadicCell::new(level, vec![cx, cy])).unwrap();
        prop_assert_eq!(measure, num_rational::Ratio::new(1u64, 1 << (2 * level)));
    }

    #[test]
    fn hilbert_orders_converge_uniformly(
        m in 1u32..5,
        t in 0.0f64..1.0,
    ) {
        let ca = HilbertCurve::new(2, m).unwrap();
        let cb = HilbertCurve::new(2, m + 1).unwrap();
        let pa = ca.point(t).unwrap();
        let pb = cb.point(t).unwrap();
        let d = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
        prop_assert!(d <= 2f64.sqrt() / (1u64 << m) as f64 + 1e-12);
    }

    #[test]
    fn pushforward_preserves_weight_range(
        values in proptest::collection::vec(-1.0f64..1.0, 16),
    ) {
        let curve = HilbertCurve::new(2, 2).unwrap();
        let alpha = PiecewiseConstantWeight::uniform(values).unwrap();
        let w = pushforward_weight(&alpha, &curve);
        prop_assert!(w.values.iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}
