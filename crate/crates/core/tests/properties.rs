use dcx::functions::{lipschitz_extension, quadratic_dc_split};
use dcx::gallery::{chyba_c1_c2, chyba_d, chyba_g, chyba_v};
use dcx::verify::check_midpoint_convex;
use dcx::{ConvexFn, ConvexSet, DCFunction, HullBody, Norm, QuadraticForm, SamplingConfig};
use proptest::prelude::*;

fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, d)
}

fn symmetric(d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(-5.0f64..5.0, d * d).prop_map(move |v| {
        (0..d)
            .map(|i| (0..d).map(|j| 0.5 * (v[i * d + j] + v[j * d + i])).collect())
            .collect()
    })
}

fn octagon() -> HullBody {
    HullBody::with_basis_points(0.5, Norm::Linf, 2).unwrap()
}

fn quad(rows: &[Vec<f64>], x: &[f64]) -> f64 {
    rows.iter()
        .zip(x)
        .map(|(r, xi)| xi * r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gauge_is_a_norm(x in point(2), y in point(2), t in -4.0f64..4.0) {
        let b = octagon();
        let gx = b.gauge(&x).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| t * v).collect();
        prop_assert!((b.gauge(&scaled).unwrap() - t.abs() * gx).abs() <= 1e-12 * (1.0 + gx * t.abs()));
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, c)| a + c).collect();
        prop_assert!(b.gauge(&sum).unwrap() <= gx + b.gauge(&y).unwrap() + 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(b.gauge(&neg).unwrap(), gx);
        // ρ·B_∞ ⊆ body ⊆ B_∞
        let inf = Norm::Linf.eval(&x);
        prop_assert!(gx <= inf / 0.5 + 1e-12 && gx >= inf - 1e-12);
    }

    #[test]
    fn convex_set_membership(x in point(2), y in point(2), t in 0.0f64..=1.0, r in 0.1f64..3.0) {
        for set in [
            ConvexSet::closed_ball(vec![0.0, 0.0], r),
            ConvexSet::boxed(vec![-r, -0.5 * r], vec![r, r], false),
        ] {
            if set.contains(&x).unwrap() {
                prop_assert_eq!(set.dist(&x).unwrap(), 0.0);
                if set.contains(&y).unwrap() {
                    let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
                    prop_assert!(set.contains_closure(&z, 1e-12));
                }
            } else {
                prop_assert!(set.dist(&x).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn quadratic_split_reconstructs(rows in (1usize..=3).prop_flat_map(symmetric), x in point(3)) {
        let q = QuadraticForm::new(rows.clone()).unwrap();
        let (p, n) = quadratic_dc_split(&q);
        let d = rows.len();
        let x = &x[..d];
        prop_assert!(p.sub(&n).sub(&q).max_abs() <= 1e-10);
        let scale = x.iter().map(|v| v * v).sum::<f64>();
        prop_assert!(quad(&p.rows(), x) >= -1e-12 * (1.0 + scale) * 10.0);
        prop_assert!(quad(&n.rows(), x) >= -1e-12 * (1.0 + scale) * 10.0);
        prop_assert!((quad(&p.rows(), x) - quad(&n.rows(), x) - quad(&rows, x)).abs() <= 1e-9 * (1.0 + scale));
    }

    #[test]
    fn chyba_invariants(x in -1.0f64..0.0, y in -1.0f64..0.0) {
        let (c1, c2) = chyba_c1_c2(x).unwrap();
        let g = chyba_g(x).unwrap();
        prop_assert!((c1 - c2 - g).abs() <= 1e-12);
        prop_assert!(chyba_d(x).unwrap() <= 1);
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        prop_assert!(chyba_g(lo).unwrap() <= chyba_g(hi).unwrap());
        prop_assert!(chyba_g(hi).unwrap() - chyba_g(lo).unwrap() <= (hi - lo) * (1.0 + 1e-9) + 1e-15);
        prop_assert!(chyba_v(lo).unwrap() <= chyba_v(hi).unwrap());
    }

    #[test]
    fn extension_agrees_on_the_set(a in -2.0f64..0.0, w in 0.5f64..2.0, x in -1.0f64..1.0) {
        let c = ConvexSet::interval(a, a + w, false);
        let sq = ConvexFn::squared_euclidean(1.0, c.clone()).unwrap();
        let lip = 2.0 * a.abs().max((a + w).abs());
        let ext = lipschitz_extension(&sq, &c, lip).unwrap();
        let inside = a + (x + 1.0) * 0.5 * w;
        prop_assert!((ext.value(&[inside]) - inside * inside).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reports_are_deterministic_and_monotone(seed in 0u64..1000, tol in 1e-10f64..1e-2) {
        let dom = ConvexSet::interval(-2.0, 2.0, false);
        let f = DCFunction::new(
            dom.clone(),
            |x| x[0].sin(),
            ConvexFn::squared_euclidean(0.45, dom).unwrap(),
            dcx::Provenance::new(dcx::ProvenanceTag::Primitive, "sin"),
        )
        .unwrap();
        let cfg = SamplingConfig::default().with_segments(500).with_seed(seed).with_tol(tol);
        let a = f.check_control(&cfg).unwrap();
        let b = f.check_control(&cfg).unwrap();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        let looser = f.check_control(&cfg.clone().with_tol(tol * 10.0)).unwrap();
        prop_assert!(!a.pass || looser.pass);
        prop_assert_eq!(a.pass, a.worst_violation <= a.tolerance);

        let sq = |x: &[f64]| -x[0] * x[0];
        let region = ConvexSet::interval(-1.0, 1.0, false);
        let m1 = check_midpoint_convex(&sq, &region, 200, tol, seed).unwrap();
        let m2 = check_midpoint_convex(&sq, &region, 200, tol * 10.0, seed).unwrap();
        prop_assert_eq!(m1.worst_violation.to_bits(), m2.worst_violation.to_bits());
        prop_assert!(!m1.pass || m2.pass);
    }
}
