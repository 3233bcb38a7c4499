use dcx::functions::{
    c11_dc_split, estimate_lipschitz, lipschitz_bound_on_inner, lipschitz_extension, quadratic_dc_split, HessianBound,
};
use dcx::verify::{check_midpoint_convex, check_segment_convex, total_variation};
use dcx::{bundle, from_pair, ConvexFn, ConvexSet, DCFunction, DCPair, HullBody, Norm, QuadraticForm, SamplingConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn grid(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(move |i| lo + i as f64 * step)
}

/// `dist_∞(x, complement of [lo, hi]²)` by brute force over the box edges.
fn linf_depth(x: &[f64], lo: f64, hi: f64) -> f64 {
    x.iter().map(|v| (v - lo).min(hi - v)).fold(f64::INFINITY, f64::min)
}

#[test]
fn box_parallel_sets_agree_with_grid_membership() {
    let square = ConvexSet::boxed(vec![-1.0, -1.0], vec![1.0, 1.0], false).with_norm(Norm::Linf);
    let inner = square.inner_parallel(0.5).unwrap();
    let unit = ConvexSet::boxed(vec![0.0, 0.0], vec![1.0, 1.0], false).with_norm(Norm::Linf);
    let outer = unit.outer_parallel(0.25).unwrap();
    for a in grid(-1.5, 1.5, 0.01) {
        for b in grid(-1.5, 1.5, 0.01) {
            let x = [a, b];
            let depth = linf_depth(&x, -1.0, 1.0);
            if (depth - 0.5).abs() > 1e-9 {
                assert_eq!(inner.contains(&x).unwrap(), depth > 0.5, "{x:?}");
            }
            let gap = x.iter().map(|v| (0.0 - v).max(v - 1.0).max(0.0)).fold(0.0, f64::max);
            if (gap - 0.25).abs() > 1e-9 {
                assert_eq!(outer.contains(&x).unwrap(), gap < 0.25, "{x:?}");
            }
        }
    }
}

#[test]
fn octagon_gauge_matches_lp_bisection() {
    let body = HullBody::with_basis_points(0.5, Norm::Linf, 2).unwrap();
    assert!((body.gauge(&[0.75, 0.75]).unwrap() - 1.5).abs() <= 1e-9);
    assert!((body.gauge_bisection(&[0.75, 0.75]).unwrap() - 1.5).abs() <= 1e-9);
    assert_eq!(body.gauge(&[0.0, 0.0]).unwrap(), 0.0);
    assert!((body.gauge(&[1.0, 0.0]).unwrap() - 1.0).abs() <= 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let a = body.gauge(&x).unwrap();
        let b = body.gauge_bisection(&x).unwrap();
        assert!((a - b).abs() <= 1e-8 * (1.0 + a), "{x:?}: {a} vs {b}");
    }
}

#[test]
fn closure_operation_examples() {
    let line = ConvexSet::whole(1);
    let abs = ConvexFn::max_affine(vec![vec![1.0], vec![-1.0]], vec![0.0, 0.0], line.clone()).unwrap();
    assert_eq!(abs.value(&[-2.0]), 2.0);
    assert_eq!(ConvexFn::sum(&[abs.clone(), abs.clone()]).unwrap().value(&[3.0]), 6.0);
    let sq = ConvexFn::squared_euclidean(1.0, line.clone()).unwrap();
    let shifted = sq.affine_precompose(vec![vec![2.0]], vec![1.0], line).unwrap();
    assert_eq!(shifted.value(&[1.0]), 9.0);
}

#[test]
fn lipschitz_bounds_and_estimates() {
    assert_eq!(lipschitz_bound_on_inner(1.0, 0.5).unwrap(), 4.0);
    assert_eq!(lipschitz_bound_on_inner(0.0, 3.0).unwrap(), 0.0);
    assert_eq!(lipschitz_bound_on_inner(4.0, 0.5).unwrap(), 16.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let unit = ConvexSet::interval(0.0, 1.0, false);
    assert!(estimate_lipschitz(|x| 3.0 * x[0], &unit, 1000, &mut rng).unwrap() >= 3.0 - 1e-6);
    assert_eq!(estimate_lipschitz(|_| 5.0, &unit, 1000, &mut rng).unwrap(), 0.0);
    let sym = ConvexSet::interval(-1.0, 1.0, false);
    let small = estimate_lipschitz(|x| x[0] * x[0], &sym, 100, &mut rng).unwrap();
    let large = estimate_lipschitz(|x| x[0] * x[0], &sym, 100_000, &mut rng).unwrap();
    assert!(small <= 2.0 + 1e-9 && large <= 2.0 + 1e-9);
    assert!(large > 1.99);
}

#[test]
fn extension_of_the_square() {
    let c = ConvexSet::interval(-1.0, 1.0, false);
    let sq = ConvexFn::squared_euclidean(1.0, c.clone()).unwrap();
    let ext = lipschitz_extension(&sq, &c, 2.0).unwrap();
    // grid infimum of c² + 2|x − c| over c ∈ [−1, 1]
    let oracle = |x: f64| grid(-1.0, 1.0, 1e-5).map(|t| t * t + 2.0 * (x - t).abs()).fold(f64::INFINITY, f64::min);
    assert!((ext.value(&[2.0]) - 3.0).abs() <= 1e-6);
    for x in grid(-3.0, 3.0, 0.25) {
        assert!((ext.value(&[x]) - oracle(x)).abs() <= 1e-6, "x = {x}");
    }
    for x in grid(-1.0, 1.0, 0.01) {
        assert!((ext.value(&[x]) - x * x).abs() <= 1e-12);
    }
    let unit = ConvexSet::interval(0.0, 1.0, false);
    let id = ConvexFn::max_affine(vec![vec![1.0]], vec![0.0], unit.clone()).unwrap();
    assert!((lipschitz_extension(&id, &unit, 1.0).unwrap().value(&[2.0]) - 2.0).abs() <= 1e-9);
}

#[test]
fn quadratic_split_examples() {
    let (p, n) = quadratic_dc_split(&QuadraticForm::from_diagonal(&[1.0, -2.0]));
    assert!((p.entry(0, 0) - 1.0).abs() < 1e-15 && p.entry(1, 1).abs() < 1e-15);
    assert!(n.entry(0, 0).abs() < 1e-15 && (n.entry(1, 1) - 2.0).abs() < 1e-15);
    let psd = QuadraticForm::new(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
    let (p, n) = quadratic_dc_split(&psd);
    assert!(n.max_abs() < 1e-12);
    assert!(p.sub(&psd).max_abs() < 1e-12);
}

#[test]
fn smooth_split_examples() {
    let sine = c11_dc_split(
        "sin",
        Arc::new(|x: &[f64]| x[0].sin()),
        Arc::new(|x: &[f64]| vec![x[0].cos()]),
        ConvexSet::interval(-10.0, 10.0, false),
        HessianBound::Given(1.0),
    )
    .unwrap();
    let r = sine.check_control(&SamplingConfig::default().with_segments(100_000)).unwrap();
    assert!(r.pass, "{}", r.summary());
    let affine = c11_dc_split(
        "affine",
        Arc::new(|x: &[f64]| 2.0 * x[0] - x[1]),
        Arc::new(|_: &[f64]| vec![2.0, -1.0]),
        ConvexSet::open_ball(vec![0.0, 0.0], 1.0),
        HessianBound::Given(0.0),
    )
    .unwrap();
    assert_eq!(affine.control().value(&[0.5, 0.5]), 0.0);
    let half = c11_dc_split(
        "half square",
        Arc::new(|x: &[f64]| 0.5 * (x[0] * x[0] + x[1] * x[1])),
        Arc::new(|x: &[f64]| x.to_vec()),
        ConvexSet::open_ball(vec![0.0, 0.0], 2.0),
        HessianBound::Given(1.0),
    )
    .unwrap();
    assert!((half.control().value(&[1.0, 1.0]) - 1.0).abs() < 1e-15);
}

fn abs_fn(domain: &ConvexSet) -> ConvexFn {
    ConvexFn::norm(Norm::L2, vec![0.0], 1.0, domain.clone()).unwrap()
}

#[test]
fn pairs_and_bundles() {
    let dom = ConvexSet::interval(-2.0, 2.0, false);
    let sq = ConvexFn::squared_euclidean(1.0, dom.clone()).unwrap();
    let zero = ConvexFn::zero(dom.clone());
    let f = from_pair(&DCPair::new(sq.clone(), zero.clone()).unwrap()).unwrap();
    assert_eq!(f.value(&[1.5]), 2.25);
    assert_eq!(f.control().value(&[1.5]), 2.25);
    let g = from_pair(&DCPair::new(abs_fn(&dom), abs_fn(&dom)).unwrap()).unwrap();
    assert_eq!(g.value(&[1.5]), 0.0);
    assert_eq!(g.control().value(&[-1.5]), 3.0);
    let h = from_pair(&DCPair::new(sq.clone(), abs_fn(&dom)).unwrap()).unwrap();
    let r = h.check_control(&SamplingConfig::default()).unwrap();
    assert!(r.pass, "{}", r.summary());

    let single = bundle(std::slice::from_ref(&h)).unwrap();
    assert_eq!(single.control().value(&[0.7]), h.control().value(&[0.7]));
    let a = DCFunction::convex(&abs_fn(&dom));
    let b = DCFunction::convex(&sq);
    let ab = bundle(&[a, b]).unwrap();
    assert_eq!(ab.control().value(&[-1.5]), 1.5 + 2.25);
    let plane = ConvexSet::open_ball(vec![0.0, 0.0], 1.0);
    let x = DCFunction::affine(vec![1.0, 0.0], 0.0, plane.clone()).unwrap();
    let linear = bundle(&[x.clone(), x.clone(), x]).unwrap();
    assert_eq!(linear.control().value(&[0.3, 0.3]), 0.0);
    let r = linear.check_control(&SamplingConfig::default()).unwrap();
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn control_check_examples() {
    let dom = ConvexSet::interval(-2.0, 2.0, false);
    let abs = DCFunction::convex(&abs_fn(&dom));
    let r = abs.check_control(&SamplingConfig::default().with_tol(1e-9)).unwrap();
    assert!(r.pass, "{}", r.summary());
    let sq = DCFunction::new(dom.clone(), |x| x[0] * x[0], ConvexFn::zero(dom.clone()), dcx::Provenance::new(dcx::ProvenanceTag::Primitive, "x²")).unwrap();
    let r = sq.check_control(&SamplingConfig::default()).unwrap();
    assert!(!r.pass);
    assert!(!r.witness_location.is_empty());
}

#[test]
fn convexity_checks() {
    let ball = ConvexSet::closed_ball(vec![0.0, 0.0], 1.0);
    let sq = |x: &[f64]| x[0] * x[0] + x[1] * x[1];
    let neg = |x: &[f64]| -(x[0] * x[0] + x[1] * x[1]);
    let r = check_midpoint_convex(&sq, &ball, 10_000, 1e-8, 0).unwrap();
    assert!(r.pass && r.worst_violation <= 0.0 + 1e-15);
    let r = check_midpoint_convex(&neg, &ball, 10_000, 1e-8, 0).unwrap();
    assert!(!r.pass);
    // reported violation reproduces from the witness pair
    let (x, y) = (&r.witness_location[0], &r.witness_location[2]);
    let mid: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
    let raw = neg(&mid) - 0.5 * (neg(x) + neg(y));
    assert!((raw - r.worst_raw).abs() <= 2.0 * f64::EPSILON * (1.0 + raw.abs()) * 4.0);
    let cfg = SamplingConfig::default();
    assert!(check_segment_convex(&sq, &ball, &cfg).unwrap().pass);
    assert!(!check_segment_convex(&neg, &ball, &cfg).unwrap().pass);
}

#[test]
fn variation_examples() {
    assert_eq!(total_variation(&|_| 2.0, 0.0, 1.0, 8).unwrap(), 0.0);
    let stairs = |t: f64| (t * 4.0).floor();
    assert_eq!(total_variation(&stairs, 0.0, 0.99, 8).unwrap(), 3.0);
    assert!(total_variation(&stairs, 1.0, 0.0, 8).is_err());
}
