use dcx::calculus::{
    bilinear_product, compose, compose_global, compose_local, product, quadratic_compose, quotient, special_compose,
    DenominatorFloor, GlobalOptions, LipschitzCertificate,
};
use dcx::{bundle, from_pair, ConvexFn, ConvexSet, DCFunction, DCPair, Provenance, ProvenanceTag, QuadraticForm, SamplingConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn abs_on(dom: &ConvexSet) -> ConvexFn {
    ConvexFn::max_affine(vec![vec![1.0], vec![-1.0]], vec![0.0, 0.0], dom.clone()).unwrap()
}

fn affine(slope: f64, intercept: f64, dom: &ConvexSet) -> DCFunction {
    DCFunction::affine(vec![slope], intercept, dom.clone()).unwrap()
}

fn exp_outer() -> DCFunction {
    let line = ConvexSet::whole(1);
    DCFunction::convex(&ConvexFn::oracle("exp", line, |y: &[f64]| y[0].exp()))
}

fn passes(f: &DCFunction, segments: usize) {
    let report = f.check_control(&SamplingConfig::default().with_segments(segments).with_duals(32)).unwrap();
    assert!(report.pass, "{}", report.summary());
}

fn grid(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| a + (b - a) * i as f64 / n as f64)
}

#[test]
fn lipschitz_composition_control() {
    let m = 2.0;
    let dom = ConvexSet::interval(-m, m, false);
    let f = DCFunction::convex(&abs_on(&dom)).as_mapping();
    let range = ConvexSet::interval(0.0, m, false);
    let sq = DCFunction::convex(&ConvexFn::squared_euclidean(1.0, range.clone()).unwrap()).as_mapping();
    let lip = LipschitzCertificate::analytic(2.0 * m, range).unwrap();
    let h = compose(&f, &sq, &lip, &lip).unwrap();
    for x in grid(-m, m, 40) {
        let expected = x * x + 4.0 * m * x.abs();
        assert!((h.control().value(&[x]) - expected).abs() < 1e-12);
        assert!((h.apply(&[x])[0] - x * x).abs() < 1e-12);
    }
    let report = h.check_control(&SamplingConfig::default().with_duals(32)).unwrap();
    assert!(report.pass, "{}", report.summary());
}

#[test]
fn composition_with_affine_outer() {
    let dom = ConvexSet::interval(-1.0, 1.0, false);
    let f = DCFunction::convex(&abs_on(&dom)).as_mapping();
    let line = ConvexSet::whole(1);
    let outer = affine(-3.0, 1.0, &line).as_mapping();
    let h = compose(
        &f,
        &outer,
        &LipschitzCertificate::analytic(3.0, line.clone()).unwrap(),
        &LipschitzCertificate::analytic(0.0, line).unwrap(),
    )
    .unwrap();
    assert_eq!(h.control().value(&[0.5]), 1.5);
}

#[test]
fn range_escape_is_reported() {
    let dom = ConvexSet::interval(-3.0, 3.0, false);
    let f = DCFunction::convex(&abs_on(&dom)).as_mapping();
    let range = ConvexSet::interval(0.0, 1.0, false);
    let sq = DCFunction::convex(&ConvexFn::squared_euclidean(1.0, range.clone()).unwrap()).as_mapping();
    let lip = LipschitzCertificate::analytic(2.0, range).unwrap();
    let err = compose(&f, &sq, &lip, &lip).unwrap_err();
    assert!(err.to_string().contains("range escape"), "{err}");
}

#[test]
fn exp_of_dc_function() {
    let dom = ConvexSet::interval(-5.0, 5.0, true);
    let half_sq = ConvexFn::squared_euclidean(0.5, dom.clone()).unwrap();
    let f = from_pair(&DCPair::new(abs_on(&dom), half_sq).unwrap()).unwrap();
    let g = compose_global(&f.as_mapping(), &exp_outer(), &GlobalOptions::default()).unwrap();
    for x in grid(-4.9, 4.9, 50) {
        assert!((g.value(&[x]) - (x.abs() - 0.5 * x * x).exp()).abs() < 1e-12);
    }
    passes(&g, 10_000);
}

#[test]
fn global_composition_on_unbounded_domain() {
    let line = ConvexSet::whole(1);
    let sin = dcx::functions::c11_dc_split(
        "sin",
        std::sync::Arc::new(|x: &[f64]| x[0].sin()),
        std::sync::Arc::new(|x: &[f64]| vec![x[0].cos()]),
        line,
        dcx::functions::HessianBound::Given(1.0),
    )
    .unwrap();
    let region = ConvexSet::interval(-3.0, 3.0, false);
    let g = compose_global(&sin.as_mapping(), &exp_outer(), &GlobalOptions::default().on(region.clone())).unwrap();
    assert_eq!(g.domain(), &region);
    passes(&g, 5_000);
}

#[test]
fn product_of_identities_and_abs() {
    let dom = ConvexSet::interval(-2.0, 2.0, false);
    let x = affine(1.0, 0.0, &dom);
    let p = product(&x, &x, &GlobalOptions::default()).unwrap();
    passes(&p, 5_000);
    let a = DCFunction::convex(&abs_on(&dom));
    let q = product(&a, &a, &GlobalOptions::default()).unwrap();
    for t in grid(-2.0, 2.0, 100) {
        assert!((q.value(&[t]) - t * t).abs() < 1e-12);
    }
    passes(&q, 5_000);
}

#[test]
fn product_of_affine_factors_is_concave() {
    let dom = ConvexSet::interval(-2.0, 2.0, false);
    let p = product(&affine(-1.0, 1.0, &dom), &affine(1.0, 1.0, &dom), &GlobalOptions::default()).unwrap();
    let r = product(&affine(1.0, 1.0, &dom), &affine(-1.0, 1.0, &dom), &GlobalOptions::default()).unwrap();
    for t in grid(-2.0, 2.0, 100) {
        assert!((p.value(&[t]) - (1.0 - t * t)).abs() < 1e-12);
        assert_eq!(p.value(&[t]), r.value(&[t]));
    }
    passes(&p, 5_000);
}

#[test]
fn reciprocal_of_one_plus_square() {
    let dom = ConvexSet::interval(-2.0, 2.0, false);
    let one = DCFunction::constant(1.0, dom.clone()).unwrap();
    let den = DCFunction::convex(&ConvexFn::squared_euclidean(1.0, dom.clone()).unwrap().add_constant(1.0));
    let q = quotient(&one, &den, DenominatorFloor::Given(1.0), &GlobalOptions::default()).unwrap();
    for t in grid(-2.0, 2.0, 100) {
        assert!((q.value(&[t]) - 1.0 / (1.0 + t * t)).abs() < 1e-12);
    }
    passes(&q, 5_000);
    let back = product(&q, &den, &GlobalOptions::default()).unwrap();
    for t in grid(-2.0, 2.0, 100) {
        assert!((back.value(&[t]) - 1.0).abs() < 1e-8);
    }
}

#[test]
fn quotient_by_one_is_exact() {
    let dom = ConvexSet::interval(-1.0, 1.0, false);
    let f = DCFunction::convex(&abs_on(&dom));
    let one = DCFunction::constant(1.0, dom).unwrap();
    let q = quotient(&f, &one, DenominatorFloor::Given(1.0), &GlobalOptions::default()).unwrap();
    for t in grid(-1.0, 1.0, 64) {
        assert_eq!(q.value(&[t]), t.abs());
    }
}

#[test]
fn quotient_rejects_sign_change_and_tiny_floor() {
    let dom = ConvexSet::interval(-1.0, 1.0, false);
    let one = DCFunction::constant(1.0, dom.clone()).unwrap();
    let x = affine(1.0, 0.0, &dom);
    assert!(quotient(&one, &x, DenominatorFloor::Given(0.5), &GlobalOptions::default()).is_err());
    let tiny = affine(0.0, 1e-9, &dom);
    let err = quotient(&one, &tiny, DenominatorFloor::Estimate { samples: 64 }, &GlobalOptions::default()).unwrap_err();
    assert!(err.to_string().contains("ill-conditioned"), "{err}");
}

#[test]
fn estimated_floor_taints_provenance() {
    let dom = ConvexSet::interval(0.0, 1.0, false);
    let e = DCFunction::convex(&ConvexFn::oracle("exp", dom.clone(), |x: &[f64]| x[0].exp()));
    let q = quotient(&e, &e, DenominatorFloor::Estimate { samples: 256 }, &GlobalOptions::default()).unwrap();
    assert!(q.provenance().empirical);
    assert!((q.value(&[0.3]) - 1.0).abs() < 1e-15);
    passes(&q, 2_000);
}

#[test]
fn special_composition_with_lipschitz_parts() {
    let dom = ConvexSet::interval(-1.0, 1.0, false);
    let f = DCFunction::convex(&ConvexFn::squared_euclidean(1.0, dom.clone()).unwrap());
    let range = ConvexSet::interval(0.0, 1.0, false);
    let pair = DCPair::new(abs_on(&range), ConvexFn::zero(range.clone())).unwrap();
    let g = special_compose(
        &f.as_mapping(),
        &pair,
        &range,
        &LipschitzCertificate::analytic(1.0, range.clone()).unwrap(),
        &LipschitzCertificate::analytic(0.0, range.clone()).unwrap(),
    )
    .unwrap();
    for t in grid(-1.0, 1.0, 64) {
        assert!((g.value(&[t]) - t * t).abs() < 1e-12);
    }
    passes(&g, 5_000);
}

#[test]
fn special_composition_rejects_bad_certificate() {
    let range = ConvexSet::interval(0.0, 1.0, false);
    let dom = ConvexSet::interval(-1.0, 1.0, false);
    let f = DCFunction::convex(&ConvexFn::squared_euclidean(1.0, dom).unwrap());
    let pair = DCPair::new(ConvexFn::squared_euclidean(5.0, range.clone()).unwrap(), ConvexFn::zero(range.clone())).unwrap();
    let small = LipschitzCertificate::analytic(1.0, range.clone()).unwrap();
    assert!(special_compose(&f.as_mapping(), &pair, &range, &small, &small).is_err());
}

#[test]
fn quadratic_compositions() {
    let dom = ConvexSet::interval(-1.0, 1.0, false);
    let x = affine(1.0, 0.0, &dom);
    let pair = bundle(&[x.clone(), x.clone()]).unwrap();
    let q = quadratic_compose(&pair, &QuadraticForm::from_diagonal(&[1.0, -1.0]), &GlobalOptions::default()).unwrap();
    for t in grid(-1.0, 1.0, 32) {
        assert_eq!(q.value(&[t]), 0.0);
    }
    passes(&q, 2_000);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (a, b, c): (f64, f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let form = QuadraticForm::new(vec![vec![a, b], vec![b, c]]).unwrap();
    let mixed = bundle(&[DCFunction::convex(&abs_on(&dom)), x]).unwrap();
    let r = quadratic_compose(&mixed, &form, &GlobalOptions::default()).unwrap();
    for t in grid(-1.0, 1.0, 32) {
        let expected = a * t * t + 2.0 * b * t.abs() * t + c * t * t;
        assert!((r.value(&[t]) - expected).abs() < 1e-12);
    }
    passes(&r, 10_000);
}

#[test]
fn bilinear_matches_product_and_quadratic() {
    let dom = ConvexSet::interval(-1.5, 1.5, false);
    let f = from_pair(&DCPair::new(abs_on(&dom), ConvexFn::squared_euclidean(0.25, dom.clone()).unwrap()).unwrap()).unwrap();
    let g = affine(2.0, -0.5, &dom);
    let opts = GlobalOptions::default();
    let b = bilinear_product(&f.as_mapping(), &g.as_mapping(), &[vec![1.0]], &opts).unwrap();
    let p = product(&f, &g, &opts).unwrap();
    for t in grid(-1.5, 1.5, 64) {
        assert!((b.value(&[t]) - p.value(&[t])).abs() < 1e-10);
    }
    passes(&b, 5_000);

    let square = ConvexSet::boxed(vec![-1.0, -1.0], vec![1.0, 1.0], false);
    let id = DCFunction::affine(vec![1.0, 0.0], 0.0, square.clone()).unwrap();
    let id2 = DCFunction::affine(vec![0.0, 1.0], 0.0, square.clone()).unwrap();
    let ident = bundle(&[id, id2]).unwrap();
    let inner = bilinear_product(&ident, &ident, &[vec![1.0, 0.0], vec![0.0, 1.0]], &opts).unwrap();
    let quad = quadratic_compose(&ident, &QuadraticForm::scaled_identity(2, 1.0), &opts).unwrap();
    for p in [[0.3, -0.2], [1.0, 1.0], [-0.7, 0.4]] {
        assert_eq!(inner.value(&p), p[0] * p[0] + p[1] * p[1]);
        assert_eq!(inner.value(&p), quad.value(&p));
    }
}

#[test]
fn local_composition_agrees_with_global() {
    let dom = ConvexSet::interval(-3.0, 3.0, false);
    let f = from_pair(&DCPair::new(abs_on(&dom), ConvexFn::squared_euclidean(0.5, dom.clone()).unwrap()).unwrap()).unwrap();
    let opts = GlobalOptions::default();
    let global = compose_global(&f.as_mapping(), &exp_outer(), &opts).unwrap();
    let local = compose_local(&f.as_mapping(), &exp_outer(), &[1.0], 0.5, &opts).unwrap();
    for t in grid(0.5, 1.5, 32) {
        assert_eq!(local.value(&[t]), global.value(&[t]));
    }
    passes(&local, 2_000);
}

#[test]
fn constant_inner_map() {
    let dom = ConvexSet::interval(0.0, 1.0, false);
    let c = DCFunction::constant(0.7, dom).unwrap();
    let g = compose_global(&c.as_mapping(), &exp_outer(), &GlobalOptions::default()).unwrap();
    assert_eq!(g.value(&[0.5]), 0.7f64.exp());
    passes(&g, 1_000);
}

#[test]
fn provenance_records_composition() {
    let dom = ConvexSet::interval(0.0, 1.0, false);
    let c = DCFunction::constant(0.7, dom).unwrap().with_provenance(Provenance::new(ProvenanceTag::Primitive, "seven tenths"));
    let g = compose_global(&c.as_mapping(), &exp_outer(), &GlobalOptions::default()).unwrap();
    assert_eq!(g.provenance().tag, ProvenanceTag::Composed);
    assert!(g.provenance().chain.iter().any(|l| l.contains("seven tenths")));
}
