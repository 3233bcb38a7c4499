use dcx::glue::{build_exhaustion, dc_from_local, glue, glue_dc, Exhaustion, GlueOptions};
use dcx::verify::check_midpoint_convex;
use dcx::{ConvexFn, ConvexSet, DCFunction, Provenance, ProvenanceTag, SamplingConfig};
use std::sync::Arc;

fn sine_stages(n: usize) -> Exhaustion {
    let stages = (1..=n)
        .map(|k| ConvexSet::interval(-(k as f64) + 0.1, k as f64 - 0.1, true))
        .collect();
    Exhaustion::new(ConvexSet::whole(1), stages).unwrap()
}

fn half_square() -> ConvexFn {
    ConvexFn::squared_euclidean(0.5, ConvexSet::whole(1)).unwrap()
}

fn glued_sine(n: usize, opts: &GlueOptions) -> DCFunction {
    let ex = sine_stages(n);
    let (f, _) = glue_dc(Arc::new(|x: &[f64]| x[0].sin()), &ex, vec![half_square(); n], opts, "sin").unwrap();
    f
}

#[test]
fn glued_control_for_sine() {
    let n = 5;
    let f = glued_sine(n, &GlueOptions::default());
    let region = ConvexSet::interval(-((n - 2) as f64), (n - 2) as f64, false);
    let report = f.check_control(&SamplingConfig::default().on(region)).unwrap();
    assert!(report.pass, "{}", report.summary());
}

#[test]
fn stabilization_is_exact() {
    let opts = GlueOptions::default();
    let short = glue(&sine_stages(3), vec![half_square(); 3], &opts).unwrap();
    let long = glue(&sine_stages(6), vec![half_square(); 6], &opts).unwrap();
    for i in 0..=200 {
        let x = -0.9 + 1.8 * i as f64 / 200.0;
        assert_eq!(short.control.value(&[x]).to_bits(), long.control.value(&[x]).to_bits());
    }
}

#[test]
fn locality_and_monotonicity() {
    let g = glue(&sine_stages(6), vec![half_square(); 6], &GlueOptions::default()).unwrap();
    let stages = sine_stages(6);
    for (n, f_n) in g.partial.iter().enumerate() {
        let d_n = &stages.stages()[n];
        for i in 0..=400 {
            let x = [-6.5 + 13.0 * i as f64 / 400.0];
            let v = g.control.value(&x);
            assert!(f_n.value(&x) >= 0.0);
            if let Some(next) = g.partial.get(n + 1) {
                assert!(next.value(&x) >= f_n.value(&x));
            }
            if d_n.contains(&x).unwrap() {
                assert_eq!(v, f_n.value(&x));
            }
        }
    }
}

#[test]
fn overestimated_sups_remain_valid() {
    let opts = GlueOptions {
        sup_multiplier: 2.0,
        ..GlueOptions::default()
    };
    let f = glued_sine(5, &opts);
    let region = ConvexSet::interval(-3.0, 3.0, false);
    let report = f.check_control(&SamplingConfig::default().on(region.clone())).unwrap();
    assert!(report.pass, "{}", report.summary());
    let control = f.control().clone();
    let mid = check_midpoint_convex(&move |x: &[f64]| control.value(x), &region, 100_000, 1e-8, 4).unwrap();
    assert!(mid.pass, "{}", mid.summary());
}

#[test]
fn glued_control_is_convex_on_the_line() {
    let g = glue(&sine_stages(5), vec![half_square(); 5], &GlueOptions::default()).unwrap();
    let control = g.control.clone();
    let region = ConvexSet::interval(-6.0, 6.0, false);
    let r = check_midpoint_convex(&move |x: &[f64]| control.value(x), &region, 100_000, 1e-8, 1).unwrap();
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn degenerate_exhaustion_keeps_the_control() {
    let c = ConvexSet::interval(-1.0, 1.0, true);
    let ex = Exhaustion::degenerate(c.clone(), 4).unwrap();
    let gamma = ConvexFn::squared_euclidean(1.0, c.clone()).unwrap();
    let g = glue(&ex, vec![gamma.clone(); 4], &GlueOptions::default()).unwrap();
    let shift = g.family.shifts()[1];
    for i in 0..=50 {
        let x = [-0.99 + 1.98 * i as f64 / 50.0];
        assert!((g.control.value(&x) - (gamma.value(&x) + shift)).abs() < 1e-12);
    }
}

#[test]
fn ball_exhaustion_radii() {
    let ball = ConvexSet::open_ball(vec![0.0, 0.0], 1.0);
    let sets: Vec<ConvexSet> = (1..=4)
        .map(|n| ConvexSet::open_ball(vec![0.0, 0.0], 1.0 - 1.0 / (n as f64 + 1.0)))
        .collect();
    let ex = build_exhaustion(ball, &sets, 0.1).unwrap();
    for (i, d) in ex.stages().iter().enumerate() {
        let n = (i + 1) as f64;
        let expected = ConvexSet::open_ball(vec![0.0, 0.0], 1.0 - 1.0 / (n + 1.0) - 0.1 / n);
        let (dcx::Shape::Ball { radius: a, .. }, dcx::Shape::Ball { radius: b, .. }) = (&d.shape, &expected.shape) else {
            panic!("not a ball: {d:?}");
        };
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn missing_gap_is_an_input_error() {
    let stages = vec![ConvexSet::interval(-1.0, 1.0, false), ConvexSet::interval(-1.0, 2.0, true)];
    assert!(matches!(Exhaustion::new(ConvexSet::whole(1), stages), Err(dcx::Error::Input(_))));
}

fn square_patch(lo: f64, hi: f64) -> (ConvexSet, DCFunction) {
    let patch = ConvexSet::interval(lo, hi, false);
    let sq = ConvexFn::squared_euclidean(1.0, ConvexSet::whole(1)).unwrap();
    let f = DCFunction::new(
        patch.clone(),
        |x| x[0] * x[0],
        sq,
        Provenance::new(ProvenanceTag::Primitive, format!("x² on [{lo}, {hi}]")),
    )
    .unwrap();
    (patch, f)
}

#[test]
fn local_patches_glue() {
    let region = ConvexSet::interval(-1.5, 1.5, false);
    let f = dc_from_local(&region, &[square_patch(-2.0, 0.5), square_patch(-0.5, 2.0)], 3).unwrap();
    let report = f.check_control(&SamplingConfig::default()).unwrap();
    assert!(report.pass, "{}", report.summary());
    assert_eq!(f.value(&[1.2]), 1.44);
}

#[test]
fn single_patch_is_returned() {
    let region = ConvexSet::interval(-1.0, 1.0, false);
    let (patch, f) = square_patch(-2.0, 2.0);
    let g = dc_from_local(&region, &[(patch, f.clone())], 0).unwrap();
    assert_eq!(g.provenance(), f.provenance());
}

#[test]
fn local_patch_errors() {
    let region = ConvexSet::interval(-1.5, 1.5, false);
    let err = dc_from_local(&region, &[square_patch(-2.0, 0.0), square_patch(0.5, 2.0)], 0).unwrap_err();
    assert!(err.to_string().contains("uncovered"), "{err}");
    let (p, _) = square_patch(-0.5, 2.0);
    let shifted = DCFunction::new(
        p.clone(),
        |x| x[0] * x[0] + 1.0,
        ConvexFn::zero(ConvexSet::whole(1)),
        Provenance::new(ProvenanceTag::Primitive, "shifted"),
    )
    .unwrap();
    let err = dc_from_local(&region, &[square_patch(-2.0, 0.5), (p, shifted)], 0).unwrap_err();
    assert!(err.to_string().contains("disagree"), "{err}");
}
