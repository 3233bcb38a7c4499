use dcx::gallery::{
    build_bump_sum, chyba_c1_c2, chyba_composed, chyba_d, chyba_g, chyba_grid, chyba_v, lipschitz_pair_witness, strexp_check,
    BumpPlacement, BumpSystem, NormBody, StrexpInput,
};
use dcx::verify::total_variation;
use dcx::{ConvexSet, GlobalOptions, HullBody, Norm, SamplingConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    refine(f, a, b, whole, eps, depth)
}

fn refine(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let left = (m - a) / 6.0 * (f(a) + 4.0 * f(lm) + f(m));
    let right = (b - m) / 6.0 * (f(m) + 4.0 * f(rm) + f(b));
    if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
        return left + right + (left + right - whole) / 15.0;
    }
    refine(f, a, m, left, eps / 2.0, depth - 1) + refine(f, m, b, right, eps / 2.0, depth - 1)
}

/// `∫_{−1}^{0} f` for a bounded-on-blocks step function, block by block so
/// breakpoints fall on interval ends.
fn blockwise_integral(f: &dyn Fn(f64) -> f64, blocks: i32) -> f64 {
    (1..=blocks)
        .map(|m| {
            let (a, b) = (-2f64.powi(1 - m), -2f64.powi(-m));
            // sample strictly inside so the half-open ends do not matter
            let inner = |t: f64| f(t.clamp(a, b - (b - a) * 1e-12));
            simpson(&inner, a, b, 1e-13, 30)
        })
        .sum()
}

#[test]
fn chyba_closed_forms_match_quadrature() {
    let g0 = chyba_g(0.0).unwrap();
    let (c1, c2) = chyba_c1_c2(0.0).unwrap();
    assert!((g0 - 2.0 / 3.0).abs() <= 1e-12);
    assert!((c1 - 1.0).abs() <= 1e-12);
    assert!((c1 - c2 - g0).abs() <= 1e-12);
    let d = |x: f64| f64::from(chyba_d(x).unwrap());
    let v = |x: f64| chyba_v(x).unwrap() as f64;
    assert!((blockwise_integral(&d, 60) - g0).abs() < 1e-6);
    assert!((blockwise_integral(&v, 60) - c1).abs() < 1e-6);
    // a plain adaptive rule across breakpoints still lands within 1e-6
    assert!((simpson(&d, -1.0, -1e-9, 1e-10, 48) - g0).abs() < 1e-6);
}

#[test]
fn chyba_identity_and_monotonicity() {
    let rows = chyba_grid(10_000).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for r in &rows {
        assert!((r.c1 - r.c2 - r.g).abs() <= 1e-12, "{r:?}");
        assert!(r.g >= prev);
        prev = r.g;
    }
    assert_eq!(rows.len(), 10_000);
    assert!(rows.last().unwrap().v.is_none());
}

#[test]
fn chyba_right_slopes_are_the_indicator() {
    for k in 1..=20 {
        for j in 0..8 {
            let x = -1.0 + j as f64 * 2f64.powi(-k) * 0.5;
            if x >= 0.0 {
                continue;
            }
            let h = 2f64.powi(-(k + 30));
            let slope = (chyba_g(x + h).unwrap() - chyba_g(x).unwrap()) / h;
            assert!((slope - f64::from(chyba_d(x).unwrap())).abs() < 1e-6, "x = {x}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let (a, b): (f64, f64) = (-rng.gen::<f64>(), -rng.gen::<f64>());
        let gap = (chyba_g(a).unwrap() - chyba_g(b).unwrap()).abs();
        assert!(gap <= (a - b).abs() * (1.0 + 1e-9) + 1e-15);
    }
}

#[test]
fn variation_just_left_of_block_ends() {
    // x = −2^{−n} − 10⁻⁹ lies in block n, so v = n − 1
    for n in 1..=20 {
        let x = -2f64.powi(-n) - 1e-9;
        let d = |t: f64| f64::from(chyba_d(t).unwrap());
        let tv = total_variation(&d, -1.0, x, 2 * n as u32 + 4).unwrap();
        assert_eq!(chyba_v(x).unwrap(), (n - 1) as u64);
        assert_eq!(tv, (n - 1) as f64, "n = {n}");
    }
    let d = |t: f64| f64::from(chyba_d(t).unwrap());
    assert_eq!(total_variation(&d, -1.0, -2f64.powi(-5), 12).unwrap(), 5.0);
}

#[test]
fn lipschitz_pair_witness_grows() {
    for l in 1..=20 {
        let w = lipschitz_pair_witness(l).unwrap();
        assert!(w.exceeds, "{w:?}");
        assert_eq!(w.variation, f64::from(2 * l + 3));
    }
}

#[test]
fn composed_is_even() {
    assert_eq!(chyba_composed(0.0).unwrap(), 2.0 / 3.0);
    assert_eq!(chyba_composed(0.5).unwrap(), 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(-1.0..1.0);
        assert_eq!(chyba_composed(x).unwrap(), chyba_composed(-x).unwrap());
    }
    assert!(chyba_composed(1.5).is_err());
}

#[test]
fn strong_exposure_fixtures() {
    for delta in [0.01, 0.1, 0.4] {
        let l1 = strexp_check(&StrexpInput {
            body: NormBody::Standard {
                norm: Norm::L1,
                dimension: 2,
            },
            e: vec![1.0, 0.0],
            e_star: vec![1.0, 0.0],
            c: 2.0,
            delta,
            samples: 50_000,
            seed: 7,
        })
        .unwrap();
        assert!(l1.pass, "{}", l1.summary());
        let hull = HullBody::with_basis_points(0.5, Norm::Linf, 2).unwrap();
        let r = strexp_check(&StrexpInput {
            body: NormBody::Hull(hull),
            e: vec![1.0, 0.0],
            e_star: vec![1.0, 0.0],
            c: 2.0 / (1.0 - 0.5),
            delta,
            samples: 50_000,
            seed: 7,
        })
        .unwrap();
        assert!(r.pass, "{}", r.summary());
    }
}

fn system() -> BumpSystem {
    BumpSystem::standard(2, vec![vec![1.0, 0.0], vec![-0.5, 2.0]], None, None).unwrap()
}

#[test]
fn bump_mapping_properties() {
    let sys = system();
    let h = sys.control().unwrap();
    assert_eq!(h.value(&[0.0, 0.0]), 0.0);
    for n in 0..2 {
        assert_eq!(sys.h_map(&sys.basis(n)), sys.targets[n]);
    }
    let phi = sys.scaled().unwrap();
    for n in 0..2 {
        let half: Vec<f64> = sys.basis(n).iter().map(|v| v / 2.0).collect();
        assert_eq!(phi.apply(&half), sys.targets[n]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let z = Norm::Linf.sample_sphere(&mut rng, 2);
        let x: Vec<f64> = z.iter().map(|v| 1.01 * v).collect();
        assert_eq!(phi.apply(&x), vec![0.0, 0.0]);
    }
    // image lies on [0, y_n]; sample near the peaks so regions are hit
    for _ in 0..10_000 {
        let n = rng.gen_range(0..2);
        let r = sys.containment_radius();
        let x: Vec<f64> = sys.basis(n).iter().map(|v| v + rng.gen_range(-r..r)).collect();
        let y = sys.h_map(&x);
        let t = y.iter().zip(&sys.targets[n]).map(|(a, b)| a * b).sum::<f64>()
            / sys.targets[n].iter().map(|b| b * b).sum::<f64>();
        assert!((-1e-12..=1.0 + 1e-12).contains(&t), "t = {t}");
        for (a, b) in y.iter().zip(&sys.targets[n]) {
            assert!((a - t * b).abs() < 1e-12);
        }
    }
    let region = ConvexSet::boxed(vec![-1.2, -1.2], vec![1.2, 1.2], false);
    let report = phi
        .check_control(&SamplingConfig::default().on(region).with_segments(10_000).with_duals(64))
        .unwrap();
    assert!(report.pass, "{}", report.summary());
}

#[test]
fn bump_regions_are_contained_and_continuous() {
    let sys = system();
    for n in 0..2 {
        let e = sys.basis(n);
        for p in sys.boundary_points(n, 256, 1) {
            assert!(Norm::Linf.dist(&p, &e) <= sys.containment_radius());
            assert!(sys.bracket(n, &p).abs() < 1e-8);
        }
    }
}

fn bump_domain() -> ConvexSet {
    ConvexSet::boxed(vec![-1.0, -1.0], vec![1.0, 1.0], true)
}

fn placements() -> Vec<BumpPlacement> {
    [[0.5, 0.0], [-0.5, 0.0], [0.0, 0.5]]
        .iter()
        .map(|c| BumpPlacement {
            centre: c.to_vec(),
            scale: 0.15,
        })
        .collect()
}

#[test]
fn bump_sum_single_bump_matches_transplant() {
    let sys = system();
    let region = ConvexSet::boxed(vec![-0.9, -0.9], vec![0.9, 0.9], false);
    let one = &placements()[..1];
    let f = build_bump_sum(&bump_domain(), &sys, one, &GlobalOptions::default().on(region)).unwrap();
    let t = sys.transplanted(&one[0].centre, one[0].scale).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..2000 {
        let x = vec![rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)];
        assert_eq!(f.apply(&x), t.apply(&x));
    }
}

#[test]
fn bump_sum_of_three() {
    let sys = system();
    let region = ConvexSet::boxed(vec![-0.9, -0.9], vec![0.9, 0.9], false);
    let bumps = placements();
    let f = build_bump_sum(&bump_domain(), &sys, &bumps, &GlobalOptions::default().on(region.clone())).unwrap();
    let singles: Vec<_> = bumps.iter().map(|b| sys.transplanted(&b.centre, b.scale).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..2000 {
        let x = vec![rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)];
        let active: Vec<Vec<f64>> = singles
            .iter()
            .map(|s| s.apply(&x))
            .filter(|y| y.iter().any(|v| *v != 0.0))
            .collect();
        assert!(active.len() <= 1);
        assert_eq!(f.apply(&x), active.first().cloned().unwrap_or(vec![0.0, 0.0]));
    }
    let report = f.check_control(&SamplingConfig::default().on(region)).unwrap();
    assert!(report.pass, "{}", report.summary());
}

#[test]
fn overlapping_bumps_are_rejected() {
    let sys = system();
    let bumps = vec![
        BumpPlacement {
            centre: vec![0.1, 0.0],
            scale: 0.15,
        },
        BumpPlacement {
            centre: vec![-0.1, 0.0],
            scale: 0.15,
        },
    ];
    let err = build_bump_sum(&bump_domain(), &sys, &bumps, &GlobalOptions::default()).unwrap_err();
    assert!(err.to_string().contains("overlapping"), "{err}");
}
