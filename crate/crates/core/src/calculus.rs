//! Constructors that build d.c. functions from d.c. pieces with explicit controls.
//!
//! The workhorse is [`compose`]: if `f` controls `F: A → B`, `g` controls
//! `G` on `B`, and both `G` and `g` are Lipschitz on `B`, then
//! `g∘F + (Lip G + Lip g)·f` controls `G∘F`. [`compose_global`] runs this on
//! each stage of an exhaustion of the domain and glues the stage controls.

use crate::dc::{bundle, from_pair, DCFunction, DCMapping, DCPair, Provenance, ProvenanceTag};
use crate::error::{check_dim, Error, Result};
use crate::functions::{c11_dc_split, lipschitz_extension, quadratic_dc_split, ConvexFn, HessianBound, QuadraticForm, ScalarFn};
use crate::geometry::{ConvexSet, Shape};
use crate::glue::{glue, Exhaustion, GlueOptions};
use crate::norm::Norm;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::Arc;

/// Safety factor for empirically estimated Lipschitz constants.
const EMPIRICAL_SAFETY: f64 = 1.5;
/// Relative inflation of sampled ranges.
const RANGE_INFLATION: f64 = 1.25;
/// Largest range dimension for which box vertices are enumerated.
const MAX_VERTEX_DIM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LipschitzOrigin {
    CertifiedAnalytic,
    /// From the oscillation of a convex function on a larger set.
    Oscillation,
    Empirical,
}

/// An upper bound for a Lipschitz constant on a set.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzCertificate {
    pub constant: f64,
    pub scope: ConvexSet,
    pub origin: LipschitzOrigin,
}

impl LipschitzCertificate {
    pub fn analytic(constant: f64, scope: ConvexSet) -> Result<Self> {
        if !(constant >= 0.0) || !constant.is_finite() {
            return Err(Error::input(format!("Lipschitz constant must be nonnegative, got {constant}")));
        }
        Ok(LipschitzCertificate {
            constant,
            scope,
            origin: LipschitzOrigin::CertifiedAnalytic,
        })
    }

    /// A sampled estimate, enlarged by the safety factor.
    pub fn empirical(estimate: f64, scope: ConvexSet) -> Result<Self> {
        let mut c = Self::analytic(EMPIRICAL_SAFETY * estimate, scope)?;
        c.origin = LipschitzOrigin::Empirical;
        Ok(c)
    }

    /// Lipschitz bound of a convex `u` on `[lo, hi]` from its values on the box grown by `r`.
    ///
    /// The grown box is symmetric about its centre `c`, so `inf u ≥ 2u(c) − sup u`,
    /// and `sup u` is attained at a vertex; the oscillation over `r` bounds the slope
    /// in any norm dominating the max norm.
    pub fn from_oscillation(u: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::input(format!("oscillation radius must be positive, got {r}")));
        }
        let glo: Vec<f64> = lo.iter().map(|v| v - r).collect();
        let ghi: Vec<f64> = hi.iter().map(|v| v + r).collect();
        let centre: Vec<f64> = glo.iter().zip(&ghi).map(|(a, b)| 0.5 * (a + b)).collect();
        let sup = box_vertices(&glo, &ghi)?
            .iter()
            .map(|v| u(v))
            .fold(f64::NEG_INFINITY, f64::max);
        let osc = 2.0 * (sup - u(&centre)).max(0.0);
        if !osc.is_finite() {
            return Err(Error::precondition("outer function is not finite on the grown range box"));
        }
        Ok(LipschitzCertificate {
            constant: osc / r,
            scope: range_box(lo.to_vec(), hi.to_vec()),
            origin: LipschitzOrigin::Oscillation,
        })
    }

    /// Fails when sampled difference quotients of `f` on the scope exceed the constant.
    pub fn spot_check(&self, f: &dyn Fn(&[f64]) -> f64, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let est = crate::functions::estimate_lipschitz(f, &self.scope, samples, &mut rng)?;
        if est > self.constant * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::precondition(format!(
                "Lipschitz certificate {} is below the sampled slope {est}",
                self.constant
            )));
        }
        Ok(est)
    }
}

fn range_box(lo: Vec<f64>, hi: Vec<f64>) -> ConvexSet {
    if lo.len() == 1 {
        ConvexSet::interval(lo[0], hi[0], false)
    } else {
        ConvexSet::boxed(lo, hi, false)
    }
}

fn box_vertices(lo: &[f64], hi: &[f64]) -> Result<Vec<Vec<f64>>> {
    let d = lo.len();
    if d > MAX_VERTEX_DIM {
        return Err(Error::Unsupported(format!("range boxes of dimension {d}")));
    }
    Ok((0..1usize << d)
        .map(|mask| (0..d).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect())
        .collect())
}

/// Seeded probe points of a set: its vertices (when few) and uniform samples.
fn probe_points(set: &ConvexSet, samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = match set.vertices() {
        Some(vs) if vs.len() <= 4096 => vs,
        _ => Vec::new(),
    };
    pts.push(set.anchor()?);
    for _ in 0..samples {
        pts.push(set.sample(&mut rng)?);
    }
    Ok(pts)
}

/// `G∘F` with control `g∘F + (Lip G + Lip g)·f`.
pub fn compose(
    inner: &DCMapping,
    outer: &DCMapping,
    lip_outer: &LipschitzCertificate,
    lip_outer_control: &LipschitzCertificate,
) -> Result<DCMapping> {
    check_dim(outer.dim(), inner.output_dim())?;
    if inner.domain().is_bounded() {
        for x in probe_points(inner.domain(), 1024, 0)? {
            let y = inner.apply(&x);
            if !outer.domain().contains_closure(&y, 1e-12) {
                return Err(Error::precondition(format!(
                    "range escape: F({x:?}) = {y:?} leaves the domain of the outer map"
                )));
            }
        }
    }
    let weight = lip_outer.constant + lip_outer_control.constant;
    let control = ConvexFn::composed_control(
        outer.control().clone(),
        inner.map().clone(),
        inner.control().clone(),
        weight,
    )?;
    let mut prov = Provenance::derived(
        ProvenanceTag::Composed,
        format!("outer∘inner with weight {weight}"),
        &[inner.provenance(), outer.provenance()],
    );
    if [lip_outer, lip_outer_control]
        .iter()
        .any(|c| c.origin == LipschitzOrigin::Empirical)
    {
        prov = prov.mark_empirical("empirical Lipschitz certificate");
    }
    DCMapping::new(
        inner.domain().clone(),
        inner.map().then(outer.map()),
        control,
        outer.codomain_norm(),
        prov,
    )
}

/// A real function on (a subset of) `ℝⁿ` that supplies controls on boxes.
pub trait OuterFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, y: &[f64]) -> f64;
    /// Owned handle on [`OuterFunction::value`].
    fn value_fn(&self) -> ScalarFn;
    /// A control of the function valid on the closed box `[lo, hi]`.
    fn local_control(&self, lo: &[f64], hi: &[f64]) -> Result<ConvexFn>;
    /// How far `[lo, hi]` may be grown while staying where controls exist.
    fn admissible_margin(&self, _lo: &[f64], _hi: &[f64]) -> f64 {
        f64::INFINITY
    }
    /// Trims a sampled range box using what is known about the range.
    fn clip_range(&self, _lo: &mut [f64], _hi: &mut [f64]) {}
    fn label(&self) -> String;
    fn empirical(&self) -> bool {
        false
    }
}

impl OuterFunction for DCFunction {
    fn dim(&self) -> usize {
        DCFunction::dim(self)
    }

    fn value(&self, y: &[f64]) -> f64 {
        DCFunction::value(self, y)
    }

    fn value_fn(&self) -> ScalarFn {
        DCFunction::value_fn(self)
    }

    fn local_control(&self, lo: &[f64], hi: &[f64]) -> Result<ConvexFn> {
        self.control().restrict(range_box(lo.to_vec(), hi.to_vec()))
    }

    fn admissible_margin(&self, lo: &[f64], hi: &[f64]) -> f64 {
        match self.domain().shape {
            Shape::Whole { .. } => f64::INFINITY,
            _ => {
                let b = range_box(lo.to_vec(), hi.to_vec()).with_norm(Norm::Linf);
                let dom = self.domain().clone().with_norm(Norm::Linf);
                b.compactly_contained_in(&dom).ok().flatten().unwrap_or(0.0)
            }
        }
    }

    fn label(&self) -> String {
        self.provenance().label.clone()
    }

    fn empirical(&self) -> bool {
        self.provenance().empirical
    }
}

/// `(u, v) ↦ u / v` on the band where `v` keeps one sign and `|v| ≥ floor`.
#[derive(Clone, Debug)]
pub struct QuotientOuter {
    floor: f64,
    positive: bool,
    empirical: bool,
}

impl QuotientOuter {
    pub fn new(floor: f64, positive: bool) -> Result<Self> {
        if !(floor > 0.0) || !floor.is_finite() {
            return Err(Error::input(format!("denominator floor must be positive, got {floor}")));
        }
        Ok(QuotientOuter {
            floor,
            positive,
            empirical: false,
        })
    }

    fn nearest(&self, lo: &[f64], hi: &[f64]) -> f64 {
        if self.positive {
            lo[1]
        } else {
            -hi[1]
        }
    }
}

impl OuterFunction for QuotientOuter {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, y: &[f64]) -> f64 {
        y[0] / y[1]
    }

    fn value_fn(&self) -> ScalarFn {
        Arc::new(|y: &[f64]| y[0] / y[1])
    }

    /// `(M/2)‖y‖²` with `M = 2(U + m)/m³` bounding the Hessian of `u/v`
    /// for `|u| ≤ U` and `|v| ≥ m` on the box.
    fn local_control(&self, lo: &[f64], hi: &[f64]) -> Result<ConvexFn> {
        let m = self.nearest(lo, hi);
        if !(m > 0.0) {
            return Err(Error::precondition(format!(
                "quotient box [{}, {}] reaches a zero denominator",
                lo[1], hi[1]
            )));
        }
        let u = lo[0].abs().max(hi[0].abs());
        let bound = 2.0 * (u + m) / (m * m * m);
        let split = c11_dc_split(
            "u/v",
            Arc::new(|y: &[f64]| y[0] / y[1]),
            Arc::new(|y: &[f64]| vec![1.0 / y[1], -y[0] / (y[1] * y[1])]),
            range_box(lo.to_vec(), hi.to_vec()),
            HessianBound::Given(bound),
        )?;
        Ok(split.control().clone())
    }

    fn admissible_margin(&self, lo: &[f64], hi: &[f64]) -> f64 {
        (self.nearest(lo, hi) - 0.5 * self.floor) / 2.0
    }

    fn clip_range(&self, lo: &mut [f64], hi: &mut [f64]) {
        if self.positive {
            lo[1] = lo[1].max(self.floor);
            hi[1] = hi[1].max(lo[1]);
        } else {
            hi[1] = hi[1].min(-self.floor);
            lo[1] = lo[1].min(hi[1]);
        }
    }

    fn label(&self) -> String {
        "u/v".into()
    }

    fn empirical(&self) -> bool {
        self.empirical
    }
}

/// Settings for [`compose_global`].
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalOptions {
    /// Bounded region where the result must be certified; required for unbounded domains.
    pub region: Option<ConvexSet>,
    /// Number of exhaustion stages; the result is certified on the second to last.
    pub stages: usize,
    pub range_samples: usize,
    pub seed: u64,
    pub glue: GlueOptions,
}

impl Default for GlobalOptions {
    fn default() -> Self {
        GlobalOptions {
            region: None,
            stages: 4,
            range_samples: 4096,
            seed: 0,
            glue: GlueOptions::default(),
        }
    }
}

impl GlobalOptions {
    pub fn on(mut self, region: ConvexSet) -> Self {
        self.region = Some(region);
        self
    }
}

/// Stages `D_k` of the domain with `region ⊆ D_{N−1}`, or the single set `A` when no region is asked for.
pub(crate) fn composition_stages(domain: &ConvexSet, opts: &GlobalOptions) -> Result<Exhaustion> {
    let Some(region) = &opts.region else {
        if !domain.is_bounded() {
            return Err(Error::input(
                "composition on an unbounded domain needs a bounded working region",
            ));
        }
        return Exhaustion::degenerate(domain.clone(), 2);
    };
    check_dim(domain.dim(), region.dim())?;
    if !region.is_bounded() {
        return Err(Error::input("the working region must be bounded"));
    }
    if opts.stages < 2 {
        return Err(Error::input(format!("need at least 2 stages, got {}", opts.stages)));
    }
    if domain.is_bounded() && !domain.is_open() && region_within_closed(region, domain) {
        return Exhaustion::degenerate(domain.clone(), 2);
    }
    let slack = region
        .compactly_contained_in(domain)?
        .ok_or_else(|| Error::input("the working region is not compactly inside the domain"))?;
    let (lo, hi) = region.bounding_box().expect("bounded region");
    let anchor: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let half = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (b - a)).fold(0.0, f64::max);
    let sets: Vec<ConvexSet> = (1..=opts.stages)
        .map(|k| {
            if domain.is_bounded() {
                Ok(domain.clone())
            } else {
                let r = half + k as f64;
                let l: Vec<f64> = anchor.iter().map(|a| a - r).collect();
                let h: Vec<f64> = anchor.iter().map(|a| a + r).collect();
                domain.intersect_box(&l, &h)
            }
        })
        .collect::<Result<_>>()?;
    let delta = (0.5 * slack).min(0.5 * sets[0].inradius()?).min(0.5);
    crate::glue::build_exhaustion(domain.clone(), &sets, delta)
}

fn region_within_closed(region: &ConvexSet, domain: &ConvexSet) -> bool {
    match region.vertices() {
        Some(vs) if !vs.is_empty() => vs.iter().all(|v| domain.contains_closure(v, 0.0)),
        _ => region == domain,
    }
}

/// Local control `g∘F + (Lip G + Lip g)·f` of `g∘F` on one stage.
fn stage_control(inner: &DCMapping, outer: &dyn OuterFunction, stage: &ConvexSet, opts: &GlobalOptions, k: usize) -> Result<(ConvexFn, bool)> {
    let pts = probe_points(stage, opts.range_samples, opts.seed.wrapping_add(k as u64))?;
    let m = inner.output_dim();
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for p in &pts {
        for (i, y) in inner.apply(p).into_iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::precondition(format!("inner mapping is not finite at {p:?}")));
            }
            lo[i] = lo[i].min(y);
            hi[i] = hi[i].max(y);
        }
    }
    for i in 0..m {
        let mid = 0.5 * (lo[i] + hi[i]);
        let half = RANGE_INFLATION * 0.5 * (hi[i] - lo[i]) + 1e-3 * (1.0 + mid.abs());
        lo[i] = mid - half;
        hi[i] = mid + half;
    }
    outer.clip_range(&mut lo, &mut hi);
    let widest = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (b - a)).fold(0.0, f64::max);
    let margin = outer.admissible_margin(&lo, &hi);
    let r = (0.25 * widest).clamp(1e-3, 1.0).min(margin);
    if !(r > 0.0) {
        return Err(Error::precondition(format!(
            "range of the inner mapping on stage {k} touches the edge of the outer domain"
        )));
    }
    let glo: Vec<f64> = lo.iter().map(|v| v - r).collect();
    let ghi: Vec<f64> = hi.iter().map(|v| v + r).collect();
    let g_ctrl = outer.local_control(&glo, &ghi)?;
    let plus = |y: &[f64]| outer.value(y) + g_ctrl.value(y);
    let minus = |y: &[f64]| -outer.value(y) + g_ctrl.value(y);
    let lp = LipschitzCertificate::from_oscillation(&plus, &lo, &hi, r)?.constant;
    let lm = LipschitzCertificate::from_oscillation(&minus, &lo, &hi, r)?.constant;
    // g = (u₊ − u₋)/2 and its control (u₊ + u₋)/2 share the bound
    let lip = 0.5 * (lp + lm);
    let control = ConvexFn::composed_control(
        g_ctrl.restrict(range_box(glo, ghi))?,
        inner.map().clone(),
        inner.control().restrict(stage.clone())?,
        2.0 * lip,
    )?;
    Ok((control, outer.empirical()))
}

/// `g∘F` for a mapping `F` on `A` and a real outer function, with a glued control.
pub fn compose_global(inner: &DCMapping, outer: &dyn OuterFunction, opts: &GlobalOptions) -> Result<DCFunction> {
    check_dim(outer.dim(), inner.output_dim())?;
    let ex = composition_stages(inner.domain(), opts)?;
    let degenerate = ex.stages().windows(2).all(|w| w[0] == w[1]);
    let stage_set: Vec<ConvexSet> = if degenerate {
        vec![ex.stages()[0].clone()]
    } else {
        ex.stages().to_vec()
    };
    let built: Vec<(ConvexFn, bool)> = stage_set
        .par_iter()
        .enumerate()
        .map(|(k, s)| stage_control(inner, outer, s, opts, k + 1).map_err(|e| e.at_stage(k + 1)))
        .collect::<Result<_>>()?;
    let empirical = built.iter().any(|(_, e)| *e);
    let controls: Vec<ConvexFn> = if degenerate {
        vec![built[0].0.clone(); ex.len()]
    } else {
        built.into_iter().map(|(c, _)| c).collect()
    };
    let glued = glue(&ex, controls, &opts.glue)?;
    let domain = opts.region.clone().unwrap_or_else(|| glued.certified_on.clone());
    let map = inner.map().clone();
    let value_outer = outer.value_fn();
    let mut prov = Provenance::derived(
        ProvenanceTag::Composed,
        format!("{} ∘ mapping over {} stages", outer.label(), ex.len()),
        &[inner.provenance()],
    );
    if empirical {
        prov = prov.mark_empirical("outer function uses estimated constants");
    }
    DCFunction::new(
        domain.clone(),
        move |x| value_outer(&map.apply(x)),
        glued.control.restrict(domain)?,
        prov,
    )
}


/// `g∘F` built only on `A ∩ [a − r, a + r]`.
pub fn compose_local(inner: &DCMapping, outer: &dyn OuterFunction, centre: &[f64], radius: f64, opts: &GlobalOptions) -> Result<DCFunction> {
    check_dim(inner.dim(), centre.len())?;
    if !(radius > 0.0) {
        return Err(Error::input(format!("local radius must be positive, got {radius}")));
    }
    let lo: Vec<f64> = centre.iter().map(|c| c - radius).collect();
    let hi: Vec<f64> = centre.iter().map(|c| c + radius).collect();
    let patch = inner.domain().intersect_box(&lo, &hi)?;
    let patch = match patch.shape {
        Shape::Box { lo, hi, .. } => range_box(lo, hi),
        Shape::Interval { a, b, .. } => ConvexSet::interval(a, b, false),
        _ => patch,
    }
    .with_norm(inner.domain().norm);
    let local = inner.restrict(patch)?;
    compose_global(&local, outer, &GlobalOptions {
        region: None,
        ..opts.clone()
    })
}

/// The d.c. function `(u, v) ↦ uv` on `ℝ²` with control `(u² + v²)/2`.
pub fn product_outer() -> DCFunction {
    let plane = ConvexSet::whole(2);
    let control = ConvexFn::squared_euclidean(0.5, plane.clone()).expect("positive coefficient");
    DCFunction::new(
        plane,
        |y| y[0] * y[1],
        control,
        Provenance::new(ProvenanceTag::Split, "uv = ((u+v)² − (u−v)²)/4"),
    )
    .expect("matching dimensions")
}

fn shared_domain(f1: &DCFunction, f2: &DCFunction) -> Result<()> {
    if f1.domain() != f2.domain() {
        return Err(Error::input(format!(
            "operands live on different domains ({} vs {})",
            f1.domain().kind_name(),
            f2.domain().kind_name()
        )));
    }
    Ok(())
}

/// `f₁·f₂` through the outer function `uv`.
pub fn product(f1: &DCFunction, f2: &DCFunction, opts: &GlobalOptions) -> Result<DCFunction> {
    shared_domain(f1, f2)?;
    compose_global(&bundle(&[f1.clone(), f2.clone()])?, &product_outer(), opts)
}

/// How the denominator is kept away from zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DenominatorFloor {
    /// `|f₂| ≥ m` is known.
    Given(f64),
    /// Half the smallest sampled `|f₂|`; the result is marked empirical.
    Estimate { samples: usize },
}

/// `f₁/f₂` through `u/v` on the band `|v| ≥ m`.
pub fn quotient(f1: &DCFunction, f2: &DCFunction, floor: DenominatorFloor, opts: &GlobalOptions) -> Result<DCFunction> {
    shared_domain(f1, f2)?;
    let region = opts.region.clone().unwrap_or_else(|| f2.domain().clone());
    let samples = match floor {
        DenominatorFloor::Given(_) => opts.range_samples,
        DenominatorFloor::Estimate { samples } => samples.max(2),
    };
    let values: Vec<f64> = probe_points(&region, samples, opts.seed)?
        .iter()
        .map(|x| f2.value(x))
        .collect();
    let positive = values.first().is_some_and(|v| *v > 0.0);
    if let Some(bad) = values.iter().find(|v| !(if positive { **v > 0.0 } else { **v < 0.0 })) {
        return Err(Error::precondition(format!(
            "denominator changes sign or vanishes (sampled value {bad})"
        )));
    }
    let smallest = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let (m, empirical) = match floor {
        DenominatorFloor::Given(m) => {
            if smallest < m * (1.0 - 1e-12) {
                return Err(Error::precondition(format!(
                    "denominator floor {m} violated: sampled |f₂| = {smallest}"
                )));
            }
            (m, false)
        }
        DenominatorFloor::Estimate { .. } => (0.5 * smallest, true),
    };
    if m < 1e-6 {
        return Err(Error::precondition(format!(
            "denominator floor {m} is below 1e-6; the quotient is ill-conditioned"
        )));
    }
    let mut outer = QuotientOuter::new(m, positive)?;
    outer.empirical = empirical;
    compose_global(&bundle(&[f1.clone(), f2.clone()])?, &outer, opts)
}

/// `g∘F` for `g = g₊ − g₋` with Lipschitz convex parts on `range`.
///
/// Both parts are extended to the whole space with the same constants, so
/// the extension `ĝ` has control `ĝ₊ + ĝ₋` with global Lipschitz constant
/// `L₊ + L₋`, and a single composition suffices.
pub fn special_compose(
    inner: &DCMapping,
    outer: &DCPair,
    range: &ConvexSet,
    lip_plus: &LipschitzCertificate,
    lip_minus: &LipschitzCertificate,
) -> Result<DCFunction> {
    check_dim(range.dim(), inner.output_dim())?;
    for (part, cert, seed) in [(&outer.plus, lip_plus, 1), (&outer.minus, lip_minus, 2)] {
        let scoped = LipschitzCertificate {
            scope: range.clone(),
            ..cert.clone()
        };
        scoped.spot_check(&|y: &[f64]| part.value(y), 2048, seed)?;
    }
    let plus = lipschitz_extension(&outer.plus, range, lip_plus.constant)?;
    let minus = lipschitz_extension(&outer.minus, range, lip_minus.constant)?;
    let extended = from_pair(&DCPair::new(plus, minus)?)?.as_mapping();
    let total = lip_plus.constant + lip_minus.constant;
    let whole = ConvexSet::whole(range.dim());
    let cert = LipschitzCertificate {
        constant: total,
        scope: whole.clone(),
        origin: if [lip_plus, lip_minus].iter().any(|c| c.origin == LipschitzOrigin::Empirical) {
            LipschitzOrigin::Empirical
        } else {
            LipschitzOrigin::CertifiedAnalytic
        },
    };
    let composed = compose(inner, &extended, &cert, &cert)?;
    let map = composed.map().clone();
    DCFunction::new(
        inner.domain().clone(),
        move |x| map.apply(x)[0],
        composed.control().clone(),
        composed.provenance().clone(),
    )
}

/// `x ↦ Q(F(x))` via `Q = P₁ − P₂` with both `Pᵢ` positive semidefinite.
pub fn quadratic_compose(inner: &DCMapping, form: &QuadraticForm, opts: &GlobalOptions) -> Result<DCFunction> {
    check_dim(form.dim(), inner.output_dim())?;
    let (pos, neg) = quadratic_dc_split(form);
    let space = ConvexSet::whole(form.dim());
    let mut parts = Vec::new();
    for p in [pos, neg] {
        if p.max_abs() == 0.0 {
            continue;
        }
        let outer = DCFunction::convex(&ConvexFn::quadratic(p, space.clone())?);
        parts.push(compose_global(inner, &outer, opts)?);
    }
    let map = inner.map().clone();
    let q = form.clone();
    let value = move |x: &[f64]| q.eval(&map.apply(x));
    let parents = [inner.provenance()];
    let prov = Provenance::derived(ProvenanceTag::Composed, "quadratic form of mapping", &parents);
    match parts.len() {
        0 => {
            let domain = opts.region.clone().unwrap_or_else(|| inner.domain().clone());
            DCFunction::new(domain.clone(), value, ConvexFn::zero(domain), prov)
        }
        _ => {
            let controls: Vec<ConvexFn> = parts.iter().map(|p| p.control().clone()).collect();
            let mut prov = prov;
            if parts.iter().any(|p| p.provenance().empirical) {
                prov = prov.mark_empirical("estimated constants in a part");
            }
            let control = ConvexFn::sum(&controls)?;
            DCFunction::new(control.domain().clone(), value, control, prov)
        }
    }
}

/// `x ↦ F(x)ᵀ B G(x)` as the quadratic form `½[[0, B], [Bᵀ, 0]]` of the stacked mapping.
pub fn bilinear_product(f: &DCMapping, g: &DCMapping, matrix: &[Vec<f64>], opts: &GlobalOptions) -> Result<DCFunction> {
    let (m, k) = (f.output_dim(), g.output_dim());
    if matrix.len() != m || matrix.iter().any(|row| row.len() != k) {
        return Err(Error::Dimension {
            expected: m * k,
            got: matrix.iter().map(Vec::len).sum(),
        });
    }
    let n = m + k;
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in matrix.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            rows[i][m + j] = 0.5 * b;
            rows[m + j][i] = 0.5 * b;
        }
    }
    let stacked = f.stack(g)?;
    quadratic_compose(&stacked, &QuadraticForm::new(rows)?, opts)
}
