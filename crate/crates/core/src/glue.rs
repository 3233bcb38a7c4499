//! Exhaustions and the local-to-global gluing recursion for control functions.
//!
//! Given stages `D_1 ⊂⊂ D_2 ⊂⊂ … ⊂⊂ D_N` with certified gaps `d_n` and
//! controls `γ_n` of `F` on `D_n`, the recursion
//!
//! ```text
//! φ_n = ((b_{n+1} + 1) / d_n)·dist(·, D_n)
//! h_n = max{γ_{n+1}, φ_n} on D_{n+1},  φ_n elsewhere
//! f_1 = h_2
//! g_n = h_{n+2} − σ + ((σ + s + 1) / d_n)·dist(·, D_n)
//! f_{n+1} = max{f_n, g_n}
//! ```
//!
//! with `s ≥ sup f_n(D_{n+2})`, `σ ≥ sup h_{n+2}(D_n)` and `γ_{n+1} < b_{n+1}`
//! yields one convex function controlling `F` on `D_{N−1}` and equal to
//! `f_n` on each `D_n`.

use crate::dc::{DCFunction, Provenance, ProvenanceTag};
use crate::error::{check_dim, Error, Result};
use crate::functions::{ConvexFn, ScalarFn};
use crate::geometry::ConvexSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::Arc;

/// Safety factor applied to certified gaps.
const GAP_FRACTION: f64 = 0.9;
/// Gap used when the next stage is the whole ambient set.
const DEGENERATE_GAP: f64 = 1.0;

/// An increasing sequence of convex stages with certified gaps.
#[derive(Clone, Debug, PartialEq)]
pub struct Exhaustion {
    ambient: ConvexSet,
    stages: Vec<ConvexSet>,
    /// `gaps[n] < dist(stages[n], ambient ∖ stages[n+1])`.
    gaps: Vec<f64>,
}

impl Exhaustion {
    /// Certifies gaps analytically from compact containment of consecutive stages.
    pub fn new(ambient: ConvexSet, stages: Vec<ConvexSet>) -> Result<Self> {
        let gaps = certified_gaps(&ambient, &stages, None)?;
        Ok(Exhaustion {
            ambient,
            stages,
            gaps,
        })
    }

    /// Uses caller-supplied gaps after checking them against the analytic certificates.
    pub fn with_gaps(ambient: ConvexSet, stages: Vec<ConvexSet>, gaps: Vec<f64>) -> Result<Self> {
        if gaps.len() + 1 < stages.len() {
            return Err(Error::input(format!(
                "missing gap certificate: {} stages need {} gaps, got {}",
                stages.len(),
                stages.len() - 1,
                gaps.len()
            )));
        }
        let certified = certified_gaps(&ambient, &stages, Some(&gaps))?;
        for (n, (g, c)) in gaps.iter().zip(&certified).enumerate() {
            if !(*g > 0.0) || *g > *c / GAP_FRACTION {
                return Err(Error::input(format!(
                    "gap {g} between stages {} and {} exceeds the certified distance {}",
                    n + 1,
                    n + 2,
                    c / GAP_FRACTION
                )));
            }
        }
        let keep = stages.len().saturating_sub(1);
        Ok(Exhaustion {
            ambient,
            stages,
            gaps: gaps[..keep].to_vec(),
        })
    }

    /// `D_n = C` for every stage.
    pub fn degenerate(ambient: ConvexSet, count: usize) -> Result<Self> {
        Self::new(ambient.clone(), vec![ambient; count])
    }

    pub fn ambient(&self) -> &ConvexSet {
        &self.ambient
    }

    pub fn stages(&self) -> &[ConvexSet] {
        &self.stages
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// First `count` stages.
    pub fn truncated(&self, count: usize) -> Self {
        let count = count.min(self.stages.len());
        Exhaustion {
            ambient: self.ambient.clone(),
            stages: self.stages[..count].to_vec(),
            gaps: self.gaps[..count.saturating_sub(1)].to_vec(),
        }
    }

    /// Replaces unbounded stages by their intersection with the cube of half-width `n` around `anchor`.
    pub fn bounded(&self, anchor: &[f64]) -> Result<Self> {
        check_dim(self.ambient.dim(), anchor.len())?;
        if self.stages.iter().all(ConvexSet::is_bounded) {
            return Ok(self.clone());
        }
        let mut stages = Vec::with_capacity(self.stages.len());
        for (n, s) in self.stages.iter().enumerate() {
            let half = (n + 1) as f64;
            let lo: Vec<f64> = anchor.iter().map(|a| a - half).collect();
            let hi: Vec<f64> = anchor.iter().map(|a| a + half).collect();
            stages.push(s.intersect_box(&lo, &hi)?.with_norm(s.norm));
        }
        // consecutive cubes are one unit apart in every coordinate, which is at
        // least one unit in any of the supported norms
        let gaps = self
            .gaps
            .iter()
            .map(|g| g.min(GAP_FRACTION * DEGENERATE_GAP))
            .collect();
        Ok(Exhaustion {
            ambient: self.ambient.clone(),
            stages,
            gaps,
        })
    }
}

fn certified_gaps(ambient: &ConvexSet, stages: &[ConvexSet], hint: Option<&[f64]>) -> Result<Vec<f64>> {
    if stages.is_empty() {
        return Err(Error::input("an exhaustion needs at least one stage"));
    }
    for s in stages {
        check_dim(ambient.dim(), s.dim())?;
        if s.is_empty() {
            return Err(Error::input("exhaustion stages must be nonempty"));
        }
    }
    let mut gaps = Vec::with_capacity(stages.len() - 1);
    for n in 0..stages.len() - 1 {
        let (inner, outer) = (&stages[n], &stages[n + 1]);
        if covers(outer, ambient) {
            gaps.push(DEGENERATE_GAP);
            continue;
        }
        let eps = match inner.compactly_contained_in(outer) {
            Ok(Some(e)) => e,
            Ok(None) | Err(Error::Undecidable(_)) => {
                return Err(Error::input(format!(
                    "missing gap certificate: stage {} is not certified compactly inside stage {}{}",
                    n + 1,
                    n + 2,
                    if hint.is_some() { " (a supplied gap cannot replace it)" } else { "" }
                )))
            }
            Err(e) => return Err(e),
        };
        gaps.push(if eps.is_finite() { GAP_FRACTION * eps } else { DEGENERATE_GAP });
    }
    Ok(gaps)
}

/// `outer ⊇ ambient`, decided structurally.
fn covers(outer: &ConvexSet, ambient: &ConvexSet) -> bool {
    use crate::geometry::Shape;
    if outer == ambient || matches!(outer.shape, Shape::Whole { .. }) {
        return true;
    }
    outer.shape == ambient.shape
}

/// `D_n = {x ∈ C_n : dist(x, X ∖ C_n) > δ/n}`, with gaps `≥ δ/n − δ/(n+1)`.
pub fn build_exhaustion(ambient: ConvexSet, sets: &[ConvexSet], delta: f64) -> Result<Exhaustion> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::input(format!("delta must be positive, got {delta}")));
    }
    let first = sets.first().ok_or_else(|| Error::input("need at least one set"))?;
    let inradius = first.inradius()?;
    if inradius < 2.0 * delta {
        return Err(Error::input(format!(
            "the first set must contain an open ball of radius 2δ = {} (its inradius is {inradius})",
            2.0 * delta
        )));
    }
    let mut stages = Vec::with_capacity(sets.len());
    for (i, c) in sets.iter().enumerate() {
        check_dim(ambient.dim(), c.dim())?;
        let n = (i + 1) as f64;
        stages.push(c.inner_parallel(delta / n)?);
    }
    let mut gaps = Vec::with_capacity(stages.len().saturating_sub(1));
    for i in 0..stages.len().saturating_sub(1) {
        let n = (i + 1) as f64;
        let from_lemma = delta / n - delta / (n + 1.0);
        let analytic = match stages[i].compactly_contained_in(&stages[i + 1]) {
            Ok(Some(e)) => e,
            _ => 0.0,
        };
        gaps.push(GAP_FRACTION * from_lemma.max(analytic).min(if analytic.is_infinite() {
            DEGENERATE_GAP / GAP_FRACTION
        } else {
            f64::INFINITY
        }));
    }
    Ok(Exhaustion {
        ambient,
        stages,
        gaps,
    })
}

/// The open sublevel set `{x ∈ C : f(x) < level}`; membership only.
#[derive(Clone, Debug)]
pub struct SublevelSet {
    pub function: ConvexFn,
    pub level: f64,
    pub ambient: ConvexSet,
}

impl SublevelSet {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.ambient.contains_unchecked(x) && self.function.value(x) < self.level
    }

    /// For one-dimensional sets, the interval itself (endpoints found by bisection).
    pub fn interval(&self, anchor: f64) -> Result<ConvexSet> {
        if self.ambient.dim() != 1 {
            return Err(Error::Unsupported("interval form of a sublevel set in dimension > 1".into()));
        }
        if !self.contains(&[anchor]) {
            return Err(Error::input("anchor is not in the sublevel set"));
        }
        let left = self.endpoint(anchor, -1.0);
        let right = self.endpoint(anchor, 1.0);
        Ok(match (left, right) {
            (None, None) => self.ambient.clone(),
            (Some(a), Some(b)) => ConvexSet::interval(a, b, true).with_norm(self.ambient.norm),
            (a, b) => {
                let (lo, hi) = self.ambient.bounding_box().unwrap_or((vec![f64::NEG_INFINITY], vec![f64::INFINITY]));
                let a = a.unwrap_or(lo[0]);
                let b = b.unwrap_or(hi[0]);
                if a.is_finite() && b.is_finite() {
                    ConvexSet::interval(a, b, true).with_norm(self.ambient.norm)
                } else {
                    let normals = [(a.is_finite(), vec![-1.0], -a), (b.is_finite(), vec![1.0], b)];
                    let (n, o): (Vec<_>, Vec<_>) = normals
                        .into_iter()
                        .filter(|(keep, _, _)| *keep)
                        .map(|(_, n, o)| (n, o))
                        .unzip();
                    ConvexSet::halfspaces(n, o, true).with_norm(self.ambient.norm)
                }
            }
        })
    }

    fn endpoint(&self, anchor: f64, dir: f64) -> Option<f64> {
        let mut step = 1.0;
        let mut inside = anchor;
        let mut outside = None;
        while step < 1e12 {
            let t = anchor + dir * step;
            if self.contains(&[t]) {
                inside = t;
                step *= 2.0;
            } else {
                outside = Some(t);
                break;
            }
        }
        let mut out = outside?;
        for _ in 0..200 {
            let mid = 0.5 * (inside + out);
            if mid == inside || mid == out {
                break;
            }
            if self.contains(&[mid]) {
                inside = mid;
            } else {
                out = mid;
            }
        }
        Some(0.5 * (inside + out))
    }
}

/// `C_n = {x ∈ C : f(x) < f(x₀) + n}` for `n = 1..=count`.
pub fn sublevel_exhaustion(f: &ConvexFn, ambient: &ConvexSet, x0: &[f64], count: usize) -> Result<Vec<SublevelSet>> {
    check_dim(ambient.dim(), x0.len())?;
    if !ambient.contains_unchecked(x0) {
        return Err(Error::Domain {
            point: x0.to_vec(),
            what: "sublevel exhaustion base point".into(),
        });
    }
    let base = f.value(x0);
    Ok((1..=count)
        .map(|n| SublevelSet {
            function: f.clone(),
            level: base + n as f64,
            ambient: ambient.clone(),
        })
        .collect())
}

/// Controls `γ_n` on the stages, shifted to be positive, with strict upper bounds.
#[derive(Clone, Debug)]
pub struct LocalControlFamily {
    controls: Vec<ConvexFn>,
    bounds: Vec<f64>,
    shifts: Vec<f64>,
}

impl LocalControlFamily {
    pub fn controls(&self) -> &[ConvexFn] {
        &self.controls
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlueOptions {
    pub sup_samples: usize,
    /// Relative inflation applied to sampled extrema.
    pub inflation: f64,
    /// Extra factor on `s` and `σ`; values above one only enlarge the result.
    pub sup_multiplier: f64,
    pub seed: u64,
}

impl Default for GlueOptions {
    fn default() -> Self {
        GlueOptions {
            sup_samples: 4096,
            inflation: 1.25,
            sup_multiplier: 1.0,
            seed: 0,
        }
    }
}

/// Points where a convex function attains (or nearly attains) its supremum over `set`.
fn sup_probe(set: &ConvexSet, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    if let Some(vs) = set.vertices() {
        if !vs.is_empty() {
            return Ok(vs);
        }
    }
    if !set.is_bounded() {
        return Err(Error::input(format!(
            "cannot bound a control on an unbounded {}",
            set.kind_name()
        )));
    }
    let mut pts = set.boundary_probe(rng, samples)?;
    pts.push(set.anchor()?);
    Ok(pts)
}

fn inflate_up(v: f64, factor: f64) -> f64 {
    v + (factor - 1.0) * v.abs()
}

/// Upper bound for `sup_{set} f` of a convex `f`: exact at vertices of polytopes,
/// sampled on the boundary otherwise, then inflated.
pub fn convex_sup(f: &ConvexFn, set: &ConvexSet, opts: &GlueOptions, stream: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let pts = sup_probe(set, opts.sup_samples, &mut rng)?;
    let sup = pts
        .par_iter()
        .map(|p| f.value(p))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    if !sup.is_finite() {
        return Err(Error::input(format!(
            "control `{}` is unbounded on a {}",
            f.label(),
            set.kind_name()
        )));
    }
    Ok(inflate_up(sup, opts.inflation))
}

fn sampled_min(f: &ConvexFn, set: &ConvexSet, opts: &GlueOptions, stream: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let mut pts = sup_probe(set, opts.sup_samples / 4, &mut rng)?;
    pts.push(set.anchor()?);
    if set.is_bounded() {
        for _ in 0..opts.sup_samples {
            pts.push(set.sample(&mut rng)?);
        }
    }
    let min = pts
        .par_iter()
        .map(|p| f.value(p))
        .reduce(|| f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::input(format!("control `{}` is not finite on its stage", f.label())));
    }
    Ok(min)
}

impl LocalControlFamily {
    /// Shifts each `γ_n` by `1 − (sampled min)` and bounds it strictly from above on `D_n`.
    pub fn normalize(exhaustion: &Exhaustion, controls: Vec<ConvexFn>, opts: &GlueOptions) -> Result<Self> {
        if controls.len() != exhaustion.len() {
            return Err(Error::input(format!(
                "{} stages need {} local controls, got {}",
                exhaustion.len(),
                exhaustion.len(),
                controls.len()
            )));
        }
        let mut shifted = Vec::with_capacity(controls.len());
        let mut bounds = Vec::with_capacity(controls.len());
        let mut shifts = Vec::with_capacity(controls.len());
        for (n, (gamma, stage)) in controls.into_iter().zip(exhaustion.stages()).enumerate() {
            check_dim(stage.dim(), gamma.dim())?;
            let min = sampled_min(&gamma, stage, opts, 2 * n as u64).map_err(|e| e.at_stage(n + 1))?;
            let shift = 1.0 - min;
            let g = gamma.add_constant(shift).restrict(stage.clone())?;
            let sup = convex_sup(&g, stage, opts, 2 * n as u64 + 1).map_err(|e| e.at_stage(n + 1))?;
            bounds.push(sup.max(1.0) + 1.0);
            shifts.push(shift);
            shifted.push(g);
        }
        Ok(LocalControlFamily {
            controls: shifted,
            bounds,
            shifts,
        })
    }
}

/// Constants chosen at one step of the recursion.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct StageRecord {
    /// The recursion index `n` (1-based).
    pub index: usize,
    pub gap: f64,
    /// Upper bound `s` of `f_n` on `D_{n+2}`.
    pub s: f64,
    /// Upper bound `σ` of `h_{n+2}` on `D_n`.
    pub sigma: f64,
}

/// Output of the recursion.
#[derive(Clone, Debug)]
pub struct Glued {
    /// The glued control `f = max{h_2, g_1, …, g_{N−3}}` on the ambient set.
    pub control: ConvexFn,
    /// `h_n` for `n = 1..N−1`.
    pub patches: Vec<ConvexFn>,
    /// `g_n` for `n = 1..N−3`.
    pub raises: Vec<ConvexFn>,
    /// `f_n` for `n = 1..N−2`.
    pub partial: Vec<ConvexFn>,
    pub records: Vec<StageRecord>,
    pub family: LocalControlFamily,
    /// The control is certified on this stage, `D_{N−1}`.
    pub certified_on: ConvexSet,
}

/// Runs the gluing recursion over the first `N = exhaustion.len()` stages.
pub fn glue(exhaustion: &Exhaustion, controls: Vec<ConvexFn>, opts: &GlueOptions) -> Result<Glued> {
    let n_stages = exhaustion.len();
    if n_stages < 2 {
        return Err(Error::input(format!("gluing needs at least 2 stages, got {n_stages}")));
    }
    if exhaustion.gaps().len() + 1 < n_stages {
        return Err(Error::input("missing gap certificate"));
    }
    let anchor = exhaustion.stages()[0].anchor()?;
    let ex = exhaustion.bounded(&anchor)?;
    let family = LocalControlFamily::normalize(&ex, controls, opts)?;
    let ambient = ex.ambient().clone();
    let stage = |n: usize| &ex.stages()[n - 1];
    let gap = |n: usize| ex.gaps()[n - 1];
    let gamma = |n: usize| &family.controls()[n - 1];
    let bound = |n: usize| family.bounds()[n - 1];

    // h_n for n = 1..N−1
    let mut patches = Vec::with_capacity(n_stages - 1);
    for n in 1..n_stages {
        let coeff = (bound(n + 1) + 1.0) / gap(n);
        let phi = ConvexFn::distance(coeff, stage(n).clone(), ambient.clone()).map_err(|e| e.at_stage(n))?;
        patches.push(ConvexFn::patch(stage(n + 1).clone(), gamma(n + 1).clone(), phi, ambient.clone()));
    }
    let h = |n: usize| &patches[n - 1];

    if n_stages == 2 {
        let control = h(1).clone();
        return Ok(Glued {
            partial: vec![control.clone()],
            control,
            raises: Vec::new(),
            records: Vec::new(),
            certified_on: stage(1).clone(),
            family,
            patches,
        });
    }

    let mut pieces = vec![h(2).clone()];
    let mut partial = vec![h(2).clone()];
    let mut raises = Vec::new();
    let mut records = Vec::new();
    let mut n = 1;
    while n + 2 < n_stages {
        let f_n = partial.last().expect("nonempty").clone();
        let stream = 1000 + 2 * n as u64;
        let s = opts.sup_multiplier * convex_sup(&f_n, stage(n + 2), opts, stream).map_err(|e| e.at_stage(n))?;
        let sigma =
            opts.sup_multiplier * convex_sup(h(n + 2), stage(n), opts, stream + 1).map_err(|e| e.at_stage(n))?;
        let coeff = (sigma + s + 1.0) / gap(n);
        let g_n = ConvexFn::sum(&[
            h(n + 2).clone(),
            ConvexFn::constant(-sigma, ambient.clone()),
            ConvexFn::distance(coeff, stage(n).clone(), ambient.clone())?,
        ])?;
        raises.push(g_n.clone());
        pieces.push(g_n);
        partial.push(ConvexFn::pointwise_max(&pieces)?);
        records.push(StageRecord {
            index: n,
            gap: gap(n),
            s,
            sigma,
        });
        n += 1;
    }
    Ok(Glued {
        control: partial.last().expect("nonempty").clone(),
        certified_on: stage(n_stages - 1).clone(),
        partial,
        raises,
        records,
        family,
        patches,
    })
}

/// Glues the controls and pairs the result with the value of `F`.
pub fn glue_dc(value: ScalarFn, exhaustion: &Exhaustion, controls: Vec<ConvexFn>, opts: &GlueOptions, label: &str) -> Result<(DCFunction, Glued)> {
    let glued = glue(exhaustion, controls, opts)?;
    let domain = glued.certified_on.clone();
    let f = DCFunction::from_arc(
        domain.clone(),
        value,
        glued.control.restrict(domain)?,
        Provenance::new(
            ProvenanceTag::Glued,
            format!("{label} glued over {} stages", exhaustion.len()),
        ),
    )?;
    Ok((f, glued))
}

/// Local d.c. pieces on a cover of `region`, assembled into one d.c. function.
///
/// The patch controls are summed (each must be defined on the whole
/// region) and the sum is run through the gluing recursion over the
/// degenerate exhaustion of `region`.
pub fn dc_from_local(region: &ConvexSet, locals: &[(ConvexSet, DCFunction)], seed: u64) -> Result<DCFunction> {
    if locals.is_empty() {
        return Err(Error::input("need at least one local patch"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = region.vertices().unwrap_or_default();
    for _ in 0..4096 {
        probes.push(region.sample(&mut rng)?);
    }
    for x in &probes {
        let owners: Vec<&DCFunction> = locals
            .iter()
            .filter(|(patch, _)| patch.contains_closure(x, 0.0))
            .map(|(_, f)| f)
            .collect();
        let Some(first) = owners.first() else {
            return Err(Error::precondition(format!("patches do not cover the region: {x:?} is uncovered")));
        };
        let v0 = first.value(x);
        for other in &owners[1..] {
            let v = other.value(x);
            if (v - v0).abs() > 1e-10 * (1.0 + v0.abs()) {
                return Err(Error::precondition(format!(
                    "patch values disagree at {x:?}: {v0} vs {v}"
                )));
            }
        }
    }
    if locals.len() == 1 {
        return Ok(locals[0].1.clone());
    }
    let mut controls = Vec::with_capacity(locals.len());
    for (_, f) in locals {
        let dom = f.control().domain();
        if !probes.iter().all(|x| dom.contains_closure(x, 0.0)) {
            return Err(Error::precondition(format!(
                "local control `{}` is not defined on the whole region",
                f.control().label()
            )));
        }
        controls.push(f.control().restrict(region.clone())?);
    }
    let total = ConvexFn::sum(&controls)?;
    let patches: Vec<(ConvexSet, ScalarFn)> = locals.iter().map(|(p, f)| (p.clone(), f.value_fn())).collect();
    let value: ScalarFn = Arc::new(move |x: &[f64]| {
        patches
            .iter()
            .find(|(p, _)| p.contains_closure(x, 0.0))
            .map_or(f64::NAN, |(_, v)| v(x))
    });
    let ex = Exhaustion::degenerate(region.clone(), 3)?;
    let opts = GlueOptions {
        seed,
        ..GlueOptions::default()
    };
    let (f, _) = glue_dc(value, &ex, vec![total; 3], &opts, "local patches")?;
    let parents: Vec<&Provenance> = locals.iter().map(|(_, f)| f.provenance()).collect();
    Ok(f.with_provenance(Provenance::derived(
        ProvenanceTag::Glued,
        format!("{} local patches", locals.len()),
        &parents,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustion_of_the_line() {
        let sets: Vec<ConvexSet> = (1..=4).map(|n| ConvexSet::interval(-(n as f64), n as f64, true)).collect();
        let ex = build_exhaustion(ConvexSet::whole(1), &sets, 0.25).unwrap();
        for (i, d) in ex.stages().iter().enumerate() {
            let n = (i + 1) as f64;
            assert_eq!(d, &ConvexSet::interval(-n + 0.25 / n, n - 0.25 / n, true));
        }
        assert!(ex.gaps().iter().all(|g| *g > 0.0));
    }

    #[test]
    fn delta_too_large() {
        let sets = vec![ConvexSet::interval(-1.0, 1.0, true)];
        let err = build_exhaustion(ConvexSet::whole(1), &sets, 0.6).unwrap_err();
        assert!(err.to_string().contains("2δ"));
    }

    #[test]
    fn sublevel_intervals() {
        let line = ConvexSet::whole(1);
        let sq = ConvexFn::squared_euclidean(1.0, line.clone()).unwrap();
        let sets = sublevel_exhaustion(&sq, &line, &[0.0], 3).unwrap();
        let ConvexSet { shape: crate::Shape::Interval { a, b, .. }, .. } = sets[1].interval(0.0).unwrap() else {
            panic!()
        };
        assert!((b - 2f64.sqrt()).abs() < 1e-12 && (a + 2f64.sqrt()).abs() < 1e-12);
        let flat = ConvexFn::constant(5.0, line.clone());
        let sets = sublevel_exhaustion(&flat, &line, &[0.0], 2).unwrap();
        assert_eq!(sets[0].interval(0.0).unwrap(), line);
    }

    #[test]
    fn two_stage_glue_returns_first_patch() {
        let line = ConvexSet::whole(1);
        let stages = vec![ConvexSet::interval(-1.0, 1.0, true), ConvexSet::interval(-2.0, 2.0, true)];
        let ex = Exhaustion::new(line.clone(), stages).unwrap();
        let sq = ConvexFn::squared_euclidean(0.5, line).unwrap();
        let g = glue(&ex, vec![sq.clone(), sq], &GlueOptions::default()).unwrap();
        assert!(g.raises.is_empty());
        assert!(g.control.value(&[0.5]) > 0.0);
    }

    #[test]
    fn single_stage_is_rejected() {
        let ex = Exhaustion::degenerate(ConvexSet::interval(-1.0, 1.0, true), 1).unwrap();
        let c = ConvexFn::zero(ConvexSet::interval(-1.0, 1.0, true));
        assert!(matches!(glue(&ex, vec![c], &GlueOptions::default()), Err(Error::Input(_))));
    }
}
