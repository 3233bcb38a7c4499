//! Randomized convexity and control-contract checks, and total variation.
//!
//! Every check is deterministic given its seed: segments are processed in
//! fixed batches, each batch draws from its own ChaCha stream, and batch
//! results are reduced in batch order.

use crate::error::{Error, Result};
use crate::geometry::ConvexSet;
use crate::map::VectorMap;
use crate::norm::{dot, lerp, Norm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

const BATCH: usize = 256;
const DUAL_STREAM: u64 = 1 << 40;

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingConfig {
    pub segments: usize,
    pub points_per_segment: usize,
    pub duals: usize,
    pub tol: f64,
    pub seed: u64,
    /// Region to sample; defaults to the object's domain.
    pub region: Option<ConvexSet>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            segments: 10_000,
            points_per_segment: 5,
            duals: 64,
            tol: 1e-8,
            seed: 0,
            region: None,
        }
    }
}

impl SamplingConfig {
    pub fn with_segments(mut self, n: usize) -> Self {
        self.segments = n;
        self
    }

    pub fn with_duals(mut self, n: usize) -> Self {
        self.duals = n;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn on(mut self, region: ConvexSet) -> Self {
        self.region = Some(region);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SampleCounts {
    pub samples: usize,
    pub evaluations: usize,
    pub duals: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub pass: bool,
    /// Largest normalized violation; nonpositive when nothing was violated.
    pub worst_violation: f64,
    /// The raw (unnormalized) defect at the worst witness.
    pub worst_raw: f64,
    pub witness_location: Vec<Vec<f64>>,
    pub witness_dual: Option<Vec<f64>>,
    pub sample_counts: SampleCounts,
    pub seed: u64,
    pub tolerance: f64,
    pub notes: Vec<String>,
    pub construction: Vec<String>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, seed: u64, tolerance: f64) -> Self {
        VerificationReport {
            check: check.into(),
            pass: true,
            worst_violation: f64::NEG_INFINITY,
            worst_raw: 0.0,
            witness_location: Vec::new(),
            witness_dual: None,
            sample_counts: SampleCounts::default(),
            seed,
            tolerance,
            notes: Vec::new(),
            construction: Vec::new(),
        }
    }

    /// Sets `pass` from the worst violation and the tolerance.
    pub fn finish(mut self) -> Self {
        if self.worst_violation == f64::NEG_INFINITY {
            self.worst_violation = 0.0;
        }
        self.pass = self.worst_violation <= self.tolerance;
        self
    }

    /// One-line summary used by the CLI and the acceptance suite.
    pub fn summary(&self) -> String {
        format!(
            "{} {}: worst {:.3e} (tol {:.1e}, {} samples, seed {})",
            if self.pass { "pass" } else { "FAIL" },
            self.check,
            self.worst_violation,
            self.tolerance,
            self.sample_counts.samples,
            self.seed
        )
    }
}

/// Worst defect found in one batch.
#[derive(Clone, Debug)]
struct Defect {
    normalized: f64,
    raw: f64,
    points: Vec<Vec<f64>>,
    dual: Option<usize>,
    non_finite: bool,
}

impl Defect {
    fn none() -> Self {
        Defect {
            normalized: f64::NEG_INFINITY,
            raw: 0.0,
            points: Vec::new(),
            dual: None,
            non_finite: false,
        }
    }

    fn offer(&mut self, other: Defect) {
        if other.normalized > self.normalized {
            *self = other;
        }
    }
}

fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64 + 1);
    rng
}

/// Samples points of a convex region, falling back to its affine hull when it is flat.
pub struct RegionSampler {
    region: ConvexSet,
    hull_vertices: Option<Vec<Vec<f64>>>,
    diameter: f64,
}

impl RegionSampler {
    pub fn new(region: &ConvexSet) -> Result<Self> {
        if region.is_empty() {
            return Err(Error::input("cannot sample the empty set"));
        }
        let (lo, hi) = region.bounding_box().ok_or_else(|| {
            Error::input("cannot sample an unbounded region; supply a bounded working region")
        })?;
        let diameter = Norm::L2.dist(&lo, &hi);
        let flat = region.inradius()? <= 0.0;
        let hull_vertices = if flat {
            match region.vertices() {
                Some(vs) if !vs.is_empty() => Some(vs),
                _ => return Err(Error::input("region has empty interior and no vertex description")),
            }
        } else {
            None
        };
        Ok(RegionSampler {
            region: region.clone(),
            hull_vertices,
            diameter,
        })
    }

    pub fn is_flat(&self) -> bool {
        self.hull_vertices.is_some()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.hull_vertices {
            None => self.region.sample(rng).expect("bounded nonempty region"),
            Some(vs) => {
                let w: Vec<f64> = vs.iter().map(|_| Exp1.sample(rng)).collect();
                let total: f64 = w.iter().sum();
                let mut x = vec![0.0; self.region.dim()];
                for (v, wi) in vs.iter().zip(&w) {
                    for (xj, vj) in x.iter_mut().zip(v) {
                        *xj += vj * wi / total;
                    }
                }
                x
            }
        }
    }

    /// A segment inside the region with log-uniform length between `diam/1000` and `diam`.
    pub fn segment<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let p = self.point(rng);
        let far = self.point(rng);
        let span = Norm::L2.dist(&p, &far);
        let target = self.diameter * 10f64.powf(-3.0 * rng.gen::<f64>());
        let t = if span > 0.0 { (target / span).min(1.0) } else { 1.0 };
        let q = lerp(&p, &far, t);
        (p, q)
    }
}

fn segment_points(p: &[f64], q: &[f64], k: usize) -> Vec<Vec<f64>> {
    (0..k).map(|j| lerp(p, q, j as f64 / (k - 1) as f64)).collect()
}

/// Worst normalized negative second difference of a sequence of equally spaced values.
fn second_difference_defect(vals: &[f64]) -> Option<(f64, f64, usize)> {
    let mut worst: Option<(f64, f64, usize)> = None;
    for j in 1..vals.len() - 1 {
        let s = vals[j - 1] - 2.0 * vals[j] + vals[j + 1];
        let scale = 1.0 + vals[j - 1].abs() + 2.0 * vals[j].abs() + vals[j + 1].abs();
        let v = -s / scale;
        if worst.is_none_or(|w| v > w.0) {
            worst = Some((v, -s, j));
        }
    }
    worst
}

fn non_finite_defect(points: Vec<Vec<f64>>, dual: Option<usize>) -> Defect {
    Defect {
        normalized: f64::MAX,
        raw: f64::MAX,
        points,
        dual,
        non_finite: true,
    }
}

/// Second differences of `f` along random segments are `≥ −tol·scale`.
pub fn check_segment_convex(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: &ConvexSet,
    cfg: &SamplingConfig,
) -> Result<VerificationReport> {
    let zero = VectorMap::new(region.dim(), 1, |_| vec![0.0]);
    let mut report = contract_core(&zero, f, region, &[vec![0.0]], cfg)?;
    report.check = "segment convexity".into();
    report.witness_dual = None;
    report.sample_counts.duals = 0;
    Ok(report)
}

/// Dual vectors used for control checks: vertices of the dual ball, then sphere samples.
pub fn dual_directions(codomain: Norm, dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let dual = codomain.dual();
    let mut out = dual.ball_vertices(dim).unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DUAL_STREAM);
    while out.len() < count {
        out.push(dual.sample_sphere(&mut rng, dim));
    }
    out
}

/// For duals `y*` with `‖y*‖_* ≤ 1`, second differences of `y*∘F + f` along random
/// segments are `≥ −tol·scale`.
pub fn check_control_contract(
    map: &VectorMap,
    control: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: &ConvexSet,
    codomain: Norm,
    cfg: &SamplingConfig,
) -> Result<VerificationReport> {
    if cfg.duals == 0 {
        return Err(Error::input("sample counts must be positive"));
    }
    let duals = dual_directions(codomain, map.output_dim(), cfg.duals, cfg.seed);
    contract_core(map, control, region, &duals, cfg)
}

fn contract_core(
    map: &VectorMap,
    control: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: &ConvexSet,
    duals: &[Vec<f64>],
    cfg: &SamplingConfig,
) -> Result<VerificationReport> {
    if cfg.points_per_segment < 3 {
        return Err(Error::input("segments need at least three points"));
    }
    if cfg.segments == 0 {
        return Err(Error::input("sample counts must be positive"));
    }
    let sampler = RegionSampler::new(region)?;
    let k = cfg.points_per_segment;
    let batches = cfg.segments.div_ceil(BATCH);
    let results: Vec<Defect> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(cfg.seed, b);
            let count = BATCH.min(cfg.segments - b * BATCH);
            let mut worst = Defect::none();
            let mut phi = vec![0.0; k];
            for _ in 0..count {
                let (p, q) = sampler.segment(&mut rng);
                let pts = segment_points(&p, &q, k);
                let images: Vec<Vec<f64>> = pts.iter().map(|x| map.apply(x)).collect();
                let ctrl: Vec<f64> = pts.iter().map(|x| control(x)).collect();
                for (di, y) in duals.iter().enumerate() {
                    for j in 0..k {
                        phi[j] = dot(y, &images[j]) + ctrl[j];
                    }
                    if phi.iter().any(|v| !v.is_finite()) {
                        worst.offer(non_finite_defect(pts.clone(), Some(di)));
                        continue;
                    }
                    if let Some((v, raw, j)) = second_difference_defect(&phi) {
                        if v > worst.normalized {
                            worst = Defect {
                                normalized: v,
                                raw,
                                points: pts[j - 1..=j + 1].to_vec(),
                                dual: Some(di),
                                non_finite: false,
                            };
                        }
                    }
                }
            }
            worst
        })
        .collect();
    let mut worst = Defect::none();
    for r in results {
        worst.offer(r);
    }
    let mut report = VerificationReport::new("control contract", cfg.seed, cfg.tol);
    report.worst_violation = worst.normalized;
    report.worst_raw = worst.raw;
    report.witness_location = worst.points;
    report.witness_dual = worst.dual.map(|i| duals[i].clone());
    report.sample_counts = SampleCounts {
        samples: cfg.segments,
        evaluations: cfg.segments * k,
        duals: duals.len(),
    };
    if worst.non_finite {
        report.notes.push("non-finite value encountered".into());
    }
    if sampler.is_flat() {
        report.notes.push("region is flat; sampled within its affine hull".into());
    }
    Ok(report.finish())
}

/// `f((x+y)/2) ≤ (f(x)+f(y))/2 + tol·(1 + |f(x)| + |f(y)|)` on sampled pairs.
pub fn check_midpoint_convex(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: &ConvexSet,
    n_pairs: usize,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    if n_pairs == 0 {
        return Err(Error::input("sample counts must be positive"));
    }
    let sampler = RegionSampler::new(region)?;
    let batches = n_pairs.div_ceil(BATCH);
    let results: Vec<Defect> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let count = BATCH.min(n_pairs - b * BATCH);
            let mut worst = Defect::none();
            for _ in 0..count {
                let (x, y) = (sampler.point(&mut rng), sampler.point(&mut rng));
                let mid = lerp(&x, &y, 0.5);
                let (fx, fy, fm) = (f(&x), f(&y), f(&mid));
                let pts = vec![x, mid, y];
                if !(fx.is_finite() && fy.is_finite() && fm.is_finite()) {
                    worst.offer(non_finite_defect(pts, None));
                    continue;
                }
                let raw = fm - 0.5 * (fx + fy);
                let v = raw / (1.0 + fx.abs() + fy.abs());
                if v > worst.normalized {
                    worst = Defect {
                        normalized: v,
                        raw,
                        points: pts,
                        dual: None,
                        non_finite: false,
                    };
                }
            }
            worst
        })
        .collect();
    let mut worst = Defect::none();
    for r in results {
        worst.offer(r);
    }
    let mut report = VerificationReport::new("midpoint convexity", seed, tol);
    report.worst_violation = worst.normalized;
    report.worst_raw = worst.raw;
    report.witness_location = worst.points;
    report.sample_counts = SampleCounts {
        samples: n_pairs,
        evaluations: 3 * n_pairs,
        duals: 0,
    };
    if worst.non_finite {
        report.notes.push("non-finite value encountered".into());
    }
    Ok(report.finish())
}

/// Total variation of `step_fn` on `[a, b]` over a fine dyadic partition.
///
/// The partition is the uniform grid of mesh `2^-min(depth, 16)` together
/// with a floating dyadic grid: every `±(1 + j/256)·2^e` inside `(a, b)`
/// for `e` from the magnitude of the endpoints down to `-depth`. For step
/// functions whose breakpoints are dyadic rationals with at most eight
/// significant bits and exponent at least `-depth`, every breakpoint is a
/// partition point, so the sum is exact.
pub fn total_variation(step_fn: &dyn Fn(f64) -> f64, a: f64, b: f64, depth: u32) -> Result<f64> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::input(format!("total variation needs a < b, got [{a}, {b}]")));
    }
    let pts = dyadic_partition(a, b, depth);
    let mut total = 0.0;
    let mut prev = step_fn(pts[0]);
    for &t in &pts[1..] {
        let v = step_fn(t);
        total += (v - prev).abs();
        prev = v;
    }
    Ok(total)
}

fn dyadic_partition(a: f64, b: f64, depth: u32) -> Vec<f64> {
    const MANTISSA_BITS: i32 = 8;
    let mut pts = vec![a, b];
    let uniform = depth.min(16) as i32;
    let h = 2f64.powi(-uniform);
    let mut i = (a / h).ceil();
    while i * h < b {
        pts.push(i * h);
        i += 1.0;
    }
    let top = a.abs().max(b.abs()).log2().floor() as i32;
    for e in (-(depth as i32)..=top).rev() {
        let base = 2f64.powi(e);
        for j in 0..(1 << MANTISSA_BITS) {
            let mag = base * (1.0 + j as f64 / (1 << MANTISSA_BITS) as f64);
            for t in [mag, -mag] {
                if a < t && t < b {
                    pts.push(t);
                }
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
