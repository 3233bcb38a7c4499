//! Bump mappings with explicit controls on `(ℝᵐ, ‖·‖_∞)`.
//!
//! With the standard basis `e_n`, coordinate functionals `e*_n` and the
//! renorming body `C = conv(ρ·B_∞ ∪ {±e_n})`, put `g = ½·|||x|||²` and
//!
//! ```text
//! D_n = {x : g(x) < g(e_n) + e*_n(x − e_n) + δ}
//! H(x) = (1/δ)·[g(e_n) + e*_n(x − e_n) + δ − g(x)]·y_n   on D_n, 0 elsewhere
//! h(x) = (s/δ)·max_n max{g(x), g(e_n) + e*_n(x − e_n) + δ} + (s/δ)·g(x)
//! ```
//!
//! `h` controls `H`, and `Φ(x) = H(2x)` vanishes outside the unit ball.

use crate::calculus::{composition_stages, GlobalOptions};
use crate::dc::{DCMapping, Provenance, ProvenanceTag};
use crate::error::{check_dim, Error, Result};
use crate::functions::ConvexFn;
use crate::geometry::{ConvexSet, HullBody};
use crate::glue::glue;
use crate::map::VectorMap;
use crate::norm::Norm;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const BOUNDARY_RAYS: usize = 256;

/// A finite biorthogonal system with its renorming body and bump targets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BumpSystem {
    pub dimension: usize,
    /// `sup ‖e*_n‖`.
    pub dual_bound: f64,
    /// `inf_{m≠n} ‖e_m − e_n‖`.
    pub separation: f64,
    pub rho: f64,
    pub body: HullBody,
    pub delta: f64,
    pub targets: Vec<Vec<f64>>,
    pub target_norm: Norm,
}

impl BumpSystem {
    /// Standard basis of `(ℝᵐ, ‖·‖_∞)`: `R = r = 1`.
    ///
    /// `rho` defaults to `1/(2R)` and `delta` to `min(¼, ½·(r/(4κ))²)` with
    /// `κ = 1 + 4/(1 − Rρ)`, which keeps the bump regions `δ` apart.
    pub fn standard(dimension: usize, targets: Vec<Vec<f64>>, rho: Option<f64>, delta: Option<f64>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::input("a bump system needs at least one target"));
        }
        if targets.len() > dimension {
            return Err(Error::input(format!(
                "{} targets need at least as many basis vectors, got dimension {dimension}",
                targets.len()
            )));
        }
        let width = targets[0].len();
        for t in &targets {
            check_dim(width, t.len())?;
        }
        let (dual_bound, separation) = (1.0, 1.0);
        let rho = rho.unwrap_or(0.5 / dual_bound);
        if !(rho > 0.0 && rho < 1.0 / dual_bound) {
            return Err(Error::input(format!("rho must lie in (0, 1/R) = (0, {}), got {rho}", 1.0 / dual_bound)));
        }
        let kappa = 1.0 + 4.0 / (1.0 - dual_bound * rho);
        let delta = delta.unwrap_or_else(|| 0.25f64.min(0.5 * (separation / (4.0 * kappa)).powi(2)));
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::input(format!("delta must lie in (0, 1/2), got {delta}")));
        }
        let body = HullBody::with_basis_points(rho, Norm::Linf, dimension)?;
        let sys = BumpSystem {
            dimension,
            dual_bound,
            separation,
            rho,
            body,
            delta,
            targets,
            target_norm: Norm::L2,
        };
        sys.check_separation()?;
        Ok(sys)
    }

    pub fn basis(&self, n: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.dimension];
        e[n] = 1.0;
        e
    }

    /// `κ = 1 + 4/(1 − Rρ)`; each `D_n` lies in the ball of radius `κ√(2δ)` about `e_n`.
    pub fn kappa(&self) -> f64 {
        1.0 + 4.0 / (1.0 - self.dual_bound * self.rho)
    }

    pub fn containment_radius(&self) -> f64 {
        self.kappa() * (2.0 * self.delta).sqrt()
    }

    /// `s = max ‖y_n‖`.
    pub fn target_bound(&self) -> f64 {
        self.targets
            .iter()
            .map(|y| self.target_norm.eval(y))
            .fold(0.0, f64::max)
    }

    pub fn g(&self, x: &[f64]) -> f64 {
        let t = self.body.gauge_unchecked(x);
        0.5 * t * t
    }

    /// `g(e_n) − g(x) + e*_n(x − e_n) + δ`; positive exactly on `D_n`.
    pub fn bracket(&self, n: usize, x: &[f64]) -> f64 {
        let e = self.basis(n);
        (self.g(&e) - self.g(x)) + (x[n] - 1.0) + self.delta
    }

    /// Index of the bump region containing `x`, if any.
    pub fn active(&self, x: &[f64]) -> Option<usize> {
        (0..self.targets.len()).find(|&n| self.bracket(n, x) > 0.0)
    }

    pub fn h_map(&self, x: &[f64]) -> Vec<f64> {
        match self.active(x) {
            Some(n) => {
                let t = self.bracket(n, x) / self.delta;
                self.targets[n].iter().map(|y| t * y).collect()
            }
            None => vec![0.0; self.targets[0].len()],
        }
    }

    /// Points of `∂D_n` found by bisection along rays from `e_n`.
    pub fn boundary_points(&self, n: usize, rays: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(n as u64);
        let e = self.basis(n);
        let reach = 2.0 * self.containment_radius();
        (0..rays)
            .map(|_| {
                let dir = Norm::L2.sample_sphere(&mut rng, self.dimension);
                let at = |t: f64| -> Vec<f64> { e.iter().zip(&dir).map(|(a, b)| a + t * b).collect() };
                let (mut inside, mut outside) = (0.0, reach);
                for _ in 0..80 {
                    let mid = 0.5 * (inside + outside);
                    if self.bracket(n, &at(mid)) > 0.0 {
                        inside = mid;
                    } else {
                        outside = mid;
                    }
                }
                at(0.5 * (inside + outside))
            })
            .collect()
    }

    /// Sampled `dist_∞(D_m, D_n) > δ` for all `m ≠ n`.
    pub fn check_separation(&self) -> Result<()> {
        let bounds: Vec<Vec<Vec<f64>>> = (0..self.targets.len())
            .map(|n| self.boundary_points(n, BOUNDARY_RAYS, 0))
            .collect();
        for m in 0..bounds.len() {
            for n in m + 1..bounds.len() {
                let gap = bounds[m]
                    .iter()
                    .flat_map(|p| bounds[n].iter().map(move |q| Norm::Linf.dist(p, q)))
                    .fold(f64::INFINITY, f64::min);
                if gap <= self.delta {
                    return Err(Error::input(format!(
                        "bump regions {m} and {n} are only {gap} apart; choose a delta below {}",
                        self.delta
                    )));
                }
            }
        }
        Ok(())
    }

    /// `h` as a convex function on `ℝᵐ`.
    pub fn control(&self) -> Result<ConvexFn> {
        let space = ConvexSet::whole(self.dimension).with_norm(Norm::Linf);
        let g = ConvexFn::gauge_squared(self.body.clone(), space.clone())?;
        let n = self.targets.len();
        let slopes: Vec<Vec<f64>> = (0..n).map(|i| self.basis(i)).collect();
        // g(e_n) + e*_n(x − e_n) + δ = e*_n(x) + (g(e_n) − 1 + δ)
        let intercepts: Vec<f64> = (0..n).map(|i| self.g(&self.basis(i)) - 1.0 + self.delta).collect();
        let caps = ConvexFn::max_affine(slopes, intercepts, space)?;
        let top = g.max(&caps)?;
        top.add(&g)?.scale(self.target_bound() / self.delta)
    }

    /// `H` with control `h`, on the whole space.
    pub fn mapping(&self) -> Result<DCMapping> {
        let sys = self.clone();
        let width = self.targets[0].len();
        DCMapping::new(
            ConvexSet::whole(self.dimension).with_norm(Norm::Linf),
            VectorMap::new(self.dimension, width, move |x| sys.h_map(x)),
            self.control()?,
            self.target_norm,
            Provenance::new(ProvenanceTag::Gallery, format!("bump mapping with {} targets", self.targets.len())),
        )
    }

    /// `Φ(x) = H(2x)` with control `φ(x) = h(2x)`.
    pub fn scaled(&self) -> Result<DCMapping> {
        self.transplanted(&vec![0.0; self.dimension], 1.0)
    }

    /// `x ↦ Φ((x − centre)/scale)` with the matching control.
    pub fn transplanted(&self, centre: &[f64], scale: f64) -> Result<DCMapping> {
        check_dim(self.dimension, centre.len())?;
        if !(scale > 0.0) {
            return Err(Error::input(format!("bump scale must be positive, got {scale}")));
        }
        // Φ((x − v)/t) = H(2(x − v)/t)
        let k = 2.0 / scale;
        let d = self.dimension;
        let matrix: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { k } else { 0.0 }).collect())
            .collect();
        let offset: Vec<f64> = centre.iter().map(|c| -k * c).collect();
        let space = ConvexSet::whole(d).with_norm(Norm::Linf);
        let control = self.control()?.affine_precompose(matrix, offset, space.clone())?;
        let sys = self.clone();
        let v = centre.to_vec();
        DCMapping::new(
            space,
            VectorMap::new(d, self.targets[0].len(), move |x| {
                let y: Vec<f64> = x.iter().zip(&v).map(|(a, c)| k * (a - c)).collect();
                sys.h_map(&y)
            }),
            control,
            self.target_norm,
            Provenance::new(ProvenanceTag::Gallery, format!("bump at {centre:?} scaled by {scale}")),
        )
    }
}

/// One transplanted bump `Φ((x − centre)/scale)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BumpPlacement {
    pub centre: Vec<f64>,
    pub scale: f64,
}

/// `F = Σ_k Φ((x − v_k)/δ_k)` on `domain` with a control glued over an exhaustion.
///
/// On each stage only the bumps whose support meets it contribute to the local control.
pub fn build_bump_sum(domain: &ConvexSet, sys: &BumpSystem, bumps: &[BumpPlacement], opts: &GlobalOptions) -> Result<DCMapping> {
    let d = sys.dimension;
    check_dim(d, domain.dim())?;
    if bumps.is_empty() {
        return Err(Error::input("need at least one bump"));
    }
    if !domain.contains_closure(&vec![0.0; d], 0.0) {
        return Err(Error::input("the domain must contain the origin"));
    }
    for (i, b) in bumps.iter().enumerate() {
        let outer = ConvexSet::cube(&b.centre, 2.0 * b.scale, false).with_norm(Norm::Linf);
        if outer.compactly_contained_in(domain)?.is_none() && !domain_contains_cube(domain, &outer) {
            return Err(Error::input(format!("bump {i}: B(v, 2δ) is not inside the domain")));
        }
        for (j, c) in bumps.iter().enumerate().skip(i + 1) {
            if Norm::Linf.dist(&b.centre, &c.centre) <= b.scale + c.scale {
                return Err(Error::input(format!("bumps {i} and {j} have overlapping supports")));
            }
        }
    }
    let pieces: Vec<DCMapping> = bumps
        .iter()
        .map(|b| sys.transplanted(&b.centre, b.scale))
        .collect::<Result<_>>()?;
    let ex = composition_stages(domain, opts)?;
    let mut controls = Vec::with_capacity(ex.len());
    for stage in ex.stages() {
        let probe = stage.clone().with_norm(Norm::Linf);
        let mut local = Vec::new();
        for (b, p) in bumps.iter().zip(&pieces) {
            if probe.dist(&b.centre)? <= b.scale {
                local.push(p.control().clone());
            }
        }
        controls.push(if local.is_empty() {
            ConvexFn::zero(ConvexSet::whole(d).with_norm(Norm::Linf))
        } else {
            ConvexFn::sum(&local)?
        });
    }
    let glued = glue(&ex, controls, &opts.glue)?;
    let region = opts.region.clone().unwrap_or_else(|| glued.certified_on.clone());
    let maps: Vec<VectorMap> = pieces.iter().map(|p| p.map().clone()).collect();
    let width = sys.targets[0].len();
    DCMapping::new(
        region.clone(),
        VectorMap::new(d, width, move |x| {
            let mut acc = vec![0.0; width];
            for m in &maps {
                for (a, v) in acc.iter_mut().zip(m.apply(x)) {
                    *a += v;
                }
            }
            acc
        }),
        glued.control.restrict(region)?,
        sys.target_norm,
        Provenance::new(ProvenanceTag::Glued, format!("sum of {} bumps", bumps.len())),
    )
}

fn domain_contains_cube(domain: &ConvexSet, cube: &ConvexSet) -> bool {
    cube.vertices()
        .is_some_and(|vs| vs.iter().all(|v| domain.contains_unchecked(v)))
}
