//! Symmetric polytopes `conv(ρ·B_base ∪ {p_i})` and their Minkowski gauges.

use crate::error::{check_dim, Error, Result};
use crate::geometry::set::combinations;
use crate::lp::{self, LpOutcome};
use crate::norm::{dot, Norm};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

const MAX_DIM: usize = 3;
const GAUGE_TOL: f64 = 1e-10;
const LP_SCALE: f64 = 1e4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HullSpec", into = "HullSpec")]
pub struct HullBody {
    pub dimension: usize,
    pub rho: f64,
    /// Polyhedral base ball, `l1` or `linf`.
    pub base: Norm,
    pub points: Vec<Vec<f64>>,
    /// Facet normals `a` with the body equal to `{x : a·x ≤ 1}`.
    facets: Vec<Vec<f64>>,
}

/// Serialized form of a [`HullBody`]; facets are derived on load.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct HullSpec {
    dimension: usize,
    rho: f64,
    base: Norm,
    points: Vec<Vec<f64>>,
}

impl TryFrom<HullSpec> for HullBody {
    type Error = Error;

    fn try_from(s: HullSpec) -> Result<Self> {
        HullBody::new(s.rho, s.base, s.points, s.dimension)
    }
}

impl From<HullBody> for HullSpec {
    fn from(b: HullBody) -> Self {
        HullSpec {
            dimension: b.dimension,
            rho: b.rho,
            base: b.base,
            points: b.points,
        }
    }
}

impl HullBody {
    pub fn new(rho: f64, base: Norm, points: Vec<Vec<f64>>, dimension: usize) -> Result<Self> {
        let mut body = HullBody {
            dimension,
            rho,
            base,
            points,
            facets: Vec::new(),
        };
        body.validate()?;
        body.facets = body.compute_facets();
        Ok(body)
    }

    /// `conv(ρ·B_base ∪ {±e_1, …, ±e_d})`.
    pub fn with_basis_points(rho: f64, base: Norm, dimension: usize) -> Result<Self> {
        let mut points = Vec::with_capacity(2 * dimension);
        for i in 0..dimension {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; dimension];
                e[i] = s;
                points.push(e);
            }
        }
        Self::new(rho, base, points, dimension)
    }

    fn validate(&self) -> Result<()> {
        if self.dimension == 0 || self.dimension > MAX_DIM {
            return Err(Error::input(format!(
                "hull bodies are supported in dimensions 1..={MAX_DIM}, got {}",
                self.dimension
            )));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::input("rho must be a positive finite number"));
        }
        if self.base == Norm::L2 {
            return Err(Error::Unsupported(
                "hull bodies need a polyhedral base ball (l1 or linf)".into(),
            ));
        }
        for p in &self.points {
            check_dim(self.dimension, p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::input("hull points must be finite"));
            }
            let neg: Vec<f64> = p.iter().map(|v| -v).collect();
            if !self.points.iter().any(|q| Norm::Linf.dist(q, &neg) <= 1e-12) {
                return Err(Error::input(format!(
                    "hull point list is not closed under negation: missing {neg:?}"
                )));
            }
        }
        Ok(())
    }

    /// Generators: scaled base-ball vertices and the listed points.
    pub fn generators(&self) -> Vec<Vec<f64>> {
        let mut g: Vec<Vec<f64>> = self
            .base
            .ball_vertices(self.dimension)
            .expect("polyhedral base")
            .into_iter()
            .map(|v| v.into_iter().map(|c| c * self.rho).collect())
            .collect();
        g.extend(self.points.iter().cloned());
        g
    }

    /// Largest base-norm length of a generator.
    pub fn outer_radius(&self) -> f64 {
        self.points
            .iter()
            .map(|p| self.base.eval(p))
            .fold(self.rho, f64::max)
    }

    pub fn facets(&self) -> &[Vec<f64>] {
        &self.facets
    }

    fn compute_facets(&self) -> Vec<Vec<f64>> {
        let gens = self.generators();
        let d = self.dimension;
        let mut out: Vec<Vec<f64>> = Vec::new();
        for subset in combinations(gens.len(), d) {
            let m = DMatrix::from_fn(d, d, |r, c| gens[subset[r]][c]);
            let lu = m.lu();
            if lu.determinant().abs() < 1e-12 {
                continue;
            }
            let Some(a) = lu.solve(&DVector::from_element(d, 1.0)) else {
                continue;
            };
            let a: Vec<f64> = a.iter().copied().collect();
            if gens.iter().all(|g| dot(&a, g) <= 1.0 + 1e-9)
                && !out.iter().any(|b| Norm::Linf.dist(b, &a) < 1e-9)
            {
                out.push(a);
            }
        }
        out
    }

    /// Minkowski gauge `inf{t > 0 : x ∈ t·body}` via the facet description.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dimension, x.len())?;
        Ok(self.gauge_unchecked(x))
    }

    pub(crate) fn gauge_unchecked(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|a| dot(a, x))
            .fold(0.0, f64::max)
    }

    /// A facet normal attaining the gauge, i.e. a subgradient at `x`.
    pub(crate) fn gauge_subgradient(&self, x: &[f64]) -> Vec<f64> {
        let mut best = (f64::NEG_INFINITY, None);
        for a in &self.facets {
            let v = dot(a, x);
            if v > best.0 {
                best = (v, Some(a));
            }
        }
        match best.1 {
            Some(a) if best.0 > 0.0 => a.clone(),
            _ => vec![0.0; self.dimension],
        }
    }

    /// `x ∈ t·body`, decided by a linear feasibility problem.
    pub fn contains_scaled(&self, x: &[f64], t: f64) -> Result<bool> {
        check_dim(self.dimension, x.len())?;
        let d = self.dimension;
        let mut p = Problem::new(OptimizationDirection::Minimize);
        let lambda = p.add_var(0.0, (0.0, f64::INFINITY));
        let mus: Vec<_> = self
            .points
            .iter()
            .map(|_| p.add_var(0.0, (0.0, f64::INFINITY)))
            .collect();
        let w: Vec<_> = (0..d)
            .map(|_| p.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
            .collect();
        // w + Σ μ_i p_i = K·x/t with λ + Σ μ_i = K; the scale K pushes the
        // solver's absolute feasibility tolerance below the bisection tolerance.
        for j in 0..d {
            let mut expr = vec![(w[j], 1.0)];
            expr.extend(mus.iter().zip(&self.points).map(|(m, pt)| (*m, pt[j])));
            p.add_constraint(&expr[..], ComparisonOp::Eq, LP_SCALE * x[j] / t);
        }
        let mut sum = vec![(lambda, 1.0)];
        sum.extend(mus.iter().map(|m| (*m, 1.0)));
        p.add_constraint(&sum[..], ComparisonOp::Eq, LP_SCALE);
        match self.base {
            Norm::Linf => {
                for wj in &w {
                    p.add_constraint([(*wj, 1.0), (lambda, -self.rho)], ComparisonOp::Le, 0.0);
                    p.add_constraint([(*wj, -1.0), (lambda, -self.rho)], ComparisonOp::Le, 0.0);
                }
            }
            Norm::L1 => {
                let s: Vec<_> = (0..d).map(|_| p.add_var(0.0, (0.0, f64::INFINITY))).collect();
                for (wj, sj) in w.iter().zip(&s) {
                    p.add_constraint([(*wj, 1.0), (*sj, -1.0)], ComparisonOp::Le, 0.0);
                    p.add_constraint([(*wj, -1.0), (*sj, -1.0)], ComparisonOp::Le, 0.0);
                }
                let mut total: Vec<_> = s.iter().map(|sj| (*sj, 1.0)).collect();
                total.push((lambda, -self.rho));
                p.add_constraint(&total[..], ComparisonOp::Le, 0.0);
            }
            Norm::L2 => unreachable!("validated polyhedral base"),
        }
        Ok(matches!(lp::solve(p, &[lambda])?, LpOutcome::Optimal { .. }))
    }

    /// Gauge by bisection on `t` with LP membership; the cross-check route.
    pub fn gauge_bisection(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dimension, x.len())?;
        let nb = self.base.eval(x);
        if nb == 0.0 {
            return Ok(0.0);
        }
        let mut lo = nb / self.outer_radius();
        let mut hi = nb / self.rho;
        if !self.contains_scaled(x, hi * (1.0 + 1e-12))? {
            return Err(Error::Internal(format!(
                "gauge bracket upper end {hi} does not contain {x:?}"
            )));
        }
        let mut iterations = 0;
        while hi - lo > GAUGE_TOL {
            let mid = 0.5 * (lo + hi);
            if self.contains_scaled(x, mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
            iterations += 1;
            if iterations > 200 {
                return Err(Error::Internal(format!(
                    "gauge bisection stalled at [{lo}, {hi}] for {x:?}"
                )));
            }
        }
        Ok(0.5 * (lo + hi))
    }
}
