//! Lipschitz constants and the convex Lipschitz extension `inf_c f(c) + L‖x − c‖`.

use super::convex::{ConvexFn, Node};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{ConvexSet, Shape};
use crate::lp::{self, LpOutcome};
use rand::Rng;
use std::sync::Arc;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const TOP_GRID: usize = 256;
const INNER_GRID: usize = 16;

/// Lipschitz constant `2M/r` of a convex `f` with `|f| ≤ M` on `D + B(0, 2r)`.
pub fn lipschitz_bound_on_inner(sup_abs: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::input(format!("inner margin must be positive, got {r}")));
    }
    if !(sup_abs >= 0.0) || !sup_abs.is_finite() {
        return Err(Error::input(format!("bound M must be nonnegative, got {sup_abs}")));
    }
    Ok(2.0 * sup_abs / r)
}

/// Largest sampled difference quotient `|f(x) − f(y)| / ‖x − y‖` over pairs in `set`.
///
/// This is a lower bound on the Lipschitz constant.
pub fn estimate_lipschitz<F, R>(f: F, set: &ConvexSet, n_samples: usize, rng: &mut R) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    if n_samples < 2 {
        return Err(Error::input("estimate_lipschitz needs at least two samples"));
    }
    let pts = set_samples(set, n_samples, rng)?;
    let vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut best: f64 = 0.0;
    // consecutive pairs in a shuffled sample plus near pairs around each point
    for i in 1..pts.len() {
        let d = set.norm.dist(&pts[i], &pts[i - 1]);
        if d > 0.0 {
            best = best.max((vals[i] - vals[i - 1]).abs() / d);
        }
    }
    let diam = set
        .bounding_box()
        .map(|(lo, hi)| set.norm.dist(&lo, &hi))
        .unwrap_or(1.0)
        .max(f64::MIN_POSITIVE);
    for (p, fp) in pts.iter().zip(&vals) {
        let h = diam * 10f64.powf(-rng.gen_range(2.0..6.0));
        let dir = set.norm.sample_sphere(rng, p.len());
        let q: Vec<f64> = p.iter().zip(&dir).map(|(a, u)| a + h * u).collect();
        if set.contains_closure(&q, 0.0) {
            let d = set.norm.dist(p, &q);
            if d > 0.0 {
                best = best.max((f(&q) - fp).abs() / d);
            }
        }
    }
    Ok(best)
}

fn set_samples<R: Rng + ?Sized>(set: &ConvexSet, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let mut pts = Vec::with_capacity(n);
    if let Some(vs) = set.vertices() {
        pts.extend(vs.into_iter().take(n / 4));
    }
    while pts.len() < n {
        pts.push(set.sample(rng)?);
    }
    Ok(pts)
}

/// Evaluator for `f̂(x) = inf{f(c) + L‖x − c‖ : c ∈ C}`.
pub(crate) struct ExtensionSolver {
    base: ConvexFn,
    set: ConvexSet,
    lip: f64,
}

impl ExtensionSolver {
    pub(crate) fn label(&self) -> String {
        self.base.label()
    }

    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        if self.set.contains_closure(x, 0.0) {
            return self.base.value(x);
        }
        let norm = self.set.norm;
        if let Some((a, b)) = one_dimensional_hull(&self.set) {
            let v = x[0];
            return if v > b {
                self.base.value(&[b]) + self.lip * (v - b)
            } else {
                self.base.value(&[a]) + self.lip * (a - v)
            };
        }
        let objective = |c: &[f64]| self.base.value(c) + self.lip * norm.dist(x, c);
        minimize_over(&self.set, &objective)
    }
}

/// Convex `L`-Lipschitz extension of `f` from `set` to the whole space.
pub fn lipschitz_extension(f: &ConvexFn, set: &ConvexSet, lip: f64) -> Result<ConvexFn> {
    check_dim(f.dim(), set.dim())?;
    if set.is_empty() {
        return Err(Error::input("cannot extend from the empty set"));
    }
    if !(lip >= 0.0) || !lip.is_finite() {
        return Err(Error::input(format!("Lipschitz constant must be nonnegative, got {lip}")));
    }
    match &set.shape {
        Shape::Ball { .. } | Shape::Box { .. } | Shape::Interval { .. } | Shape::Halfspaces { .. } => {}
        _ => {
            return Err(Error::Unsupported(format!(
                "Lipschitz extension from {}",
                set.kind_name()
            )))
        }
    }
    if !set.is_bounded() {
        return Err(Error::Unsupported("Lipschitz extension from an unbounded set".into()));
    }
    let solver = ExtensionSolver {
        base: f.clone(),
        set: set.clone(),
        lip,
    };
    Ok(ConvexFn::from_node(
        Node::LipschitzExtension(Arc::new(solver)),
        ConvexSet::whole(set.dim()).with_norm(set.norm),
    ))
}

fn one_dimensional_hull(set: &ConvexSet) -> Option<(f64, f64)> {
    if set.dim() != 1 {
        return None;
    }
    set.bounding_box().map(|(lo, hi)| (lo[0], hi[0]))
}

/// Minimum of a convex objective over a bounded convex set, by nested
/// golden-section search along coordinates (each partial minimum is convex).
fn minimize_over(set: &ConvexSet, objective: &dyn Fn(&[f64]) -> f64) -> f64 {
    let mut prefix = Vec::with_capacity(set.dim());
    level(set, objective, &mut prefix)
}

fn level(set: &ConvexSet, objective: &dyn Fn(&[f64]) -> f64, prefix: &mut Vec<f64>) -> f64 {
    let k = prefix.len();
    let d = set.dim();
    let (lo, hi) = coordinate_range(set, prefix);
    let grid = if k == 0 { TOP_GRID } else { INNER_GRID };
    let eval = |t: f64, prefix: &mut Vec<f64>| -> f64 {
        prefix.push(t);
        let v = if k + 1 == d {
            objective(prefix)
        } else {
            level(set, objective, prefix)
        };
        prefix.pop();
        v
    };
    if !(hi > lo) {
        return eval(0.5 * (lo + hi), prefix);
    }
    let step = (hi - lo) / grid as f64;
    let (mut best_i, mut best_v) = (0, f64::INFINITY);
    for i in 0..=grid {
        let v = eval(lo + step * i as f64, prefix);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    let tol = 1e-11 * (1.0 + (hi - lo));
    let mut c = b - GOLDEN * (b - a);
    let mut e = a + GOLDEN * (b - a);
    let mut fc = eval(c, prefix);
    let mut fe = eval(e, prefix);
    while b - a > tol {
        if fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - GOLDEN * (b - a);
            fc = eval(c, prefix);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + GOLDEN * (b - a);
            fe = eval(e, prefix);
        }
    }
    best_v.min(fc).min(fe)
}

/// Range of coordinate `prefix.len()` over the slice of `set` with the leading coordinates fixed.
fn coordinate_range(set: &ConvexSet, prefix: &[f64]) -> (f64, f64) {
    let k = prefix.len();
    match &set.shape {
        Shape::Box { lo, hi, .. } => (lo[k], hi[k]),
        Shape::Interval { a, b, .. } => (*a, *b),
        Shape::Ball { center, radius, .. } => {
            let used: f64 = prefix.iter().zip(center).map(|(p, c)| (p - c) * (p - c)).sum();
            let rem = (radius * radius - used).max(0.0).sqrt();
            (center[k] - rem, center[k] + rem)
        }
        Shape::Halfspaces {
            dimension,
            normals,
            offsets,
            ..
        } => {
            let mut rows = normals.clone();
            let mut rhs = offsets.clone();
            for (i, p) in prefix.iter().enumerate() {
                let mut e = vec![0.0; *dimension];
                e[i] = 1.0;
                rows.push(e.clone());
                rhs.push(*p);
                e[i] = -1.0;
                rows.push(e);
                rhs.push(-p);
            }
            let mut c = vec![0.0; *dimension];
            c[k] = 1.0;
            let ends = [false, true].map(|maximize| match lp::optimize(maximize, &c, &rows, &rhs) {
                Ok(LpOutcome::Optimal { value, .. }) => Some(value),
                _ => None,
            });
            match ends {
                [Some(lo), Some(hi)] => (lo, hi.max(lo)),
                _ => (f64::NAN, f64::NAN),
            }
        }
        _ => (f64::NAN, f64::NAN),
    }
}
