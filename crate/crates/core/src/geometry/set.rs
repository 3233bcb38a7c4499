//! Finitely described convex sets in ℝ^d with distance queries.

use crate::error::{check_dim, Error, Result};
use crate::lp::{self, LpOutcome};
use crate::norm::{dot, Norm};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Tolerance used when testing feasibility of enumerated vertices.
const FEAS_EPS: f64 = 1e-9;

/// Analytic description of a convex region.
///
/// `Ball` is always Euclidean, whatever the ambient norm is; distances to it
/// are still measured in the ambient norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        open: bool,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default)]
        open: bool,
    },
    /// `{x : normals[j]·x ≤ offsets[j] for all j}`.
    Halfspaces {
        dimension: usize,
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        #[serde(default)]
        open: bool,
    },
    Interval {
        a: f64,
        b: f64,
        #[serde(default)]
        open: bool,
    },
    Whole {
        dimension: usize,
    },
    Empty {
        dimension: usize,
    },
    /// Outer parallel set `{x : dist(x, base) < radius}` of a set without a closed form.
    Dilation {
        base: Box<Shape>,
        radius: f64,
    },
}

/// A convex set together with the ambient norm used for every metric query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexSet {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default)]
    pub norm: Norm,
}

impl ConvexSet {
    pub fn new(shape: Shape, norm: Norm) -> Self {
        ConvexSet { shape, norm }
    }

    pub fn ball(center: Vec<f64>, radius: f64, open: bool) -> Self {
        Self::from(Shape::Ball {
            center,
            radius,
            open,
        })
    }

    pub fn closed_ball(center: Vec<f64>, radius: f64) -> Self {
        Self::ball(center, radius, false)
    }

    pub fn open_ball(center: Vec<f64>, radius: f64) -> Self {
        Self::ball(center, radius, true)
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>, open: bool) -> Self {
        Self::from(Shape::Box { lo, hi, open })
    }

    /// The cube `[c − r, c + r]^d` (open or closed).
    pub fn cube(center: &[f64], radius: f64, open: bool) -> Self {
        Self::boxed(
            center.iter().map(|c| c - radius).collect(),
            center.iter().map(|c| c + radius).collect(),
            open,
        )
    }

    pub fn interval(a: f64, b: f64, open: bool) -> Self {
        Self::from(Shape::Interval { a, b, open })
    }

    pub fn halfspaces(normals: Vec<Vec<f64>>, offsets: Vec<f64>, open: bool) -> Self {
        let dimension = normals.first().map_or(0, |n| n.len());
        Self::from(Shape::Halfspaces {
            dimension,
            normals,
            offsets,
            open,
        })
    }

    pub fn whole(dimension: usize) -> Self {
        Self::from(Shape::Whole { dimension })
    }

    pub fn empty(dimension: usize) -> Self {
        Self::from(Shape::Empty { dimension })
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    pub fn dim(&self) -> usize {
        shape_dim(&self.shape)
    }

    /// Structural validation for sets read from files.
    pub fn validate(&self) -> Result<()> {
        validate_shape(&self.shape)
    }

    pub fn is_empty(&self) -> bool {
        match &self.shape {
            Shape::Empty { .. } => true,
            Shape::Ball { radius, open, .. } => *radius < 0.0 || (*open && *radius == 0.0),
            Shape::Box { lo, hi, open } => lo
                .iter()
                .zip(hi)
                .any(|(l, h)| l > h || (*open && l == h)),
            Shape::Interval { a, b, open } => a > b || (*open && a == b),
            Shape::Halfspaces {
                normals, offsets, ..
            } => matches!(
                lp::optimize(false, &vec![0.0; self.dim()], normals, offsets),
                Ok(LpOutcome::Infeasible)
            ),
            Shape::Whole { .. } => false,
            Shape::Dilation { radius, .. } => *radius <= 0.0,
        }
    }

    pub fn is_open(&self) -> bool {
        match &self.shape {
            Shape::Ball { open, .. }
            | Shape::Box { open, .. }
            | Shape::Interval { open, .. }
            | Shape::Halfspaces { open, .. } => *open,
            Shape::Whole { .. } | Shape::Empty { .. } | Shape::Dilation { .. } => true,
        }
    }

    pub fn is_bounded(&self) -> bool {
        match &self.shape {
            Shape::Whole { .. } => false,
            Shape::Halfspaces { .. } => self.bounding_box().is_some(),
            Shape::Dilation { base, .. } => ConvexSet::new((**base).clone(), self.norm).is_bounded(),
            _ => true,
        }
    }

    /// Membership consistent with the open/closed flag.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Ball {
                center,
                radius,
                open,
            } => {
                let d = Norm::L2.dist(x, center);
                if *open {
                    d < *radius
                } else {
                    d <= *radius
                }
            }
            Shape::Box { lo, hi, open } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| {
                if *open {
                    l < v && v < h
                } else {
                    l <= v && v <= h
                }
            }),
            Shape::Interval { a, b, open } => {
                let v = x[0];
                if *open {
                    *a < v && v < *b
                } else {
                    *a <= v && v <= *b
                }
            }
            Shape::Halfspaces {
                normals,
                offsets,
                open,
                ..
            } => normals.iter().zip(offsets).all(|(n, b)| {
                let s = dot(n, x);
                if *open {
                    s < *b
                } else {
                    s <= *b
                }
            }),
            Shape::Whole { .. } => true,
            Shape::Empty { .. } => false,
            Shape::Dilation { base, radius } => {
                shape_dist(base, self.norm, x).is_ok_and(|d| d < *radius)
            }
        }
    }

    /// Membership in the closure, with an absolute slack.
    pub fn contains_closure(&self, x: &[f64], slack: f64) -> bool {
        match &self.shape {
            Shape::Ball { center, radius, .. } => Norm::L2.dist(x, center) <= radius + slack,
            Shape::Box { lo, hi, .. } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *l - slack <= *v && *v <= *h + slack),
            Shape::Interval { a, b, .. } => *a - slack <= x[0] && x[0] <= *b + slack,
            Shape::Halfspaces {
                normals, offsets, ..
            } => normals
                .iter()
                .zip(offsets)
                .all(|(n, b)| dot(n, x) <= *b + slack * (1.0 + self.norm.dual_eval(n))),
            Shape::Whole { .. } => true,
            Shape::Empty { .. } => false,
            Shape::Dilation { base, radius } => {
                shape_dist(base, self.norm, x).is_ok_and(|d| d <= radius + slack)
            }
        }
    }

    /// `inf_{c ∈ C} ‖x − c‖` in the ambient norm (distance to the closure).
    pub fn dist(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        shape_dist(&self.shape, self.norm, x)
    }

    /// `dist(x, X ∖ C)` for points of `C`; zero for points outside the interior.
    pub fn dist_to_complement(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let v = match &self.shape {
            Shape::Ball { center, radius, .. } => {
                (radius - Norm::L2.dist(x, center)) / self.norm.euclidean_reach(x.len())
            }
            Shape::Box { lo, hi, .. } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| (v - l).min(h - v))
                .fold(f64::INFINITY, f64::min),
            Shape::Interval { a, b, .. } => (x[0] - a).min(b - x[0]),
            Shape::Halfspaces {
                normals, offsets, ..
            } => normals
                .iter()
                .zip(offsets)
                .map(|(n, b)| (b - dot(n, x)) / self.norm.dual_eval(n))
                .fold(f64::INFINITY, f64::min),
            Shape::Whole { .. } => f64::INFINITY,
            Shape::Empty { .. } => 0.0,
            Shape::Dilation { base, radius } => radius - shape_dist(base, self.norm, x)?,
        };
        Ok(v.max(0.0))
    }

    /// Inner parallel set `{x ∈ C : dist(x, X ∖ C) > r}`.
    pub fn inner_parallel(&self, r: f64) -> Result<ConvexSet> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::input(format!(
                "parallel-set radius must be positive, got {r}"
            )));
        }
        let dim = self.dim();
        let shape = match &self.shape {
            Shape::Ball { center, radius, .. } => {
                let rr = radius - r * self.norm.euclidean_reach(dim);
                if rr <= 0.0 {
                    Shape::Empty { dimension: dim }
                } else {
                    Shape::Ball {
                        center: center.clone(),
                        radius: rr,
                        open: true,
                    }
                }
            }
            Shape::Box { lo, hi, .. } => {
                let lo2: Vec<f64> = lo.iter().map(|l| l + r).collect();
                let hi2: Vec<f64> = hi.iter().map(|h| h - r).collect();
                if lo2.iter().zip(&hi2).any(|(l, h)| l >= h) {
                    Shape::Empty { dimension: dim }
                } else {
                    Shape::Box {
                        lo: lo2,
                        hi: hi2,
                        open: true,
                    }
                }
            }
            Shape::Interval { a, b, .. } => {
                if a + r >= b - r {
                    Shape::Empty { dimension: 1 }
                } else {
                    Shape::Interval {
                        a: a + r,
                        b: b - r,
                        open: true,
                    }
                }
            }
            Shape::Halfspaces {
                normals, offsets, ..
            } => {
                if self.inradius()? <= r {
                    Shape::Empty { dimension: dim }
                } else {
                    Shape::Halfspaces {
                        dimension: dim,
                        normals: normals.clone(),
                        offsets: normals
                            .iter()
                            .zip(offsets)
                            .map(|(n, b)| b - r * self.norm.dual_eval(n))
                            .collect(),
                        open: true,
                    }
                }
            }
            Shape::Whole { dimension } => Shape::Whole {
                dimension: *dimension,
            },
            Shape::Empty { dimension } => Shape::Empty {
                dimension: *dimension,
            },
            Shape::Dilation { base, radius } => {
                // {dist(·, base) < radius} eroded by r is {dist(·, base) < radius − r}.
                if *radius <= r {
                    Shape::Empty { dimension: dim }
                } else {
                    Shape::Dilation {
                        base: base.clone(),
                        radius: radius - r,
                    }
                }
            }
        };
        Ok(ConvexSet::new(shape, self.norm))
    }

    /// Outer parallel set `{x : dist(x, C) < r}`.
    pub fn outer_parallel(&self, r: f64) -> Result<ConvexSet> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::input(format!(
                "parallel-set radius must be positive, got {r}"
            )));
        }
        let dim = self.dim();
        let shape = match (&self.shape, self.norm) {
            (Shape::Empty { dimension }, _) => Shape::Empty {
                dimension: *dimension,
            },
            (Shape::Whole { dimension }, _) => Shape::Whole {
                dimension: *dimension,
            },
            (Shape::Interval { a, b, .. }, _) => Shape::Interval {
                a: a - r,
                b: b + r,
                open: true,
            },
            (Shape::Ball { center, radius, .. }, Norm::L2) => Shape::Ball {
                center: center.clone(),
                radius: radius + r,
                open: true,
            },
            (Shape::Ball { center, radius, .. }, Norm::Linf) if *radius == 0.0 => Shape::Box {
                lo: center.iter().map(|c| c - r).collect(),
                hi: center.iter().map(|c| c + r).collect(),
                open: true,
            },
            (Shape::Ball { center, radius, .. }, Norm::L1) if *radius == 0.0 => {
                let signs = Norm::Linf.ball_vertices(dim).unwrap_or_default();
                let offsets = signs.iter().map(|s| dot(s, center) + r).collect();
                Shape::Halfspaces {
                    dimension: dim,
                    normals: signs,
                    offsets,
                    open: true,
                }
            }
            (Shape::Box { lo, hi, .. }, Norm::Linf) => Shape::Box {
                lo: lo.iter().map(|l| l - r).collect(),
                hi: hi.iter().map(|h| h + r).collect(),
                open: true,
            },
            (Shape::Box { lo, hi, .. }, _) if dim == 1 => Shape::Interval {
                a: lo[0] - r,
                b: hi[0] + r,
                open: true,
            },
            (Shape::Dilation { base, radius }, _) => Shape::Dilation {
                base: base.clone(),
                radius: radius + r,
            },
            (shape, _) => Shape::Dilation {
                base: Box::new(shape.clone()),
                radius: r,
            },
        };
        Ok(ConvexSet::new(shape, self.norm))
    }

    /// Certified `ε > 0` with `self + B(0, ε) ⊆ other`, or `None` when no slack exists.
    pub fn compactly_contained_in(&self, other: &ConvexSet) -> Result<Option<f64>> {
        check_dim(self.dim(), other.dim())?;
        if self.is_empty() {
            return Ok(Some(f64::INFINITY));
        }
        let norm = other.norm;
        let slack = match &other.shape {
            Shape::Whole { .. } => f64::INFINITY,
            Shape::Empty { .. } => return Ok(None),
            Shape::Box { .. } | Shape::Interval { .. } | Shape::Halfspaces { .. } => {
                let (normals, offsets) = other.facets().expect("polyhedral shape");
                let mut eps = f64::INFINITY;
                for (n, b) in normals.iter().zip(&offsets) {
                    let h = self.support(n)?;
                    eps = eps.min((b - h) / norm.dual_eval(n));
                }
                eps
            }
            Shape::Ball { center, radius, .. } => {
                let far = self.max_euclidean_distance_from(center)?;
                (radius - far) / norm.euclidean_reach(self.dim())
            }
            Shape::Dilation { base, radius } => {
                let base_set = ConvexSet::new((**base).clone(), norm);
                let worst = match (self.vertices(), &**base) {
                    (Some(vs), _) => vs
                        .iter()
                        .map(|v| base_set.dist(v))
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .fold(0.0, f64::max),
                    (
                        None,
                        Shape::Ball {
                            center, radius: rb, ..
                        },
                    ) if norm == Norm::L2 => (self.max_euclidean_distance_from(center)? - rb).max(0.0),
                    _ => {
                        return Err(Error::Undecidable(format!(
                            "containment of {} in an outer parallel set",
                            self.kind_name()
                        )))
                    }
                };
                radius - worst
            }
        };
        Ok(if slack > 0.0 { Some(slack) } else { None })
    }

    /// Support function `sup_{x∈C} n·x` (`+∞` when unbounded in direction `n`).
    pub fn support(&self, n: &[f64]) -> Result<f64> {
        check_dim(self.dim(), n.len())?;
        Ok(match &self.shape {
            Shape::Ball { center, radius, .. } => dot(n, center) + radius * Norm::L2.eval(n),
            Shape::Box { lo, hi, .. } => n
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(ni, (l, h))| (ni * l).max(ni * h))
                .sum(),
            Shape::Interval { a, b, .. } => (n[0] * a).max(n[0] * b),
            Shape::Halfspaces {
                normals, offsets, ..
            } => match lp::optimize(true, n, normals, offsets)? {
                LpOutcome::Optimal { value, .. } => value,
                LpOutcome::Unbounded => f64::INFINITY,
                LpOutcome::Infeasible => f64::NEG_INFINITY,
            },
            Shape::Whole { .. } => {
                if n.iter().all(|v| *v == 0.0) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Shape::Empty { .. } => f64::NEG_INFINITY,
            Shape::Dilation { base, radius } => {
                ConvexSet::new((**base).clone(), self.norm).support(n)? + radius * self.norm.dual_eval(n)
            }
        })
    }

    /// `sup_{x∈C} ‖x − c‖₂`; an upper bound for dilations in non-Euclidean norms.
    fn max_euclidean_distance_from(&self, c: &[f64]) -> Result<f64> {
        if let Some(vs) = self.vertices() {
            return Ok(vs.iter().map(|v| Norm::L2.dist(v, c)).fold(0.0, f64::max));
        }
        match &self.shape {
            Shape::Ball { center, radius, .. } => Ok(Norm::L2.dist(center, c) + radius),
            Shape::Dilation { base, radius } => Ok(ConvexSet::new((**base).clone(), self.norm)
                .max_euclidean_distance_from(c)?
                + radius * self.norm.euclidean_reach(self.dim())),
            Shape::Whole { .. } => Ok(f64::INFINITY),
            Shape::Halfspaces { .. } => Ok(f64::INFINITY),
            _ => Err(Error::Undecidable(format!(
                "farthest point of {}",
                self.kind_name()
            ))),
        }
    }

    /// Half-space description of polyhedral shapes.
    pub fn facets(&self) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
        match &self.shape {
            Shape::Box { lo, hi, .. } => {
                let d = lo.len();
                let mut normals = Vec::with_capacity(2 * d);
                let mut offsets = Vec::with_capacity(2 * d);
                for i in 0..d {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    normals.push(e.clone());
                    offsets.push(hi[i]);
                    e[i] = -1.0;
                    normals.push(e);
                    offsets.push(-lo[i]);
                }
                Some((normals, offsets))
            }
            Shape::Interval { a, b, .. } => Some((vec![vec![1.0], vec![-1.0]], vec![*b, -a])),
            Shape::Halfspaces {
                normals, offsets, ..
            } => Some((normals.clone(), offsets.clone())),
            _ => None,
        }
    }

    /// Extreme points of bounded polyhedral sets (and of 1-D balls).
    pub fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        match &self.shape {
            Shape::Box { lo, hi, .. } => {
                let d = lo.len();
                Some(
                    (0..(1usize << d))
                        .map(|mask| {
                            (0..d)
                                .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                                .collect()
                        })
                        .collect(),
                )
            }
            Shape::Interval { a, b, .. } => Some(vec![vec![*a], vec![*b]]),
            Shape::Ball { center, radius, .. } if center.len() == 1 => {
                Some(vec![vec![center[0] - radius], vec![center[0] + radius]])
            }
            Shape::Halfspaces {
                dimension,
                normals,
                offsets,
                ..
            } => {
                if !self.is_bounded() {
                    return None;
                }
                Some(enumerate_vertices(*dimension, normals, offsets))
            }
            Shape::Empty { .. } => Some(Vec::new()),
            _ => None,
        }
    }

    /// Axis-aligned bounding box of the closure, if bounded.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let d = self.dim();
        match &self.shape {
            Shape::Ball { center, radius, .. } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            Shape::Box { lo, hi, .. } => Some((lo.clone(), hi.clone())),
            Shape::Interval { a, b, .. } => Some((vec![*a], vec![*b])),
            Shape::Whole { .. } | Shape::Empty { .. } => None,
            Shape::Halfspaces { .. } | Shape::Dilation { .. } => {
                let mut lo = vec![0.0; d];
                let mut hi = vec![0.0; d];
                for i in 0..d {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    hi[i] = self.support(&e).ok()?;
                    e[i] = -1.0;
                    lo[i] = -self.support(&e).ok()?;
                    if !hi[i].is_finite() || !lo[i].is_finite() {
                        return None;
                    }
                }
                Some((lo, hi))
            }
        }
    }

    /// Radius of the largest ambient-norm ball inside the set.
    pub fn inradius(&self) -> Result<f64> {
        let d = self.dim();
        Ok(match &self.shape {
            Shape::Ball { radius, .. } => radius / self.norm.euclidean_reach(d),
            Shape::Box { lo, hi, .. } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| 0.5 * (h - l))
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
            Shape::Interval { a, b, .. } => (0.5 * (b - a)).max(0.0),
            Shape::Halfspaces { .. } => self.chebyshev()?.1,
            Shape::Whole { .. } => f64::INFINITY,
            Shape::Empty { .. } => 0.0,
            Shape::Dilation { base, radius } => {
                ConvexSet::new((**base).clone(), self.norm).inradius()? + radius
            }
        })
    }

    /// Centre and radius of the largest inscribed ambient-norm ball of a polyhedron.
    fn chebyshev(&self) -> Result<(Vec<f64>, f64)> {
        let Shape::Halfspaces {
            dimension,
            normals,
            offsets,
            ..
        } = &self.shape
        else {
            return Err(Error::Internal("chebyshev centre of a non-polyhedron".into()));
        };
        let d = *dimension;
        let mut aug_normals = Vec::with_capacity(normals.len() + 1);
        for n in normals {
            let mut row = n.clone();
            row.push(self.norm.dual_eval(n));
            aug_normals.push(row);
        }
        let mut offs = offsets.clone();
        // cap the radius so unbounded polyhedra give a finite LP
        let mut cap = vec![0.0; d];
        cap.push(1.0);
        aug_normals.push(cap);
        offs.push(1e12);
        let mut c = vec![0.0; d];
        c.push(1.0);
        match lp::optimize(true, &c, &aug_normals, &offs)? {
            LpOutcome::Optimal { value, x } => Ok((x[..d].to_vec(), value.max(0.0))),
            LpOutcome::Infeasible => Ok((vec![0.0; d], 0.0)),
            LpOutcome::Unbounded => Err(lp::internal("unbounded Chebyshev radius")),
        }
    }

    /// A deterministic interior (or relative-interior) point.
    pub fn anchor(&self) -> Result<Vec<f64>> {
        let d = self.dim();
        match &self.shape {
            Shape::Ball { center, .. } => Ok(center.clone()),
            Shape::Box { lo, hi, .. } => Ok(lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect()),
            Shape::Interval { a, b, .. } => Ok(vec![0.5 * (a + b)]),
            Shape::Halfspaces { .. } => Ok(self.chebyshev()?.0),
            Shape::Whole { .. } => Ok(vec![0.0; d]),
            Shape::Empty { .. } => Err(Error::input("empty set has no anchor point")),
            Shape::Dilation { base, .. } => ConvexSet::new((**base).clone(), self.norm).anchor(),
        }
    }

    /// Intersection with the box `[lo, hi]`, when representable.
    pub fn intersect_box(&self, lo: &[f64], hi: &[f64]) -> Result<ConvexSet> {
        check_dim(self.dim(), lo.len())?;
        let open = self.is_open();
        let clipped = |l0: &[f64], h0: &[f64]| -> ConvexSet {
            let l: Vec<f64> = l0.iter().zip(lo).map(|(a, b)| a.max(*b)).collect();
            let h: Vec<f64> = h0.iter().zip(hi).map(|(a, b)| a.min(*b)).collect();
            if l.iter().zip(&h).any(|(a, b)| a > b) {
                ConvexSet::empty(l.len()).with_norm(self.norm)
            } else {
                ConvexSet::boxed(l, h, open).with_norm(self.norm)
            }
        };
        Ok(match &self.shape {
            Shape::Whole { .. } => ConvexSet::boxed(lo.to_vec(), hi.to_vec(), true).with_norm(self.norm),
            Shape::Box { lo: l0, hi: h0, .. } => clipped(l0, h0),
            Shape::Interval { a, b, .. } => {
                let s = clipped(&[*a], &[*b]);
                match s.shape {
                    Shape::Box { lo, hi, open } => ConvexSet::interval(lo[0], hi[0], open).with_norm(self.norm),
                    _ => s,
                }
            }
            Shape::Halfspaces {
                dimension,
                normals,
                offsets,
                open,
            } => {
                let bx = ConvexSet::boxed(lo.to_vec(), hi.to_vec(), *open);
                let (bn, bo) = bx.facets().expect("box facets");
                let mut n = normals.clone();
                let mut o = offsets.clone();
                n.extend(bn);
                o.extend(bo);
                ConvexSet::new(
                    Shape::Halfspaces {
                        dimension: *dimension,
                        normals: n,
                        offsets: o,
                        open: *open,
                    },
                    self.norm,
                )
            }
            Shape::Empty { .. } => self.clone(),
            _ => {
                let bx = ConvexSet::boxed(lo.to_vec(), hi.to_vec(), open);
                if self.compactly_contained_in(&bx).unwrap_or(None).is_some() {
                    self.clone()
                } else {
                    return Err(Error::Unsupported(format!(
                        "intersection of {} with a box",
                        self.kind_name()
                    )));
                }
            }
        })
    }

    /// Intersection of two sets, when the result has a finite description.
    pub fn intersect(&self, other: &ConvexSet) -> Result<ConvexSet> {
        check_dim(self.dim(), other.dim())?;
        if self == other {
            return Ok(self.clone());
        }
        match (&self.shape, &other.shape) {
            (Shape::Whole { .. }, _) => return Ok(other.clone()),
            (_, Shape::Whole { .. }) => return Ok(self.clone()),
            (Shape::Empty { .. }, _) => return Ok(self.clone()),
            (_, Shape::Empty { .. }) => return Ok(other.clone()),
            (Shape::Box { lo, hi, .. }, _) => return other.intersect_box(lo, hi),
            (_, Shape::Box { lo, hi, .. }) => return self.intersect_box(lo, hi),
            (Shape::Interval { a, b, .. }, _) => return other.intersect_box(&[*a], &[*b]),
            (_, Shape::Interval { a, b, .. }) => return self.intersect_box(&[*a], &[*b]),
            _ => {}
        }
        if let (Some((n1, o1)), Some((n2, o2))) = (self.facets(), other.facets()) {
            let mut n = n1;
            let mut o = o1;
            n.extend(n2);
            o.extend(o2);
            return Ok(ConvexSet::halfspaces(n, o, self.is_open() || other.is_open()).with_norm(self.norm));
        }
        if let Ok(Some(_)) = self.compactly_contained_in(other) {
            return Ok(self.clone());
        }
        if let Ok(Some(_)) = other.compactly_contained_in(self) {
            return Ok(other.clone());
        }
        Err(Error::Unsupported(format!(
            "intersection of {} and {}",
            self.kind_name(),
            other.kind_name()
        )))
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.shape {
            Shape::Ball { .. } => "ball",
            Shape::Box { .. } => "box",
            Shape::Halfspaces { .. } => "halfspaces",
            Shape::Interval { .. } => "interval",
            Shape::Whole { .. } => "whole space",
            Shape::Empty { .. } => "empty set",
            Shape::Dilation { .. } => "outer parallel set",
        }
    }

    /// Uniform sample from the set (rejection sampling for polyhedra and dilations).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let d = self.dim();
        match &self.shape {
            Shape::Ball { center, radius, .. } => {
                let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                let n = Norm::L2.eval(&dir).max(1e-300);
                let rad = radius * rng.gen::<f64>().powf(1.0 / d as f64);
                Ok(center
                    .iter()
                    .zip(&dir)
                    .map(|(c, u)| c + rad * u / n)
                    .collect())
            }
            Shape::Box { lo, hi, .. } => Ok(lo
                .iter()
                .zip(hi)
                .map(|(l, h)| if l < h { rng.gen_range(*l..*h) } else { *l })
                .collect()),
            Shape::Interval { a, b, .. } => Ok(vec![if a < b { rng.gen_range(*a..*b) } else { *a }]),
            Shape::Whole { .. } => Err(Error::input(
                "cannot sample an unbounded domain; supply a bounded working region",
            )),
            Shape::Empty { .. } => Err(Error::input("cannot sample the empty set")),
            Shape::Halfspaces { .. } | Shape::Dilation { .. } => {
                let (lo, hi) = self.bounding_box().ok_or_else(|| {
                    Error::input("cannot sample an unbounded domain; supply a bounded working region")
                })?;
                for _ in 0..100_000 {
                    let x: Vec<f64> = lo
                        .iter()
                        .zip(&hi)
                        .map(|(l, h)| if l < h { rng.gen_range(*l..*h) } else { *l })
                        .collect();
                    if self.contains_closure(&x, 0.0) {
                        return Ok(x);
                    }
                }
                // flat polyhedron: fall back to the Chebyshev centre (affine hull)
                self.anchor()
            }
        }
    }

    /// Points on the boundary of the closure: vertices of polytopes, sampled spheres for balls.
    pub fn boundary_probe<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<Vec<Vec<f64>>> {
        if let Some(vs) = self.vertices() {
            return Ok(vs);
        }
        match &self.shape {
            Shape::Ball { center, radius, .. } => Ok((0..count)
                .map(|_| {
                    let u = Norm::L2.sample_sphere(rng, center.len());
                    center.iter().zip(&u).map(|(c, v)| c + radius * v).collect()
                })
                .collect()),
            _ => (0..count).map(|_| self.sample(rng)).collect(),
        }
    }
}

impl From<Shape> for ConvexSet {
    fn from(shape: Shape) -> Self {
        ConvexSet {
            shape,
            norm: Norm::default(),
        }
    }
}

fn shape_dim(shape: &Shape) -> usize {
    match shape {
        Shape::Ball { center, .. } => center.len(),
        Shape::Box { lo, .. } => lo.len(),
        Shape::Halfspaces { dimension, .. } => *dimension,
        Shape::Interval { .. } => 1,
        Shape::Whole { dimension } | Shape::Empty { dimension } => *dimension,
        Shape::Dilation { base, .. } => shape_dim(base),
    }
}

fn validate_shape(shape: &Shape) -> Result<()> {
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    match shape {
        Shape::Ball { center, radius, .. } => {
            if center.is_empty() || !finite(center) || !radius.is_finite() || *radius < 0.0 {
                return Err(Error::input("ball needs a finite centre and a nonnegative radius"));
            }
        }
        Shape::Box { lo, hi, .. } => {
            if lo.is_empty() || lo.len() != hi.len() || !finite(lo) || !finite(hi) {
                return Err(Error::input("box needs finite lo/hi of equal, positive length"));
            }
        }
        Shape::Halfspaces {
            dimension,
            normals,
            offsets,
            ..
        } => {
            if *dimension == 0
                || normals.len() != offsets.len()
                || normals.iter().any(|n| n.len() != *dimension || !finite(n))
                || !finite(offsets)
            {
                return Err(Error::input("halfspaces need one finite normal per offset"));
            }
        }
        Shape::Interval { a, b, .. } => {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::input("interval endpoints must be finite"));
            }
        }
        Shape::Whole { dimension } | Shape::Empty { dimension } => {
            if *dimension == 0 {
                return Err(Error::input("dimension must be positive"));
            }
        }
        Shape::Dilation { base, radius } => {
            if !(*radius > 0.0) {
                return Err(Error::input("dilation radius must be positive"));
            }
            validate_shape(base)?;
        }
    }
    Ok(())
}

fn shape_dist(shape: &Shape, norm: Norm, x: &[f64]) -> Result<f64> {
    Ok(match shape {
        Shape::Ball { center, radius, .. } => dist_to_euclidean_ball(norm, x, center, *radius),
        Shape::Box { lo, hi, .. } => {
            let excess: Vec<f64> = x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| (l - v).max(v - h).max(0.0))
                .collect();
            norm.eval(&excess)
        }
        Shape::Interval { a, b, .. } => (a - x[0]).max(x[0] - b).max(0.0),
        Shape::Halfspaces {
            normals, offsets, ..
        } => dist_to_polyhedron(norm, x, normals, offsets)?,
        Shape::Whole { .. } => 0.0,
        Shape::Empty { .. } => f64::INFINITY,
        Shape::Dilation { base, radius } => (shape_dist(base, norm, x)? - radius).max(0.0),
    })
}

/// Distance in `norm` from `x` to the Euclidean ball `B₂(c, r)`.
fn dist_to_euclidean_ball(norm: Norm, x: &[f64], c: &[f64], r: f64) -> f64 {
    let e = Norm::L2.dist(x, c);
    if e <= r {
        return 0.0;
    }
    if norm == Norm::L2 || x.len() == 1 {
        return e - r;
    }
    // smallest t with B_norm(x, t) ∩ B₂(c, r) ≠ ∅
    let gap = |t: f64| {
        let p = norm.project_onto_ball(c, x, t);
        Norm::L2.dist(&p, c) - r
    };
    let mut lo = 0.0;
    let radial: Vec<f64> = x.iter().zip(c).map(|(a, b)| b + (a - b) * r / e).collect();
    let mut hi = norm.dist(x, &radial);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-16 * (1.0 + hi) {
            break;
        }
    }
    hi
}

fn dist_to_polyhedron(norm: Norm, x: &[f64], normals: &[Vec<f64>], offsets: &[f64]) -> Result<f64> {
    if normals.iter().zip(offsets).all(|(n, b)| dot(n, x) <= *b) {
        return Ok(0.0);
    }
    let d = x.len();
    match norm {
        Norm::L2 => {
            let mut best = f64::INFINITY;
            for k in 1..=d.min(normals.len()) {
                for subset in combinations(normals.len(), k) {
                    if let Some(p) = project_affine(x, normals, offsets, &subset) {
                        let feasible = normals
                            .iter()
                            .zip(offsets)
                            .all(|(n, b)| dot(n, &p) <= b + FEAS_EPS * (1.0 + b.abs()));
                        if feasible {
                            best = best.min(Norm::L2.dist(x, &p));
                        }
                    }
                }
            }
            if best.is_finite() {
                Ok(best)
            } else {
                Ok(f64::INFINITY)
            }
        }
        Norm::L1 | Norm::Linf => {
            // variables: y (d), s (d for ℓ1, 1 for ℓ∞)
            let ns = if norm == Norm::L1 { d } else { 1 };
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for (n, b) in normals.iter().zip(offsets) {
                let mut row = n.clone();
                row.extend(std::iter::repeat_n(0.0, ns));
                rows.push(row);
                rhs.push(*b);
            }
            for i in 0..d {
                let si = if norm == Norm::L1 { i } else { 0 };
                for sign in [1.0, -1.0] {
                    // sign·(y_i − x_i) ≤ s
                    let mut row = vec![0.0; d + ns];
                    row[i] = sign;
                    row[d + si] = -1.0;
                    rows.push(row);
                    rhs.push(sign * x[i]);
                }
            }
            let mut c = vec![0.0; d];
            c.extend(std::iter::repeat_n(1.0, ns));
            match lp::optimize(false, &c, &rows, &rhs)? {
                LpOutcome::Optimal { value, .. } => Ok(value.max(0.0)),
                LpOutcome::Infeasible => Ok(f64::INFINITY),
                LpOutcome::Unbounded => Err(lp::internal("unbounded distance program")),
            }
        }
    }
}

/// Euclidean projection of `x` onto `{y : normals[j]·y = offsets[j], j ∈ subset}`.
fn project_affine(x: &[f64], normals: &[Vec<f64>], offsets: &[f64], subset: &[usize]) -> Option<Vec<f64>> {
    let d = x.len();
    let k = subset.len();
    let a = DMatrix::from_fn(k, d, |r, c| normals[subset[r]][c]);
    let resid = DVector::from_fn(k, |r, _| dot(&normals[subset[r]], x) - offsets[subset[r]]);
    let gram = &a * a.transpose();
    let lu = gram.lu();
    if lu.determinant().abs() < 1e-14 {
        return None;
    }
    let lam = lu.solve(&resid)?;
    let step = a.transpose() * lam;
    Some((0..d).map(|i| x[i] - step[i]).collect())
}

fn enumerate_vertices(d: usize, normals: &[Vec<f64>], offsets: &[f64]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for subset in combinations(normals.len(), d) {
        let a = DMatrix::from_fn(d, d, |r, c| normals[subset[r]][c]);
        let b = DVector::from_fn(d, |r, _| offsets[subset[r]]);
        let lu = a.lu();
        if lu.determinant().abs() < 1e-14 {
            continue;
        }
        let Some(v) = lu.solve(&b) else { continue };
        let v: Vec<f64> = v.iter().copied().collect();
        let feasible = normals
            .iter()
            .zip(offsets)
            .all(|(n, o)| dot(n, &v) <= o + FEAS_EPS * (1.0 + o.abs()));
        if feasible && !out.iter().any(|w| Norm::Linf.dist(w, &v) < 1e-12) {
            out.push(v);
        }
    }
    out
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
