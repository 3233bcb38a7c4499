//! Continuous convex functions as immutable expression trees.

use super::extension::ExtensionSolver;
use super::quadratic::QuadraticForm;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{ConvexSet, HullBody};
use crate::map::VectorMap;
use crate::norm::{dot, Norm};
use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Slack used when testing domain membership of evaluation points.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Clone)]
pub(crate) enum Node {
    Constant(f64),
    MaxAffine {
        slopes: Vec<Vec<f64>>,
        intercepts: Vec<f64>,
    },
    Oracle {
        name: String,
        value: ScalarFn,
        gradient: Option<GradientFn>,
    },
    /// `½·gauge(x)²`.
    GaugeSquared(HullBody),
    /// `coeff·dist(x, set)`.
    Distance {
        coeff: f64,
        set: ConvexSet,
    },
    /// `coeff·‖x − center‖`.
    Norm {
        norm: Norm,
        center: Vec<f64>,
        coeff: f64,
    },
    /// `xᵀPx` for positive semidefinite `P`.
    Quadratic(QuadraticForm),
    Max(Vec<ConvexFn>),
    Sum(Vec<ConvexFn>),
    Scale(f64, ConvexFn),
    /// `inner(A x + b)`.
    AffinePrecompose {
        inner: ConvexFn,
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    /// `max{inside, outside}` on `region`, `outside` elsewhere.
    Patch {
        region: ConvexSet,
        inside: ConvexFn,
        outside: ConvexFn,
    },
    LipschitzExtension(Arc<ExtensionSolver>),
    /// `outer(map(x)) + weight·inner(x)`.
    ComposedControl {
        outer: ConvexFn,
        map: VectorMap,
        inner: ConvexFn,
        weight: f64,
    },
}

/// A continuous convex function on a convex domain.
#[derive(Clone)]
pub struct ConvexFn {
    node: Arc<Node>,
    domain: ConvexSet,
}

impl ConvexFn {
    pub(crate) fn from_node(node: Node, domain: ConvexSet) -> Self {
        ConvexFn {
            node: Arc::new(node),
            domain,
        }
    }

    pub fn constant(c: f64, domain: ConvexSet) -> Self {
        Self::from_node(Node::Constant(c), domain)
    }

    pub fn zero(domain: ConvexSet) -> Self {
        Self::constant(0.0, domain)
    }

    /// `max_i (slopes[i]·x + intercepts[i])`.
    pub fn max_affine(slopes: Vec<Vec<f64>>, intercepts: Vec<f64>, domain: ConvexSet) -> Result<Self> {
        if slopes.is_empty() || slopes.len() != intercepts.len() {
            return Err(Error::input(
                "max-of-affine needs at least one piece and one intercept per slope",
            ));
        }
        for s in &slopes {
            check_dim(domain.dim(), s.len())?;
        }
        Ok(Self::from_node(Node::MaxAffine { slopes, intercepts }, domain))
    }

    /// Smooth convex function supplied as callbacks; convexity is the caller's claim.
    pub fn oracle<V>(name: impl Into<String>, domain: ConvexSet, value: V) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::from_node(
            Node::Oracle {
                name: name.into(),
                value: Arc::new(value),
                gradient: None,
            },
            domain,
        )
    }

    pub fn oracle_with_gradient<V, G>(name: impl Into<String>, domain: ConvexSet, value: V, gradient: G) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::from_node(
            Node::Oracle {
                name: name.into(),
                value: Arc::new(value),
                gradient: Some(Arc::new(gradient)),
            },
            domain,
        )
    }

    /// `½·|||x|||²` for the gauge of `body`.
    pub fn gauge_squared(body: HullBody, domain: ConvexSet) -> Result<Self> {
        check_dim(domain.dim(), body.dimension)?;
        Ok(Self::from_node(Node::GaugeSquared(body), domain))
    }

    /// `coeff·dist(x, set)` in the norm carried by `set`.
    pub fn distance(coeff: f64, set: ConvexSet, domain: ConvexSet) -> Result<Self> {
        check_nonneg(coeff)?;
        check_dim(domain.dim(), set.dim())?;
        if set.is_empty() {
            return Err(Error::input("distance to the empty set"));
        }
        Ok(Self::from_node(Node::Distance { coeff, set }, domain))
    }

    /// `coeff·‖x − center‖`.
    pub fn norm(norm: Norm, center: Vec<f64>, coeff: f64, domain: ConvexSet) -> Result<Self> {
        check_nonneg(coeff)?;
        check_dim(domain.dim(), center.len())?;
        Ok(Self::from_node(Node::Norm { norm, center, coeff }, domain))
    }

    /// `xᵀPx`; `P` must be positive semidefinite.
    pub fn quadratic(form: QuadraticForm, domain: ConvexSet) -> Result<Self> {
        check_dim(domain.dim(), form.dim())?;
        if form.min_eigenvalue() < -super::quadratic::PSD_FLOOR * (1.0 + form.max_abs()) {
            return Err(Error::input("quadratic control needs a positive semidefinite matrix"));
        }
        Ok(Self::from_node(Node::Quadratic(form), domain))
    }

    /// `c·‖x‖₂²`.
    pub fn squared_euclidean(c: f64, domain: ConvexSet) -> Result<Self> {
        check_nonneg(c)?;
        let d = domain.dim();
        Self::quadratic(QuadraticForm::scaled_identity(d, c), domain)
    }

    pub fn domain(&self) -> &ConvexSet {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Same function, viewed on a different domain of the same dimension.
    pub fn restrict(&self, domain: ConvexSet) -> Result<Self> {
        check_dim(self.dim(), domain.dim())?;
        Ok(ConvexFn {
            node: self.node.clone(),
            domain,
        })
    }

    pub fn sum(fs: &[ConvexFn]) -> Result<Self> {
        let domain = common_domain(fs)?;
        if fs.len() == 1 {
            return Ok(fs[0].clone());
        }
        Ok(Self::from_node(Node::Sum(fs.to_vec()), domain))
    }

    pub fn add(&self, other: &ConvexFn) -> Result<Self> {
        Self::sum(&[self.clone(), other.clone()])
    }

    pub fn add_constant(&self, c: f64) -> Self {
        if c == 0.0 {
            return self.clone();
        }
        Self::from_node(
            Node::Sum(vec![self.clone(), ConvexFn::constant(c, self.domain.clone())]),
            self.domain.clone(),
        )
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        check_nonneg(c)?;
        if c == 1.0 {
            return Ok(self.clone());
        }
        Ok(Self::from_node(Node::Scale(c, self.clone()), self.domain.clone()))
    }

    pub fn pointwise_max(fs: &[ConvexFn]) -> Result<Self> {
        let domain = common_domain(fs)?;
        if fs.len() == 1 {
            return Ok(fs[0].clone());
        }
        Ok(Self::from_node(Node::Max(fs.to_vec()), domain))
    }

    pub fn max(&self, other: &ConvexFn) -> Result<Self> {
        Self::pointwise_max(&[self.clone(), other.clone()])
    }

    /// `x ↦ self(A x + b)` on `domain ⊆ ℝ^k` where `A` is `d × k`.
    pub fn affine_precompose(&self, matrix: Vec<Vec<f64>>, offset: Vec<f64>, domain: ConvexSet) -> Result<Self> {
        check_dim(self.dim(), matrix.len())?;
        check_dim(self.dim(), offset.len())?;
        for row in &matrix {
            check_dim(domain.dim(), row.len())?;
        }
        Ok(Self::from_node(
            Node::AffinePrecompose {
                inner: self.clone(),
                matrix,
                offset,
            },
            domain,
        ))
    }

    /// `max{inside, outside}` on `region` and `outside` off it.
    ///
    /// Convex whenever `inside < outside` near the boundary of `region`
    /// from outside, which the gluing recursion guarantees.
    pub(crate) fn patch(region: ConvexSet, inside: ConvexFn, outside: ConvexFn, domain: ConvexSet) -> Self {
        Self::from_node(
            Node::Patch {
                region,
                inside,
                outside,
            },
            domain,
        )
    }

    /// `outer(map(x)) + weight·inner(x)` on the domain of `inner`.
    pub fn composed_control(outer: ConvexFn, map: VectorMap, inner: ConvexFn, weight: f64) -> Result<Self> {
        check_nonneg(weight)?;
        check_dim(outer.dim(), map.output_dim())?;
        check_dim(inner.dim(), map.input_dim())?;
        let domain = inner.domain.clone();
        Ok(Self::from_node(
            Node::ComposedControl {
                outer,
                map,
                inner,
                weight,
            },
            domain,
        ))
    }

    /// Value with dimension and domain checks.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        if !self.domain.contains_closure(x, DOMAIN_SLACK) {
            return Err(Error::Domain {
                point: x.to_vec(),
                what: format!("convex function `{}`", self.label()),
            });
        }
        Ok(self.value(x))
    }

    /// Value without checks; the point must lie in the domain.
    pub fn value(&self, x: &[f64]) -> f64 {
        match &*self.node {
            Node::Constant(c) => *c,
            Node::MaxAffine { slopes, intercepts } => slopes
                .iter()
                .zip(intercepts)
                .map(|(s, b)| dot(s, x) + b)
                .fold(f64::NEG_INFINITY, f64::max),
            Node::Oracle { value, .. } => value(x),
            Node::GaugeSquared(body) => {
                let g = body.gauge_unchecked(x);
                0.5 * g * g
            }
            Node::Distance { coeff, set } => {
                if *coeff == 0.0 {
                    0.0
                } else {
                    coeff * set.dist(x).unwrap_or(f64::NAN)
                }
            }
            Node::Norm { norm, center, coeff } => coeff * norm.dist(x, center),
            Node::Quadratic(q) => q.eval(x),
            Node::Max(fs) => fs.iter().map(|f| f.value(x)).fold(f64::NEG_INFINITY, f64::max),
            Node::Sum(fs) => fs.iter().map(|f| f.value(x)).sum(),
            Node::Scale(c, f) => c * f.value(x),
            Node::AffinePrecompose {
                inner,
                matrix,
                offset,
            } => {
                let y: Vec<f64> = matrix.iter().zip(offset).map(|(row, b)| dot(row, x) + b).collect();
                inner.value(&y)
            }
            Node::Patch {
                region,
                inside,
                outside,
            } => {
                let out = outside.value(x);
                if region.contains_unchecked(x) {
                    out.max(inside.value(x))
                } else {
                    out
                }
            }
            Node::LipschitzExtension(solver) => solver.value(x),
            Node::ComposedControl {
                outer,
                map,
                inner,
                weight,
            } => {
                let y = map.apply(x);
                let o = outer.value(&y);
                if *weight == 0.0 {
                    o
                } else {
                    o + weight * inner.value(x)
                }
            }
        }
    }

    /// A subgradient where one is cheaply available.
    pub fn subgradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &*self.node {
            Node::Constant(_) => Some(vec![0.0; x.len()]),
            Node::MaxAffine { slopes, intercepts } => {
                let (i, _) = slopes
                    .iter()
                    .zip(intercepts)
                    .map(|(s, b)| dot(s, x) + b)
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
                Some(slopes[i].clone())
            }
            Node::Oracle { gradient, .. } => gradient.as_ref().map(|g| g(x)),
            Node::GaugeSquared(body) => {
                let g = body.gauge_unchecked(x);
                Some(body.gauge_subgradient(x).into_iter().map(|a| a * g).collect())
            }
            Node::Quadratic(q) => Some(q.gradient(x)),
            Node::Sum(fs) => {
                let mut acc = vec![0.0; x.len()];
                for f in fs {
                    for (a, g) in acc.iter_mut().zip(f.subgradient(x)?) {
                        *a += g;
                    }
                }
                Some(acc)
            }
            Node::Scale(c, f) => Some(f.subgradient(x)?.into_iter().map(|g| c * g).collect()),
            Node::Max(fs) => {
                let best = fs
                    .iter()
                    .max_by(|a, b| a.value(x).total_cmp(&b.value(x)))?;
                best.subgradient(x)
            }
            _ => None,
        }
    }

    /// Short human-readable description of the tree.
    pub fn label(&self) -> String {
        match &*self.node {
            Node::Constant(c) => format!("{c}"),
            Node::MaxAffine { slopes, .. } => format!("max-affine[{}]", slopes.len()),
            Node::Oracle { name, .. } => name.clone(),
            Node::GaugeSquared(_) => "½gauge²".into(),
            Node::Distance { coeff, set } => format!("{coeff}·dist(·,{})", set.kind_name()),
            Node::Norm { norm, coeff, .. } => format!("{coeff}·‖·‖_{norm}"),
            Node::Quadratic(_) => "quadratic".into(),
            Node::Max(fs) => format!("max[{}]", fs.len()),
            Node::Sum(fs) => format!("sum[{}]", fs.len()),
            Node::Scale(c, f) => format!("{c}·({})", f.label()),
            Node::AffinePrecompose { inner, .. } => format!("{}∘affine", inner.label()),
            Node::Patch { .. } => "patch".into(),
            Node::LipschitzExtension(s) => format!("ext({})", s.label()),
            Node::ComposedControl { outer, inner, weight, .. } => {
                format!("{}∘F + {weight}·{}", outer.label(), inner.label())
            }
        }
    }

    /// Children of `Max` nodes, in order; the function itself otherwise.
    pub fn max_pieces(&self) -> Vec<ConvexFn> {
        match &*self.node {
            Node::Max(fs) => fs.clone(),
            _ => vec![self.clone()],
        }
    }
}

impl fmt::Debug for ConvexFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConvexFn({} on {})", self.label(), self.domain.kind_name())
    }
}

fn check_nonneg(c: f64) -> Result<()> {
    if c >= 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!(
            "scale factor must be finite and nonnegative, got {c}"
        )))
    }
}

fn common_domain(fs: &[ConvexFn]) -> Result<ConvexSet> {
    let first = fs
        .first()
        .ok_or_else(|| Error::input("need at least one convex function"))?;
    let mut dom = first.domain.clone();
    for f in &fs[1..] {
        check_dim(dom.dim(), f.dim())?;
        if f.domain != dom {
            dom = dom.intersect(&f.domain)?;
        }
    }
    Ok(dom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> ConvexSet {
        ConvexSet::whole(1)
    }

    #[test]
    fn closure_operations() {
        let abs = ConvexFn::max_affine(vec![vec![1.0], vec![-1.0]], vec![0.0, 0.0], line()).unwrap();
        assert_eq!(abs.eval(&[-2.0]).unwrap(), 2.0);
        let twice = ConvexFn::sum(&[abs.clone(), abs.clone()]).unwrap();
        assert_eq!(twice.eval(&[3.0]).unwrap(), 6.0);
        let sq = ConvexFn::squared_euclidean(1.0, line()).unwrap();
        let shifted = sq.affine_precompose(vec![vec![2.0]], vec![1.0], line()).unwrap();
        assert_eq!(shifted.eval(&[1.0]).unwrap(), 9.0);
    }

    #[test]
    fn negative_scale_rejected() {
        let sq = ConvexFn::squared_euclidean(1.0, line()).unwrap();
        assert!(matches!(sq.scale(-1.0), Err(Error::Input(_))));
    }

    #[test]
    fn domain_errors() {
        let f = ConvexFn::squared_euclidean(1.0, ConvexSet::interval(0.0, 1.0, false)).unwrap();
        assert!(matches!(f.eval(&[2.0]), Err(Error::Domain { .. })));
        assert!(matches!(f.eval(&[0.5, 0.5]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn sum_intersects_domains() {
        let a = ConvexFn::zero(ConvexSet::interval(-1.0, 2.0, false));
        let b = ConvexFn::zero(ConvexSet::interval(0.0, 3.0, false));
        let s = a.add(&b).unwrap();
        assert_eq!(s.domain(), &ConvexSet::interval(0.0, 2.0, false));
    }
}
