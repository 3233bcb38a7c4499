//! D.c. functions and mappings paired with explicit control functions.

use crate::error::{check_dim, Error, Result};
use crate::functions::{ConvexFn, ScalarFn};
use crate::geometry::ConvexSet;
use crate::map::VectorMap;
use crate::norm::{dot, Norm};
use crate::verify::{self, SamplingConfig, VerificationReport};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProvenanceTag {
    Primitive,
    Pair,
    Bundled,
    Composed,
    Glued,
    Split,
    Extended,
    Gallery,
}

/// Construction lineage carried by every d.c. object.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub tag: ProvenanceTag,
    pub label: String,
    /// True when some constant in the chain was estimated by sampling.
    pub empirical: bool,
    pub chain: Vec<String>,
}

impl Provenance {
    pub fn new(tag: ProvenanceTag, label: impl Into<String>) -> Self {
        let label = label.into();
        Provenance {
            tag,
            chain: vec![format!("{tag:?}: {label}").to_lowercase()],
            label,
            empirical: false,
        }
    }

    /// A step built on top of `parents`; inherits their chains and empirical taint.
    pub fn derived(tag: ProvenanceTag, label: impl Into<String>, parents: &[&Provenance]) -> Self {
        let mut p = Provenance::new(tag, label);
        let mut chain = Vec::new();
        for parent in parents {
            chain.extend(parent.chain.iter().map(|c| format!("  {c}")));
            p.empirical |= parent.empirical;
        }
        chain.insert(0, p.chain[0].clone());
        p.chain = chain;
        p
    }

    pub fn mark_empirical(mut self, why: &str) -> Self {
        self.empirical = true;
        self.chain.push(format!("  empirical: {why}"));
        self
    }
}

/// A real function on a convex set together with a control function.
#[derive(Clone)]
pub struct DCFunction {
    domain: ConvexSet,
    value: ScalarFn,
    control: ConvexFn,
    provenance: Provenance,
}

impl DCFunction {
    pub fn new<V>(domain: ConvexSet, value: V, control: ConvexFn, provenance: Provenance) -> Result<Self>
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::from_arc(domain, Arc::new(value), control, provenance)
    }

    pub fn from_arc(domain: ConvexSet, value: ScalarFn, control: ConvexFn, provenance: Provenance) -> Result<Self> {
        check_dim(domain.dim(), control.dim())?;
        Ok(DCFunction {
            domain,
            value,
            control,
            provenance,
        })
    }

    /// `x ↦ slope·x + intercept`, which needs no control.
    pub fn affine(slope: Vec<f64>, intercept: f64, domain: ConvexSet) -> Result<Self> {
        check_dim(domain.dim(), slope.len())?;
        let control = ConvexFn::zero(domain.clone());
        let s = slope.clone();
        Self::new(
            domain,
            move |x| dot(&s, x) + intercept,
            control,
            Provenance::new(ProvenanceTag::Primitive, format!("affine {slope:?} + {intercept}")),
        )
    }

    pub fn constant(c: f64, domain: ConvexSet) -> Result<Self> {
        let d = domain.dim();
        Self::affine(vec![0.0; d], c, domain)
    }

    /// A convex function is d.c. with itself as control.
    pub fn convex(f: &ConvexFn) -> Self {
        let g = f.clone();
        DCFunction {
            domain: f.domain().clone(),
            value: Arc::new(move |x| g.value(x)),
            control: f.clone(),
            provenance: Provenance::new(ProvenanceTag::Primitive, format!("convex {}", f.label())),
        }
    }

    pub fn domain(&self) -> &ConvexSet {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn control(&self) -> &ConvexFn {
        &self.control
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn value_fn(&self) -> ScalarFn {
        self.value.clone()
    }

    /// Value without domain checks.
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        if !self.domain.contains_closure(x, 1e-12) {
            return Err(Error::Domain {
                point: x.to_vec(),
                what: format!("d.c. function `{}`", self.provenance.label),
            });
        }
        Ok(self.value(x))
    }

    pub fn with_control(&self, control: ConvexFn) -> Result<Self> {
        check_dim(self.dim(), control.dim())?;
        Ok(DCFunction {
            control,
            ..self.clone()
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Same value and control viewed on a smaller domain.
    pub fn restrict(&self, domain: ConvexSet) -> Result<Self> {
        check_dim(self.dim(), domain.dim())?;
        Ok(DCFunction {
            control: self.control.restrict(domain.clone())?,
            domain,
            ..self.clone()
        })
    }

    /// `c·f` with control `|c|·control`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        let v = self.value.clone();
        Ok(DCFunction {
            domain: self.domain.clone(),
            value: Arc::new(move |x| c * v(x)),
            control: self.control.scale(c.abs())?,
            provenance: Provenance::derived(ProvenanceTag::Pair, format!("scale by {c}"), &[&self.provenance]),
        })
    }

    /// Sum of d.c. functions; controls add.
    pub fn sum(fs: &[DCFunction]) -> Result<Self> {
        let first = fs.first().ok_or_else(|| Error::input("sum of no functions"))?;
        if fs.len() == 1 {
            return Ok(first.clone());
        }
        let controls: Vec<ConvexFn> = fs.iter().map(|f| f.control.clone()).collect();
        let control = ConvexFn::sum(&controls)?;
        let values: Vec<ScalarFn> = fs.iter().map(|f| f.value.clone()).collect();
        let parents: Vec<&Provenance> = fs.iter().map(|f| &f.provenance).collect();
        Ok(DCFunction {
            domain: control.domain().clone(),
            value: Arc::new(move |x| values.iter().map(|v| v(x)).sum()),
            control,
            provenance: Provenance::derived(ProvenanceTag::Pair, format!("sum of {}", fs.len()), &parents),
        })
    }

    /// View as a mapping into ℝ¹.
    pub fn as_mapping(&self) -> DCMapping {
        let v = self.value.clone();
        DCMapping {
            domain: self.domain.clone(),
            map: VectorMap::new(self.dim(), 1, move |x| vec![v(x)]),
            control: self.control.clone(),
            codomain_norm: Norm::L2,
            components: vec![self.clone()],
            provenance: self.provenance.clone(),
        }
    }

    /// Sampled check of `±f + control` convexity.
    pub fn check_control(&self, cfg: &SamplingConfig) -> Result<VerificationReport> {
        self.as_mapping().check_control(cfg)
    }
}

impl fmt::Debug for DCFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DCFunction({} with control {:?})",
            self.provenance.label, self.control
        )
    }
}

/// `plus − minus` with both parts convex on a shared domain.
#[derive(Clone, Debug)]
pub struct DCPair {
    pub plus: ConvexFn,
    pub minus: ConvexFn,
}

impl DCPair {
    pub fn new(plus: ConvexFn, minus: ConvexFn) -> Result<Self> {
        if plus.domain() != minus.domain() {
            return Err(Error::input(format!(
                "d.c. pair parts live on different domains ({} vs {})",
                plus.domain().kind_name(),
                minus.domain().kind_name()
            )));
        }
        Ok(DCPair { plus, minus })
    }

    pub fn domain(&self) -> &ConvexSet {
        self.plus.domain()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.plus.value(x) - self.minus.value(x)
    }
}

/// Value `plus − minus` with control `plus + minus`.
pub fn from_pair(pair: &DCPair) -> Result<DCFunction> {
    let (p, m) = (pair.plus.clone(), pair.minus.clone());
    DCFunction::new(
        pair.domain().clone(),
        move |x| p.value(x) - m.value(x),
        pair.plus.add(&pair.minus)?,
        Provenance::new(
            ProvenanceTag::Pair,
            format!("({}) − ({})", pair.plus.label(), pair.minus.label()),
        ),
    )
}

/// A mapping into `(ℝ^m, codomain_norm)` with a control function.
#[derive(Clone)]
pub struct DCMapping {
    domain: ConvexSet,
    map: VectorMap,
    control: ConvexFn,
    codomain_norm: Norm,
    components: Vec<DCFunction>,
    provenance: Provenance,
}

impl DCMapping {
    pub fn new(
        domain: ConvexSet,
        map: VectorMap,
        control: ConvexFn,
        codomain_norm: Norm,
        provenance: Provenance,
    ) -> Result<Self> {
        check_dim(domain.dim(), map.input_dim())?;
        check_dim(domain.dim(), control.dim())?;
        Ok(DCMapping {
            domain,
            map,
            control,
            codomain_norm,
            components: Vec::new(),
            provenance,
        })
    }

    pub fn domain(&self) -> &ConvexSet {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn output_dim(&self) -> usize {
        self.map.output_dim()
    }

    pub fn map(&self) -> &VectorMap {
        &self.map
    }

    pub fn control(&self) -> &ConvexFn {
        &self.control
    }

    pub fn codomain_norm(&self) -> Norm {
        self.codomain_norm
    }

    /// Components when the mapping was bundled from scalar pieces.
    pub fn components(&self) -> &[DCFunction] {
        &self.components
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.map.apply(x)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        if !self.domain.contains_closure(x, 1e-12) {
            return Err(Error::Domain {
                point: x.to_vec(),
                what: format!("d.c. mapping `{}`", self.provenance.label),
            });
        }
        Ok(self.apply(x))
    }

    pub fn with_codomain_norm(mut self, norm: Norm) -> Self {
        self.codomain_norm = norm;
        self
    }

    pub fn with_control(&self, control: ConvexFn) -> Result<Self> {
        check_dim(self.dim(), control.dim())?;
        Ok(DCMapping {
            control,
            ..self.clone()
        })
    }

    pub fn restrict(&self, domain: ConvexSet) -> Result<Self> {
        check_dim(self.dim(), domain.dim())?;
        Ok(DCMapping {
            control: self.control.restrict(domain.clone())?,
            components: self
                .components
                .iter()
                .map(|c| c.restrict(domain.clone()))
                .collect::<Result<_>>()?,
            domain,
            ..self.clone()
        })
    }

    /// `x ↦ (self(x), other(x))` with summed controls.
    ///
    /// The codomain is Euclidean unless a multi-dimensional part carries the
    /// max norm, in which case the max norm is used: its dual unit ball
    /// projects into every component's dual unit ball.
    pub fn stack(&self, other: &DCMapping) -> Result<Self> {
        if self.domain != other.domain {
            return Err(Error::input("stacked mappings must share one domain"));
        }
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        if components.len() != self.output_dim() + other.output_dim() {
            components.clear();
        }
        Ok(DCMapping {
            domain: self.domain.clone(),
            map: self.map.concat(&other.map),
            control: self.control.add(&other.control)?,
            codomain_norm: if [self, other]
                .iter()
                .any(|m| m.codomain_norm == Norm::Linf && m.output_dim() > 1)
            {
                Norm::Linf
            } else {
                Norm::L2
            },
            components,
            provenance: Provenance::derived(
                ProvenanceTag::Bundled,
                "stacked pair",
                &[&self.provenance, &other.provenance],
            ),
        })
    }

    /// Sampled check of `y*∘F + control` convexity over duals `‖y*‖_* ≤ 1`.
    pub fn check_control(&self, cfg: &SamplingConfig) -> Result<VerificationReport> {
        let region = cfg.region.clone().unwrap_or_else(|| self.domain.clone());
        let control = self.control.clone();
        let mut report = verify::check_control_contract(
            &self.map,
            &move |x: &[f64]| control.value(x),
            &region,
            self.codomain_norm,
            cfg,
        )?;
        report.construction = self.provenance.chain.clone();
        if self.provenance.empirical {
            report
                .notes
                .push("control uses empirically estimated constants".into());
        }
        Ok(report)
    }
}

impl fmt::Debug for DCMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DCMapping({}: ℝ^{} → ℝ^{}, control {:?})",
            self.provenance.label,
            self.dim(),
            self.output_dim(),
            self.control
        )
    }
}

/// Componentwise mapping `(f_1, …, f_n)` controlled by the sum of the component controls.
///
/// The sum controls the bundle for any norm on the codomain, since every
/// coordinate of a dual vector in the dual unit ball has absolute value at most one.
pub fn bundle(components: &[DCFunction]) -> Result<DCMapping> {
    let first = components
        .first()
        .ok_or_else(|| Error::input("cannot bundle an empty list of functions"))?;
    for c in &components[1..] {
        if c.domain != first.domain {
            return Err(Error::input("bundled components must share one domain"));
        }
    }
    let controls: Vec<ConvexFn> = components.iter().map(|c| c.control.clone()).collect();
    let control = ConvexFn::sum(&controls)?;
    let values: Vec<ScalarFn> = components.iter().map(|c| c.value.clone()).collect();
    let n = components.len();
    let parents: Vec<&Provenance> = components.iter().map(|c| &c.provenance).collect();
    Ok(DCMapping {
        domain: first.domain.clone(),
        map: VectorMap::new(first.dim(), n, move |x| values.iter().map(|v| v(x)).collect()),
        control,
        codomain_norm: Norm::L2,
        components: components.to_vec(),
        provenance: Provenance::derived(ProvenanceTag::Bundled, format!("bundle of {n}"), &parents),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> ConvexSet {
        ConvexSet::interval(-2.0, 2.0, false)
    }

    fn abs() -> ConvexFn {
        ConvexFn::max_affine(vec![vec![1.0], vec![-1.0]], vec![0.0, 0.0], line()).unwrap()
    }

    #[test]
    fn pair_value_and_control() {
        let sq = ConvexFn::squared_euclidean(1.0, line()).unwrap();
        let f = from_pair(&DCPair::new(sq.clone(), ConvexFn::zero(line())).unwrap()).unwrap();
        assert_eq!(f.value(&[1.5]), 2.25);
        assert_eq!(f.control().value(&[1.5]), 2.25);
        let g = from_pair(&DCPair::new(abs(), abs()).unwrap()).unwrap();
        assert_eq!(g.value(&[-1.0]), 0.0);
        assert_eq!(g.control().value(&[-1.0]), 2.0);
    }

    #[test]
    fn pair_domain_mismatch() {
        let other = ConvexFn::zero(ConvexSet::interval(0.0, 1.0, false));
        assert!(DCPair::new(abs(), other).is_err());
    }

    #[test]
    fn bundle_sums_controls() {
        let a = DCFunction::convex(&abs());
        let b = DCFunction::convex(&ConvexFn::squared_euclidean(1.0, line()).unwrap());
        let m = bundle(&[a.clone(), b]).unwrap();
        assert_eq!(m.control().value(&[-1.5]), 1.5 + 2.25);
        assert_eq!(m.apply(&[-1.5]), vec![1.5, 2.25]);
        let single = bundle(&[a]).unwrap();
        assert_eq!(single.control().value(&[0.7]), 0.7);
        assert!(bundle(&[]).is_err());
    }
}
