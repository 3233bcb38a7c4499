//! Workspace files: an ambient space, a domain, named definitions and a d.c. expression.

use crate::error::CliError;
use dcx::calculus::{bilinear_product, compose_global, product, quadratic_compose, quotient, DenominatorFloor, GlobalOptions};
use dcx::functions::{c11_dc_split, HessianBound};
use dcx::gallery::{chyba_c1_c2, chyba_g};
use dcx::{bundle, ConvexFn, ConvexSet, DCFunction, Norm, Provenance, ProvenanceTag, QuadraticForm};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ambient {
    pub dimension: usize,
    #[serde(default)]
    pub norm: Norm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_segments")]
    pub segments: usize,
    #[serde(default = "default_duals")]
    pub duals: usize,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_segments() -> usize {
    10_000
}

fn default_duals() -> usize {
    64
}

fn one() -> f64 {
    1.0
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol: default_tol(),
            segments: default_segments(),
            duals: default_duals(),
        }
    }
}

/// Smooth one-variable functions available as outer maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builtin {
    Sin,
    Exp,
    Atan,
    /// `Σ coefficients[k]·y^k`.
    Polynomial { coefficients: Vec<f64> },
}

/// Largest `|atan''|`, attained at `y = ±1/√3`.
const ATAN_CURVATURE: f64 = 0.649_519_052_838_329;

impl Builtin {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Builtin::Sin => y.sin(),
            Builtin::Exp => y.exp(),
            Builtin::Atan => y.atan(),
            Builtin::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * y + c),
        }
    }

    /// The builtin as a d.c. function on the real line.
    pub fn outer(&self) -> dcx::Result<DCFunction> {
        let line = ConvexSet::whole(1);
        match self {
            Builtin::Exp => Ok(DCFunction::convex(&ConvexFn::oracle("exp", line, |y: &[f64]| y[0].exp()))),
            Builtin::Sin => c11_dc_split(
                "sin",
                Arc::new(|y: &[f64]| y[0].sin()),
                Arc::new(|y: &[f64]| vec![y[0].cos()]),
                line,
                HessianBound::Given(1.0),
            ),
            Builtin::Atan => c11_dc_split(
                "atan",
                Arc::new(|y: &[f64]| y[0].atan()),
                Arc::new(|y: &[f64]| vec![1.0 / (1.0 + y[0] * y[0])]),
                line,
                HessianBound::Given(ATAN_CURVATURE),
            ),
            Builtin::Polynomial { coefficients } => {
                // a·y^k ± |a|·|y|^k is convex for k ≥ 1, so Σ_{k≥2} |a_k|·|y|^k controls p
                let value = coefficients.clone();
                let tail: Vec<(i32, f64)> = coefficients
                    .iter()
                    .enumerate()
                    .skip(2)
                    .filter(|(_, a)| **a != 0.0)
                    .map(|(k, a)| (k as i32, a.abs()))
                    .collect();
                let control = ConvexFn::oracle("polynomial control", line.clone(), move |y: &[f64]| {
                    tail.iter().map(|(k, a)| a * y[0].abs().powi(*k)).sum()
                });
                DCFunction::new(
                    line,
                    move |y| value.iter().rev().fold(0.0, |acc, c| acc * y[0] + c),
                    control,
                    Provenance::new(ProvenanceTag::Primitive, "polynomial"),
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GalleryRef {
    /// The integral of the dyadic indicator on `[−1, 0]`, controlled by `c₁ + c₂`.
    Chyba,
}

/// A d.c. expression tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expr {
    Const {
        value: f64,
    },
    Var {
        index: usize,
    },
    Affine {
        slope: Vec<f64>,
        intercept: f64,
    },
    /// `coeff·‖x − center‖`.
    Norm {
        norm: Norm,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        coeff: f64,
    },
    Max {
        args: Vec<Expr>,
    },
    Sum {
        args: Vec<Expr>,
    },
    Scale {
        factor: f64,
        arg: Box<Expr>,
    },
    /// `plus − minus`.
    Pair {
        plus: Box<Expr>,
        minus: Box<Expr>,
    },
    Product {
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Quotient {
        num: Box<Expr>,
        den: Box<Expr>,
        /// Lower bound on `|den|`; estimated by sampling when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        floor: Option<f64>,
    },
    Compose {
        outer: Builtin,
        arg: Box<Expr>,
    },
    /// `Q(F(x))` for the bundle `F` of `args`.
    Quadratic {
        matrix: Vec<Vec<f64>>,
        args: Vec<Expr>,
    },
    /// `B(F(x), G(x))`.
    Bilinear {
        matrix: Vec<Vec<f64>>,
        left: Vec<Expr>,
        right: Vec<Expr>,
    },
    Gallery {
        name: GalleryRef,
    },
    Ref {
        name: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workspace {
    pub ambient: Ambient,
    pub domain: ConvexSet,
    /// Bounded region to certify on; required when the domain is unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<ConvexSet>,
    #[serde(default)]
    pub definitions: BTreeMap<String, Expr>,
    pub expression: Expr,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Workspace {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let ws: Workspace = serde_json::from_str(text).map_err(CliError::parse)?;
        ws.validate()?;
        Ok(ws)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.domain.dim() != self.ambient.dimension {
            return Err(CliError::Input(format!(
                "domain has dimension {} but the ambient space has {}",
                self.domain.dim(),
                self.ambient.dimension
            )));
        }
        for name in self.definitions.keys() {
            self.check_acyclic(name, &mut Vec::new())?;
        }
        self.walk(&self.expression, &mut Vec::new())
    }

    fn check_acyclic(&self, name: &str, path: &mut Vec<String>) -> Result<(), CliError> {
        if path.iter().any(|p| p == name) {
            path.push(name.to_string());
            return Err(CliError::Input(format!("cyclic definitions: {}", path.join(" -> "))));
        }
        let expr = self
            .definitions
            .get(name)
            .ok_or_else(|| CliError::Input(format!("undefined reference `{name}`")))?;
        path.push(name.to_string());
        self.walk(expr, path)?;
        path.pop();
        Ok(())
    }

    fn walk(&self, e: &Expr, path: &mut Vec<String>) -> Result<(), CliError> {
        match e {
            Expr::Ref { name } => self.check_acyclic(name, path),
            Expr::Var { index } if *index >= self.ambient.dimension => Err(CliError::Input(format!(
                "variable index {index} out of range for dimension {}",
                self.ambient.dimension
            ))),
            _ => children(e).into_iter().try_for_each(|c| self.walk(c, path)),
        }
    }

    pub fn domain(&self) -> ConvexSet {
        self.domain.clone().with_norm(self.ambient.norm)
    }

    pub fn global_options(&self) -> GlobalOptions {
        GlobalOptions {
            region: self.region.clone().map(|r| r.with_norm(self.ambient.norm)),
            seed: self.seed,
            ..GlobalOptions::default()
        }
    }

    /// Builds the root expression.
    pub fn build(&self) -> Result<DCFunction, CliError> {
        Builder {
            ws: self,
            domain: self.domain(),
            opts: self.global_options(),
            cache: HashMap::new(),
        }
        .build(&self.expression)
    }

    /// Pointwise value of the root expression, computed directly.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.eval(&self.expression, x)
    }

    fn eval(&self, e: &Expr, x: &[f64]) -> f64 {
        match e {
            Expr::Const { value } => *value,
            Expr::Var { index } => x[*index],
            Expr::Affine { slope, intercept } => slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + intercept,
            Expr::Norm { norm, center, coeff } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; x.len()]);
                coeff * norm.dist(x, &c)
            }
            Expr::Max { args } => args.iter().map(|a| self.eval(a, x)).fold(f64::NEG_INFINITY, f64::max),
            Expr::Sum { args } => args.iter().map(|a| self.eval(a, x)).sum(),
            Expr::Scale { factor, arg } => factor * self.eval(arg, x),
            Expr::Pair { plus, minus } => self.eval(plus, x) - self.eval(minus, x),
            Expr::Product { left, right } => self.eval(left, x) * self.eval(right, x),
            Expr::Quotient { num, den, .. } => self.eval(num, x) / self.eval(den, x),
            Expr::Compose { outer, arg } => outer.eval(self.eval(arg, x)),
            Expr::Quadratic { matrix, args } => {
                let y: Vec<f64> = args.iter().map(|a| self.eval(a, x)).collect();
                bilinear(matrix, &y, &y)
            }
            Expr::Bilinear { matrix, left, right } => {
                let u: Vec<f64> = left.iter().map(|a| self.eval(a, x)).collect();
                let v: Vec<f64> = right.iter().map(|a| self.eval(a, x)).collect();
                bilinear(matrix, &u, &v)
            }
            Expr::Gallery { name: GalleryRef::Chyba } => chyba_g(x[0]).unwrap_or(f64::NAN),
            Expr::Ref { name } => self.eval(&self.definitions[name], x),
        }
    }
}

fn bilinear(matrix: &[Vec<f64>], u: &[f64], v: &[f64]) -> f64 {
    matrix
        .iter()
        .zip(u)
        .map(|(row, ui)| ui * row.iter().zip(v).map(|(b, vj)| b * vj).sum::<f64>())
        .sum()
}

fn children(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Max { args } | Expr::Sum { args } | Expr::Quadratic { args, .. } => args.iter().collect(),
        Expr::Bilinear { left, right, .. } => left.iter().chain(right).collect(),
        Expr::Scale { arg, .. } | Expr::Compose { arg, .. } => vec![arg],
        Expr::Pair { plus: a, minus: b }
        | Expr::Product { left: a, right: b }
        | Expr::Quotient { num: a, den: b, .. } => vec![a, b],
        _ => Vec::new(),
    }
}

struct Builder<'a> {
    ws: &'a Workspace,
    domain: ConvexSet,
    opts: GlobalOptions,
    cache: HashMap<String, DCFunction>,
}

impl Builder<'_> {
    fn build_all(&mut self, args: &[Expr]) -> Result<Vec<DCFunction>, CliError> {
        if args.is_empty() {
            return Err(CliError::Input("operator needs at least one argument".into()));
        }
        args.iter().map(|a| self.build(a)).collect()
    }

    fn build(&mut self, e: &Expr) -> Result<DCFunction, CliError> {
        let d = self.domain.dim();
        let dom = &self.domain;
        Ok(match e {
            Expr::Const { value } => DCFunction::constant(*value, dom.clone())?,
            Expr::Var { index } => {
                let mut slope = vec![0.0; d];
                slope[*index] = 1.0;
                DCFunction::affine(slope, 0.0, dom.clone())?
            }
            Expr::Affine { slope, intercept } => DCFunction::affine(slope.clone(), *intercept, dom.clone())?,
            Expr::Norm { norm, center, coeff } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; d]);
                DCFunction::convex(&ConvexFn::norm(*norm, c, *coeff, dom.clone())?)
            }
            Expr::Max { args } => {
                let parts = self.build_all(args)?;
                if parts.len() == 1 {
                    return Ok(parts[0].clone());
                }
                let k = parts.len();
                let slopes: Vec<Vec<f64>> = (0..k)
                    .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect();
                let outer = DCFunction::convex(&ConvexFn::max_affine(slopes, vec![0.0; k], ConvexSet::whole(k))?);
                compose_global(&bundle(&parts)?, &outer, &self.opts)?
            }
            Expr::Sum { args } => DCFunction::sum(&self.build_all(args)?)?,
            Expr::Scale { factor, arg } => self.build(arg)?.scale(*factor)?,
            Expr::Pair { plus, minus } => {
                let p = self.build(plus)?;
                let m = self.build(minus)?.scale(-1.0)?;
                DCFunction::sum(&[p, m])?
            }
            Expr::Product { left, right } => {
                let (l, r) = (self.build(left)?, self.build(right)?);
                product(&l, &r, &self.opts)?
            }
            Expr::Quotient { num, den, floor } => {
                let (n, m) = (self.build(num)?, self.build(den)?);
                let floor = match floor {
                    Some(f) => DenominatorFloor::Given(*f),
                    None => DenominatorFloor::Estimate { samples: 4096 },
                };
                quotient(&n, &m, floor, &self.opts)?
            }
            Expr::Compose { outer, arg } => {
                let inner = self.build(arg)?;
                compose_global(&inner.as_mapping(), &outer.outer()?, &self.opts)?
            }
            Expr::Quadratic { matrix, args } => {
                let f = bundle(&self.build_all(args)?)?;
                quadratic_compose(&f, &QuadraticForm::new(matrix.clone())?, &self.opts)?
            }
            Expr::Bilinear { matrix, left, right } => {
                let f = bundle(&self.build_all(left)?)?;
                let g = bundle(&self.build_all(right)?)?;
                bilinear_product(&f, &g, matrix, &self.opts)?
            }
            Expr::Gallery { name: GalleryRef::Chyba } => {
                if d != 1 {
                    return Err(CliError::Input("the chyba gallery function lives on [-1, 0] in one dimension".into()));
                }
                if !within_unit(dom) {
                    return Err(CliError::Input("the chyba gallery function needs a domain inside [-1, 0]".into()));
                }
                let control = ConvexFn::oracle("c1 + c2", dom.clone(), |x: &[f64]| {
                    chyba_c1_c2(x[0]).map_or(f64::NAN, |(a, b)| a + b)
                });
                DCFunction::new(
                    dom.clone(),
                    |x| chyba_g(x[0]).unwrap_or(f64::NAN),
                    control,
                    Provenance::new(ProvenanceTag::Gallery, "chyba g = c1 - c2"),
                )?
            }
            Expr::Ref { name } => {
                if let Some(f) = self.cache.get(name) {
                    return Ok(f.clone());
                }
                let f = self.build(&self.ws.definitions[name])?;
                self.cache.insert(name.clone(), f.clone());
                f
            }
        })
    }
}

fn within_unit(dom: &ConvexSet) -> bool {
    dom.bounding_box()
        .is_some_and(|(lo, hi)| lo[0] >= -1.0 && hi[0] <= 0.0)
}
