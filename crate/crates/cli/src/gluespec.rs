//! Glue requests: stages of an exhaustion, a value expression and per-stage quadratic controls.

use crate::error::CliError;
use crate::workspace::{Ambient, Expr, Workspace};
use dcx::glue::{glue_dc, Exhaustion, GlueOptions, Glued};
use dcx::{ConvexFn, ConvexSet, DCFunction};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Concentric open cubes (intervals in one dimension) of radius `k − inset`, `k = 1..=count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nested {
    pub count: usize,
    pub inset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Stages {
    Nested { nested: Nested },
    List(Vec<ConvexSet>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueSpec {
    pub ambient: Ambient,
    pub stages: Stages,
    /// Gap certificates; computed from the stages when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<f64>>,
    /// The glued d.c. function's value.
    pub value: Expr,
    /// Every stage uses the local control `coeff·‖x‖₂²`.
    pub control_coeff: f64,
    /// Where the result is checked.
    pub region: ConvexSet,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub sup_multiplier: f64,
}

fn one() -> f64 {
    1.0
}

pub struct GlueRun {
    pub function: DCFunction,
    pub glued: Glued,
}

impl GlueSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: GlueSpec = serde_json::from_str(text).map_err(CliError::parse)?;
        spec.value_workspace()?;
        Ok(spec)
    }

    fn ambient_set(&self) -> ConvexSet {
        ConvexSet::whole(self.ambient.dimension).with_norm(self.ambient.norm)
    }

    pub fn stage_sets(&self) -> Result<Vec<ConvexSet>, CliError> {
        let d = self.ambient.dimension;
        let sets = match &self.stages {
            Stages::List(sets) => sets.iter().map(|s| s.clone().with_norm(self.ambient.norm)).collect(),
            Stages::Nested { nested } => {
                let c = nested.center.clone().unwrap_or_else(|| vec![0.0; d]);
                if c.len() != d {
                    return Err(CliError::Input(format!("stage center has length {} but dimension is {d}", c.len())));
                }
                (1..=nested.count)
                    .map(|k| {
                        let r = k as f64 - nested.inset;
                        if d == 1 {
                            ConvexSet::interval(c[0] - r, c[0] + r, true)
                        } else {
                            ConvexSet::cube(&c, r, true)
                        }
                        .with_norm(self.ambient.norm)
                    })
                    .collect()
            }
        };
        Ok(sets)
    }

    pub fn exhaustion(&self) -> Result<Exhaustion, CliError> {
        let stages = self.stage_sets()?;
        Ok(match &self.gaps {
            Some(g) => Exhaustion::with_gaps(self.ambient_set(), stages, g.clone())?,
            None => Exhaustion::new(self.ambient_set(), stages)?,
        })
    }

    pub fn options(&self) -> GlueOptions {
        GlueOptions {
            seed: self.seed,
            sup_multiplier: self.sup_multiplier,
            ..GlueOptions::default()
        }
    }

    /// The value expression wrapped as a workspace over the whole space, for pointwise evaluation.
    pub fn value_workspace(&self) -> Result<Workspace, CliError> {
        let ws = Workspace {
            ambient: self.ambient.clone(),
            domain: self.ambient_set(),
            region: None,
            definitions: BTreeMap::new(),
            expression: self.value.clone(),
            seed: self.seed,
            tolerances: Default::default(),
        };
        ws.validate()?;
        Ok(ws)
    }

    pub fn run(&self) -> Result<GlueRun, CliError> {
        if !(self.control_coeff >= 0.0) || !self.control_coeff.is_finite() {
            return Err(CliError::Input(format!("control_coeff must be nonnegative, got {}", self.control_coeff)));
        }
        let ex = self.exhaustion()?;
        let local = ConvexFn::squared_euclidean(self.control_coeff, self.ambient_set())?;
        let ws = Arc::new(self.value_workspace()?);
        let (function, glued) = glue_dc(
            Arc::new(move |x: &[f64]| ws.value(x)),
            &ex,
            vec![local; ex.len()],
            &self.options(),
            "glue request",
        )?;
        Ok(GlueRun { function, glued })
    }
}
