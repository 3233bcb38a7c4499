//! Sampled check of the strong-exposure implication
//!
//! ```text
//! e*(u) > 1 − ε, ‖u‖ ≤ 1  ⇒  ‖u − e‖ ≤ c·ε
//! ½‖x‖² < ½‖e‖² + e*(x − e) + δ  ⇒  ‖x − e‖ < (1 + 2c)·√(2δ)
//! ```

use crate::error::{check_dim, Error, Result};
use crate::geometry::HullBody;
use crate::norm::{dot, Norm};
use crate::verify::{SampleCounts, VerificationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

const BATCH: usize = 4096;
const UNIT_TOL: f64 = 1e-12;

/// A norm on `ℝᵈ`: a standard one or the gauge of a hull body.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormBody {
    Standard { norm: Norm, dimension: usize },
    Hull(HullBody),
}

impl NormBody {
    pub fn dim(&self) -> usize {
        match self {
            NormBody::Standard { dimension, .. } => *dimension,
            NormBody::Hull(b) => b.dimension,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            NormBody::Standard { norm, .. } => norm.eval(x),
            NormBody::Hull(b) => b.gauge_unchecked(x),
        }
    }

    /// `sup{f(x) : ‖x‖ ≤ 1}`.
    pub fn dual_eval(&self, f: &[f64]) -> f64 {
        match self {
            NormBody::Standard { norm, .. } => norm.dual_eval(f),
            NormBody::Hull(b) => b
                .generators()
                .iter()
                .map(|g| dot(f, g))
                .fold(0.0, f64::max),
        }
    }

    /// A point on the unit sphere (not uniformly distributed for hull bodies).
    pub fn sample_sphere<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            NormBody::Standard { norm, dimension } => norm.sample_sphere(rng, *dimension),
            NormBody::Hull(b) => loop {
                let z = Norm::L2.sample_sphere(rng, b.dimension);
                let t = b.gauge_unchecked(&z);
                if t > 0.0 {
                    break z.into_iter().map(|v| v / t).collect();
                }
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrexpInput {
    pub body: NormBody,
    pub e: Vec<f64>,
    pub e_star: Vec<f64>,
    pub c: f64,
    pub delta: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Default)]
struct Tally {
    worst: f64,
    witness: Option<Vec<f64>>,
    premise: usize,
}

impl Tally {
    fn record(&mut self, violation: f64, at: &[f64]) {
        if self.witness.is_none() || violation > self.worst {
            self.worst = violation;
            self.witness = Some(at.to_vec());
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.premise += other.premise;
        if let Some(w) = other.witness {
            self.record(other.worst, &w);
        }
        self
    }
}

/// Samples both implications; `pass` means no sampled counterexample.
pub fn strexp_check(input: &StrexpInput) -> Result<VerificationReport> {
    let StrexpInput {
        body, e, e_star, c, delta, ..
    } = input;
    let dim = body.dim();
    check_dim(dim, e.len())?;
    check_dim(dim, e_star.len())?;
    if (body.eval(e) - 1.0).abs() > UNIT_TOL {
        return Err(Error::input(format!("‖e‖ = {} is not 1", body.eval(e))));
    }
    if (body.dual_eval(e_star) - 1.0).abs() > UNIT_TOL {
        return Err(Error::input(format!("‖e*‖ = {} is not 1", body.dual_eval(e_star))));
    }
    if (dot(e_star, e) - 1.0).abs() > UNIT_TOL {
        return Err(Error::input(format!("e*(e) = {} is not 1", dot(e_star, e))));
    }
    if !(*delta > 0.0 && *delta < 0.5) {
        return Err(Error::input(format!("δ must lie in (0, 1/2), got {delta}")));
    }
    if !(*c > 0.0) {
        return Err(Error::input(format!("c must be positive, got {c}")));
    }
    let radius = (1.0 + 2.0 * c) * (2.0 * delta).sqrt();
    let batches = input.samples.div_ceil(BATCH);
    let (hyp, thesis) = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(input.seed);
            rng.set_stream(b as u64 + 1);
            let n = BATCH.min(input.samples - b * BATCH);
            let mut hyp = Tally::default();
            let mut thesis = Tally::default();
            for _ in 0..n {
                // u = (1 − λ)e + λw on the unit ball, concentrated near e
                let lambda = 10f64.powf(-rng.gen_range(0.0..6.0));
                let w = body.sample_sphere(&mut rng);
                let u: Vec<f64> = e.iter().zip(&w).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect();
                let gap = 1.0 - dot(e_star, &u);
                if gap > 0.0 {
                    let eps = gap * (1.0 + 1e-12) + 1e-300;
                    let diff: Vec<f64> = u.iter().zip(e.iter()).map(|(a, b)| a - b).collect();
                    hyp.premise += 1;
                    hyp.record((body.eval(&diff) - c * eps) / (1.0 + c * eps), &u);
                }
                // x = e + t·z with t up to twice the claimed radius
                let t = 2.0 * radius * rng.gen::<f64>();
                let z = body.sample_sphere(&mut rng);
                let x: Vec<f64> = e.iter().zip(&z).map(|(a, b)| a + t * b).collect();
                let diff: Vec<f64> = x.iter().zip(e.iter()).map(|(a, b)| a - b).collect();
                let nx = body.eval(&x);
                if 0.5 * nx * nx < 0.5 + dot(e_star, &diff) + delta {
                    thesis.premise += 1;
                    thesis.record(body.eval(&diff) - radius, &x);
                }
            }
            (hyp, thesis)
        })
        .reduce(
            || (Tally::default(), Tally::default()),
            |a, b| (a.0.merge(b.0), a.1.merge(b.1)),
        );
    let mut report = VerificationReport::new("strong exposure implication", input.seed, 1e-12);
    for t in [&hyp, &thesis] {
        if let Some(w) = &t.witness {
            if t.worst > report.worst_violation {
                report.worst_violation = t.worst;
                report.worst_raw = t.worst;
                report.witness_location = vec![w.clone()];
            }
        }
    }
    report.sample_counts = SampleCounts {
        samples: input.samples,
        evaluations: 2 * input.samples,
        duals: 0,
    };
    report.notes.push(format!(
        "hypothesis premise held at {} samples; thesis premise held at {} samples",
        hyp.premise, thesis.premise
    ));
    if hyp.worst > report.tolerance {
        report.notes.push(format!("the constant c = {c} is too small for this norm"));
    }
    Ok(report.finish())
}
