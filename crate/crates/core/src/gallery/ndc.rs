//! Numerical check of the shrinking-ball hypothesis for non-d.c. mappings.
//!
//! A mapping that is unbounded on every ball `B(x_n, δ_n)` with `x_n ∈ λA`,
//! `0 < λ < 1` and `δ_n → 0` admits no control function on `A`. Sampling can
//! only show growing sups, so a passing report is evidence, never a proof.

use crate::error::{check_dim, Error, Result};
use crate::geometry::ConvexSet;
use crate::map::VectorMap;
use crate::norm::Norm;
use crate::verify::{SampleCounts, VerificationReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const EVIDENCE_BANNER: &str = "numerical evidence only: hypothesis check, not proof";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonDCWitness {
    pub domain: ConvexSet,
    pub lambda: f64,
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    /// Lower bounds the sup over ball `n` must exceed.
    pub schedule: Vec<f64>,
}

/// Where the per-ball sups come from.
pub enum WitnessSource<'a> {
    /// Sample `‖F‖₂` at this many points per ball.
    Map { map: &'a VectorMap, samples: usize },
    /// Precomputed values of `‖F‖` on each ball.
    Table(&'a [Vec<f64>]),
}

impl NonDCWitness {
    /// Structural checks, each naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let d = self.domain.dim();
        if !self.domain.contains_unchecked(&vec![0.0; d]) {
            return Err(Error::input("domain: 0 is not in A"));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::input(format!("lambda: {} is not in (0, 1)", self.lambda)));
        }
        if self.centers.is_empty() {
            return Err(Error::input("centers: need at least one ball"));
        }
        if self.radii.len() != self.centers.len() {
            return Err(Error::input(format!(
                "radii: {} radii for {} centers",
                self.radii.len(),
                self.centers.len()
            )));
        }
        if self.schedule.len() != self.centers.len() {
            return Err(Error::input(format!(
                "schedule: {} thresholds for {} balls",
                self.schedule.len(),
                self.centers.len()
            )));
        }
        for (n, x) in self.centers.iter().enumerate() {
            check_dim(d, x.len())?;
            let z: Vec<f64> = x.iter().map(|v| v / self.lambda).collect();
            if !self.domain.contains_unchecked(&z) {
                return Err(Error::input(format!("x_{n} = {x:?} is not in λA (x_{n}/λ = {z:?} lies outside A)")));
            }
        }
        for (n, r) in self.radii.iter().enumerate() {
            if !(*r > 0.0) {
                return Err(Error::input(format!("δ_{n} = {r} is not positive")));
            }
            if n > 0 && *r >= self.radii[n - 1] {
                return Err(Error::input(format!(
                    "δ_{n} = {r} does not decrease (δ_{} = {})",
                    n - 1,
                    self.radii[n - 1]
                )));
            }
        }
        Ok(())
    }
}

/// Compares per-ball sups with the schedule; passes when every sup exceeds
/// its threshold and the sups strictly increase.
pub fn ndc_witness_check(w: &NonDCWitness, source: WitnessSource<'_>, seed: u64) -> Result<VerificationReport> {
    w.validate()?;
    let (sups, evaluations): (Vec<(f64, Vec<f64>)>, usize) = match source {
        WitnessSource::Table(rows) => {
            if rows.len() != w.centers.len() {
                return Err(Error::input(format!(
                    "table: {} rows for {} balls",
                    rows.len(),
                    w.centers.len()
                )));
            }
            let sups = rows
                .iter()
                .zip(&w.centers)
                .map(|(row, x)| (row.iter().copied().fold(f64::NEG_INFINITY, f64::max), x.clone()))
                .collect();
            (sups, rows.iter().map(Vec::len).sum())
        }
        WitnessSource::Map { map, samples } => {
            check_dim(w.domain.dim(), map.input_dim())?;
            let sups = w
                .centers
                .par_iter()
                .zip(&w.radii)
                .enumerate()
                .map(|(n, (x, r))| ball_sup(&w.domain, map, x, *r, samples, seed, n as u64))
                .collect::<Result<Vec<_>>>()?;
            (sups, samples * w.centers.len())
        }
    };
    let mut report = VerificationReport::new("non-d.c. hypothesis", seed, 0.0);
    for (n, (sup, at)) in sups.iter().enumerate() {
        let shortfall = w.schedule[n] - sup;
        let stall = if n > 0 { sups[n - 1].0 - sup } else { f64::NEG_INFINITY };
        let v = if sup.is_finite() { shortfall.max(stall) } else { f64::INFINITY };
        if v > report.worst_violation {
            report.worst_violation = v;
            report.worst_raw = v;
            report.witness_location = vec![at.clone()];
        }
    }
    report.sample_counts = SampleCounts {
        samples: evaluations,
        evaluations,
        duals: 0,
    };
    report.notes.push(EVIDENCE_BANNER.into());
    report.notes.push(format!(
        "ball sups: [{}]",
        sups.iter().map(|(s, _)| format!("{s:.6e}")).collect::<Vec<_>>().join(", ")
    ));
    Ok(report.finish())
}

fn ball_sup(
    domain: &ConvexSet,
    map: &VectorMap,
    centre: &[f64],
    radius: f64,
    samples: usize,
    seed: u64,
    stream: u64,
) -> Result<(f64, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let ball = ConvexSet::closed_ball(centre.to_vec(), radius);
    let mut best = (f64::NEG_INFINITY, centre.to_vec());
    let mut kept = 0;
    for _ in 0..samples.saturating_mul(20).max(1) {
        if kept == samples {
            break;
        }
        let x = ball.sample(&mut rng)?;
        if !domain.contains_unchecked(&x) {
            continue;
        }
        kept += 1;
        let v = Norm::L2.eval(&map.apply(&x));
        if v > best.0 || v.is_nan() {
            best = (if v.is_nan() { f64::INFINITY } else { v }, x);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn witness(n: usize) -> NonDCWitness {
        NonDCWitness {
            domain: ConvexSet::open_ball(vec![0.0], 1.0),
            lambda: 0.5,
            centers: (0..n).map(|k| vec![0.4 - 0.01 * k as f64]).collect(),
            radii: (0..n).map(|k| 0.05 / (k + 1) as f64).collect(),
            schedule: (0..n).map(|k| k as f64 + 0.5).collect(),
        }
    }

    #[test]
    fn escalating_table_passes() {
        let rows: Vec<Vec<f64>> = (1..=5).map(|k| vec![0.0, k as f64]).collect();
        let r = ndc_witness_check(&witness(5), WitnessSource::Table(&rows), 0).unwrap();
        assert!(r.pass, "{}", r.summary());
        assert!(r.notes.iter().any(|n| n.contains("not proof")));
    }

    #[test]
    fn continuous_map_fails() {
        let map = VectorMap::scalar(1, |x| x[0].sin());
        let r = ndc_witness_check(&witness(5), WitnessSource::Map { map: &map, samples: 200 }, 0).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn centre_outside_scaled_domain_is_named() {
        let mut w = witness(3);
        w.centers[1] = vec![0.7];
        let err = w.validate().unwrap_err();
        assert!(err.to_string().contains("x_1"), "{err}");
    }
}
