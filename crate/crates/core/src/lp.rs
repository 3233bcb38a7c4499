//! Thin wrapper over `minilp` for the small dense LPs used by the geometry code.

use crate::error::{Error, Result};
use minilp::{ComparisonOp, OptimizationDirection, Problem};

pub(crate) enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// Optimises `c·x` over `{x : A x ≤ b}` with free variables.
pub(crate) fn optimize(
    maximize: bool,
    c: &[f64],
    normals: &[Vec<f64>],
    offsets: &[f64],
) -> Result<LpOutcome> {
    let dir = if maximize {
        OptimizationDirection::Maximize
    } else {
        OptimizationDirection::Minimize
    };
    let mut p = Problem::new(dir);
    let vars: Vec<_> = c
        .iter()
        .map(|&ci| p.add_var(ci, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for (a, &b) in normals.iter().zip(offsets) {
        let expr: Vec<_> = vars.iter().copied().zip(a.iter().copied()).collect();
        p.add_constraint(&expr[..], ComparisonOp::Le, b);
    }
    solve(p, &vars)
}

pub(crate) fn solve(p: Problem, vars: &[minilp::Variable]) -> Result<LpOutcome> {
    match p.solve() {
        Ok(sol) => Ok(LpOutcome::Optimal {
            value: sol.objective(),
            x: vars.iter().map(|v| sol[*v]).collect(),
        }),
        Err(minilp::Error::Infeasible) => Ok(LpOutcome::Infeasible),
        Err(minilp::Error::Unbounded) => Ok(LpOutcome::Unbounded),
    }
}

pub(crate) fn internal(msg: &str) -> Error {
    Error::Internal(format!("linear program: {msg}"))
}
