use super::convex::{ConvexFn, GradientFn, ScalarFn};
use crate::dc::{DCFunction, Provenance, ProvenanceTag};
use crate::error::{Error, Result};
use crate::geometry::ConvexSet;
use crate::norm::Norm;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SAFETY: f64 = 1.25;

/// Bound on the Lipschitz constant of the gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HessianBound {
    Given(f64),
    /// Finite-difference estimate of `‖∇F(x) − ∇F(y)‖ / ‖x − y‖`, times 1.25.
    Estimate { samples: usize, seed: u64 },
}

/// D.c. structure of a `C^{1,1}` function with control `(M/2)·‖x‖₂²`.
///
/// Only Euclidean domains are accepted: in other norms the constant
/// depends on the modulus of smoothness of the norm.
pub fn c11_dc_split(
    name: &str,
    value: ScalarFn,
    gradient: GradientFn,
    domain: ConvexSet,
    bound: HessianBound,
) -> Result<DCFunction> {
    if domain.norm != Norm::L2 {
        return Err(Error::Unsupported(format!(
            "quadratic control for a C^1,1 function in the {} norm; only l2 is supported",
            domain.norm
        )));
    }
    let (m, empirical) = match bound {
        HessianBound::Given(m) => {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::input(format!("gradient Lipschitz bound must be nonnegative, got {m}")));
            }
            (m, false)
        }
        HessianBound::Estimate { samples, seed } => {
            (SAFETY * estimate_gradient_lipschitz(&gradient, &domain, samples, seed)?, true)
        }
    };
    let control = if m == 0.0 {
        ConvexFn::zero(domain.clone())
    } else {
        ConvexFn::squared_euclidean(0.5 * m, domain.clone())?
    };
    let mut prov = Provenance::new(ProvenanceTag::Split, format!("{name} with control {}·‖x‖²", 0.5 * m));
    if empirical {
        prov = prov.mark_empirical("gradient Lipschitz bound estimated by sampling");
    }
    DCFunction::from_arc(domain, value, control, prov)
}

fn estimate_gradient_lipschitz(gradient: &GradientFn, domain: &ConvexSet, samples: usize, seed: u64) -> Result<f64> {
    if samples < 2 {
        return Err(Error::input("need at least two samples to estimate a gradient bound"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> = (0..samples).map(|_| domain.sample(&mut rng)).collect::<Result<_>>()?;
    let grads: Vec<Vec<f64>> = pts.iter().map(|p| gradient(p)).collect();
    let mut best: f64 = 0.0;
    for i in 1..pts.len() {
        for j in [i - 1, i / 2] {
            let d = Norm::L2.dist(&pts[i], &pts[j]);
            if d > 0.0 {
                best = best.max(Norm::L2.dist(&grads[i], &grads[j]) / d);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn sine_gets_half_square() {
        let dom = ConvexSet::interval(-10.0, 10.0, false);
        let f = c11_dc_split(
            "sin",
            Arc::new(|x: &[f64]| x[0].sin()),
            Arc::new(|x: &[f64]| vec![x[0].cos()]),
            dom,
            HessianBound::Given(1.0),
        )
        .unwrap();
        assert_eq!(f.control().value(&[2.0]), 2.0);
        assert!(!f.provenance().empirical);
    }

    #[test]
    fn estimated_bound_is_flagged() {
        let dom = ConvexSet::interval(-3.0, 3.0, false);
        let f = c11_dc_split(
            "sin",
            Arc::new(|x: &[f64]| x[0].sin()),
            Arc::new(|x: &[f64]| vec![x[0].cos()]),
            dom,
            HessianBound::Estimate { samples: 500, seed: 2 },
        )
        .unwrap();
        assert!(f.provenance().empirical);
        let c = f.control().value(&[1.0]);
        assert!(c > 0.5 && c <= 0.5 * SAFETY + 1e-12, "{c}");
    }

    #[test]
    fn non_euclidean_rejected() {
        let dom = ConvexSet::interval(-1.0, 1.0, false).with_norm(Norm::Linf);
        let err = c11_dc_split(
            "sin",
            Arc::new(|x: &[f64]| x[0].sin()),
            Arc::new(|x: &[f64]| vec![x[0].cos()]),
            dom,
            HessianBound::Given(1.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }
}
