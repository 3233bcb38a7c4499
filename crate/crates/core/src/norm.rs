//! Ambient norms on ℝ^d.
//!
//! Delta-convexity itself does not depend on the norm, but every constant
//! the library certifies (Lipschitz bounds, gaps, distances) does, so each
//! set carries its norm explicitly.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    #[default]
    L2,
    Linf,
}

impl Norm {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Norm::L1 => x.iter().map(|v| v.abs()).sum(),
            Norm::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Norm::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn dist(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Norm::L1 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            Norm::L2 => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Norm::Linf => x.iter().zip(y).fold(0.0, |m, (a, b)| m.max((a - b).abs())),
        }
    }

    pub fn dual(self) -> Norm {
        match self {
            Norm::L1 => Norm::Linf,
            Norm::L2 => Norm::L2,
            Norm::Linf => Norm::L1,
        }
    }

    pub fn dual_eval(self, y: &[f64]) -> f64 {
        self.dual().eval(y)
    }

    /// Largest Euclidean length of a vector in the unit ball of `self` in ℝ^d.
    pub fn euclidean_reach(self, dim: usize) -> f64 {
        match self {
            Norm::L1 | Norm::L2 => 1.0,
            Norm::Linf => (dim as f64).sqrt(),
        }
    }

    /// Euclidean projection of `x` onto the closed `self`-ball `B(center, radius)`.
    pub fn project_onto_ball(self, x: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
        let v: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
        let w = match self {
            Norm::L2 => {
                let n = Norm::L2.eval(&v);
                if n <= radius {
                    v
                } else {
                    v.iter().map(|a| a * radius / n).collect()
                }
            }
            Norm::Linf => v.iter().map(|a| a.clamp(-radius, radius)).collect(),
            Norm::L1 => project_l1(&v, radius),
        };
        w.iter().zip(center).map(|(a, c)| a + c).collect()
    }

    /// Uniform sample from the unit sphere `{‖u‖ = 1}` of this norm.
    pub fn sample_sphere<R: Rng + ?Sized>(self, rng: &mut R, dim: usize) -> Vec<f64> {
        match self {
            Norm::L2 => loop {
                let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
                let n = Norm::L2.eval(&v);
                if n > 1e-12 {
                    break v.into_iter().map(|a| a / n).collect();
                }
            },
            Norm::L1 => {
                let v: Vec<f64> = (0..dim)
                    .map(|_| {
                        let e: f64 = Exp1.sample(rng);
                        if rng.gen_bool(0.5) {
                            e
                        } else {
                            -e
                        }
                    })
                    .collect();
                let n = Norm::L1.eval(&v).max(f64::MIN_POSITIVE);
                v.into_iter().map(|a| a / n).collect()
            }
            Norm::Linf => {
                let face = rng.gen_range(0..dim);
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                (0..dim)
                    .map(|i| {
                        if i == face {
                            sign
                        } else {
                            rng.gen_range(-1.0..=1.0)
                        }
                    })
                    .collect()
            }
        }
    }

    /// Extreme points of the unit ball of this norm, when there are finitely many.
    pub fn ball_vertices(self, dim: usize) -> Option<Vec<Vec<f64>>> {
        match self {
            Norm::L2 if dim == 1 => Some(vec![vec![1.0], vec![-1.0]]),
            Norm::L2 => None,
            Norm::L1 => Some(
                (0..dim)
                    .flat_map(|i| {
                        [1.0, -1.0].into_iter().map(move |s| {
                            let mut v = vec![0.0; dim];
                            v[i] = s;
                            v
                        })
                    })
                    .collect(),
            ),
            Norm::Linf => Some(
                (0..(1usize << dim))
                    .map(|mask| {
                        (0..dim)
                            .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                            .collect()
                    })
                    .collect(),
            ),
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        })
    }
}

impl std::str::FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::Linf),
            other => Err(format!("unknown norm `{other}` (expected l1, l2 or linf)")),
        }
    }
}

/// Euclidean projection onto the ℓ1 ball of radius `z` centred at 0.
fn project_l1(v: &[f64], z: f64) -> Vec<f64> {
    if Norm::L1.eval(v) <= z {
        return v.to_vec();
    }
    if z <= 0.0 {
        return vec![0.0; v.len()];
    }
    let mut u: Vec<f64> = v.iter().map(|a| a.abs()).collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - z) / (j as f64 + 1.0);
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter()
        .map(|a| a.signum() * (a.abs() - theta).max(0.0))
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn lerp(p: &[f64], q: &[f64], t: f64) -> Vec<f64> {
    p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dual_pairs() {
        assert_eq!(Norm::L1.dual(), Norm::Linf);
        assert_eq!(Norm::Linf.dual(), Norm::L1);
        assert_eq!(Norm::L2.dual(), Norm::L2);
    }

    #[test]
    fn sphere_samples_have_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for norm in [Norm::L1, Norm::L2, Norm::Linf] {
            for _ in 0..200 {
                let u = norm.sample_sphere(&mut rng, 3);
                assert!((norm.eval(&u) - 1.0).abs() < 1e-12, "{norm} {u:?}");
            }
        }
    }

    #[test]
    fn l1_projection_lands_on_ball() {
        let p = project_l1(&[3.0, 1.0], 1.0);
        assert!((Norm::L1.eval(&p) - 1.0).abs() < 1e-12);
        assert_eq!(p, vec![1.0, 0.0]);
        let p = project_l1(&[0.2, -0.2], 1.0);
        assert_eq!(p, vec![0.2, -0.2]);
    }
}
