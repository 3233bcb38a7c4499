use std::fmt;
use std::sync::Arc;

type MapFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A vector-valued function `ℝ^n → ℝ^m` given by a pure callback.
#[derive(Clone)]
pub struct VectorMap {
    input_dim: usize,
    output_dim: usize,
    f: Arc<MapFn>,
}

impl VectorMap {
    pub fn new<F>(input_dim: usize, output_dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        VectorMap {
            input_dim,
            output_dim,
            f: Arc::new(f),
        }
    }

    /// Lifts a scalar function to a map into ℝ¹.
    pub fn scalar<F>(input_dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(input_dim, 1, move |x| vec![f(x)])
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, dim, |x| x.to_vec())
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    /// `x ↦ (self(x), other(x))`.
    pub fn concat(&self, other: &VectorMap) -> VectorMap {
        let (a, b) = (self.clone(), other.clone());
        VectorMap::new(self.input_dim, self.output_dim + other.output_dim, move |x| {
            let mut v = a.apply(x);
            v.extend(b.apply(x));
            v
        })
    }

    /// `x ↦ outer(self(x))`.
    pub fn then(&self, outer: &VectorMap) -> VectorMap {
        let (inner, outer_c) = (self.clone(), outer.clone());
        VectorMap::new(self.input_dim, outer.output_dim, move |x| {
            outer_c.apply(&inner.apply(x))
        })
    }
}

impl fmt::Debug for VectorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorMap(ℝ^{} → ℝ^{})", self.input_dim, self.output_dim)
    }
}
