//! Convex functions and the convex-function toolbox.

mod c11;
mod convex;
mod extension;
mod quadratic;

pub use c11::{c11_dc_split, HessianBound};
pub use convex::{ConvexFn, GradientFn, ScalarFn};
pub use extension::{estimate_lipschitz, lipschitz_bound_on_inner, lipschitz_extension};
pub use quadratic::{quadratic_dc_split, QuadraticForm};
