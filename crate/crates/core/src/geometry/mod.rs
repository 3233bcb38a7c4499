//! Convex sets, parallel sets, compact containment and hull-body gauges.

mod hull;
mod set;

pub use hull::HullBody;
pub use set::{ConvexSet, Shape};
