//! Delta-convex calculus with explicit control functions.
//!
//! A mapping `F` is d.c. on a convex set when some continuous convex `f`
//! makes `y*∘F + f` convex for every dual vector `‖y*‖ ≤ 1`; `f` is then a
//! control function for `F`. This crate builds such controls for sums,
//! compositions, products and quotients, welds local controls into global
//! ones, and checks the contract numerically.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod calculus;
pub mod dc;
pub mod error;
pub mod functions;
pub mod gallery;
pub mod geometry;
pub mod glue;
mod lp;
pub mod map;
pub mod norm;
pub mod verify;

pub use calculus::{
    compose, compose_global, product, quotient, DenominatorFloor, GlobalOptions, LipschitzCertificate, OuterFunction,
};
pub use dc::{bundle, from_pair, DCFunction, DCMapping, DCPair, Provenance, ProvenanceTag};
pub use error::{Error, Result};
pub use functions::{ConvexFn, QuadraticForm};
pub use glue::{build_exhaustion, dc_from_local, glue, Exhaustion, GlueOptions, Glued};
pub use geometry::{ConvexSet, HullBody, Shape};
pub use map::VectorMap;
pub use norm::Norm;
pub use verify::{SamplingConfig, VerificationReport};
