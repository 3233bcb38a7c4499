//! Explicit constructions: a Lipschitz d.c. function with no Lipschitz
//! convex splitting, the strong-exposure checker, bump mappings and their
//! sums, and the shrinking-ball non-d.c. hypothesis check.

pub mod bump;
pub mod chyba;
mod dyadic;
pub mod ndc;
pub mod strexp;

pub use bump::{build_bump_sum, BumpPlacement, BumpSystem};
pub use chyba::{
    chyba_c1_c2, chyba_composed, chyba_d, chyba_g, chyba_grid, chyba_row, chyba_v, lipschitz_pair_witness, ChybaRow,
    LipschitzPairWitness,
};
pub use ndc::{ndc_witness_check, NonDCWitness, WitnessSource};
pub use strexp::{strexp_check, NormBody, StrexpInput};
