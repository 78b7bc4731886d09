//! Component importance, signatures and symmetry for semicoherent systems
//! with possibly dependent component lifetimes.
//!
//! A system is a monotone [`StructureFunction`] on `n ≤ 20` components.
//! Lifetimes are described by a [`JointLifetimeModel`]; every index is
//! computed from the ordering probabilities the model induces, either
//! exactly over the rationals or numerically, and the [`oracle`] module
//! replays failure sequences to check the results independently.

pub mod catalog;
pub mod cli;
pub mod error;
mod formula;
pub mod indices;
pub mod lifetimes;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod spec;
pub mod structure;
pub mod subset;

pub use error::{Error, Result};
pub use indices::{
    barlow_proschan, barlow_proschan_mobius, bp_equals_b_check, q_symmetry_check, signature_mobius,
    signature_p, structural_b, structural_signature, symmetry_index, tail_signature, IndexKind,
    IndexVector,
};
pub use lifetimes::{EvalOptions, JointLifetimeModel, Method, OrderDistribution};
pub use oracle::{mc_barlow_proschan, mc_signature, permutation_oracle, replay_failure_sequence};
pub use report::{analyze, Analysis, Report};
pub use spec::SystemSpec;
pub use structure::{StandardKind, StructureFunction};
pub use subset::SubsetIndex;
