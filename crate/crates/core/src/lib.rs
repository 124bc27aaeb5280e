//! Suffix array construction by radix sorting.
//!
//! * [`radixsa`] refines radix-sorted buckets right to left and is always
//!   correct, with a logarithmic bound on the number of passes.
//! * [`sa1`] and [`sa2`] sort fixed-length prefixes and rely on those being
//!   distinct, which holds with high probability on random inputs.
//! * [`verify`] holds an oracle, a linear-time checker and exact collision
//!   probability checks; [`datagen`] and [`bench`] generate inputs and
//!   measure builds.

pub mod alloc;
pub mod bench;
pub mod datagen;
pub mod error;
pub mod lmer;
pub mod prob;
pub mod radix;
pub mod radixsa;
pub mod text;
pub mod verify;

pub use error::{Error, Result};
pub use lmer::{choose_ell, collision_probability, LmerConfig};
pub use prob::{sa1, sa2, Sa2Outcome};
pub use radixsa::{radixsa, ConstructionStats, RadixSaConfig, RadixSaOutput};
pub use text::{suffix_compare, ProbabilityModel, SuffixArray, Text};
pub use verify::{check_sa, oracle_sa, Violation};
