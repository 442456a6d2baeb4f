//! Privacy measured as the estimation error of a Bayes-optimal attacker.
//!
//! The crate evaluates how well an adversary can infer a private value X from
//! an observation Y, and derives the usual privacy criteria from that single
//! view:
//!
//! - [`prob`]: finite alphabets, pmfs, joints and channels.
//! - [`info`]: Rényi entropies, KL divergence, total variation, Pinsker, mutual information.
//! - [`typical`]: exhaustive typical-set enumeration for short sequences.
//! - [`bayes`]: loss matrices, Bayes/MAP estimates, conditional, worst-case and
//!   average privacy, and the prior-to-posterior privacy reduction bounds.
//! - [`sdc`]: k-anonymity, l-diversity, t-closeness, δ-disclosure, privacy risk.
//! - [`optimize`]: Blahut–Arimoto privacy–utility frontier and a grid-search oracle.
//! - [`crowds`], [`lbs`]: a Crowds-like forwarding protocol and grid location privacy.
//!
//! Logarithms are base 2 throughout. Each capability has a runnable program
//! under `examples/`; `cargo run --example crowds` and so on.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod cli;
pub mod crowds;
pub mod error;
pub mod info;
pub mod json;
pub mod lbs;
pub mod optimize;
pub mod prob;
pub mod sdc;
pub mod typical;

pub use error::{Error, Result};
pub use prob::{Alphabet, Channel, JointPmf, Pmf};
