//! Exact simulation and analysis of the multi-party trit communication game.
//!
//! `k = 3n + 1` parties each hold a trit `Y^i` and a bit `X^i`, the number of
//! zero bits being a multiple of three, and each may broadcast a single trit.
//! The goal is `G(Y, X) = ΣY^i + (#zeros / 3) mod 3`. Sharing the qutrit state
//! `[0]^k` and applying a cube root of the cyclic shift wherever `X^i = 0`
//! lets the parties compute `G` with certainty ([`quantum_protocol`]), whereas
//! every classical one-trit strategy drifts toward success 1/3
//! ([`classical_analysis`], [`bounds`]).

pub mod bounds;
pub mod classical_analysis;
pub mod combinatorics;
mod error;
pub mod quantum_protocol;
pub mod qudit_sim;
pub mod rational;

pub use combinatorics::{
    binomial, grouped_sum, grouped_sum_primed, ramus, ramus_rounded, trit_add, BigCount,
    GroupedSumSpec,
};
pub use error::{Error, Result};
pub use quantum_protocol::{ProtocolRun, RegisterInput};
pub use qudit_sim::{LocalGate, QuditState, RootBranch};
pub use rational::Probability;
