//! Analysis of higher-order Markov chains given by stochastic transition
//! tensors.
//!
//! An `(m-1)`th order chain on states `1..=n` is described by an order-`m`
//! tensor `P` where `p[i_1, i_2, ..., i_m]` is the probability of moving to
//! `i_1` after the states `i_2` (most recent) through `i_m`. The crate
//! provides
//!
//! - k-step tensors through the `⊠` product ([`limits::kstep`]),
//! - the reduced first-order chain `Q` on contexts ([`reduced`]),
//! - irreducibility, ergodicity and regularity checks with witnesses
//!   ([`classify`]),
//! - limits of `P^(k)`: rank-one limits, context-dependent limits, cycles
//!   ([`limits::limit_tensor`]), plus the fixed-vector route through `Q`,
//! - Monte Carlo trajectories as an independent check ([`simulate`]),
//! - JSON file formats ([`format`]).
//!
//! All states, multi-indices and positions are 1-based at the public
//! surface. Dense buffers use linear indexing: the first component varies
//! fastest.
//!
//! ```
//! use hmarkov::{limits, StochasticTensor};
//!
//! // X_{t+1} copies X_{t-1} with probability 1/2, otherwise uniform.
//! let t = StochasticTensor::from_fn(3, 2, |idx| {
//!     if idx[0] == idx[2] { 0.75 } else { 0.25 }
//! })
//! .unwrap();
//! let (pi, _) = limits::limiting_distribution(&t, &Default::default()).unwrap();
//! assert!((pi.probs()[0] - 0.5).abs() < 1e-9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x >= 0.0)` also rejects NaN

pub mod caps;
pub mod classify;
pub mod error;
pub mod format;
pub mod indexing;
pub mod limits;
pub mod matrix;
pub mod pattern;
pub mod reduced;
pub mod simulate;
pub mod tensor;

pub use caps::Caps;
pub use error::{Error, Result};
pub use indexing::{LinearIndexer, MultiIndex};
pub use limits::{JointDistribution, LimitKind, LimitOptions, LimitOutcome, StateDistribution};
pub use matrix::DenseMatrix;
pub use reduced::ReducedMatrix;
pub use tensor::{identity_tensor, StochasticTensor, ValidationReport};
