//! Monte Carlo sampling of trajectories.
//!
//! Uniform draws come from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! a `u64`, so a trajectory is fully determined by the tensor, the initial
//! history, the length and the seed. Each next state is found by inverse
//! CDF over the fiber of the current context, scanning states in
//! ascending order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indexing::{states_to_offset, MultiIndex};
use crate::limits::StateDistribution;
use crate::tensor::{StochasticTensor, DEFAULT_STOCHASTIC_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub seed: u64,
    /// `X_1, ..., X_{m-1}`, oldest first.
    pub initial: MultiIndex,
    /// 1-based states `X_1, X_2, ...`, starting with `initial`.
    pub states: Vec<usize>,
    #[serde(skip)]
    dim: usize,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Samples `X_1, ..., X_length` given the first `m - 1` states.
pub fn sample_path(
    t: &StochasticTensor,
    initial: &MultiIndex,
    length: usize,
    seed: u64,
) -> Result<Trajectory> {
    let n = t.dim();
    let lag = t.order() - 1;
    if initial.len() != lag || initial.states().iter().any(|&s| s > n) {
        return Err(Error::InvalidIndex(format!(
            "initial history {initial} must have {lag} states in 1..={n}"
        )));
    }
    if length < lag {
        return Err(Error::Argument(format!(
            "trajectory length {length} is shorter than the initial history ({lag})"
        )));
    }

    let contexts = t.contexts();
    let mut cdf = Vec::with_capacity(t.values().len());
    for c in 0..contexts {
        let fiber = t.fiber_at(c);
        let sum: f64 = fiber.iter().sum();
        if fiber.iter().any(|&p| !(p >= 0.0)) || !((sum - 1.0).abs() <= DEFAULT_STOCHASTIC_TOL) {
            let ctx = crate::indexing::offset_to_states(c, n, lag);
            return Err(Error::InvalidModel(format!(
                "fiber at context {} is not a probability vector (sum {sum})",
                MultiIndex::new(ctx, n).expect("in range")
            )));
        }
        let mut acc = 0.0;
        for &p in fiber {
            acc += p;
            cdf.push(acc);
        }
    }
    // last state with positive probability, for draws past a rounded-down total
    let fallback: Vec<usize> = (0..contexts)
        .map(|c| {
            t.fiber_at(c)
                .iter()
                .rposition(|&p| p > 0.0)
                .expect("stochastic fiber has a positive entry")
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(length);
    states.extend_from_slice(initial.states());
    // context (X_t, X_{t-1}, ..., X_{t-m+2}), most recent first
    let recent: Vec<usize> = initial.states().iter().rev().copied().collect();
    let mut ctx = states_to_offset(&recent, n);
    let keep = contexts / n;
    while states.len() < length {
        let u: f64 = rng.random();
        let row = &cdf[ctx * n..(ctx + 1) * n];
        let next = row.iter().position(|&c| u < c).unwrap_or(fallback[ctx]);
        states.push(next + 1);
        ctx = next + n * (ctx % keep);
    }
    Ok(Trajectory {
        seed,
        initial: initial.clone(),
        states,
        dim: n,
    })
}

/// Relative frequencies of the states after the first `burn_in` positions.
pub fn empirical_distribution(traj: &Trajectory, burn_in: usize) -> Result<StateDistribution> {
    empirical_distribution_where(traj, burn_in, |_| true)
}

/// Like [`empirical_distribution`], restricted to 1-based positions `t`
/// with `keep(t)`.
pub fn empirical_distribution_where(
    traj: &Trajectory,
    burn_in: usize,
    keep: impl Fn(usize) -> bool,
) -> Result<StateDistribution> {
    let mut counts = vec![0usize; traj.dim];
    let mut total = 0usize;
    for (k, &s) in traj.states.iter().enumerate().skip(burn_in) {
        if keep(k + 1) {
            counts[s - 1] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::Argument(format!(
            "no positions left after burn-in {burn_in} of {}",
            traj.states.len()
        )));
    }
    let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
    StateDistribution::new(probs, 1e-9)
}
