//! Limiting behaviour of the k-step transition tensors.
//!
//! `P^(k+1) = P^(k) ⊠ P` with
//! `p^(k+1)[i_1, i_2, ..., i_m] = sum_j p^(k)[i_1, j, i_2, ..., i_{m-1}] p[j, i_2, ..., i_m]`
//! and `P^(0) = I`. When `P` is regular the iterates converge to a tensor
//! whose mode-1 fibers all equal the limiting distribution. Otherwise they
//! may converge to a tensor that depends on the context, cycle, or neither
//! within the iteration budget, and [`limit_tensor`] reports which.

use std::collections::VecDeque;

use serde::Serialize;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::indexing::{states_to_offset, MultiIndex};
use crate::reduced::{build_reduced, ReducedMatrix};
use crate::tensor::{StochasticTensor, DEFAULT_STOCHASTIC_TOL};

pub const DEFAULT_LIMIT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const DEFAULT_CYCLE_WINDOW: usize = 16;

/// Marginal distribution `x_t` over the `n` states.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct StateDistribution(Vec<f64>);

impl StateDistribution {
    pub fn new(probs: Vec<f64>, tol: f64) -> Result<Self> {
        check_probability_vector(&probs, tol)?;
        Ok(StateDistribution(probs))
    }

    pub fn point_mass(dim: usize, state: usize) -> Result<Self> {
        if state == 0 || state > dim {
            return Err(Error::InvalidIndex(format!(
                "state {state} outside 1..={dim}"
            )));
        }
        let mut probs = vec![0.0; dim];
        probs[state - 1] = 1.0;
        Ok(StateDistribution(probs))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Joint distribution `y_t` of the last `m - 1` states. Entry at the
/// position of `(i_2, ..., i_m)` is `Pr(X_t = i_2, X_{t-1} = i_3, ...)`:
/// most recent state first, the same convention as tensor contexts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution {
    order: usize,
    dim: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(order: usize, dim: usize, probs: Vec<f64>, tol: f64) -> Result<Self> {
        let side = context_count(order, dim)?;
        if probs.len() != side {
            return Err(Error::Shape(format!(
                "joint distribution for order {order}, dimension {dim} needs {side} entries, got {}",
                probs.len()
            )));
        }
        check_probability_vector(&probs, tol)?;
        Ok(JointDistribution { order, dim, probs })
    }

    pub fn uniform(order: usize, dim: usize) -> Result<Self> {
        let side = context_count(order, dim)?;
        Ok(JointDistribution {
            order,
            dim,
            probs: vec![1.0 / side as f64; side],
        })
    }

    /// All mass on one context, given most recent state first.
    pub fn point_mass(order: usize, dim: usize, context: &MultiIndex) -> Result<Self> {
        let side = context_count(order, dim)?;
        if context.len() != order - 1 || context.states().iter().any(|&s| s > dim) {
            return Err(Error::InvalidIndex(format!(
                "context {context} is not a length-{} multi-index over 1..={dim}",
                order - 1
            )));
        }
        let mut probs = vec![0.0; side];
        probs[states_to_offset(context.states(), dim)] = 1.0;
        Ok(JointDistribution { order, dim, probs })
    }

    /// All mass on a known history `X_1, ..., X_{m-1}`, oldest first.
    pub fn from_history(order: usize, dim: usize, history: &MultiIndex) -> Result<Self> {
        Self::point_mass(order, dim, &history.reversed())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

fn context_count(order: usize, dim: usize) -> Result<usize> {
    if order < 2 || dim == 0 {
        return Err(Error::Shape(format!(
            "need order >= 2 and dimension >= 1, got order {order}, dimension {dim}"
        )));
    }
    crate::caps::checked_pow(dim, order - 1)
        .ok_or_else(|| Error::Shape(format!("{dim}^{} overflows", order - 1)))
}

fn check_probability_vector(probs: &[f64], tol: f64) -> Result<()> {
    if let Some((i, v)) = probs.iter().enumerate().find(|(_, &v)| !(v >= 0.0)) {
        return Err(Error::Argument(format!(
            "probability at position {} is {v}, expected nonnegative",
            i + 1
        )));
    }
    let sum: f64 = probs.iter().sum();
    if !((sum - 1.0).abs() <= tol) {
        return Err(Error::Argument(format!(
            "probabilities sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Fiber-spread history of the iterates `P^(0), P^(1), ...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceDiagnostics {
    /// Smallest entry of the input tensor.
    pub epsilon: f64,
    /// `spreads[k]` is the fiber spread of `P^(k)`.
    pub spreads: Vec<f64>,
    /// `1 - 2 epsilon^(m-1)`: for a strictly positive tensor the spread
    /// shrinks at least by this factor every `m - 1` steps.
    pub bound_factor: f64,
}

impl ConvergenceDiagnostics {
    fn new(t: &StochasticTensor) -> Self {
        let epsilon = t.min_entry().max(0.0);
        ConvergenceDiagnostics {
            epsilon,
            spreads: Vec::new(),
            bound_factor: 1.0 - 2.0 * epsilon.powi(t.order() as i32 - 1),
        }
    }

    /// First `k` where `spreads[k + 1] > spreads[k] + slack`.
    pub fn monotonicity_violation(&self, slack: f64) -> Option<usize> {
        self.spreads.windows(2).position(|w| w[1] > w[0] + slack)
    }

    /// First `k` where `spreads[k + m - 1] > bound_factor * spreads[k] + slack`.
    pub fn contraction_violation(&self, order: usize, slack: f64) -> Option<usize> {
        let lag = order - 1;
        (0..self.spreads.len().saturating_sub(lag))
            .find(|&k| self.spreads[k + lag] > self.bound_factor * self.spreads[k] + slack)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LimitKind {
    /// Every fiber of the limit equals `pi`.
    RankOne {
        pi: StateDistribution,
        limit: StochasticTensor,
    },
    /// The iterates converged to a limit that still depends on the context.
    General { limit: StochasticTensor },
    /// The iterates revisit themselves with the given period.
    Cycle {
        period: usize,
        representatives: Vec<StochasticTensor>,
    },
    /// None of the above within the budget.
    Exhausted { last: StochasticTensor },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitOutcome {
    pub kind: LimitKind,
    pub iterations: usize,
    pub diagnostics: ConvergenceDiagnostics,
}

impl LimitOutcome {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            LimitKind::RankOne { .. } => "RankOne",
            LimitKind::General { .. } => "General",
            LimitKind::Cycle { .. } => "Cycle",
            LimitKind::Exhausted { .. } => "Exhausted",
        }
    }

    /// The limit tensor for converged outcomes.
    pub fn limit(&self) -> Option<&StochasticTensor> {
        match &self.kind {
            LimitKind::RankOne { limit, .. } | LimitKind::General { limit } => Some(limit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// How many past iterates are compared against when looking for cycles.
    pub window: usize,
    /// Consecutive confirming iterations required before declaring a
    /// general limit or a cycle. `None` means `2m`.
    pub patience: Option<usize>,
    /// Tolerance for the stochasticity check of the input.
    pub stoch_tol: f64,
    pub caps: Caps,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            tol: DEFAULT_LIMIT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            window: DEFAULT_CYCLE_WINDOW,
            patience: None,
            stoch_tol: DEFAULT_STOCHASTIC_TOL,
            caps: Caps::default(),
        }
    }
}

impl LimitOptions {
    fn check(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Argument(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Argument("iteration budget must be positive".into()));
        }
        Ok(())
    }
}

/// `a ⊠ b`. `b` is expected to be stochastic; the sum over `j` runs in
/// ascending order.
pub fn boxtimes(a: &StochasticTensor, b: &StochasticTensor) -> Result<StochasticTensor> {
    if !a.same_shape(b) {
        return Err(Error::Shape(format!(
            "cannot combine order {} dimension {} with order {} dimension {}",
            a.order(),
            a.dim(),
            b.order(),
            b.dim()
        )));
    }
    let n = a.dim();
    let contexts = a.contexts();
    let block = contexts / n;
    let av = a.values();
    let mut out = vec![0.0; av.len()];
    for c in 0..contexts {
        // a[i_1, j, i_2..i_{m-1}] sits at i_1 + n j + n^2 (c mod n^(m-2))
        let base = (c % block) * n * n;
        let bf = b.fiber_at(c);
        for (i1, o) in out[c * n..(c + 1) * n].iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, &bj) in bf.iter().enumerate() {
                s += av[base + n * j + i1] * bj;
            }
            *o = s;
        }
    }
    StochasticTensor::from_values(a.order(), n, out)
}

/// `P^(k)`, starting from the identity tensor.
pub fn kstep(t: &StochasticTensor, k: usize) -> Result<StochasticTensor> {
    let mut acc = StochasticTensor::identity(t.order(), t.dim())?;
    for _ in 0..k {
        acc = boxtimes(&acc, t)?;
    }
    Ok(acc)
}

const ROUNDING_FLOOR: f64 = 16.0 * f64::EPSILON;

pub fn limit_tensor(t: &StochasticTensor, opts: &LimitOptions) -> Result<LimitOutcome> {
    opts.check()?;
    t.require_stochastic(opts.stoch_tol)?;
    let patience = opts.patience.unwrap_or(2 * t.order()).max(1);
    // an oscillation this small is treated as a decaying transient, not a cycle
    let amplitude = opts.tol.sqrt();

    let mut diagnostics = ConvergenceDiagnostics::new(t);
    let mut current = StochasticTensor::identity(t.order(), t.dim())?;
    diagnostics.spreads.push(current.fiber_spread());

    let mut history: VecDeque<StochasticTensor> = VecDeque::with_capacity(opts.window + 1);
    let mut stable_steps = 0usize;
    let mut prev_step = f64::INFINITY;
    let mut cycle_streak: Option<(usize, usize)> = None;

    for k in 1..=opts.max_iter {
        let next = boxtimes(&current, t)?;
        let spread = next.fiber_spread();
        diagnostics.spreads.push(spread);

        if spread < opts.tol {
            let pi = StateDistribution(next.mean_fiber());
            return Ok(LimitOutcome {
                kind: LimitKind::RankOne { pi, limit: next },
                iterations: k,
                diagnostics,
            });
        }

        let step = next.max_abs_diff(&current);
        // a small step is not enough when the contraction is slow: estimate
        // the remaining distance from the observed rate, except at the
        // rounding floor where the rate is noise
        let rate = step / prev_step;
        let remaining = if rate < 1.0 {
            step * rate / (1.0 - rate)
        } else {
            f64::INFINITY
        };
        prev_step = step;
        if step < opts.tol && (step <= ROUNDING_FLOOR || remaining <= opts.tol) {
            stable_steps += 1;
            if stable_steps >= patience {
                let error = if step <= ROUNDING_FLOOR {
                    0.0
                } else {
                    remaining
                };
                // the limit is within `error` of `next`, so its spread is at
                // most `spread + 2 error` and at least `spread - 2 error`
                let kind = if spread - 2.0 * error < opts.tol {
                    let pi = StateDistribution(next.mean_fiber());
                    LimitKind::RankOne { pi, limit: next }
                } else {
                    LimitKind::General { limit: next }
                };
                return Ok(LimitOutcome {
                    kind,
                    iterations: k,
                    diagnostics,
                });
            }
        } else {
            stable_steps = 0;
        }

        history.push_back(current);
        if history.len() > opts.window {
            history.pop_front();
        }
        // history.back() is P^(k-1); P^(k-p) sits p - 1 places before it
        let period = (2..=history.len())
            .find(|&p| next.max_abs_diff(&history[history.len() - p]) <= opts.tol);
        cycle_streak = match (period, cycle_streak) {
            (Some(p), Some((q, count))) if p == q && step >= amplitude => Some((p, count + 1)),
            (Some(p), _) if step >= amplitude => Some((p, 1)),
            _ => None,
        };
        if let Some((p, count)) = cycle_streak {
            if count >= patience {
                let mut representatives: Vec<StochasticTensor> = history
                    .iter()
                    .skip(history.len() + 1 - p)
                    .cloned()
                    .collect();
                representatives.push(next);
                return Ok(LimitOutcome {
                    kind: LimitKind::Cycle {
                        period: p,
                        representatives,
                    },
                    iterations: k,
                    diagnostics,
                });
            }
        }
        current = next;
    }

    Ok(LimitOutcome {
        kind: LimitKind::Exhausted { last: current },
        iterations: opts.max_iter,
        diagnostics,
    })
}

/// The limiting distribution, when the iterates converge to a rank-one
/// tensor. Any other outcome is returned inside the error.
pub fn limiting_distribution(
    t: &StochasticTensor,
    opts: &LimitOptions,
) -> Result<(StateDistribution, ConvergenceDiagnostics)> {
    let outcome = limit_tensor(t, opts)?;
    match outcome.kind {
        LimitKind::RankOne { pi, .. } => Ok((pi, outcome.diagnostics)),
        _ => Err(Error::NoLimitingDistribution(Box::new(outcome))),
    }
}

/// A nonnegative normalized `y` with `Q y = y`, from the uniform start.
pub fn stationary_joint(q: &ReducedMatrix, opts: &LimitOptions) -> Result<JointDistribution> {
    let side = q.side();
    stationary_joint_from(q, &vec![1.0; side], opts)
}

/// Fixed point of `Q` reached by iterating the lazy chain `(I + Q) / 2`
/// from `start`. The lazy iterates are binomially weighted averages of
/// `Q^k start`. Unit-modulus eigenvalues of `Q` other than 1 are damped
/// below modulus 1 while the fixed vectors of `Q` are kept, so the
/// iteration converges geometrically even when `Q` is periodic or has a
/// repeated eigenvalue 1.
pub fn stationary_joint_from(
    q: &ReducedMatrix,
    start: &[f64],
    opts: &LimitOptions,
) -> Result<JointDistribution> {
    opts.check()?;
    let side = q.side();
    if start.len() != side {
        return Err(Error::Shape(format!(
            "start vector has length {}, expected {side}",
            start.len()
        )));
    }
    if start.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Argument("start vector must be nonnegative".into()));
    }
    let total: f64 = start.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Argument(
            "start vector must have positive mass".into(),
        ));
    }
    let mut y: Vec<f64> = start.iter().map(|v| v / total).collect();
    for _ in 0..opts.max_iter {
        let qy = q.apply(&y)?;
        let residual = qy
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual <= opts.tol {
            let s: f64 = y.iter().sum();
            y.iter_mut().for_each(|v| *v /= s);
            return Ok(JointDistribution {
                order: q.order(),
                dim: q.dim(),
                probs: y,
            });
        }
        for (a, b) in y.iter_mut().zip(&qy) {
            *a = 0.5 * (*a + b);
        }
    }
    Err(Error::Budget {
        what: "iterating towards a fixed vector of Q",
        budget: opts.max_iter,
    })
}

/// `P^(0) y`: the distribution of the most recent state under `y`.
pub fn marginalize(y: &JointDistribution) -> StateDistribution {
    let n = y.dim;
    let mut pi = vec![0.0; n];
    for (r, &v) in y.probs.iter().enumerate() {
        pi[r % n] += v;
    }
    StateDistribution(pi)
}

/// Limiting distribution through a fixed vector of the reduced chain.
pub fn limiting_distribution_eig(
    t: &StochasticTensor,
    opts: &LimitOptions,
) -> Result<StateDistribution> {
    t.require_stochastic(opts.stoch_tol)?;
    let q = build_reduced(t, &opts.caps)?;
    let y = stationary_joint(&q, opts)?;
    Ok(marginalize(&y))
}

/// `lim Pr(X_t = i) = sum_c r[i, c] w_c` for the initial joint
/// distribution `w` of `(X_{m-1}, ..., X_1)`.
pub fn initial_dependent_limit(
    r: &StochasticTensor,
    w: &JointDistribution,
) -> Result<StateDistribution> {
    if r.order() != w.order || r.dim() != w.dim {
        return Err(Error::Shape(format!(
            "tensor has order {} dimension {}, distribution has order {} dimension {}",
            r.order(),
            r.dim(),
            w.order,
            w.dim
        )));
    }
    Ok(StateDistribution(marginal_step(r, &w.probs)))
}

/// `P y`.
fn marginal_step(t: &StochasticTensor, y: &[f64]) -> Vec<f64> {
    let n = t.dim();
    let mut x = vec![0.0; n];
    for (c, &w) in y.iter().enumerate() {
        for (xi, &p) in x.iter_mut().zip(t.fiber_at(c)) {
            *xi += p * w;
        }
    }
    x
}

/// `Q y`, read straight from the tensor.
fn joint_step(t: &StochasticTensor, y: &[f64]) -> Vec<f64> {
    let n = t.dim();
    let side = y.len();
    let mut out = vec![0.0; side];
    for (p, &v) in t.values().iter().enumerate() {
        out[p % side] += v * y[p / n];
    }
    out
}

/// Marginals `x_m, ..., x_{m+steps-1}` from the joint distribution `y_{m-1}`
/// of the first `m - 1` states.
pub fn evolve(
    t: &StochasticTensor,
    y_init: &JointDistribution,
    steps: usize,
) -> Result<Vec<StateDistribution>> {
    if steps == 0 {
        return Err(Error::Argument("evolution needs at least one step".into()));
    }
    if t.order() != y_init.order || t.dim() != y_init.dim {
        return Err(Error::Shape(format!(
            "tensor has order {} dimension {}, initial distribution has order {} dimension {}",
            t.order(),
            t.dim(),
            y_init.order,
            y_init.dim
        )));
    }
    let mut y = y_init.probs.clone();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        out.push(StateDistribution(marginal_step(t, &y)));
        y = joint_step(t, &y);
    }
    Ok(out)
}
