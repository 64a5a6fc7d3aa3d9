//! The reduced first-order chain.
//!
//! The chain `Y_t = (X_t, X_{t-1}, ..., X_{t-m+2})` lives on the
//! `N = n^(m-1)` contexts. Its column-stochastic transition matrix `Q` has
//! entry `p[i_1, ..., i_{m-1}, j_m]` at row `(i_1, ..., i_{m-1})` and column
//! `(i_2, ..., i_{m-1}, j_m)`, and zero everywhere else.

use std::collections::HashMap;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::indexing::offset_to_states;
use crate::indexing::states_to_offset;
use crate::matrix::DenseMatrix;
use crate::pattern::BoolPattern;
use crate::tensor::StochasticTensor;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrix {
    order: usize,
    dim: usize,
    matrix: DenseMatrix,
}

impl ReducedMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// `Q y`.
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.matrix.mul_vec(y)
    }

    /// Wraps an arbitrary square matrix as a reduced matrix of order 2, i.e.
    /// a plain first-order chain on `side` states.
    pub fn first_order(matrix: DenseMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() == 0 {
            return Err(Error::Shape(format!(
                "transition matrix must be square and non-empty, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(ReducedMatrix {
            order: 2,
            dim: matrix.rows(),
            matrix,
        })
    }
}

/// Builds `Q` by direct placement: the tensor entry at 0-based offset `p`
/// lands at row `p mod N` and column `p div n`. For `m = 2` this is the
/// tensor's own matrix.
pub fn build_reduced(t: &StochasticTensor, caps: &Caps) -> Result<ReducedMatrix> {
    let n = t.dim();
    let side = caps.check_reduced_side(t.order(), n)?;
    let mut matrix = DenseMatrix::zeros(side, side);
    for (p, &v) in t.values().iter().enumerate() {
        matrix.set(p % side, p / n, v);
    }
    Ok(ReducedMatrix {
        order: t.order(),
        dim: n,
        matrix,
    })
}

/// `Q^k` by repeated left multiplication with `Q`.
pub fn matrix_power(q: &ReducedMatrix, k: usize) -> DenseMatrix {
    let mut acc = DenseMatrix::identity(q.side());
    for _ in 0..k {
        acc = q.matrix.mul(&acc).expect("square matrices");
    }
    acc
}

/// Positivity patterns of `Q, Q^2, ...` up to the first repeat.
#[derive(Debug, Clone)]
pub struct PatternTrace {
    patterns: Vec<BoolPattern>,
    cycle_start: usize,
    cycle_length: usize,
}

impl PatternTrace {
    /// The distinct patterns of `Q^1 ..= Q^(cycle_start + cycle_length - 1)`.
    pub fn patterns(&self) -> &[BoolPattern] {
        &self.patterns
    }

    /// Exponent of the first pattern that recurs.
    pub fn cycle_start(&self) -> usize {
        self.cycle_start
    }

    pub fn cycle_length(&self) -> usize {
        self.cycle_length
    }

    /// Pattern of `Q^k` for any `k >= 1`.
    pub fn pattern(&self, k: usize) -> &BoolPattern {
        assert!(k >= 1, "pattern exponents start at 1");
        let k = if k <= self.patterns.len() {
            k
        } else {
            self.cycle_start + (k - self.cycle_start) % self.cycle_length
        };
        &self.patterns[k - 1]
    }
}

pub fn pattern_trace(q: &ReducedMatrix, max_steps: usize) -> Result<PatternTrace> {
    if max_steps == 0 {
        return Err(Error::Argument(
            "pattern trace budget must be at least 1".into(),
        ));
    }
    let first = BoolPattern::positive_entries(&q.matrix);
    let mut seen: HashMap<BoolPattern, usize> = HashMap::new();
    seen.insert(first.clone(), 1);
    let mut patterns = vec![first];
    for _ in 0..max_steps {
        let next = patterns.last().expect("non-empty").product(&patterns[0]);
        if let Some(&start) = seen.get(&next) {
            let cycle_length = patterns.len() + 1 - start;
            return Ok(PatternTrace {
                patterns,
                cycle_start: start,
                cycle_length,
            });
        }
        seen.insert(next.clone(), patterns.len() + 1);
        patterns.push(next);
    }
    Err(Error::Budget {
        what: "searching for a repeated pattern of Q^k",
        budget: max_steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Regularity {
    pub regular: bool,
    pub witness_k: Option<usize>,
}

/// Regularity of the first-order chain `Q` (some `Q^k > 0`).
pub fn q_regular(q: &ReducedMatrix, caps: &Caps) -> Result<Regularity> {
    let trace = pattern_trace(q, caps.pattern_budget_for(q.side()))?;
    Ok(regularity_in_trace(&trace))
}

pub(crate) fn regularity_in_trace(trace: &PatternTrace) -> Regularity {
    let witness_k = trace
        .patterns()
        .iter()
        .position(BoolPattern::is_all_true)
        .map(|i| i + 1);
    Regularity {
        regular: witness_k.is_some(),
        witness_k,
    }
}

/// `Q^l` for a strictly positive tensor, evaluated entry by entry from the
/// product formula rather than by matrix multiplication.
pub fn closed_form_power(t: &StochasticTensor, l: usize) -> Result<DenseMatrix> {
    let m = t.order();
    let n = t.dim();
    if m < 3 || !(2..m).contains(&l) {
        return Err(Error::Argument(format!(
            "exponent {l} outside 2..={} for an order-{m} tensor",
            m.saturating_sub(1)
        )));
    }
    if !t.is_strictly_positive() {
        return Err(Error::Precondition(
            "closed-form powers of Q require a strictly positive tensor".into(),
        ));
    }
    let side = t.contexts();
    let ctx_len = m - 1;
    let mut out = DenseMatrix::zeros(side, side);
    let mut idx = Vec::with_capacity(m);
    for r in 0..side {
        let i = offset_to_states(r, n, ctx_len);
        for c in 0..side {
            let j = offset_to_states(c, n, ctx_len);
            // leading components of the column must repeat the trailing ones of the row
            if (0..m - l - 1).any(|u| j[u] != i[l + u]) {
                continue;
            }
            let mut prod = 1.0;
            for s in 1..=l {
                idx.clear();
                idx.extend_from_slice(&i[s - 1..]);
                idx.extend_from_slice(&j[m - l - 1..m - l - 1 + s]);
                prod *= t.values()[states_to_offset(&idx, n)];
            }
            out.set(r, c, prod);
        }
    }
    Ok(out)
}
