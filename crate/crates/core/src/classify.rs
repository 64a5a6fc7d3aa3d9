//! Irreducibility, ergodicity and regularity of transition tensors.
//!
//! Ergodicity and regularity are decided on positivity patterns. The
//! k-step tensor satisfies `P^(k) = P^(0) Q^k` in matricized form, and all
//! factors are nonnegative, so the pattern of `P^(k)` is the boolean
//! image of the pattern of `Q^k`. Those patterns are eventually periodic,
//! so scanning them up to the first repeat decides both properties.

use serde::Serialize;

use crate::caps::Caps;
use crate::error::Result;
use crate::indexing::{offset_to_states, MultiIndex};
use crate::pattern::BoolPattern;
use crate::reduced::{build_reduced, pattern_trace, regularity_in_trace, PatternTrace, Regularity};
use crate::tensor::StochasticTensor;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Irreducibility {
    pub irreducible: bool,
    /// A subset `J` with no positive entry entering it from contexts
    /// entirely inside its complement. Sorted, 1-based.
    pub counterexample: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ergodicity {
    pub ergodic: bool,
    /// First index `(i_1, ..., i_m)` in linear order whose k-step
    /// probability is zero for every `k >= 1`.
    pub uncovered_index: Option<MultiIndex>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub irreducible: Irreducibility,
    pub ergodic: Ergodicity,
    pub regular: RegularityVerdict,
    pub q_regular: RegularityVerdict,
    pub caps: Caps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegularityVerdict {
    pub regular: bool,
    pub witness_k: Option<usize>,
}

impl From<Regularity> for RegularityVerdict {
    fn from(r: Regularity) -> Self {
        RegularityVerdict {
            regular: r.regular,
            witness_k: r.witness_k,
        }
    }
}

/// Positivity patterns of `P^(k)` as `n x N` boolean matrices, with the
/// trace of `Q` they were derived from.
pub struct TensorPatterns {
    trace: PatternTrace,
    aggregated: Vec<BoolPattern>,
}

impl TensorPatterns {
    pub fn new(t: &StochasticTensor, caps: &Caps) -> Result<Self> {
        let q = build_reduced(t, caps)?;
        let trace = pattern_trace(&q, caps.pattern_budget_for(q.side()))?;
        let n = t.dim();
        let aggregated = trace
            .patterns()
            .iter()
            .map(|p| {
                let mut b = BoolPattern::empty(n, p.cols());
                for r in 0..p.rows() {
                    for c in 0..p.cols() {
                        if p.get(r, c) {
                            b.set(r % n, c);
                        }
                    }
                }
                b
            })
            .collect();
        Ok(TensorPatterns { trace, aggregated })
    }

    pub fn trace(&self) -> &PatternTrace {
        &self.trace
    }

    /// Pattern of `P^(k)` for `1 <= k <= len()`.
    pub fn tensor_pattern(&self, k: usize) -> &BoolPattern {
        &self.aggregated[k - 1]
    }

    pub fn len(&self) -> usize {
        self.aggregated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aggregated.is_empty()
    }

    /// Entries positive for at least one `k >= 1`.
    pub fn union(&self) -> BoolPattern {
        let mut u = self.aggregated[0].clone();
        for p in &self.aggregated[1..] {
            u.union_with(p);
        }
        u
    }

    fn regularity(&self) -> Regularity {
        let witness_k = self
            .aggregated
            .iter()
            .position(BoolPattern::is_all_true)
            .map(|i| i + 1);
        Regularity {
            regular: witness_k.is_some(),
            witness_k,
        }
    }

    fn ergodicity(&self, dim: usize, order: usize) -> Ergodicity {
        let union = self.union();
        let uncovered_index = union.first_false_column_major().map(|(i, c)| {
            let mut states = vec![i + 1];
            states.extend(offset_to_states(c, dim, order - 1));
            MultiIndex::new(states, dim).expect("in range")
        });
        Ergodicity {
            ergodic: uncovered_index.is_none(),
            uncovered_index,
        }
    }
}

pub fn is_irreducible(t: &StochasticTensor, caps: &Caps) -> Result<Irreducibility> {
    let n = t.dim();
    caps.check_subset_states(n)?;
    if n == 1 {
        return Ok(Irreducibility {
            irreducible: true,
            counterexample: None,
        });
    }
    let full = 1usize << n;
    // enters[i][M]: some positive entry p[i, ctx] has every context state in M
    let mut enters = vec![vec![false; full]; n];
    for c in 0..t.contexts() {
        let ctx_mask = offset_to_states(c, n, t.order() - 1)
            .iter()
            .fold(0usize, |m, &s| m | 1 << (s - 1));
        for (i, &p) in t.fiber_at(c).iter().enumerate() {
            if p > 0.0 && ctx_mask & (1 << i) == 0 {
                enters[i][ctx_mask] = true;
            }
        }
    }
    for table in &mut enters {
        for bit in 0..n {
            for mask in 0..full {
                if mask & (1 << bit) != 0 && table[mask ^ (1 << bit)] {
                    table[mask] = true;
                }
            }
        }
    }
    // Subsets are visited in lexicographic order of their indicator vectors
    // (x_1, ..., x_n), so the first failure is the smallest counterexample.
    for key in 1..full - 1 {
        let j_mask = (0..n)
            .filter(|&i| key >> (n - 1 - i) & 1 == 1)
            .fold(0usize, |m, i| m | 1 << i);
        let complement = (full - 1) ^ j_mask;
        let entered = (0..n).any(|i| j_mask >> i & 1 == 1 && enters[i][complement]);
        if !entered {
            let members = (0..n)
                .filter(|&i| j_mask >> i & 1 == 1)
                .map(|i| i + 1)
                .collect();
            return Ok(Irreducibility {
                irreducible: false,
                counterexample: Some(members),
            });
        }
    }
    Ok(Irreducibility {
        irreducible: true,
        counterexample: None,
    })
}

pub fn is_ergodic(t: &StochasticTensor, caps: &Caps) -> Result<Ergodicity> {
    Ok(TensorPatterns::new(t, caps)?.ergodicity(t.dim(), t.order()))
}

pub fn is_regular(t: &StochasticTensor, caps: &Caps) -> Result<Regularity> {
    Ok(TensorPatterns::new(t, caps)?.regularity())
}

/// Sufficient test through the reduced chain: `Q` regular implies the
/// tensor is regular. A negative answer says nothing about the tensor.
pub fn regular_via_q(t: &StochasticTensor, caps: &Caps) -> Result<Regularity> {
    let q = build_reduced(t, caps)?;
    let trace = pattern_trace(&q, caps.pattern_budget_for(q.side()))?;
    Ok(regularity_in_trace(&trace))
}

pub fn classify(t: &StochasticTensor, caps: &Caps) -> Result<ClassificationReport> {
    let irreducible = is_irreducible(t, caps)?;
    let patterns = TensorPatterns::new(t, caps)?;
    let ergodic = patterns.ergodicity(t.dim(), t.order());
    let regular = patterns.regularity();
    let q_regular = regularity_in_trace(patterns.trace());

    assert!(
        !regular.regular || ergodic.ergodic,
        "regular tensor reported non-ergodic"
    );
    assert!(
        !ergodic.ergodic || irreducible.irreducible,
        "ergodic tensor reported reducible"
    );
    assert!(
        !q_regular.regular || regular.regular,
        "regular Q with non-regular tensor"
    );
    if let (Some(kq), Some(kp)) = (q_regular.witness_k, regular.witness_k) {
        assert!(kp <= kq, "tensor witness exceeds the witness of Q");
    }

    Ok(ClassificationReport {
        irreducible,
        ergodic,
        regular: regular.into(),
        q_regular: q_regular.into(),
        caps: *caps,
    })
}
