//! Linear indexing of multi-indices.
//!
//! A multi-index `(j_1, ..., j_L)` over states `1..=n` sits at linear
//! position `j_1 + n(j_2 - 1) + ... + n^(L-1)(j_L - 1)`, so the first
//! component varies fastest. Every dense buffer in this crate uses that
//! layout. States and positions are 1-based at the public surface; the
//! `offset` helpers are the 0-based equivalents used internally.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::caps::checked_pow;
use crate::error::{Error, Result};

/// An ordered tuple of 1-based state labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(states: Vec<usize>, n: usize) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidIndex("multi-index must be non-empty".into()));
        }
        if let Some((pos, &s)) = states.iter().enumerate().find(|(_, &s)| s == 0 || s > n) {
            return Err(Error::InvalidIndex(format!(
                "component {} of {:?} is {s}, expected 1..={n}",
                pos + 1,
                states
            )));
        }
        Ok(MultiIndex(states))
    }

    pub fn states(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// The same states in the opposite order.
    pub fn reversed(&self) -> MultiIndex {
        MultiIndex(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(")")
    }
}

/// Bijection between length-`len` multi-indices over `n` states and
/// positions `1..=n^len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearIndexer {
    n: usize,
    len: usize,
    size: usize,
}

impl LinearIndexer {
    pub fn new(n: usize, len: usize) -> Result<Self> {
        if n == 0 || len == 0 {
            return Err(Error::Argument(format!(
                "indexer needs n >= 1 and length >= 1, got n={n}, length={len}"
            )));
        }
        let size = checked_pow(n, len).ok_or_else(|| Error::Capacity {
            what: "linear index space",
            requested: format!("{n}^{len} (overflows)"),
            cap: usize::MAX,
        })?;
        Ok(LinearIndexer { n, len, size })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn to_linear(&self, idx: &MultiIndex) -> Result<usize> {
        if idx.len() != self.len {
            return Err(Error::InvalidIndex(format!(
                "{idx} has length {}, expected {}",
                idx.len(),
                self.len
            )));
        }
        to_linear(idx, self.n)
    }

    pub fn from_linear(&self, pos: usize) -> Result<MultiIndex> {
        if pos == 0 || pos > self.size {
            return Err(Error::InvalidIndex(format!(
                "position {pos} outside 1..={}",
                self.size
            )));
        }
        Ok(MultiIndex(offset_to_states(pos - 1, self.n, self.len)))
    }

    /// Iterates every multi-index in linear order.
    pub fn iter(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.size).map(move |off| MultiIndex(offset_to_states(off, self.n, self.len)))
    }
}

/// 1-based linear position of `idx`.
pub fn to_linear(idx: &MultiIndex, n: usize) -> Result<usize> {
    let mut pos = 0usize;
    let mut stride = 1usize;
    for (k, &s) in idx.states().iter().enumerate() {
        if s == 0 || s > n {
            return Err(Error::InvalidIndex(format!(
                "component {} of {idx} is outside 1..={n}",
                k + 1
            )));
        }
        let term = (s - 1)
            .checked_mul(stride)
            .and_then(|t| pos.checked_add(t))
            .ok_or_else(|| Error::InvalidIndex(format!("{idx} overflows the index space")))?;
        pos = term;
        if k + 1 < idx.len() {
            stride = stride
                .checked_mul(n)
                .ok_or_else(|| Error::InvalidIndex(format!("{idx} overflows the index space")))?;
        }
    }
    Ok(pos + 1)
}

/// Inverse of [`to_linear`] for multi-indices of length `len`.
pub fn from_linear(pos: usize, n: usize, len: usize) -> Result<MultiIndex> {
    LinearIndexer::new(n, len)?.from_linear(pos)
}

/// 0-based offset of 1-based `states`; no range checks.
pub(crate) fn states_to_offset(states: &[usize], n: usize) -> usize {
    states
        .iter()
        .rev()
        .fold(0usize, |acc, &s| acc * n + (s - 1))
}

/// 1-based states at 0-based `offset`.
pub(crate) fn offset_to_states(mut offset: usize, n: usize, len: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(offset % n + 1);
        offset /= n;
    }
    out
}
