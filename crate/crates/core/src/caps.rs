//! Size limits enforced before any dense allocation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ENTRIES: usize = 100_000_000;
pub const DEFAULT_MAX_REDUCED_SIDE: usize = 4096;
pub const DEFAULT_MAX_SUBSET_STATES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest admissible `n^m` for a dense tensor.
    pub max_entries: usize,
    /// Largest admissible side `N = n^(m-1)` of the reduced matrix.
    pub max_reduced_side: usize,
    /// Largest state count for which irreducibility subsets are enumerated.
    pub max_subset_states: usize,
    /// Step budget for boolean pattern traces. `None` means `N^2 + N`.
    pub pattern_budget: Option<usize>,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_entries: DEFAULT_MAX_ENTRIES,
            max_reduced_side: DEFAULT_MAX_REDUCED_SIDE,
            max_subset_states: DEFAULT_MAX_SUBSET_STATES,
            pattern_budget: None,
        }
    }
}

impl Caps {
    pub fn check_entries(&self, order: usize, dim: usize) -> Result<usize> {
        let size = checked_pow(dim, order).ok_or_else(|| Error::Capacity {
            what: "tensor entries",
            requested: format!("{dim}^{order} (overflows)"),
            cap: self.max_entries,
        })?;
        if size > self.max_entries {
            return Err(Error::Capacity {
                what: "tensor entries",
                requested: format!("{dim}^{order} = {size}"),
                cap: self.max_entries,
            });
        }
        Ok(size)
    }

    pub fn check_reduced_side(&self, order: usize, dim: usize) -> Result<usize> {
        let exp = order.saturating_sub(1).max(1);
        let side = checked_pow(dim, exp).ok_or_else(|| Error::Capacity {
            what: "reduced matrix side",
            requested: format!("{dim}^{exp} (overflows)"),
            cap: self.max_reduced_side,
        })?;
        if side > self.max_reduced_side {
            return Err(Error::Capacity {
                what: "reduced matrix side",
                requested: format!("{dim}^{exp} = {side}"),
                cap: self.max_reduced_side,
            });
        }
        Ok(side)
    }

    pub fn check_subset_states(&self, dim: usize) -> Result<()> {
        if dim > self.max_subset_states {
            return Err(Error::Capacity {
                what: "irreducibility subset enumeration over states",
                requested: format!("2^{dim} subsets"),
                cap: self.max_subset_states,
            });
        }
        Ok(())
    }

    pub fn pattern_budget_for(&self, side: usize) -> usize {
        self.pattern_budget
            .unwrap_or_else(|| side.saturating_mul(side).saturating_add(side))
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    u32::try_from(exp).ok().and_then(|e| base.checked_pow(e))
}
