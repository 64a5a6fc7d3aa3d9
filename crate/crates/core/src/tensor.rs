//! Stochastic transition tensors.
//!
//! Entry `p[i_1, i_2, ..., i_m]` is the probability of moving to state
//! `i_1` given the previous `m - 1` states `(i_2, ..., i_m)`, most recent
//! first. Entries are stored densely in linear-index order, so the mode-1
//! fiber of context `c` (0-based) is the contiguous run
//! `values[c * n .. (c + 1) * n]`.

use serde::Serialize;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::indexing::{offset_to_states, states_to_offset, LinearIndexer, MultiIndex};
use crate::matrix::{max_abs_diff, DenseMatrix};

/// Default tolerance for fiber sums and entry ranges of user input.
pub const DEFAULT_STOCHASTIC_TOL: f64 = 1e-12;

/// The mode-1 matricization: `n` rows, `n^(m-1)` columns.
pub type Matricization = DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticTensor {
    order: usize,
    dim: usize,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberViolation {
    /// The trailing `m - 1` indices of the offending fiber.
    pub context: MultiIndex,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryViolation {
    pub index: MultiIndex,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub fiber_violations: Vec<FiberViolation>,
    pub entry_violations: Vec<EntryViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.fiber_violations.is_empty() && self.entry_violations.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.fiber_violations.len() + self.entry_violations.len()
    }

    /// One line naming the first violation, entries before fibers.
    pub fn first_violation(&self) -> Option<String> {
        if let Some(e) = self.entry_violations.first() {
            return Some(format!("entry {} is {} (outside [0, 1])", e.index, e.value));
        }
        self.fiber_violations
            .first()
            .map(|f| format!("fiber at context {} sums to {}", f.context, f.sum))
    }
}

impl StochasticTensor {
    /// Wraps dense values without checking stochasticity; see [`Self::validate`].
    pub fn from_values(order: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        Self::from_values_with_caps(order, dim, values, &Caps::default())
    }

    pub fn from_values_with_caps(
        order: usize,
        dim: usize,
        values: Vec<f64>,
        caps: &Caps,
    ) -> Result<Self> {
        check_shape_args(order, dim)?;
        let size = caps.check_entries(order, dim)?;
        if values.len() != size {
            return Err(Error::Shape(format!(
                "order-{order} dimension-{dim} tensor needs {size} values, got {}",
                values.len()
            )));
        }
        Ok(StochasticTensor { order, dim, values })
    }

    /// Builds a tensor from a function of the 1-based multi-index `(i_1, ..., i_m)`.
    pub fn from_fn(order: usize, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_shape_args(order, dim)?;
        let size = Caps::default().check_entries(order, dim)?;
        let values = (0..size)
            .map(|off| f(&offset_to_states(off, dim, order)))
            .collect();
        Ok(StochasticTensor { order, dim, values })
    }

    /// Builds an order-3 tensor from frontal slices: `slices[k][i][j]` is
    /// `p[i+1, j+1, k+1]`, the layout used when a tensor is printed as
    /// `P(:, :, k)`.
    pub fn from_frontal_slices(slices: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n = slices.len();
        for s in slices {
            if s.len() != n || s.iter().any(|row| row.len() != n) {
                return Err(Error::Shape(format!("frontal slices must all be {n}x{n}")));
            }
        }
        Self::from_fn(3, n, |idx| slices[idx[2] - 1][idx[0] - 1][idx[1] - 1])
    }

    /// The identity tensor: entry is 1 iff `i_1 == i_2`.
    pub fn identity(order: usize, dim: usize) -> Result<Self> {
        check_shape_args(order, dim)?;
        let size = Caps::default().check_entries(order, dim)?;
        let mut values = vec![0.0; size];
        for ctx in 0..size / dim {
            // i_2 is the fastest-varying context component
            values[ctx * dim + ctx % dim] = 1.0;
        }
        Ok(StochasticTensor { order, dim, values })
    }

    /// Rebuilds a tensor from its mode-1 matricization.
    pub fn from_matricization(order: usize, dim: usize, m: &Matricization) -> Result<Self> {
        check_shape_args(order, dim)?;
        let size = Caps::default().check_entries(order, dim)?;
        if m.rows() != dim || m.rows() * m.cols() != size {
            return Err(Error::Shape(format!(
                "{}x{} matrix is not the matricization of an order-{order} dimension-{dim} tensor",
                m.rows(),
                m.cols()
            )));
        }
        let mut values = vec![0.0; size];
        for c in 0..m.cols() {
            for i in 0..dim {
                values[c * dim + i] = m.get(i, c);
            }
        }
        Ok(StochasticTensor { order, dim, values })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of contexts, `n^(m-1)`.
    pub fn contexts(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_shape(&self, other: &StochasticTensor) -> bool {
        self.order == other.order && self.dim == other.dim
    }

    pub fn get(&self, idx: &MultiIndex) -> Result<f64> {
        let ix = LinearIndexer::new(self.dim, self.order)?;
        Ok(self.values[ix.to_linear(idx)? - 1])
    }

    /// Entry at 1-based `(i_1, ..., i_m)`; panics when out of range.
    pub fn entry(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.order, "index length must equal the order");
        assert!(idx.iter().all(|&s| (1..=self.dim).contains(&s)));
        self.values[states_to_offset(idx, self.dim)]
    }

    /// Mode-1 fiber at 0-based context offset.
    pub(crate) fn fiber_at(&self, ctx: usize) -> &[f64] {
        &self.values[ctx * self.dim..(ctx + 1) * self.dim]
    }

    /// Mode-1 fiber `p[:, ctx]` for a context of length `m - 1`.
    pub fn fiber(&self, ctx: &MultiIndex) -> Result<Vec<f64>> {
        let ix = LinearIndexer::new(self.dim, self.order - 1)?;
        let c = ix.to_linear(ctx)? - 1;
        Ok(self.fiber_at(c).to_vec())
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let n = self.dim;
        let mut entry_violations = Vec::new();
        let mut fiber_violations = Vec::new();
        for (off, &v) in self.values.iter().enumerate() {
            if !(v >= -tol && v <= 1.0 + tol) {
                entry_violations.push(EntryViolation {
                    index: MultiIndex::new(offset_to_states(off, n, self.order), n)
                        .expect("offset within range"),
                    value: v,
                });
            }
        }
        for ctx in 0..self.contexts() {
            let sum: f64 = self.fiber_at(ctx).iter().sum();
            if !((sum - 1.0).abs() <= tol) {
                fiber_violations.push(FiberViolation {
                    context: MultiIndex::new(offset_to_states(ctx, n, self.order - 1), n)
                        .expect("offset within range"),
                    sum,
                });
            }
        }
        ValidationReport {
            tolerance: tol,
            fiber_violations,
            entry_violations,
        }
    }

    pub fn require_stochastic(&self, tol: f64) -> Result<()> {
        let report = self.validate(tol);
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::NotStochastic(Box::new(report)))
        }
    }

    pub fn matricize(&self) -> Matricization {
        let n = self.dim;
        let cols = self.contexts();
        let mut m = DenseMatrix::zeros(n, cols);
        for c in 0..cols {
            for (i, &v) in self.fiber_at(c).iter().enumerate() {
                m.set(i, c, v);
            }
        }
        m
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    /// `max_i (max_c p[i, c] - min_c p[i, c])` over contexts `c`; zero
    /// exactly when every mode-1 fiber is the same vector.
    pub fn fiber_spread(&self) -> f64 {
        let n = self.dim;
        let mut hi = vec![f64::NEG_INFINITY; n];
        let mut lo = vec![f64::INFINITY; n];
        for fiber in self.values.chunks_exact(n) {
            for i in 0..n {
                hi[i] = hi[i].max(fiber[i]);
                lo[i] = lo[i].min(fiber[i]);
            }
        }
        hi.iter().zip(&lo).map(|(h, l)| h - l).fold(0.0, f64::max)
    }

    /// Entrywise mean over contexts of the mode-1 fibers.
    pub fn mean_fiber(&self) -> Vec<f64> {
        let n = self.dim;
        let mut acc = vec![0.0; n];
        for fiber in self.values.chunks_exact(n) {
            for (a, v) in acc.iter_mut().zip(fiber) {
                *a += v;
            }
        }
        let count = self.contexts() as f64;
        acc.iter_mut().for_each(|a| *a /= count);
        acc
    }

    /// Sup-norm distance; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &StochasticTensor) -> f64 {
        if !self.same_shape(other) {
            return f64::INFINITY;
        }
        max_abs_diff(&self.values, &other.values)
    }
}

fn check_shape_args(order: usize, dim: usize) -> Result<()> {
    if order < 2 {
        return Err(Error::Shape(format!(
            "order must be at least 2, got {order}"
        )));
    }
    if dim < 1 {
        return Err(Error::Shape("dimension must be at least 1".into()));
    }
    Ok(())
}

/// Identity tensor of the given shape; see [`StochasticTensor::identity`].
pub fn identity_tensor(order: usize, dim: usize) -> Result<StochasticTensor> {
    StochasticTensor::identity(order, dim)
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn mi(s: &[usize], n: usize) -> MultiIndex {
        MultiIndex::new(s.to_vec(), n).unwrap()
    }

    #[test]
    fn example_tensors_validate() {
        assert!(two_state_absorbing()
            .validate(DEFAULT_STOCHASTIC_TOL)
            .is_valid());
        assert!(four_state_regular()
            .validate(DEFAULT_STOCHASTIC_TOL)
            .is_valid());
        assert!(three_state_periodic()
            .validate(DEFAULT_STOCHASTIC_TOL)
            .is_valid());
    }

    #[test]
    fn zero_tensor_reports_every_fiber() {
        let t = StochasticTensor::from_values(3, 2, vec![0.0; 8]).unwrap();
        let report = t.validate(DEFAULT_STOCHASTIC_TOL);
        assert_eq!(report.fiber_violations.len(), 4);
        assert!(report.fiber_violations.iter().all(|v| v.sum == 0.0));
        assert!(report.entry_violations.is_empty());
        assert_eq!(report.fiber_violations[1].context, mi(&[2, 1], 2));
    }

    #[test]
    fn out_of_range_entries_are_reported() {
        let t = StochasticTensor::from_values(2, 2, vec![1.5, -0.5, 0.5, 0.5]).unwrap();
        let report = t.validate(DEFAULT_STOCHASTIC_TOL);
        assert_eq!(report.entry_violations.len(), 2);
        assert!(report.fiber_violations.is_empty());
        let nan = StochasticTensor::from_values(2, 1, vec![f64::NAN]).unwrap();
        assert!(!nan.validate(DEFAULT_STOCHASTIC_TOL).is_valid());
    }

    #[test]
    fn wrong_value_count_is_a_shape_error() {
        assert!(matches!(
            StochasticTensor::from_values(3, 2, vec![0.5; 7]),
            Err(Error::Shape(_))
        ));
        assert!(StochasticTensor::from_values(1, 2, vec![0.5; 2]).is_err());
    }

    #[test]
    fn identity_tensors() {
        let i2 = identity_tensor(2, 3).unwrap();
        assert_eq!(i2.matricize(), DenseMatrix::identity(3));

        let i3 = identity_tensor(3, 2).unwrap();
        for k in 1..=2 {
            for a in 1..=2 {
                for b in 1..=2 {
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert_eq!(i3.entry(&[a, b, k]), want);
                }
            }
        }
        assert!(i3.validate(DEFAULT_STOCHASTIC_TOL).is_valid());

        let m = identity_tensor(4, 2).unwrap().matricize();
        assert_eq!((m.rows(), m.cols()), (2, 8));
        for c in 0..8 {
            for r in 0..2 {
                assert_eq!(m.get(r, c), if r == c % 2 { 1.0 } else { 0.0 });
            }
        }
        assert!(identity_tensor(30, 10).is_err());
    }

    #[test]
    fn matricization_layout_order_four() {
        let t = StochasticTensor::from_fn(4, 2, |idx| {
            (idx[0] * 1000 + idx[1] * 100 + idx[2] * 10 + idx[3]) as f64
        })
        .unwrap();
        let m = t.matricize();
        assert_eq!(m.get(0, 0), 1111.0);
        assert_eq!(m.get(0, 1), 1211.0);
        assert_eq!(m.get(0, 2), 1121.0);
        assert_eq!(m.get(0, 7), 1222.0);
        assert_eq!(m.get(1, 4), 2112.0);
    }

    #[test]
    fn matricize_example_and_order_two() {
        let m = two_state_absorbing().matricize();
        assert_eq!(m.row(0), &[1.0, 0.5, 0.5, 0.0]);
        assert_eq!(m.row(1), &[0.0, 0.5, 0.5, 1.0]);

        let p = StochasticTensor::from_values(2, 2, vec![0.3, 0.7, 0.6, 0.4]).unwrap();
        let pm = p.matricize();
        assert_eq!(pm.row(0), &[0.3, 0.6]);
        assert_eq!(pm.row(1), &[0.7, 0.4]);
    }

    #[test]
    fn fibers() {
        let t = three_state_periodic();
        assert_eq!(t.fiber(&mi(&[1, 1], 3)).unwrap(), vec![0.0, 1.0, 0.0]);
        assert_eq!(t.fiber(&mi(&[2, 1], 3)).unwrap(), vec![0.5, 0.0, 0.5]);
        let id = identity_tensor(3, 2).unwrap();
        assert_eq!(id.fiber(&mi(&[2, 1], 2)).unwrap(), vec![0.0, 1.0]);
        assert!(t.fiber(&mi(&[1], 3)).is_err());
        assert!(MultiIndex::new(vec![4, 1], 3).is_err());
    }

    #[test]
    fn spread_and_mean() {
        let t =
            StochasticTensor::from_fn(3, 2, |idx| if idx[0] == 1 { 0.25 } else { 0.75 }).unwrap();
        assert_eq!(t.fiber_spread(), 0.0);
        assert_eq!(t.mean_fiber(), vec![0.25, 0.75]);
        assert_eq!(two_state_absorbing().fiber_spread(), 1.0);
    }

    fn random_stochastic() -> impl Strategy<Value = StochasticTensor> {
        (2usize..5, 1usize..4).prop_flat_map(|(m, n)| {
            let size = n.pow(m as u32);
            proptest::collection::vec(0.01f64..1.0, size).prop_map(move |mut v| {
                for fiber in v.chunks_mut(n) {
                    let s: f64 = fiber.iter().sum();
                    fiber.iter_mut().for_each(|x| *x /= s);
                }
                StochasticTensor::from_values(m, n, v).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn matricize_round_trips_exactly(t in random_stochastic()) {
            let m = t.matricize();
            let back = StochasticTensor::from_matricization(t.order(), t.dim(), &m).unwrap();
            prop_assert_eq!(back, t.clone());
            for s in m.column_sums() {
                prop_assert!((s - 1.0).abs() <= DEFAULT_STOCHASTIC_TOL);
            }
        }
    }
}
