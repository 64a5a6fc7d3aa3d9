#![allow(dead_code)]

use hmarkov::{limits, StochasticTensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two states; contexts (1,1) and (2,2) are absorbing.
pub fn absorbing_two_state() -> StochasticTensor {
    StochasticTensor::from_frontal_slices(&[
        vec![vec![1.0, 0.5], vec![0.0, 0.5]],
        vec![vec![0.5, 0.0], vec![0.5, 1.0]],
    ])
    .unwrap()
}

/// Limit of the k-step tensors of [`absorbing_two_state`].
pub fn absorbing_two_state_limit() -> StochasticTensor {
    StochasticTensor::from_frontal_slices(&[
        vec![vec![1.0, 1.0 / 3.0], vec![0.0, 2.0 / 3.0]],
        vec![vec![2.0 / 3.0, 0.0], vec![1.0 / 3.0, 1.0]],
    ])
    .unwrap()
}

/// The k-step tensor of [`periodic_three_state`] as displayed for odd and
/// even k.
pub fn periodic_three_state_power(k: usize) -> StochasticTensor {
    let slice = if k.is_multiple_of(2) {
        vec![
            vec![0.5, 0.0, 0.5],
            vec![0.0, 1.0, 0.0],
            vec![0.5, 0.0, 0.5],
        ]
    } else {
        vec![
            vec![0.0, 0.5, 0.0],
            vec![1.0, 0.0, 1.0],
            vec![0.0, 0.5, 0.0],
        ]
    };
    StochasticTensor::from_frontal_slices(&[slice.clone(), slice.clone(), slice]).unwrap()
}

/// Ergodic, not regular; k-step tensors alternate with period 2.
pub fn periodic_three_state() -> StochasticTensor {
    periodic_three_state_power(1)
}

/// Regular with first positive power 10, while Q is not regular.
pub fn regular_four_state() -> StochasticTensor {
    StochasticTensor::from_frontal_slices(&[
        vec![
            vec![0.5, 0.0, 0.0, 0.0],
            vec![0.5, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0, 0.0],
        ],
        vec![
            vec![0.0, 0.0, 0.5, 1.0],
            vec![0.0, 0.5, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.5, 0.0, 0.5, 0.0],
        ],
        vec![
            vec![0.0, 1.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.5, 0.0],
            vec![0.0, 0.0, 0.5, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
        ],
        vec![
            vec![0.0, 0.0, 0.0, 0.0],
            vec![1.0, 1.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.5],
            vec![0.0, 0.0, 0.0, 0.5],
        ],
    ])
    .unwrap()
}

pub const REGULAR_FOUR_STATE_PI: [f64; 4] = [2.0 / 7.0, 2.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];

fn normalize_fibers(values: &mut [f64], n: usize) {
    for fiber in values.chunks_mut(n) {
        let s: f64 = fiber.iter().sum();
        fiber.iter_mut().for_each(|v| *v /= s);
    }
}

/// Random tensor; each entry is zero with probability 1/4, no fiber is
/// left empty.
pub fn random_stochastic(rng: &mut impl Rng, order: usize, dim: usize) -> StochasticTensor {
    let size = dim.pow(order as u32);
    let mut values: Vec<f64> = (0..size)
        .map(|_| {
            if rng.random_bool(0.25) {
                0.0
            } else {
                rng.random_range(0.0..1.0)
            }
        })
        .collect();
    for fiber in values.chunks_mut(dim) {
        if fiber.iter().all(|&v| v == 0.0) {
            fiber[rng.random_range(0..dim)] = 1.0;
        }
    }
    normalize_fibers(&mut values, dim);
    StochasticTensor::from_values(order, dim, values).unwrap()
}

/// Dense random tensor, entries bounded away from zero.
pub fn random_positive(rng: &mut impl Rng, order: usize, dim: usize) -> StochasticTensor {
    let size = dim.pow(order as u32);
    let mut values: Vec<f64> = (0..size).map(|_| rng.random_range(0.05..1.0)).collect();
    normalize_fibers(&mut values, dim);
    StochasticTensor::from_values(order, dim, values).unwrap()
}

/// Random tensor where each fiber has a random nonempty support.
pub fn random_sparse(rng: &mut impl Rng, order: usize, dim: usize) -> StochasticTensor {
    let size = dim.pow(order as u32);
    let mut values = vec![0.0; size];
    for fiber in values.chunks_mut(dim) {
        let support = rng.random_range(1..=dim);
        let mut picked = 0;
        while picked < support {
            let i = rng.random_range(0..dim);
            if fiber[i] == 0.0 {
                fiber[i] = rng.random_range(0.1..1.0);
                picked += 1;
            }
        }
    }
    normalize_fibers(&mut values, dim);
    StochasticTensor::from_values(order, dim, values).unwrap()
}

/// Smallest k in 1..=max_k with P^(k) entrywise positive, by direct
/// numeric iteration of the k-step recurrence.
pub fn brute_force_regularity(t: &StochasticTensor, max_k: usize) -> Option<usize> {
    let mut p = t.clone();
    for k in 1..=max_k {
        if p.values().iter().all(|&v| v > 0.0) {
            return Some(k);
        }
        p = limits::boxtimes(&p, t).unwrap();
    }
    None
}

/// Stationary vector of an irreducible column-stochastic matrix from the
/// linear system (Q - I) y = 0, e^T y = 1, by Gaussian elimination with
/// partial pivoting.
pub fn kernel_solve(q: &hmarkov::DenseMatrix) -> Vec<f64> {
    let n = q.rows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .map(|j| q.get(i, j) - if i == j { 1.0 } else { 0.0 })
                .collect();
            row.push(0.0);
            row
        })
        .collect();
    a[n - 1] = vec![1.0; n + 1];
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        a[col][col..].iter_mut().for_each(|v| *v /= d);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            let f = row[col];
            if r != col && f != 0.0 {
                for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= f * p;
                }
            }
        }
    }
    a.iter().map(|row| row[n]).collect()
}

pub fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
