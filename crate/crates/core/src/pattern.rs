//! Bit-packed boolean matrices over the `(OR, AND)` semiring.

use std::fmt;

use crate::matrix::DenseMatrix;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolPattern {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BoolPattern {
    pub fn empty(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        BoolPattern {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
        }
    }

    /// Pattern of strictly positive entries.
    pub fn positive_entries(m: &DenseMatrix) -> Self {
        let mut p = Self::empty(m.rows(), m.cols());
        for r in 0..m.rows() {
            for (c, &v) in m.row(r).iter().enumerate() {
                if v > 0.0 {
                    p.set(r, c);
                }
            }
        }
        p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.words_per_row + col / 64] >> (col % 64) & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize) {
        self.bits[row * self.words_per_row + col / 64] |= 1 << (col % 64);
    }

    fn row_words(&self, row: usize) -> &[u64] {
        &self.bits[row * self.words_per_row..(row + 1) * self.words_per_row]
    }

    fn row_words_mut(&mut self, row: usize) -> &mut [u64] {
        &mut self.bits[row * self.words_per_row..(row + 1) * self.words_per_row]
    }

    /// Boolean product `self * rhs`.
    pub fn product(&self, rhs: &BoolPattern) -> BoolPattern {
        assert_eq!(self.cols, rhs.rows, "pattern shapes do not chain");
        let mut out = BoolPattern::empty(self.rows, rhs.cols);
        for r in 0..self.rows {
            for (w, &word) in self.row_words(r).iter().enumerate() {
                let mut word = word;
                while word != 0 {
                    let k = w * 64 + word.trailing_zeros() as usize;
                    word &= word - 1;
                    for (o, s) in out.row_words_mut(r).iter_mut().zip(rhs.row_words(k)) {
                        *o |= s;
                    }
                }
            }
        }
        out
    }

    /// Entrywise OR into `self`.
    pub fn union_with(&mut self, other: &BoolPattern) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_all_true(&self) -> bool {
        self.count_true() == self.rows * self.cols
    }

    /// First false entry in row-major order, 0-based.
    pub fn first_false(&self) -> Option<(usize, usize)> {
        (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .find(|&(r, c)| !self.get(r, c))
    }

    /// First false entry scanning columns first, i.e. in the linear order of
    /// a matricized tensor.
    pub fn first_false_column_major(&self) -> Option<(usize, usize)> {
        (0..self.cols)
            .flat_map(|c| (0..self.rows).map(move |r| (r, c)))
            .find(|&(r, c)| !self.get(r, c))
    }
}

impl fmt::Debug for BoolPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BoolPattern {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '.' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}
