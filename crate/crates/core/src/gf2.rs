//! Dense bit-packed linear algebra over GF(2).
//!
//! Rows are stored as packed `u64` words. Every operation here is a pure
//! function of its inputs; matrices and vectors are plain values that can be
//! shared across threads once built.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Builds a vector from `0`/`1` entries. Any nonzero entry counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_support(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.set(i, true);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    /// Position of the lowest set bit, if any.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * WORD + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(k * WORD + b)
                }
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
        write!(f, "BitVector({s})")
    }
}

/// A dense matrix over GF(2), stored row-major.
///
/// Column count is always at least one. A matrix may have zero rows, which is
/// how an empty nullspace (a square full-rank input) is represented.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if cols == 0 {
            return Err(Error::DimensionMismatch {
                what: "matrix column count",
                expected: 1,
                found: 0,
            });
        }
        Ok(Self {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, true);
        }
        Ok(m)
    }

    /// Builds a matrix from rows that must all share one length.
    pub fn from_rows(rows: Vec<BitVector>) -> Result<Self> {
        let cols = rows.first().map(BitVector::len).unwrap_or(0);
        if cols == 0 {
            return Err(Error::DimensionMismatch {
                what: "matrix column count",
                expected: 1,
                found: 0,
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                what: "row length",
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Self { cols, rows })
    }

    /// Builds a matrix from a grid of `0`/`1` entries.
    pub fn from_dense(grid: &[Vec<u8>]) -> Result<Self> {
        Self::from_rows(grid.iter().map(|r| BitVector::from_bits(r)).collect())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        self.rows[r].set(c, bit);
    }

    pub fn row(&self, r: usize) -> &BitVector {
        &self.rows[r]
    }

    pub fn row_vectors(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<BitVector> {
        self.rows
    }

    /// Number of 1-entries.
    pub fn count_ones(&self) -> usize {
        self.rows.iter().map(BitVector::weight).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows.iter().map(BitVector::to_bits).collect()
    }

    /// `self · vᵀ` over GF(2), one bit per row.
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                what: "vector length",
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(BitVector::from_support(
            self.rows(),
            self.rows.iter().enumerate().filter(|(_, r)| r.dot(v)).map(|(i, _)| i),
        ))
    }

    /// Row-vector times matrix: `m · self` for a message `m` of length `rows`.
    pub fn left_mul(&self, m: &BitVector) -> Result<BitVector> {
        if m.len() != self.rows() {
            return Err(Error::DimensionMismatch {
                what: "message length",
                expected: self.rows(),
                found: m.len(),
            });
        }
        let mut out = BitVector::zeros(self.cols);
        for i in m.iter_ones() {
            out.xor_assign(&self.rows[i]);
        }
        Ok(out)
    }

    /// Matrix with the selected rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut rows = Vec::with_capacity(indices.len());
        for &i in indices {
            let row = self.rows.get(i).ok_or(Error::IndexOutOfRange {
                index: i,
                bound: self.rows(),
            })?;
            rows.push(row.clone());
        }
        Ok(Self { cols: self.cols, rows })
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{}", self.rows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r:?}")?;
        }
        Ok(())
    }
}

/// Reduced row echelon form with leftmost-column, topmost-row pivoting.
///
/// Returns the reduced matrix (same shape as `m`, zero rows at the bottom) and
/// the pivot column of each nonzero row.
pub fn rref(m: &BinaryMatrix) -> (BinaryMatrix, Vec<usize>) {
    let mut rows = m.rows.clone();
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..m.cols {
        if top == rows.len() {
            break;
        }
        let Some(p) = (top..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(top, p);
        let pivot_row = rows[top].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != top && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(col);
        top += 1;
    }
    (BinaryMatrix { cols: m.cols, rows }, pivots)
}

pub fn rank(m: &BinaryMatrix) -> usize {
    rank_of_rows(m.row_vectors())
}

/// Rank of a set of equal-length vectors.
pub fn rank_of_rows(rows: &[BitVector]) -> usize {
    let mut basis = EchelonBasis::default();
    rows.iter().filter(|r| basis.insert((*r).clone())).count()
}

/// Generator of the right nullspace: a `(cols − rank) × cols` matrix whose
/// rows are independent and orthogonal to every row of `h`.
pub fn nullspace_basis(h: &BinaryMatrix) -> BinaryMatrix {
    let (reduced, pivots) = rref(h);
    let mut is_pivot = vec![false; h.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let rows = (0..h.cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = BitVector::zeros(h.cols);
            v.set(free, true);
            for (r, &p) in pivots.iter().enumerate() {
                if reduced.get(r, free) {
                    v.set(p, true);
                }
            }
            v
        })
        .collect();
    BinaryMatrix { cols: h.cols, rows }
}

/// `h · cᵀ == 0`.
pub fn is_codeword(h: &BinaryMatrix, c: &BitVector) -> Result<bool> {
    Ok(h.mul_vec(c)?.is_zero())
}

/// Picks `target_count` linearly independent rows from `pool` by greedy
/// accumulation over an rng-shuffled order. Indices come back sorted.
pub fn select_full_rank_rows<R: Rng + ?Sized>(
    pool: &[BitVector],
    target_count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(rng);
    let mut basis = EchelonBasis::default();
    let mut chosen = Vec::with_capacity(target_count);
    for i in order {
        if chosen.len() == target_count {
            break;
        }
        if basis.insert(pool[i].clone()) {
            chosen.push(i);
        }
    }
    if chosen.len() < target_count {
        return Err(Error::InsufficientRank {
            available: basis.len(),
            required: target_count,
        });
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Incrementally maintained echelon basis, keyed by the lowest set bit.
#[derive(Default)]
struct EchelonBasis {
    // (pivot column, vector whose lowest set bit is the pivot)
    entries: Vec<(usize, BitVector)>,
}

impl EchelonBasis {
    fn len(&self) -> usize {
        self.entries.len()
    }

    /// Reduces `v` and keeps it if it is independent of the basis.
    fn insert(&mut self, mut v: BitVector) -> bool {
        loop {
            let Some(lead) = v.first_one() else {
                return false;
            };
            match self.entries.binary_search_by_key(&lead, |(p, _)| *p) {
                Ok(k) => v.xor_assign(&self.entries[k].1),
                Err(k) => {
                    self.entries.insert(k, (lead, v));
                    return true;
                }
            }
        }
    }
}
