//! Compact edge sets of bipartite graphs, used as chain states.
//!
//! Row `i` is a bitmask of the columns adjacent to `u_i`, so at most 64
//! columns are supported. Equality and hashing are structural; the total
//! order is the lexicographic order of the edge lists sorted by
//! `(row, column)`, which is the canonical state order used for
//! deterministic graph construction.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

pub const MAX_COLUMNS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    rows: Box<[u64]>,
    cols: u32,
}

impl EdgeSet {
    /// Empty edge set on `rows × cols` vertices.
    ///
    /// Panics if `cols` exceeds [`MAX_COLUMNS`]; instance parsing rejects
    /// such inputs before any state is created.
    pub fn empty(rows: usize, cols: usize) -> Self {
        assert!(
            cols <= MAX_COLUMNS,
            "at most {MAX_COLUMNS} columns supported"
        );
        EdgeSet {
            rows: vec![0u64; rows].into_boxed_slice(),
            cols: cols as u32,
        }
    }

    pub fn from_rows(rows: Vec<u64>, cols: usize) -> Self {
        assert!(
            cols <= MAX_COLUMNS,
            "at most {MAX_COLUMNS} columns supported"
        );
        debug_assert!(rows.iter().all(|r| cols == 64 || r >> cols == 0));
        EdgeSet {
            rows: rows.into_boxed_slice(),
            cols: cols as u32,
        }
    }

    pub fn from_edges(rows: usize, cols: usize, edges: &[(usize, usize)]) -> Self {
        let mut set = EdgeSet::empty(rows, cols);
        for &(r, c) in edges {
            set.insert(r, c);
        }
        set
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.cols as usize
    }

    #[inline]
    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    #[inline]
    pub fn row(&self, r: usize) -> u64 {
        self.rows[r]
    }

    #[inline]
    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.rows[r] >> c & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, r: usize, c: usize) {
        self.rows[r] |= 1 << c;
    }

    #[inline]
    pub fn remove(&mut self, r: usize, c: usize) {
        self.rows[r] &= !(1 << c);
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    /// Bitmask of the columns covered by at least one edge.
    pub fn covered_columns(&self) -> u64 {
        self.rows.iter().fold(0, |acc, r| acc | r)
    }

    pub fn column_degree(&self, c: usize) -> usize {
        self.rows.iter().filter(|&&r| r >> c & 1 == 1).count()
    }

    /// Edges in canonical `(row, column)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, &mask)| BitIter(mask).map(move |c| (r, c)))
    }

    /// Number of edges in the symmetric difference with `other`.
    pub fn symmetric_difference_len(&self, other: &EdgeSet) -> usize {
        self.rows
            .iter()
            .zip(other.rows.iter())
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Row-wise symmetric difference.
    pub fn xor(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet {
            rows: self
                .rows
                .iter()
                .zip(other.rows.iter())
                .map(|(a, b)| a ^ b)
                .collect(),
            cols: self.cols,
        }
    }

    /// Biadjacency encoding, rows separated by `;`, e.g. `110;011`.
    pub fn encode(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * (self.cols as usize + 1));
        for (r, &mask) in self.rows.iter().enumerate() {
            if r > 0 {
                out.push(';');
            }
            for c in 0..self.cols as usize {
                out.push(if mask >> c & 1 == 1 { '1' } else { '0' });
            }
        }
        out
    }
}

impl Ord for EdgeSet {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.rows.len().max(other.rows.len());
        let row = |s: &EdgeSet, r: usize| s.rows.get(r).copied().unwrap_or(0);
        let has_edge_after = |s: &EdgeSet, r: usize, c: u32| {
            let above = if c >= 63 { 0 } else { row(s, r) >> (c + 1) };
            above != 0 || (r + 1..s.rows.len()).any(|k| s.rows[k] != 0)
        };
        for r in 0..n {
            let (a, b) = (row(self, r), row(other, r));
            if a == b {
                continue;
            }
            // Edge lists agree up to (r, c); exactly one side contains (r, c).
            let c = (a ^ b).trailing_zeros();
            return if a >> c & 1 == 1 {
                if has_edge_after(other, r, c) {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            } else if has_edge_after(self, r, c) {
                Ordering::Greater
            } else {
                Ordering::Less
            };
        }
        self.rows
            .len()
            .cmp(&other.rows.len())
            .then(self.cols.cmp(&other.cols))
    }
}

impl PartialOrd for EdgeSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EdgeSet({})", self.encode())
    }
}

impl fmt::Display for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

/// Iterates the set bit positions of a mask in increasing order.
#[derive(Clone, Copy)]
pub struct BitIter(pub u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let c = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(c)
    }
}
