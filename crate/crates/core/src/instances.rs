//! Problem instances: degree-sequence pairs for the switch chains and
//! bipartite graphs for the matching chains.
//!
//! Text encodings:
//! * degree-sequence pair: `a1,a2,…;b1,b2,…` (decimal, positive entries);
//! * bipartite graph: biadjacency rows of `0`/`1` separated by `;`, e.g. `110;011;101`.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::edge_set::{EdgeSet, MAX_COLUMNS};
use crate::error::{parse_error, Error, Result};

/// A pair of non-increasing positive degree sequences for the two sides
/// `U` (rows) and `V` (columns) of a bipartite graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DegreeSequencePair {
    a: Vec<u32>,
    b: Vec<u32>,
}

impl DegreeSequencePair {
    /// Validates and normalizes (sorts non-increasing) a pair.
    pub fn new(mut a: Vec<u32>, mut b: Vec<u32>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(parse_error(0, "both sequences must be non-empty"));
        }
        if a.iter().chain(b.iter()).any(|&d| d == 0) {
            return Err(parse_error(0, "degrees must be positive"));
        }
        if b.len() > MAX_COLUMNS {
            return Err(Error::Unsupported {
                reason: alloc::format!("{} columns, at most {MAX_COLUMNS} supported", b.len()),
            });
        }
        a.sort_unstable_by(|x, y| y.cmp(x));
        b.sort_unstable_by(|x, y| y.cmp(x));
        if !gale_ryser(&a, &b) {
            return Err(Error::NotRealizable);
        }
        Ok(DegreeSequencePair { a, b })
    }

    pub fn rows(&self) -> &[u32] {
        &self.a
    }

    pub fn cols(&self) -> &[u32] {
        &self.b
    }

    pub fn edge_count(&self) -> usize {
        self.a.iter().map(|&d| d as usize).sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.a[0].max(self.b[0])
    }

    /// The `u_i`-major greedy realization: each row, in order, takes the
    /// columns with the largest remaining demand (ties by smallest index).
    /// Succeeds for every realizable pair.
    pub fn greedy_realization(&self) -> Result<EdgeSet> {
        let mut remaining: Vec<u32> = self.b.clone();
        let mut set = EdgeSet::empty(self.a.len(), self.b.len());
        let mut order: Vec<usize> = (0..self.b.len()).collect();
        for (r, &deg) in self.a.iter().enumerate() {
            order.sort_by(|&x, &y| remaining[y].cmp(&remaining[x]).then(x.cmp(&y)));
            for &c in order.iter().take(deg as usize) {
                if remaining[c] == 0 {
                    return Err(Error::NotRealizable);
                }
                remaining[c] -= 1;
                set.insert(r, c);
            }
        }
        if remaining.iter().any(|&d| d != 0) {
            return Err(Error::NotRealizable);
        }
        Ok(set)
    }
}

impl fmt::Display for DegreeSequencePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &[u32]| {
            s.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{};{}", join(&self.a), join(&self.b))
    }
}

impl FromStr for DegreeSequencePair {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut sides = Vec::with_capacity(2);
        let mut offset = 0;
        for part in text.split(';') {
            let mut seq = Vec::new();
            let mut tok_offset = offset;
            for tok in part.split(',') {
                let trimmed = tok.trim();
                let pos = tok_offset + (tok.len() - tok.trim_start().len());
                if trimmed.is_empty() {
                    return Err(parse_error(pos, "empty degree entry"));
                }
                let d: u32 = trimmed.parse().map_err(|_| {
                    parse_error(pos, alloc::format!("'{trimmed}' is not a decimal degree"))
                })?;
                if d == 0 {
                    return Err(parse_error(pos, "degrees must be positive"));
                }
                seq.push(d);
                tok_offset += tok.len() + 1;
            }
            sides.push(seq);
            offset += part.len() + 1;
        }
        if sides.len() != 2 {
            return Err(parse_error(
                text.len(),
                "expected exactly one ';' between the two sequences",
            ));
        }
        let b = sides.pop().unwrap_or_default();
        let a = sides.pop().unwrap_or_default();
        DegreeSequencePair::new(a, b)
    }
}

/// Gale–Ryser test: a pair is realizable iff the sums agree and every
/// prefix sum of the sorted `a` is dominated by the conjugate of `b`.
pub fn gale_ryser(a: &[u32], b: &[u32]) -> bool {
    let sum_a: u64 = a.iter().map(|&x| x as u64).sum();
    let sum_b: u64 = b.iter().map(|&x| x as u64).sum();
    if sum_a != sum_b {
        return false;
    }
    let mut a = a.to_vec();
    a.sort_unstable_by(|x, y| y.cmp(x));
    let mut prefix = 0u64;
    for (k, &d) in a.iter().enumerate() {
        prefix += d as u64;
        let k = (k + 1) as u64;
        let bound: u64 = b.iter().map(|&x| (x as u64).min(k)).sum();
        if prefix > bound {
            return false;
        }
    }
    true
}

/// A simple bipartite graph given by its biadjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BipartiteGraph {
    adjacency: EdgeSet,
}

impl BipartiteGraph {
    /// Wraps a biadjacency matrix, rejecting disconnected graphs.
    pub fn new(adjacency: EdgeSet) -> Result<Self> {
        if adjacency.n_rows() == 0 || adjacency.n_cols() == 0 {
            return Err(parse_error(
                0,
                "graph needs at least one vertex on each side",
            ));
        }
        let g = BipartiteGraph { adjacency };
        if !g.is_connected() {
            return Err(Error::NotConnected);
        }
        Ok(g)
    }

    pub fn n_rows(&self) -> usize {
        self.adjacency.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.adjacency.n_cols()
    }

    pub fn adjacency(&self) -> &EdgeSet {
        &self.adjacency
    }

    pub fn has_edge(&self, r: usize, c: usize) -> bool {
        self.adjacency.contains(r, c)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Rows adjacent to column `c`, as a bitmask over rows (≤ 64 rows).
    pub fn column_mask(&self, c: usize) -> u64 {
        self.adjacency
            .rows()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m >> c & 1 == 1)
            .fold(0, |acc, (r, _)| acc | 1 << r)
    }

    fn is_connected(&self) -> bool {
        let rows = self.adjacency.rows();
        let all_cols = if self.n_cols() == 64 {
            u64::MAX
        } else {
            (1u64 << self.n_cols()) - 1
        };
        let mut seen_rows = vec![false; rows.len()];
        seen_rows[0] = true;
        let mut seen_cols = 0u64;
        let mut stack = vec![0usize];
        while let Some(r) = stack.pop() {
            let fresh = rows[r] & !seen_cols;
            seen_cols |= fresh;
            if fresh == 0 {
                continue;
            }
            for (k, &mask) in rows.iter().enumerate() {
                if !seen_rows[k] && mask & fresh != 0 {
                    seen_rows[k] = true;
                    stack.push(k);
                }
            }
        }
        seen_rows.iter().all(|&s| s) && seen_cols == all_cols
    }
}

impl fmt::Display for BipartiteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.adjacency.encode())
    }
}

impl FromStr for BipartiteGraph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut width = None;
        let mut offset = 0;
        for part in text.split(';') {
            let row = part.trim();
            let lead = part.len() - part.trim_start().len();
            if row.is_empty() {
                return Err(parse_error(offset + lead, "empty biadjacency row"));
            }
            if row.len() > MAX_COLUMNS {
                return Err(Error::Unsupported {
                    reason: alloc::format!(
                        "{} columns, at most {MAX_COLUMNS} supported",
                        row.len()
                    ),
                });
            }
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(parse_error(
                        offset + lead,
                        alloc::format!("row has {} entries, expected {w}", row.len()),
                    ))
                }
                _ => {}
            }
            let mut mask = 0u64;
            for (c, ch) in row.chars().enumerate() {
                match ch {
                    '1' => mask |= 1 << c,
                    '0' => {}
                    other => {
                        return Err(parse_error(
                            offset + lead + c,
                            alloc::format!("unexpected character '{other}'"),
                        ))
                    }
                }
            }
            rows.push(mask);
            offset += part.len() + 1;
        }
        let cols = width.unwrap_or(0);
        BipartiteGraph::new(EdgeSet::from_rows(rows, cols))
    }
}

/// Payload of a chain instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Degrees(DegreeSequencePair),
    Graph(BipartiteGraph),
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instance::Degrees(p) => p.fmt(f),
            Instance::Graph(g) => g.fmt(f),
        }
    }
}

/// Streams all realizable degree-sequence pairs `(a, b)` with
/// `1 ≤ |a| ≤ max_rows`, `1 ≤ |b| ≤ max_cols` and positive entries, in
/// strictly increasing lexicographic order of `(a, b)`.
pub fn enumerate_pairs(max_rows: usize, max_cols: usize) -> PairEnumerator {
    PairEnumerator::new(max_rows, max_cols)
}

/// Iterator returned by [`enumerate_pairs`].
#[derive(Debug, Clone)]
pub struct PairEnumerator {
    rows: Vec<Vec<u32>>,
    // column sequences bucketed by sum, each bucket lexicographically sorted
    cols_by_sum: Vec<Vec<Vec<u32>>>,
    next_row: usize,
    next_col: usize,
}

impl PairEnumerator {
    fn new(max_rows: usize, max_cols: usize) -> Self {
        // a row degree is bounded by the number of columns and vice versa
        let rows = non_increasing_sequences(max_rows, max_cols as u32);
        let cols = non_increasing_sequences(max_cols, max_rows as u32);
        let max_sum = max_rows * max_cols;
        let mut cols_by_sum = vec![Vec::new(); max_sum + 1];
        for seq in cols {
            let s: u32 = seq.iter().sum();
            cols_by_sum[s as usize].push(seq);
        }
        PairEnumerator {
            rows,
            cols_by_sum,
            next_row: 0,
            next_col: 0,
        }
    }
}

impl Iterator for PairEnumerator {
    type Item = DegreeSequencePair;

    fn next(&mut self) -> Option<DegreeSequencePair> {
        while let Some(a) = self.rows.get(self.next_row) {
            let sum = a.iter().sum::<u32>() as usize;
            let bucket = self.cols_by_sum.get(sum).map(Vec::as_slice).unwrap_or(&[]);
            while let Some(b) = bucket.get(self.next_col) {
                self.next_col += 1;
                if gale_ryser(a, b) {
                    return Some(DegreeSequencePair {
                        a: a.clone(),
                        b: b.clone(),
                    });
                }
            }
            self.next_row += 1;
            self.next_col = 0;
        }
        None
    }
}

/// All non-increasing sequences with entries in `1..=max_value` and length
/// `1..=max_len`, in lexicographic order, generated by backtracking.
fn non_increasing_sequences(max_len: usize, max_value: u32) -> Vec<Vec<u32>> {
    fn extend(prefix: &mut Vec<u32>, max_len: usize, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == max_len {
            return;
        }
        let cap = *prefix.last().unwrap_or(&u32::MAX);
        // lexicographic order: shorter prefix first, then increasing next entry
        for v in 1..=cap {
            prefix.push(v);
            out.push(prefix.clone());
            extend(prefix, max_len, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for first in 1..=max_value {
        let mut prefix = vec![first];
        out.push(prefix.clone());
        extend(&mut prefix, max_len, &mut out);
    }
    out
}

/// Half-regular scaling families with `n` columns of degree two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `(n−1, n−2, 2, 1); (2, …, 2)`
    A,
    /// `(n−1, n−2, 3); (2, …, 2)`
    B,
    /// `(n−1, n−2, 1, 1, 1); (2, …, 2)`
    C,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            "C" | "c" => Ok(Family::C),
            other => Err(parse_error(0, alloc::format!("unknown family '{other}'"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
        })
    }
}

/// Instantiates a scaling family for `n ≥ 4`.
pub fn scaling_family(family: Family, n: u32) -> Result<DegreeSequencePair> {
    if n < 4 {
        return Err(parse_error(0, "scaling families need n >= 4"));
    }
    let a = match family {
        Family::A => vec![n - 1, n - 2, 2, 1],
        Family::B => vec![n - 1, n - 2, 3],
        Family::C => vec![n - 1, n - 2, 1, 1, 1],
    };
    DegreeSequencePair::new(a, vec![2; n as usize])
}

/// Parses an instance of the expected payload kind.
pub fn parse_instance(text: &str, expect_graph: bool) -> Result<Instance> {
    if expect_graph {
        text.parse().map(Instance::Graph)
    } else {
        text.parse().map(Instance::Degrees)
    }
}
