//! Canonical path schemes that unwind the symmetric difference of two
//! edge sets.
//!
//! From the current state `z` towards the target `y`, each step takes an
//! arc that strictly shrinks `z ⊕ y`. Arcs that touch the component of
//! `z ⊕ y` containing its smallest vertex are preferred; among equals the
//! smaller resulting difference, then the smaller state index wins. When no
//! arc shrinks the difference (for example two near-perfect matchings with
//! the same holes), the rest of the path follows shortest paths.

use alloc::vec::Vec;

use crate::congestion::{DistanceField, PathScheme};
use crate::edge_set::EdgeSet;
use crate::error::Result;
use crate::state_graph::StateGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalScheme {
    name: &'static str,
}

pub fn matching_canonical_scheme() -> CanonicalScheme {
    CanonicalScheme {
        name: "matching-canonical",
    }
}

pub fn switch_canonical_scheme() -> CanonicalScheme {
    CanonicalScheme {
        name: "switch-canonical",
    }
}

/// Rows and columns of the component of `h` that contains its first row
/// with an edge.
fn first_component(h: &EdgeSet) -> (u64, u64) {
    let Some(start) = h.rows().iter().position(|&m| m != 0) else {
        return (0, 0);
    };
    let mut rows = 1u64 << start;
    let mut cols = h.row(start);
    loop {
        let mut grown = rows;
        for (r, &m) in h.rows().iter().enumerate() {
            if m & cols != 0 {
                grown |= 1 << r;
            }
        }
        let grown_cols = h
            .rows()
            .iter()
            .enumerate()
            .filter(|(r, _)| grown >> r & 1 == 1)
            .fold(0, |acc, (_, &m)| acc | m);
        if grown == rows && grown_cols == cols {
            return (rows, cols);
        }
        rows = grown;
        cols = grown_cols;
    }
}

fn touches(change: &EdgeSet, rows: u64, cols: u64) -> bool {
    change
        .rows()
        .iter()
        .enumerate()
        .any(|(r, &m)| m != 0 && (rows >> r & 1 == 1 || m & cols != 0))
}

/// Cuts cycles out of a walk, keeping the first visit of every state.
fn erase_loops(walk: &mut Vec<usize>) {
    let mut out: Vec<usize> = Vec::with_capacity(walk.len());
    for &s in walk.iter() {
        if let Some(p) = out.iter().position(|&t| t == s) {
            out.truncate(p + 1);
        } else {
            out.push(s);
        }
    }
    *walk = out;
}

impl PathScheme<EdgeSet> for CanonicalScheme {
    fn name(&self) -> &str {
        self.name
    }

    fn path(
        &self,
        g: &StateGraph<EdgeSet>,
        field: &DistanceField,
        from: usize,
        out: &mut Vec<usize>,
    ) -> Result<()> {
        let to = field.target();
        let y = g.state(to);
        let start = out.len();
        out.push(from);
        let mut cur = from;
        while cur != to {
            let z = g.state(cur);
            let h = z.xor(y);
            let d = h.len();
            let (rows, cols) = first_component(&h);
            let mut best: Option<(bool, usize, usize)> = None;
            for a in g.arcs(cur) {
                if a.prob <= 0.0 {
                    continue;
                }
                let v = a.target as usize;
                let zv = g.state(v);
                let dv = zv.symmetric_difference_len(y);
                if dv >= d {
                    continue;
                }
                let key = (!touches(&z.xor(zv), rows, cols), dv, v);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
            match best {
                Some((_, _, v)) => {
                    out.push(v);
                    cur = v;
                }
                None => {
                    field.descend(g, cur, out)?;
                    break;
                }
            }
        }
        let mut walk = out.split_off(start);
        erase_loops(&mut walk);
        out.extend(walk);
        Ok(())
    }
}
