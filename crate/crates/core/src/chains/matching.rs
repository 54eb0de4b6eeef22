//! Chains on the perfect and near-perfect matchings of a balanced bipartite
//! graph. A state is the set of matched edges.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::Edit;
use crate::chain::{MarkovChain, Proposal};
use crate::edge_set::{BitIter, EdgeSet};
use crate::error::{Error, Result};
use crate::instances::BipartiteGraph;

/// Unmatched row and column of a near-perfect matching, or `None` when the
/// matching is perfect.
pub fn holes(state: &EdgeSet) -> Option<(usize, usize)> {
    let row = state.rows().iter().position(|&m| m == 0)?;
    let free_cols = !state.covered_columns() & column_mask(state.n_cols());
    Some((row, free_cols.trailing_zeros() as usize))
}

fn column_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn mate_of_column(state: &EdgeSet, c: usize) -> Option<usize> {
    state.rows().iter().position(|&m| m >> c & 1 == 1)
}

fn mate_of_row(state: &EdgeSet, r: usize) -> Option<usize> {
    let m = state.row(r);
    (m != 0).then(|| m.trailing_zeros() as usize)
}

/// Maximum matching by augmenting paths (rows in order, columns in
/// increasing order), returned as an edge set.
pub fn maximum_matching(graph: &BipartiteGraph) -> EdgeSet {
    fn augment(
        g: &BipartiteGraph,
        r: usize,
        seen: &mut [bool],
        col_mate: &mut [Option<usize>],
    ) -> bool {
        for c in BitIter(g.adjacency().row(r)) {
            if seen[c] {
                continue;
            }
            seen[c] = true;
            if col_mate[c].is_none_or(|r2| augment(g, r2, seen, col_mate)) {
                col_mate[c] = Some(r);
                return true;
            }
        }
        false
    }
    let mut col_mate = vec![None; graph.n_cols()];
    for r in 0..graph.n_rows() {
        let mut seen = vec![false; graph.n_cols()];
        augment(graph, r, &mut seen, &mut col_mate);
    }
    let mut m = EdgeSet::empty(graph.n_rows(), graph.n_cols());
    for (c, r) in col_mate.iter().enumerate() {
        if let Some(r) = r {
            m.insert(*r, c);
        }
    }
    m
}

fn matching_start(graph: &BipartiteGraph) -> Result<EdgeSet> {
    let n = graph.n_rows();
    if n != graph.n_cols() {
        return Err(Error::Unsupported {
            reason: alloc::format!(
                "matching chains need equal sides, got {}+{}",
                n,
                graph.n_cols()
            ),
        });
    }
    let m = maximum_matching(graph);
    if m.len() + 1 < n {
        return Err(Error::NoNearPerfectMatching {
            size: m.len(),
            needed: n - 1,
        });
    }
    Ok(m)
}

/// Edge-choice chain: pick an edge of the graph uniformly and remove it,
/// add it, or slide an adjacent matched edge onto it.
#[derive(Debug, Clone)]
pub struct MatchingChainOne {
    graph: BipartiteGraph,
    edges: Vec<(usize, usize)>,
}

impl MatchingChainOne {
    pub fn new(graph: BipartiteGraph) -> Self {
        let edges = graph.adjacency().edges().collect();
        MatchingChainOne { graph, edges }
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    fn kappa(&self) -> f64 {
        1.0 / self.edges.len() as f64
    }

    fn resolve(
        &self,
        state: &EdgeSet,
        holes: Option<(usize, usize)>,
        (u, v): (usize, usize),
    ) -> Option<Edit> {
        let in_m = state.contains(u, v);
        match holes {
            None => in_m.then_some(Edit::Remove((u, v))),
            Some(_) if in_m => None,
            Some((hu, hv)) if u == hu && v == hv => Some(Edit::Add((u, v))),
            Some((hu, _)) if u == hu => mate_of_column(state, v).map(|w| Edit::Replace {
                remove: (w, v),
                add: (u, v),
            }),
            Some((_, hv)) if v == hv => mate_of_row(state, u).map(|z| Edit::Replace {
                remove: (u, z),
                add: (u, v),
            }),
            Some(_) => None,
        }
    }
}

impl MarkovChain for MatchingChainOne {
    type State = EdgeSet;

    fn arbitrary_state(&self) -> Result<EdgeSet> {
        matching_start(&self.graph)
    }

    fn neighbours(&self, state: &EdgeSet, out: &mut Vec<Proposal<EdgeSet>>) {
        let h = holes(state);
        let kappa = self.kappa();
        for &e in &self.edges {
            if let Some(edit) = self.resolve(state, h, e) {
                out.push(Proposal::new(edit.apply(state), kappa));
            }
        }
    }

    fn stay_probability(&self, state: &EdgeSet) -> f64 {
        let h = holes(state);
        let stays = self
            .edges
            .iter()
            .filter(|&&e| self.resolve(state, h, e).is_none())
            .count();
        stays as f64 * self.kappa()
    }

    fn propose<R: Rng + ?Sized>(&self, state: &EdgeSet, rng: &mut R) -> Option<EdgeSet> {
        let e = self.edges[rng.random_range(0..self.edges.len())];
        self.resolve(state, holes(state), e)
            .map(|edit| edit.apply(state))
    }
}

/// Counts of perfect matchings and of near-perfect matchings per hole pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingCounts {
    pub perfect: u64,
    near: Vec<u64>,
    n: usize,
}

impl MatchingCounts {
    pub fn from_states(n: usize, states: &[EdgeSet]) -> Result<Self> {
        let mut counts = MatchingCounts {
            perfect: 0,
            near: vec![0; n * n],
            n,
        };
        for s in states {
            match holes(s) {
                None => counts.perfect += 1,
                Some((u, v)) => counts.near[u * n + v] += 1,
            }
        }
        if counts.perfect == 0 {
            return Err(Error::NoPerfectMatching);
        }
        Ok(counts)
    }

    pub fn near(&self, u: usize, v: usize) -> u64 {
        self.near[u * self.n + v]
    }

    pub fn near_total(&self) -> u64 {
        self.near.iter().sum()
    }
}

/// Vertex-choice chain with weights `1` on perfect matchings and
/// `|M| / |N(u,v)|` on near-perfect matchings with holes `u, v`.
#[derive(Debug, Clone)]
pub struct MatchingChainTwo {
    graph: BipartiteGraph,
    counts: Option<MatchingCounts>,
}

impl MatchingChainTwo {
    pub fn new(graph: BipartiteGraph) -> Self {
        MatchingChainTwo {
            graph,
            counts: None,
        }
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn counts(&self) -> Option<&MatchingCounts> {
        self.counts.as_ref()
    }

    fn n(&self) -> usize {
        self.graph.n_rows()
    }

    fn choice_count(&self, holes: Option<(usize, usize)>) -> usize {
        if holes.is_some() {
            2 * self.n()
        } else {
            self.n()
        }
    }

    fn resolve(
        &self,
        state: &EdgeSet,
        holes: Option<(usize, usize)>,
        choice: usize,
    ) -> Option<Edit> {
        let n = self.n();
        let Some((hu, hv)) = holes else {
            // perfect: the choice-th matched edge in row order
            let r = choice;
            return mate_of_row(state, r).map(|c| Edit::Remove((r, c)));
        };
        if choice < n {
            let z = choice;
            if z == hu {
                return self.graph.has_edge(hu, hv).then_some(Edit::Add((hu, hv)));
            }
            // z ∈ U matched to y: slide onto the free column
            if self.graph.has_edge(z, hv) {
                return mate_of_row(state, z).map(|y| Edit::Replace {
                    remove: (z, y),
                    add: (z, hv),
                });
            }
            None
        } else {
            let z = choice - n;
            if z == hv {
                return self.graph.has_edge(hu, hv).then_some(Edit::Add((hu, hv)));
            }
            if self.graph.has_edge(hu, z) {
                return mate_of_column(state, z).map(|x| Edit::Replace {
                    remove: (x, z),
                    add: (hu, z),
                });
            }
            None
        }
    }
}

impl MarkovChain for MatchingChainTwo {
    type State = EdgeSet;

    fn arbitrary_state(&self) -> Result<EdgeSet> {
        matching_start(&self.graph)
    }

    fn neighbours(&self, state: &EdgeSet, out: &mut Vec<Proposal<EdgeSet>>) {
        let h = holes(state);
        let k = self.choice_count(h);
        let kappa = 1.0 / k as f64;
        for choice in 0..k {
            if let Some(edit) = self.resolve(state, h, choice) {
                out.push(Proposal::new(edit.apply(state), kappa));
            }
        }
    }

    fn stay_probability(&self, state: &EdgeSet) -> f64 {
        let h = holes(state);
        let k = self.choice_count(h);
        let stays = (0..k)
            .filter(|&c| self.resolve(state, h, c).is_none())
            .count();
        stays as f64 / k as f64
    }

    fn weight(&self, state: &EdgeSet) -> Result<f64> {
        let counts = self.counts.as_ref().ok_or(Error::WeightsNotFinalized)?;
        Ok(match holes(state) {
            None => 1.0,
            Some((u, v)) => counts.perfect as f64 / counts.near(u, v) as f64,
        })
    }

    fn finalize_weights(&mut self, states: &[EdgeSet]) -> Result<()> {
        self.counts = Some(MatchingCounts::from_states(self.n(), states)?);
        Ok(())
    }

    fn has_unit_weights(&self) -> bool {
        false
    }

    fn propose<R: Rng + ?Sized>(&self, state: &EdgeSet, rng: &mut R) -> Option<EdgeSet> {
        let h = holes(state);
        let choice = rng.random_range(0..self.choice_count(h));
        self.resolve(state, h, choice).map(|edit| edit.apply(state))
    }
}
