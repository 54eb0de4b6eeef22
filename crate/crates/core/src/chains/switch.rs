//! Switch chains on the realizations of a bipartite degree-sequence pair.
//!
//! Both chains make the same moves: for rows `i < k` with masks `r_i, r_k`,
//! every column `x` in `r_i \ r_k` and `y` in `r_k \ r_i` give one switch
//! that trades `(i,x),(k,y)` for `(i,y),(k,x)`. They differ in how often
//! each move is proposed.

use alloc::vec::Vec;

use rand::Rng;

use super::Edit;
use crate::chain::{MarkovChain, Proposal};
use crate::edge_set::{BitIter, EdgeSet};
use crate::error::Result;
use crate::instances::DegreeSequencePair;

fn for_each_switch(state: &EdgeSet, mut f: impl FnMut(Edit)) {
    let rows = state.rows();
    for i in 0..rows.len() {
        for k in i + 1..rows.len() {
            let (ri, rk) = (rows[i], rows[k]);
            for x in BitIter(ri & !rk) {
                for y in BitIter(rk & !ri) {
                    f(Edit::Switch {
                        remove: [(i, x), (k, y)],
                        add: [(i, y), (k, x)],
                    });
                }
            }
        }
    }
}

fn switch_count(state: &EdgeSet) -> u64 {
    let rows = state.rows();
    let mut n = 0u64;
    for i in 0..rows.len() {
        for k in i + 1..rows.len() {
            let (ri, rk) = (rows[i], rows[k]);
            n += u64::from((ri & !rk).count_ones()) * u64::from((rk & !ri).count_ones());
        }
    }
    n
}

fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |k| (i, k))).collect()
}

/// The switch at rows `i, k` and columns `j, l`, if either diagonal pair is
/// present and the other absent.
fn resolve_switch(state: &EdgeSet, (i, k): (usize, usize), (j, l): (usize, usize)) -> Option<Edit> {
    if i == k || j == l {
        return None;
    }
    let (ij, kl, il, kj) = (
        state.contains(i, j),
        state.contains(k, l),
        state.contains(i, l),
        state.contains(k, j),
    );
    if ij && kl && !il && !kj {
        Some(Edit::Switch {
            remove: [(i, j), (k, l)],
            add: [(i, l), (k, j)],
        })
    } else if !ij && !kl && il && kj {
        Some(Edit::Switch {
            remove: [(i, l), (k, j)],
            add: [(i, j), (k, l)],
        })
    } else {
        None
    }
}

/// Picks `i ≤ k` and `j ≤ l` uniformly and switches when possible.
#[derive(Debug, Clone)]
pub struct SwitchChainOne {
    pair: DegreeSequencePair,
    row_pairs: Vec<(usize, usize)>,
    col_pairs: Vec<(usize, usize)>,
    kappa: f64,
}

impl SwitchChainOne {
    pub fn new(pair: DegreeSequencePair) -> Self {
        let row_pairs = ordered_pairs(pair.rows().len());
        let col_pairs = ordered_pairs(pair.cols().len());
        let kappa = 1.0 / (row_pairs.len() as f64 * col_pairs.len() as f64);
        SwitchChainOne {
            pair,
            row_pairs,
            col_pairs,
            kappa,
        }
    }

    pub fn pair(&self) -> &DegreeSequencePair {
        &self.pair
    }

    /// Number of `(i ≤ k, j ≤ l)` choices.
    pub fn choice_count(&self) -> u64 {
        self.row_pairs.len() as u64 * self.col_pairs.len() as u64
    }
}

impl MarkovChain for SwitchChainOne {
    type State = EdgeSet;

    fn arbitrary_state(&self) -> Result<EdgeSet> {
        self.pair.greedy_realization()
    }

    fn neighbours(&self, state: &EdgeSet, out: &mut Vec<Proposal<EdgeSet>>) {
        for_each_switch(state, |edit| {
            out.push(Proposal::new(edit.apply(state), self.kappa))
        });
    }

    fn stay_probability(&self, state: &EdgeSet) -> f64 {
        let stays = self.choice_count() - switch_count(state);
        stays as f64 * self.kappa
    }

    fn propose<R: Rng + ?Sized>(&self, state: &EdgeSet, rng: &mut R) -> Option<EdgeSet> {
        let rows = self.row_pairs[rng.random_range(0..self.row_pairs.len())];
        let cols = self.col_pairs[rng.random_range(0..self.col_pairs.len())];
        resolve_switch(state, rows, cols).map(|e| e.apply(state))
    }
}

/// Picks an unordered pair of non-adjacent edges from the realization plus
/// one artificial edge; choosing the artificial edge keeps the state.
#[derive(Debug, Clone)]
pub struct SwitchChainTwo {
    pair: DegreeSequencePair,
    n_pairs: u64,
    kappa: f64,
}

fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

impl SwitchChainTwo {
    pub fn new(pair: DegreeSequencePair) -> Self {
        let m = pair.edge_count() as u64;
        let adjacent: u64 = pair
            .rows()
            .iter()
            .chain(pair.cols())
            .map(|&d| choose2(u64::from(d)))
            .sum();
        let n_pairs = choose2(m + 1) - adjacent;
        SwitchChainTwo {
            pair,
            n_pairs,
            kappa: 1.0 / n_pairs as f64,
        }
    }

    pub fn pair(&self) -> &DegreeSequencePair {
        &self.pair
    }

    /// Number of unordered non-adjacent pairs in the augmented edge set.
    pub fn pair_count(&self) -> u64 {
        self.n_pairs
    }

    /// Pairs that keep the chain in place, counted directly: every pair
    /// with the artificial edge plus the non-adjacent real pairs that do not
    /// admit a switch.
    fn stay_count(&self, state: &EdgeSet) -> u64 {
        let rows = state.rows();
        let mut stays = self.pair.edge_count() as u64;
        for i in 0..rows.len() {
            for k in i + 1..rows.len() {
                let (ri, rk) = (rows[i], rows[k]);
                let non_adjacent = u64::from(ri.count_ones()) * u64::from(rk.count_ones())
                    - u64::from((ri & rk).count_ones());
                let switches =
                    u64::from((ri & !rk).count_ones()) * u64::from((rk & !ri).count_ones());
                stays += non_adjacent - switches;
            }
        }
        stays
    }
}

fn nth_edge(state: &EdgeSet, mut n: usize) -> (usize, usize) {
    for (r, &mask) in state.rows().iter().enumerate() {
        let k = mask.count_ones() as usize;
        if n < k {
            let c = BitIter(mask).nth(n).expect("bit within row");
            return (r, c);
        }
        n -= k;
    }
    unreachable!("edge index out of range")
}

impl MarkovChain for SwitchChainTwo {
    type State = EdgeSet;

    fn arbitrary_state(&self) -> Result<EdgeSet> {
        self.pair.greedy_realization()
    }

    fn neighbours(&self, state: &EdgeSet, out: &mut Vec<Proposal<EdgeSet>>) {
        for_each_switch(state, |edit| {
            out.push(Proposal::new(edit.apply(state), self.kappa))
        });
    }

    fn stay_probability(&self, state: &EdgeSet) -> f64 {
        self.stay_count(state) as f64 * self.kappa
    }

    fn propose<R: Rng + ?Sized>(&self, state: &EdgeSet, rng: &mut R) -> Option<EdgeSet> {
        let m = self.pair.edge_count();
        // uniform over unordered non-adjacent pairs by rejection
        loop {
            let a = rng.random_range(0..=m);
            let b = rng.random_range(0..=m);
            if a == b {
                continue;
            }
            if a == m || b == m {
                return None;
            }
            let (i, j) = nth_edge(state, a);
            let (k, l) = nth_edge(state, b);
            if i == k || j == l {
                continue;
            }
            let edit = (!state.contains(i, l) && !state.contains(k, j)).then_some(Edit::Switch {
                remove: [(i, j), (k, l)],
                add: [(i, l), (k, j)],
            });
            return edit.map(|e| e.apply(state));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(s: &str) -> DegreeSequencePair {
        s.parse().unwrap()
    }

    #[test]
    fn two_state_instance_has_one_switch_of_441() {
        let c = SwitchChainOne::new(pair("6,6,6,6,5,5;6,6,6,6,5,5"));
        assert_eq!(c.choice_count(), 441);
        let s = c.arbitrary_state().unwrap();
        let mut out = Vec::new();
        c.neighbours(&s, &mut out);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].kappa, 1.0 / 441.0);
        assert!((c.stay_probability(&s) - 440.0 / 441.0).abs() < 1e-15);
    }

    #[test]
    fn unique_realization_has_no_moves() {
        let c = SwitchChainOne::new(pair("2,1;2,1"));
        let s = c.arbitrary_state().unwrap();
        let mut out = Vec::new();
        c.neighbours(&s, &mut out);
        assert!(out.is_empty());
        assert_eq!(c.stay_probability(&s), 1.0);
    }

    #[test]
    fn pair_count_matches_brute_force() {
        let p = pair("3,2,2,1;2,2,2,2");
        let c = SwitchChainTwo::new(p.clone());
        let s = c.arbitrary_state().unwrap();
        let edges: Vec<_> = s.edges().collect();
        let m = edges.len();
        let mut non_adjacent = m; // pairs with the artificial edge
        for x in 0..m {
            for y in x + 1..m {
                if edges[x].0 != edges[y].0 && edges[x].1 != edges[y].1 {
                    non_adjacent += 1;
                }
            }
        }
        assert_eq!(c.pair_count(), non_adjacent as u64);
        let mut out = Vec::new();
        c.neighbours(&s, &mut out);
        assert_eq!(c.stay_count(&s) + out.len() as u64, c.pair_count());
    }

    #[test]
    fn single_edge_instance_always_stays() {
        let c = SwitchChainTwo::new(pair("1;1"));
        assert_eq!(c.pair_count(), 1);
        let s = c.arbitrary_state().unwrap();
        assert_eq!(c.stay_probability(&s), 1.0);
        let mut rng = crate::chain::seeded_rng(1, 0);
        assert_eq!(c.propose(&s, &mut rng), None);
    }

    #[test]
    fn loops_are_rarer_in_chain_two() {
        let p = pair("3,2,2,1;2,2,2,2");
        let one = SwitchChainOne::new(p.clone());
        let two = SwitchChainTwo::new(p);
        let s = one.arbitrary_state().unwrap();
        assert!(two.stay_probability(&s) <= one.stay_probability(&s));
    }

    #[test]
    fn proposals_match_neighbour_frequencies() {
        let c = SwitchChainTwo::new(pair("2,2,1;2,2,1"));
        let s = c.arbitrary_state().unwrap();
        let mut out = Vec::new();
        c.neighbours(&s, &mut out);
        let mut rng = crate::chain::seeded_rng(7, 0);
        let trials = 40_000;
        let moved = (0..trials)
            .filter(|_| c.propose(&s, &mut rng).is_some())
            .count();
        let expect = out.len() as f64 * c.kappa;
        let got = moved as f64 / trials as f64;
        assert!((got - expect).abs() < 0.02, "{got} vs {expect}");
    }
}
