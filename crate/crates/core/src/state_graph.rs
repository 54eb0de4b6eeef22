//! Explicit state graphs: full scan of a chain's state space, transition
//! probabilities, stationary distribution, ergodicity checks, loop
//! reduction and structural statistics.
//!
//! Non-loop arcs are kept in CSR form, sorted by target within each source.
//! The loop at every state is stored separately as `diag` (its transition
//! probability) and `stay` (the chain's own stay probability).

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::hash::Hash;

use hashbrown::{HashMap, HashSet};

use crate::chain::{MarkovChain, Proposal};
use crate::error::{Error, Result};
use crate::mixing::Distribution;
use crate::par;

/// Tolerance for row sums, detailed balance and diagonal recomputation.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub target: u32,
    pub kappa: f64,
    pub prob: f64,
}

#[derive(Debug, Clone)]
pub struct StateGraph<S> {
    states: Vec<S>,
    index: HashMap<S, u32>,
    offsets: Vec<usize>,
    arcs: Vec<Arc>,
    diag: Vec<f64>,
    stay: Vec<f64>,
    weights: Vec<f64>,
    pi: Distribution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Largest number of states the scan may discover.
    pub cap: usize,
    /// Run [`check_ergodic`] after construction.
    pub check: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            cap: 1_000_000,
            check: true,
        }
    }
}

/// Aggregates proposals per distinct target, in canonical target order.
fn aggregate<S: Ord>(mut props: Vec<Proposal<S>>) -> Vec<Proposal<S>> {
    props.sort_by(|a, b| a.target.cmp(&b.target));
    let mut out: Vec<Proposal<S>> = Vec::with_capacity(props.len());
    for p in props {
        match out.last_mut() {
            Some(last) if last.target == p.target => last.kappa += p.kappa,
            _ => out.push(p),
        }
    }
    out
}

/// Discovers the state space breadth-first from the chain's arbitrary state.
/// States of each new level are indexed in canonical order.
fn scan<C: MarkovChain>(chain: &C, cap: usize) -> Result<Vec<C::State>> {
    let start = chain.arbitrary_state()?;
    let mut seen: HashSet<C::State> = HashSet::new();
    seen.insert(start.clone());
    let mut states = vec![start];
    let mut level_start = 0;
    let mut buf = Vec::new();
    while level_start < states.len() {
        let level_end = states.len();
        let mut next = Vec::new();
        for u in level_start..level_end {
            buf.clear();
            chain.neighbours(&states[u], &mut buf);
            for p in buf.drain(..) {
                if !seen.contains(&p.target) {
                    seen.insert(p.target.clone());
                    next.push(p.target);
                    if seen.len() > cap {
                        return Err(Error::SizeCapExceeded { cap });
                    }
                }
            }
        }
        next.sort();
        states.extend(next);
        level_start = level_end;
    }
    Ok(states)
}

/// Builds the state graph of `chain` by a full scan. Weights are finalized
/// from the complete state list before any probability is computed.
pub fn build<C>(chain: &mut C, opts: BuildOptions) -> Result<StateGraph<C::State>>
where
    C: MarkovChain + Sync,
{
    let states = scan(chain, opts.cap)?;
    chain.finalize_weights(&states)?;
    let chain: &C = chain;
    let n = states.len();
    let mut index: HashMap<C::State, u32> = HashMap::with_capacity(n);
    for (i, s) in states.iter().enumerate() {
        index.insert(s.clone(), i as u32);
    }
    let weights = if chain.has_unit_weights() {
        vec![1.0; n]
    } else {
        states
            .iter()
            .map(|s| chain.weight(s))
            .collect::<Result<Vec<_>>>()?
    };

    struct Row {
        arcs: Vec<Arc>,
        diag: f64,
        stay: f64,
        diag_check: f64,
    }
    let rows = par::map_indices(n, |u| {
        let mut buf = Vec::new();
        chain.neighbours(&states[u], &mut buf);
        let wu = weights[u];
        let mut arcs: Vec<Arc> = aggregate(buf)
            .into_iter()
            .map(|p| {
                let v = index[&p.target];
                let accept = (weights[v as usize] / wu).min(1.0);
                Arc {
                    target: v,
                    kappa: p.kappa,
                    prob: p.kappa * accept,
                }
            })
            .collect();
        arcs.sort_by_key(|a| a.target);
        let stay = chain.stay_probability(&states[u]);
        let off: f64 = arcs.iter().map(|a| a.prob).sum();
        let rejected: f64 = arcs.iter().map(|a| a.kappa - a.prob).sum();
        Row {
            arcs,
            diag: 1.0 - off,
            stay,
            diag_check: stay + rejected,
        }
    });

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let total: usize = rows.iter().map(|r| r.arcs.len()).sum();
    let mut arcs = Vec::with_capacity(total);
    let mut diag = Vec::with_capacity(n);
    let mut stay = Vec::with_capacity(n);
    let mut worst = 0.0f64;
    for r in rows {
        worst = worst.max((r.diag - r.diag_check).abs());
        arcs.extend(r.arcs);
        offsets.push(arcs.len());
        diag.push(r.diag);
        stay.push(r.stay);
    }
    if worst > TOLERANCE {
        return Err(Error::NumericalDrift { deviation: worst });
    }
    let pi = Distribution::from_weights(&weights)?;
    let g = StateGraph {
        states,
        index,
        offsets,
        arcs,
        diag,
        stay,
        weights,
        pi,
    };
    if opts.check {
        let report = check_ergodic(&g);
        if !report.is_ergodic() {
            return Err(Error::NotErgodic(report));
        }
    }
    Ok(g)
}

impl<S: Clone + Eq + Hash> StateGraph<S> {
    /// Graph of an explicit transition matrix given as sparse rows
    /// `(column, probability)`, diagonal entries included. Every proposal
    /// probability is taken equal to the transition probability.
    pub fn from_matrix(
        states: Vec<S>,
        rows: &[Vec<(usize, f64)>],
        weights: Vec<f64>,
    ) -> Result<Self> {
        let n = states.len();
        if rows.len() != n || weights.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: rows.len().min(weights.len()),
            });
        }
        let mut index = HashMap::with_capacity(n);
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.clone(), i as u32).is_some() {
                return Err(Error::InvalidDistribution {
                    reason: format!("duplicate state at index {i}"),
                });
            }
        }
        let mut offsets = vec![0];
        let mut arcs = Vec::new();
        let mut diag = vec![0.0; n];
        for (u, row) in rows.iter().enumerate() {
            let mut row_arcs: Vec<Arc> = Vec::new();
            let mut sum = 0.0;
            for &(v, p) in row {
                if v >= n || !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidDistribution {
                        reason: format!("bad entry ({u}, {v}) = {p}"),
                    });
                }
                sum += p;
                if v == u {
                    diag[u] += p;
                } else if p > 0.0 {
                    row_arcs.push(Arc {
                        target: v as u32,
                        kappa: p,
                        prob: p,
                    });
                }
            }
            if (sum - 1.0).abs() > TOLERANCE {
                return Err(Error::InvalidDistribution {
                    reason: format!("row {u} sums to {sum}"),
                });
            }
            row_arcs.sort_by_key(|a| a.target);
            arcs.extend(row_arcs);
            offsets.push(arcs.len());
        }
        let pi = Distribution::from_weights(&weights)?;
        Ok(StateGraph {
            states,
            index,
            offsets,
            arcs,
            stay: diag.clone(),
            diag,
            weights,
            pi,
        })
    }

    pub fn index_of(&self, state: &S) -> Option<usize> {
        self.index.get(state).map(|&i| i as usize)
    }
}

impl<S> StateGraph<S> {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Number of non-loop arcs.
    pub fn n_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &S {
        &self.states[i]
    }

    /// Non-loop arcs leaving `u`, sorted by target.
    pub fn arcs(&self, u: usize) -> &[Arc] {
        &self.arcs[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Global index of the first arc of `u`; arcs of `u` occupy
    /// `arc_offset(u)..arc_offset(u + 1)`.
    pub fn arc_offset(&self, u: usize) -> usize {
        self.offsets[u]
    }

    pub fn arc(&self, idx: usize) -> &Arc {
        &self.arcs[idx]
    }

    /// Source state of the arc with global index `idx`.
    pub fn arc_source(&self, idx: usize) -> usize {
        self.offsets.partition_point(|&o| o <= idx) - 1
    }

    /// Global index of the arc `u → v`, if present.
    pub fn arc_index(&self, u: usize, v: usize) -> Option<usize> {
        let arcs = self.arcs(u);
        arcs.binary_search_by_key(&(v as u32), |a| a.target)
            .ok()
            .map(|k| self.offsets[u] + k)
    }

    /// Loop probability `P(u,u)`.
    pub fn diag(&self, u: usize) -> f64 {
        self.diag[u]
    }

    /// Probability of the chain's own stay choices at `u`.
    pub fn stay(&self, u: usize) -> f64 {
        self.stay[u]
    }

    /// Transition probability `P(u,v)`.
    pub fn transition(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return self.diag[u];
        }
        self.arc_index(u, v).map_or(0.0, |i| self.arcs[i].prob)
    }

    pub fn row_sum(&self, u: usize) -> f64 {
        self.diag[u] + self.arcs(u).iter().map(|a| a.prob).sum::<f64>()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pi(&self) -> &Distribution {
        &self.pi
    }

    pub fn pi_min(&self) -> f64 {
        self.pi.min()
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.n_states() as f64;
        self.pi.probs().iter().all(|&p| (p - u).abs() <= TOLERANCE)
    }

    /// Every non-loop arc with positive probability as `(source, arc)`.
    pub fn positive_arcs(&self) -> impl Iterator<Item = (usize, &Arc)> + '_ {
        (0..self.n_states()).flat_map(move |u| {
            self.arcs(u)
                .iter()
                .filter(|a| a.prob > 0.0)
                .map(move |a| (u, a))
        })
    }

    /// Dense row-major transition matrix.
    pub fn dense_rows(&self) -> Vec<f64> {
        let n = self.n_states();
        let mut m = vec![0.0; n * n];
        for u in 0..n {
            m[u * n + u] = self.diag[u];
            for a in self.arcs(u) {
                m[u * n + a.target as usize] = a.prob;
            }
        }
        m
    }
}

/// Outcome of [`check_ergodic`], naming each condition separately.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityReport {
    pub connected: bool,
    /// Period of the chain when connected; 1 means aperiodic.
    pub period: u64,
    pub max_reversibility_defect: f64,
}

impl ErgodicityReport {
    pub fn aperiodic(&self) -> bool {
        self.period == 1
    }

    pub fn reversible(&self) -> bool {
        self.max_reversibility_defect <= TOLERANCE
    }

    pub fn is_ergodic(&self) -> bool {
        self.connected && self.aperiodic() && self.reversible()
    }
}

impl fmt::Display for ErgodicityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ergodic() {
            return f.write_str("ergodic");
        }
        let mut sep = "";
        if !self.connected {
            f.write_str("not strongly connected")?;
            sep = "; ";
        }
        if self.connected && !self.aperiodic() {
            write!(f, "{sep}periodic with period {}", self.period)?;
            sep = "; ";
        }
        if !self.reversible() {
            write!(
                f,
                "{sep}not reversible (defect {:e})",
                self.max_reversibility_defect
            )?;
        }
        Ok(())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// BFS levels from `root` over positive arcs, `u32::MAX` for unreached.
fn bfs_levels<S>(g: &StateGraph<S>, root: usize) -> Vec<u32> {
    let mut level = vec![u32::MAX; g.n_states()];
    let mut queue = VecDeque::new();
    level[root] = 0;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        for a in g.arcs(u) {
            let v = a.target as usize;
            if a.prob > 0.0 && level[v] == u32::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    level
}

fn reaches_all_reversed<S>(g: &StateGraph<S>) -> bool {
    let n = g.n_states();
    let mut rev_off = vec![0usize; n + 1];
    for (_, a) in g.positive_arcs() {
        rev_off[a.target as usize + 1] += 1;
    }
    for i in 0..n {
        rev_off[i + 1] += rev_off[i];
    }
    let mut fill = rev_off.clone();
    let mut rev = vec![0u32; rev_off[n]];
    for (u, a) in g.positive_arcs() {
        let t = a.target as usize;
        rev[fill[t]] = u as u32;
        fill[t] += 1;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &u in &rev[rev_off[v]..rev_off[v + 1]] {
            if !seen[u as usize] {
                seen[u as usize] = true;
                count += 1;
                stack.push(u as usize);
            }
        }
    }
    count == n
}

/// Checks strong connectivity, aperiodicity and detailed balance.
pub fn check_ergodic<S>(g: &StateGraph<S>) -> ErgodicityReport {
    let n = g.n_states();
    let level = bfs_levels(g, 0);
    let connected = level.iter().all(|&l| l != u32::MAX) && reaches_all_reversed(g);
    let period = if !connected {
        0
    } else if g.diag.iter().any(|&d| d > 0.0) {
        1
    } else {
        let mut p = 0;
        for (u, a) in g.positive_arcs() {
            let diff = i64::from(level[u]) + 1 - i64::from(level[a.target as usize]);
            p = gcd(p, diff.unsigned_abs());
        }
        if n == 1 {
            1
        } else {
            p
        }
    };
    let pi = g.pi.probs();
    let mut defect = 0.0f64;
    for u in 0..n {
        for a in g.arcs(u) {
            let v = a.target as usize;
            let back = g.transition(v, u);
            defect = defect.max((pi[u] * a.prob - pi[v] * back).abs());
        }
    }
    ErgodicityReport {
        connected,
        period,
        max_reversibility_defect: defect,
    }
}

/// Result of [`loop_reduce`].
#[derive(Debug, Clone)]
pub struct LoopReduction<S> {
    pub graph: StateGraph<S>,
    /// Amount `c` subtracted from every diagonal entry before rescaling.
    pub c: f64,
    /// True when the smallest loop probability is zero, so nothing changed.
    pub identity: bool,
}

/// Rescales the chain to `(P − cI) / (1 − c)` with `c = fraction · min P(i,i)`.
/// Requires a uniform stationary distribution.
pub fn loop_reduce<S: Clone>(g: &StateGraph<S>, fraction: f64) -> Result<LoopReduction<S>> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidFraction(fraction));
    }
    if !g.is_uniform() {
        return Err(Error::NotUniform);
    }
    let min_loop = g.diag.iter().copied().fold(f64::INFINITY, f64::min);
    if min_loop <= 0.0 {
        return Ok(LoopReduction {
            graph: g.clone(),
            c: 0.0,
            identity: true,
        });
    }
    let c = fraction * min_loop;
    let scale = 1.0 - c;
    let mut out = g.clone();
    for a in &mut out.arcs {
        a.prob /= scale;
        a.kappa /= scale;
    }
    for u in 0..out.n_states() {
        let off: f64 = out.arcs(u).iter().map(|a| a.prob).sum();
        out.diag[u] = 1.0 - off;
        out.stay[u] = (g.stay[u] - c).max(0.0) / scale;
    }
    Ok(LoopReduction {
        graph: out,
        c,
        identity: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub n_states: usize,
    pub n_arcs: usize,
    /// `None` when distances were not computed.
    pub diameter: Option<u32>,
    pub avg_path_length: Option<f64>,
    pub avg_degree: f64,
    pub avg_loop_prob: f64,
    pub pi_min: f64,
}

/// Counts, degrees and loop probabilities, without distances.
pub fn structure_stats<S>(g: &StateGraph<S>) -> GraphStats {
    let n = g.n_states();
    GraphStats {
        n_states: n,
        n_arcs: g.n_arcs(),
        diameter: None,
        avg_path_length: None,
        avg_degree: g.n_arcs() as f64 / n as f64,
        avg_loop_prob: g.diag.iter().sum::<f64>() / n as f64,
        pi_min: g.pi_min(),
    }
}

/// Diameter and mean distance over ordered pairs of distinct states, by
/// BFS on non-loop arcs from every state.
pub fn distance_stats<S: Sync>(g: &StateGraph<S>) -> Result<(u32, f64)> {
    let n = g.n_states();
    if n < 2 {
        return Ok((0, 0.0));
    }
    let per_source = par::map_indices(n, |s| {
        let level = bfs_levels(g, s);
        let mut max = 0u32;
        let mut sum = 0u64;
        for (t, &l) in level.iter().enumerate() {
            if l == u32::MAX {
                return Err(Error::Unreachable { from: s, to: t });
            }
            max = max.max(l);
            sum += u64::from(l);
        }
        Ok((max, sum))
    });
    let mut diameter = 0;
    let mut total = 0u64;
    for r in per_source {
        let (m, s) = r?;
        diameter = diameter.max(m);
        total += s;
    }
    Ok((diameter, total as f64 / (n as f64 * (n - 1) as f64)))
}

/// All statistics, including the all-pairs distances.
pub fn graph_stats<S: Sync>(g: &StateGraph<S>) -> Result<GraphStats> {
    let mut stats = structure_stats(g);
    let (d, avg) = distance_stats(g)?;
    stats.diameter = Some(d);
    stats.avg_path_length = Some(avg);
    Ok(stats)
}
