//! Canonical-path congestion bounds.
//!
//! A path scheme fixes one simple path `p_xy` for every ordered pair of
//! distinct states. Each pair deposits `π(x)π(y)|p_xy|` on every arc of its
//! path; the congestion `ρ` is the largest ratio of load to `π(u)P(u,v)`
//! and `τ(ε) ≤ ρ (ln ε⁻¹ + ln π_min⁻¹)`.
//!
//! Work is split by target state. Per-target loads are merged in target
//! order, so results do not depend on the number of workers.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::par;
use crate::state_graph::StateGraph;

/// Positive-probability arcs reversed, in CSR form.
#[derive(Debug, Clone)]
pub struct ReverseArcs {
    offsets: Vec<usize>,
    sources: Vec<u32>,
}

impl ReverseArcs {
    pub fn new<S>(g: &StateGraph<S>) -> Self {
        let n = g.n_states();
        let mut offsets = vec![0usize; n + 1];
        for (_, a) in g.positive_arcs() {
            offsets[a.target as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut sources = vec![0u32; offsets[n]];
        for (u, a) in g.positive_arcs() {
            let t = a.target as usize;
            sources[fill[t]] = u as u32;
            fill[t] += 1;
        }
        ReverseArcs { offsets, sources }
    }

    fn into(&self, v: usize) -> &[u32] {
        &self.sources[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Hop distances from every state to one target.
#[derive(Debug, Clone)]
pub struct DistanceField {
    target: usize,
    dist: Vec<u32>,
}

impl DistanceField {
    pub const UNREACHED: u32 = u32::MAX;

    pub fn towards(rev: &ReverseArcs, n: usize, target: usize) -> Self {
        let mut dist = vec![Self::UNREACHED; n];
        dist[target] = 0;
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            for &u in rev.into(v) {
                let u = u as usize;
                if dist[u] == Self::UNREACHED {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        DistanceField { target, dist }
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn dist(&self, u: usize) -> u32 {
        self.dist[u]
    }

    /// Neighbour of `u` one hop closer to the target with the smallest
    /// index, or `None` at the target or when unreachable.
    pub fn next_hop<S>(&self, g: &StateGraph<S>, u: usize) -> Option<usize> {
        let d = self.dist[u];
        if d == 0 || d == Self::UNREACHED {
            return None;
        }
        g.arcs(u)
            .iter()
            .find(|a| a.prob > 0.0 && self.dist[a.target as usize] == d - 1)
            .map(|a| a.target as usize)
    }

    /// Appends the descent from `u` to the target, excluding `u` itself.
    pub fn descend<S>(&self, g: &StateGraph<S>, mut u: usize, out: &mut Vec<usize>) -> Result<()> {
        if self.dist[u] == Self::UNREACHED {
            return Err(Error::Unreachable {
                from: u,
                to: self.target,
            });
        }
        while let Some(v) = self.next_hop(g, u) {
            out.push(v);
            u = v;
        }
        Ok(())
    }
}

/// Loads deposited by all paths into one target.
#[derive(Debug, Clone, Default)]
pub struct TargetLoads {
    /// `(global arc index, load)`; an arc may appear more than once.
    pub entries: Vec<(u32, f64)>,
    /// `Σ_x π(x)π(y)|p_xy|²`, the deposited total computed per path.
    pub mass: f64,
    pub max_len: usize,
}

pub trait PathScheme<S>: Sync {
    fn name(&self) -> &str;

    /// Appends to `out` the states of a simple path from `from` to the
    /// field's target, both endpoints included.
    fn path(
        &self,
        g: &StateGraph<S>,
        field: &DistanceField,
        from: usize,
        out: &mut Vec<usize>,
    ) -> Result<()>;

    /// Path from `from` to `to` as global arc indices, validated.
    fn build_path(&self, g: &StateGraph<S>, from: usize, to: usize) -> Result<Vec<usize>> {
        let field = DistanceField::towards(&ReverseArcs::new(g), g.n_states(), to);
        let mut states = Vec::new();
        let mut seen = vec![u32::MAX; g.n_states()];
        path_arcs(self, g, &field, from, &mut states, &mut seen, 0)
    }

    /// Deposits the loads of all paths into `field.target()`.
    fn accumulate(
        &self,
        g: &StateGraph<S>,
        field: &DistanceField,
        loads: &mut TargetLoads,
    ) -> Result<()> {
        let pi = g.pi().probs();
        let y = field.target();
        let mut states = Vec::new();
        let mut seen = vec![u32::MAX; g.n_states()];
        for x in 0..g.n_states() {
            if x == y {
                continue;
            }
            let arcs = path_arcs(self, g, field, x, &mut states, &mut seen, x as u32)?;
            let len = arcs.len() as f64;
            let w = pi[x] * pi[y] * len;
            loads.mass += w * len;
            loads.max_len = loads.max_len.max(arcs.len());
            loads
                .entries
                .extend(arcs.into_iter().map(|a| (a as u32, w)));
        }
        Ok(())
    }
}

/// Runs the scheme and checks the path: right endpoints, existing
/// positive arcs, no repeated state. `seen` is a stamp array reused across
/// calls with distinct `stamp` values.
fn path_arcs<S, P: PathScheme<S> + ?Sized>(
    scheme: &P,
    g: &StateGraph<S>,
    field: &DistanceField,
    from: usize,
    states: &mut Vec<usize>,
    seen: &mut [u32],
    stamp: u32,
) -> Result<Vec<usize>> {
    let to = field.target();
    let invalid = |reason: alloc::string::String| Error::SchemePathInvalid { from, to, reason };
    if from == to {
        return Err(invalid("endpoints coincide".into()));
    }
    states.clear();
    scheme.path(g, field, from, states)?;
    if states.first() != Some(&from) || states.last() != Some(&to) {
        return Err(invalid("wrong endpoints".into()));
    }
    let mut arcs = Vec::with_capacity(states.len() - 1);
    for (i, w) in states.windows(2).enumerate() {
        let (u, v) = (w[0], w[1]);
        if seen[u] == stamp {
            return Err(invalid(format!("state {u} repeats")));
        }
        seen[u] = stamp;
        match g.arc_index(u, v) {
            Some(a) if g.arc(a).prob > 0.0 => arcs.push(a),
            _ => return Err(invalid(format!("step {i} ({u} -> {v}) is not an arc"))),
        }
    }
    if seen[to] == stamp {
        return Err(invalid(format!("state {to} repeats")));
    }
    // clear stamps so the array can be reused with the same stamp
    for &s in states.iter() {
        seen[s] = u32::MAX;
    }
    Ok(arcs)
}

/// Shortest paths by BFS on non-loop arcs, ties broken towards the
/// smallest next state index.
#[derive(Debug, Clone, Copy, Default)]
pub struct BfsScheme;

impl<S: Sync> PathScheme<S> for BfsScheme {
    fn name(&self) -> &str {
        "bfs"
    }

    fn path(
        &self,
        g: &StateGraph<S>,
        field: &DistanceField,
        from: usize,
        out: &mut Vec<usize>,
    ) -> Result<()> {
        out.push(from);
        field.descend(g, from, out)
    }

    /// The paths into one target form a tree, so the load of each tree arc
    /// is the total weight of the subtree hanging below it.
    fn accumulate(
        &self,
        g: &StateGraph<S>,
        field: &DistanceField,
        loads: &mut TargetLoads,
    ) -> Result<()> {
        let n = g.n_states();
        let pi = g.pi().probs();
        let y = field.target();
        let mut order: Vec<usize> = (0..n).filter(|&x| x != y).collect();
        if let Some(&x) = order
            .iter()
            .find(|&&x| field.dist(x) == DistanceField::UNREACHED)
        {
            return Err(Error::Unreachable { from: x, to: y });
        }
        order.sort_by_key(|&x| core::cmp::Reverse(field.dist(x)));
        let mut subtree = vec![0.0f64; n];
        for &x in &order {
            let len = field.dist(x) as f64;
            let w = pi[x] * pi[y] * len;
            loads.mass += w * len;
            loads.max_len = loads.max_len.max(field.dist(x) as usize);
            subtree[x] += w;
            let v = field
                .next_hop(g, x)
                .expect("reachable state has a next hop");
            let arc = g.arc_index(x, v).expect("next hop is an arc");
            loads.entries.push((arc as u32, subtree[x]));
            subtree[v] += subtree[x];
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CongestionResult {
    pub rho: f64,
    pub bound: f64,
    /// Arc `(u, v)` attaining `ρ`; `None` for a single-state graph.
    pub bottleneck_arc: Option<(usize, usize)>,
    pub path_length_max: usize,
    /// Load per global arc index.
    pub loads: Vec<f64>,
    /// `Σ_x,y π(x)π(y)|p_xy|²` summed path by path.
    pub total_mass: f64,
}

impl CongestionResult {
    pub fn total_load(&self) -> f64 {
        self.loads.iter().sum()
    }
}

/// Targets processed per parallel wave.
const WAVE: usize = 64;

pub fn congestion_bound<S, P>(
    g: &StateGraph<S>,
    scheme: &P,
    epsilon: f64,
) -> Result<CongestionResult>
where
    S: Sync,
    P: PathScheme<S> + ?Sized,
{
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let n = g.n_states();
    let mut loads = vec![0.0f64; g.n_arcs()];
    let mut total_mass = 0.0;
    let mut path_length_max = 0;
    let rev = ReverseArcs::new(g);
    for wave in (0..n).step_by(WAVE) {
        let end = (wave + WAVE).min(n);
        let parts = par::map_indices(end - wave, |i| {
            let field = DistanceField::towards(&rev, n, wave + i);
            let mut t = TargetLoads::default();
            scheme.accumulate(g, &field, &mut t).map(|_| t)
        });
        for part in parts {
            let t = part?;
            for (a, w) in t.entries {
                loads[a as usize] += w;
            }
            total_mass += t.mass;
            path_length_max = path_length_max.max(t.max_len);
        }
    }
    let pi = g.pi().probs();
    let mut rho = 0.0;
    let mut bottleneck = None;
    for u in 0..n {
        let base = g.arc_offset(u);
        for (k, a) in g.arcs(u).iter().enumerate() {
            let load = loads[base + k];
            if load == 0.0 {
                continue;
            }
            let ratio = load / (pi[u] * a.prob);
            if ratio > rho {
                rho = ratio;
                bottleneck = Some((u, a.target as usize));
            }
        }
    }
    let bound = if n == 1 {
        0.0
    } else {
        rho * (Float::ln(1.0 / epsilon) + Float::ln(1.0 / g.pi_min()))
    };
    Ok(CongestionResult {
        rho,
        bound,
        bottleneck_arc: bottleneck,
        path_length_max,
        loads,
        total_mass,
    })
}
