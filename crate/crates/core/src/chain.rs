//! The pluggable Markov-chain interface and the random-walk sampler.
//!
//! A chain supplies an arbitrary start state and, for every state, the list
//! of proposals its transition rule can make: one [`Proposal`] per random
//! choice that leads to a different state, with the probability `kappa` of
//! that choice. Choices that resolve to staying put are reported separately
//! by [`MarkovChain::stay_probability`]. An optional weight function turns
//! the proposals into a Metropolis chain with stationary distribution
//! proportional to the weights.

use alloc::vec::Vec;
use core::fmt;
use core::hash::Hash;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chains::{MatchingChainOne, MatchingChainTwo, SwitchChainOne, SwitchChainTwo};
use crate::edge_set::EdgeSet;
use crate::error::{parse_error, Error, Result};
use crate::instances::{parse_instance, Instance};

#[derive(Debug, Clone, PartialEq)]
pub struct Proposal<S> {
    pub target: S,
    pub kappa: f64,
}

impl<S> Proposal<S> {
    pub fn new(target: S, kappa: f64) -> Self {
        debug_assert!(kappa > 0.0 && kappa <= 1.0);
        Proposal { target, kappa }
    }
}

pub trait MarkovChain {
    type State: Clone + Ord + Hash + fmt::Debug + Send + Sync;

    fn arbitrary_state(&self) -> Result<Self::State>;

    /// Appends one proposal per random choice that moves away from `state`.
    /// Several choices may lead to the same target.
    fn neighbours(&self, state: &Self::State, out: &mut Vec<Proposal<Self::State>>);

    /// Total probability of the random choices that keep the chain at `state`.
    fn stay_probability(&self, state: &Self::State) -> f64;

    fn weight(&self, _state: &Self::State) -> Result<f64> {
        Ok(1.0)
    }

    /// Called once with the complete state list after the topology scan, so
    /// that chains whose weights depend on global counts can compute them.
    fn finalize_weights(&mut self, _states: &[Self::State]) -> Result<()> {
        Ok(())
    }

    /// True when every state has weight one.
    fn has_unit_weights(&self) -> bool {
        true
    }

    /// Draws one random choice and returns its target, or `None` when the
    /// choice keeps the chain in place.
    fn propose<R: Rng + ?Sized>(&self, state: &Self::State, rng: &mut R) -> Option<Self::State> {
        let mut buf = Vec::new();
        self.neighbours(state, &mut buf);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for p in buf {
            acc += p.kappa;
            if u < acc {
                return Some(p.target);
            }
        }
        None
    }
}

/// Seeded generator for walk number `stream`: ChaCha8 keyed by `seed`, with
/// the ChaCha stream id selecting an independent sequence per walk.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Simulates `steps` steps: pick a proposal according to its probability,
/// then accept it with probability `min(1, w(y)/w(x))`.
pub fn random_walk<C, R>(chain: &C, start: &C::State, steps: u64, rng: &mut R) -> Result<C::State>
where
    C: MarkovChain,
    R: Rng + ?Sized,
{
    let mut x = start.clone();
    let unit = chain.has_unit_weights();
    let mut wx = if unit { 1.0 } else { chain.weight(&x)? };
    for _ in 0..steps {
        let Some(y) = chain.propose(&x, rng) else {
            continue;
        };
        if unit {
            x = y;
            continue;
        }
        let wy = chain.weight(&y)?;
        if wy >= wx || rng.random::<f64>() < wy / wx {
            x = y;
            wx = wy;
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChainKind {
    Matching1,
    Matching2,
    Switch1,
    Switch2,
}

impl ChainKind {
    pub const ALL: [ChainKind; 4] = [
        ChainKind::Matching1,
        ChainKind::Matching2,
        ChainKind::Switch1,
        ChainKind::Switch2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChainKind::Matching1 => "matching1",
            ChainKind::Matching2 => "matching2",
            ChainKind::Switch1 => "switch1",
            ChainKind::Switch2 => "switch2",
        }
    }

    /// Matching chains take a bipartite graph, switch chains a degree pair.
    pub fn takes_graph(self) -> bool {
        matches!(self, ChainKind::Matching1 | ChainKind::Matching2)
    }
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChainKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| parse_error(0, alloc::format!("unknown chain '{s}'")))
    }
}

/// A chain kind together with a validated instance of the matching payload.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainInstance {
    pub kind: ChainKind,
    pub instance: Instance,
}

impl ChainInstance {
    pub fn parse(kind: ChainKind, text: &str) -> Result<Self> {
        ChainInstance::new(kind, parse_instance(text, kind.takes_graph())?)
    }

    pub fn new(kind: ChainKind, instance: Instance) -> Result<Self> {
        if kind.takes_graph() != matches!(instance, Instance::Graph(_)) {
            return Err(parse_error(
                0,
                alloc::format!(
                    "{kind} needs a {}",
                    if kind.takes_graph() {
                        "bipartite graph"
                    } else {
                        "degree-sequence pair"
                    }
                ),
            ));
        }
        if let Instance::Graph(g) = &instance {
            if g.n_rows() != g.n_cols() {
                return Err(Error::Unsupported {
                    reason: alloc::format!(
                        "matching chains need n = n', got {}+{}",
                        g.n_rows(),
                        g.n_cols()
                    ),
                });
            }
        }
        Ok(ChainInstance { kind, instance })
    }

    pub fn chain(&self) -> AnyChain {
        match (&self.instance, self.kind) {
            (Instance::Graph(g), ChainKind::Matching1) => {
                AnyChain::Matching1(MatchingChainOne::new(g.clone()))
            }
            (Instance::Graph(g), ChainKind::Matching2) => {
                AnyChain::Matching2(MatchingChainTwo::new(g.clone()))
            }
            (Instance::Degrees(p), ChainKind::Switch1) => {
                AnyChain::Switch1(SwitchChainOne::new(p.clone()))
            }
            (Instance::Degrees(p), ChainKind::Switch2) => {
                AnyChain::Switch2(SwitchChainTwo::new(p.clone()))
            }
            _ => unreachable!("payload kind checked on construction"),
        }
    }
}

impl fmt::Display for ChainInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.instance.fmt(f)
    }
}

/// Static dispatch over the four bundled chains.
#[derive(Debug, Clone)]
pub enum AnyChain {
    Matching1(MatchingChainOne),
    Matching2(MatchingChainTwo),
    Switch1(SwitchChainOne),
    Switch2(SwitchChainTwo),
}

macro_rules! dispatch {
    ($self:expr, $c:ident => $body:expr) => {
        match $self {
            AnyChain::Matching1($c) => $body,
            AnyChain::Matching2($c) => $body,
            AnyChain::Switch1($c) => $body,
            AnyChain::Switch2($c) => $body,
        }
    };
}

impl AnyChain {
    pub fn kind(&self) -> ChainKind {
        match self {
            AnyChain::Matching1(_) => ChainKind::Matching1,
            AnyChain::Matching2(_) => ChainKind::Matching2,
            AnyChain::Switch1(_) => ChainKind::Switch1,
            AnyChain::Switch2(_) => ChainKind::Switch2,
        }
    }
}

impl MarkovChain for AnyChain {
    type State = EdgeSet;

    fn arbitrary_state(&self) -> Result<EdgeSet> {
        dispatch!(self, c => c.arbitrary_state())
    }

    fn neighbours(&self, state: &EdgeSet, out: &mut Vec<Proposal<EdgeSet>>) {
        dispatch!(self, c => c.neighbours(state, out))
    }

    fn stay_probability(&self, state: &EdgeSet) -> f64 {
        dispatch!(self, c => c.stay_probability(state))
    }

    fn weight(&self, state: &EdgeSet) -> Result<f64> {
        dispatch!(self, c => c.weight(state))
    }

    fn finalize_weights(&mut self, states: &[EdgeSet]) -> Result<()> {
        dispatch!(self, c => c.finalize_weights(states))
    }

    fn has_unit_weights(&self) -> bool {
        dispatch!(self, c => c.has_unit_weights())
    }

    fn propose<R: Rng + ?Sized>(&self, state: &EdgeSet, rng: &mut R) -> Option<EdgeSet> {
        dispatch!(self, c => c.propose(state, rng))
    }
}
