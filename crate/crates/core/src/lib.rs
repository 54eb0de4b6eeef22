//! Exact analysis of finite Markov chains used for MCMC sampling.
//!
//! The crate builds the explicit state graph of a chain from its transition
//! rules and computes, on that graph, the total mixing time (by dense matrix
//! powering), the spectral bounds, and canonical-path congestion bounds.
//! Four example chains on bipartite graphs are included: two chains on
//! perfect and near-perfect matchings and two switch chains on degree
//! sequence realizations.
//!
//! The crate is `no_std` with `alloc`. The default `std` feature enables
//! data-parallel matrix products, path accumulation and distance statistics
//! through rayon; results are identical with and without it.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod chain;
pub mod chains;
pub mod congestion;
pub mod dense;
pub mod edge_set;
mod error;
pub mod instances;
pub mod lanczos;
pub mod mixing;
mod par;
pub mod spectral;
pub mod state_graph;

pub use chain::{random_walk, seeded_rng, ChainInstance, ChainKind, MarkovChain, Proposal};
pub use congestion::{congestion_bound, BfsScheme, CongestionResult, PathScheme};
pub use edge_set::EdgeSet;
pub use error::{Error, Result};
pub use instances::{BipartiteGraph, DegreeSequencePair, Family};
pub use mixing::{
    mixing_time_naive, total_mixing_time, tv_distance, Distribution, MixingOptions, MixingResult,
    Precision,
};
pub use spectral::{spectral_bounds, symmetrize, SpectralOptions, SpectralResult};
pub use state_graph::{
    build, check_ergodic, graph_stats, loop_reduce, BuildOptions, ErgodicityReport, GraphStats,
    LoopReduction, StateGraph,
};
