//! The per-instance pipeline: build, statistics, τ, spectral and
//! congestion bounds, theoretical bounds.

use chainlab_core::chains::{
    broder_bound, greenhill_bound, matching_canonical_scheme, switch_canonical_scheme,
};
use chainlab_core::instances::Instance;
use chainlab_core::mixing::MixingOptions;
use chainlab_core::state_graph::{distance_stats, structure_stats};
use chainlab_core::{
    build, congestion_bound, spectral_bounds, total_mixing_time, BfsScheme, BuildOptions,
    ChainInstance, ChainKind, CongestionResult, EdgeSet, Error as CoreError, Precision,
    SpectralOptions, StateGraph,
};

use crate::record::AnalysisRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum SchemeChoice {
    #[default]
    Bfs,
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum PrecisionChoice {
    Single,
    #[default]
    Double,
}

impl From<PrecisionChoice> for Precision {
    fn from(p: PrecisionChoice) -> Self {
        match p {
            PrecisionChoice::Single => Precision::Single,
            PrecisionChoice::Double => Precision::Double,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub epsilon: f64,
    /// τ, distances and congestion are computed only up to this many states.
    pub mixing_cap: usize,
    pub build_cap: usize,
    pub scheme: SchemeChoice,
    pub precision: PrecisionChoice,
    pub theory: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            epsilon: 1e-3,
            mixing_cap: 20_000,
            build_cap: BuildOptions::default().cap,
            scheme: SchemeChoice::Bfs,
            precision: PrecisionChoice::Double,
            theory: true,
        }
    }
}

pub struct Analysis {
    pub record: AnalysisRecord,
    pub graph: StateGraph<EdgeSet>,
    pub congestion: Option<CongestionResult>,
}

pub fn build_graph(
    instance: &ChainInstance,
    build_cap: usize,
) -> Result<StateGraph<EdgeSet>, CoreError> {
    let mut chain = instance.chain();
    build(
        &mut chain,
        BuildOptions {
            cap: build_cap,
            ..BuildOptions::default()
        },
    )
}

/// Runs the full pipeline on `instance`.
pub fn analyze(instance: &ChainInstance, opts: &AnalyzeOptions) -> Result<Analysis, CoreError> {
    let graph = build_graph(instance, opts.build_cap)?;
    let (mut record, congestion) = analyze_graph(
        &instance.to_string(),
        instance.kind,
        &graph,
        "original",
        opts,
    )?;
    if opts.theory {
        record.theory_bound = theory_bound(instance, &graph, opts.epsilon);
    }
    Ok(Analysis {
        record,
        graph,
        congestion,
    })
}

/// Statistics and bounds of an already built graph.
pub fn analyze_graph(
    id: &str,
    kind: ChainKind,
    g: &StateGraph<EdgeSet>,
    variant: &str,
    opts: &AnalyzeOptions,
) -> Result<(AnalysisRecord, Option<CongestionResult>), CoreError> {
    let clock = std::time::Instant::now();
    let mut stats = structure_stats(g);
    let small = g.n_states() <= opts.mixing_cap;
    if small {
        let (d, avg) = distance_stats(g)?;
        stats.diameter = Some(d);
        stats.avg_path_length = Some(avg);
    }

    log::debug!("{id}: distances after {:.2?}", clock.elapsed());
    let tau = if small {
        let mix = MixingOptions {
            precision: opts.precision.into(),
            cap: opts.mixing_cap,
            ..MixingOptions::default()
        };
        let r = total_mixing_time(g, opts.epsilon, &mix)?;
        if r.capped {
            log::warn!("{id}: doubling limit reached before epsilon, tau omitted");
            None
        } else {
            Some(r.tau as f64)
        }
    } else {
        log::info!(
            "{id}: {} states exceed the mixing cap, tau skipped",
            g.n_states()
        );
        None
    };

    log::debug!("{id}: tau after {:.2?}", clock.elapsed());
    let spectral = spectral_bounds(g, opts.epsilon, &SpectralOptions::default())?;
    log::debug!("{id}: spectral after {:.2?}", clock.elapsed());

    let (scheme, congestion) = if small {
        let c = match (opts.scheme, kind.takes_graph()) {
            (SchemeChoice::Bfs, _) => congestion_bound(g, &BfsScheme, opts.epsilon)?,
            (SchemeChoice::Canonical, true) => {
                congestion_bound(g, &matching_canonical_scheme(), opts.epsilon)?
            }
            (SchemeChoice::Canonical, false) => {
                congestion_bound(g, &switch_canonical_scheme(), opts.epsilon)?
            }
        };
        let name = match opts.scheme {
            SchemeChoice::Bfs => "bfs",
            SchemeChoice::Canonical => "canonical",
        };
        (Some(name.to_string()), Some(c))
    } else {
        (None, None)
    };

    log::debug!("{id}: congestion after {:.2?}", clock.elapsed());
    let record = AnalysisRecord {
        instance_id: id.to_string(),
        chain: kind,
        variant: variant.to_string(),
        n_states: stats.n_states,
        n_arcs: stats.n_arcs,
        avg_degree: stats.avg_degree,
        avg_loop_prob: stats.avg_loop_prob,
        pi_min: stats.pi_min,
        diameter: stats.diameter,
        avg_path_length: stats.avg_path_length,
        lambda2: Some(spectral.lambda2),
        lambda_min: Some(spectral.lambda_min),
        lambda_max_mag: Some(spectral.lambda_max_mag),
        tau,
        tau_predicted: false,
        lower_spectral: Some(spectral.lower_bound),
        upper_spectral: Some(spectral.upper_bound),
        scheme,
        congestion_rho: congestion.as_ref().map(|c| c.rho),
        congestion_bound: congestion.as_ref().map(|c| c.bound),
        path_length_max: congestion.as_ref().map(|c| c.path_length_max),
        theory_bound: None,
        epsilon: opts.epsilon,
    };
    if !record.sandwich_holds() {
        log::error!("{id} ({variant}): bound sandwich violated: {:?}", record);
    }
    Ok((record, congestion))
}

/// Published worst-case bound of the chain, where one applies.
pub fn theory_bound(
    instance: &ChainInstance,
    g: &StateGraph<EdgeSet>,
    epsilon: f64,
) -> Option<f64> {
    match (&instance.instance, instance.kind) {
        (Instance::Graph(graph), ChainKind::Matching1) => {
            let n = graph.n_rows();
            let perfect = g.states().iter().filter(|s| s.len() == n).count() as u64;
            let near = g.n_states() as u64 - perfect;
            (perfect > 0).then(|| {
                broder_bound(
                    graph.edge_count() as u64,
                    near,
                    perfect,
                    g.n_states() as u64,
                    epsilon,
                )
            })
        }
        (Instance::Degrees(p), ChainKind::Switch1) => {
            greenhill_bound(p.max_degree(), p.edge_count() as u64, epsilon)
        }
        _ => None,
    }
}
