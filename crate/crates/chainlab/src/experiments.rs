//! The batch experiments behind the `enumerate`, `scale`, `loop-reduce`
//! and `walk` commands.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chainlab_core::chain::AnyChain;
use chainlab_core::instances::{enumerate_pairs, scaling_family, Instance};
use chainlab_core::{
    build, loop_reduce, random_walk, seeded_rng, BuildOptions, ChainInstance, ChainKind, EdgeSet,
    Error as CoreError, Family, MarkovChain,
};
use rayon::prelude::*;

use crate::analysis::{analyze, analyze_graph, build_graph, theory_bound, AnalyzeOptions};
use crate::error::{CliError, Result};
use crate::fit::LinearFit;
use crate::io::read_graph_file;
use crate::journal::Journal;
use crate::record::{AnalysisRecord, RecordWriter};

/// Where the instances of a batch run come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Pairs { max_rows: usize, max_cols: usize },
    File(PathBuf),
}

/// Instances of `kind` drawn from `source`, in source order.
pub fn instances(kind: ChainKind, source: &Source) -> Result<Vec<ChainInstance>> {
    match source {
        Source::Pairs { max_rows, max_cols } => {
            if kind.takes_graph() {
                return Err(CliError::Usage(format!(
                    "{kind} needs --file with bipartite graphs"
                )));
            }
            enumerate_pairs(*max_rows, *max_cols)
                .map(|p| ChainInstance::new(kind, Instance::Degrees(p)).map_err(CliError::from))
                .collect()
        }
        Source::File(path) => {
            if !kind.takes_graph() {
                return Err(CliError::Usage(format!(
                    "{kind} enumerates degree pairs, not a graph file"
                )));
            }
            let mut out = Vec::new();
            for g in read_graph_file(path)? {
                let id = g.adjacency().encode();
                match ChainInstance::new(kind, Instance::Graph(g)) {
                    Ok(inst) => out.push(inst),
                    Err(e) => log::warn!("{id}: skipped: {e}"),
                }
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    /// Rows written in this run, in output order.
    pub records: Vec<AnalysisRecord>,
    /// Instances that produced no rows on purpose.
    pub skipped: Vec<String>,
    pub failed: Vec<(String, CoreError)>,
    /// Instances already in the journal.
    pub resumed: usize,
}

/// Outcome of one instance: rows, a deliberate skip, or a failure.
pub enum Outcome {
    Rows(Vec<AnalysisRecord>),
    Skip(String),
}

/// Output target of a batch run; `None` writes to stdout without a journal.
#[derive(Debug, Clone, Default)]
pub struct Sink {
    pub out: Option<PathBuf>,
    pub resume: bool,
}

type Output = (RecordWriter<Box<dyn Write>>, Option<Journal>);

fn open_output(sink: &Sink) -> Result<Output> {
    let Some(path) = &sink.out else {
        let w: Box<dyn Write> = Box::new(io::stdout().lock());
        return Ok((RecordWriter::new(w, true)?, None));
    };
    let append = sink.resume && path.metadata().is_ok_and(|m| m.len() > 0);
    let file = if append {
        OpenOptions::new().append(true).open(path)
    } else {
        File::create(path)
    }
    .map_err(|e| CliError::io(path, e))?;
    let w: Box<dyn Write> = Box::new(BufWriter::new(file));
    Ok((
        RecordWriter::new(w, !append)?,
        Some(Journal::open(path, sink.resume)?),
    ))
}

/// Processes `instances` in parallel batches and writes the rows in input
/// order. Per-instance failures are logged and the run continues.
pub fn run_batch<F>(instances: &[ChainInstance], sink: &Sink, per: F) -> Result<RunSummary>
where
    F: Fn(&ChainInstance) -> std::result::Result<Outcome, CoreError> + Sync,
{
    let (mut writer, mut journal) = open_output(sink)?;
    let mut summary = RunSummary::default();
    let todo: Vec<(&ChainInstance, String)> = instances
        .iter()
        .map(|i| (i, i.to_string()))
        .filter(|(_, id)| {
            let done = journal.as_ref().is_some_and(|j| j.is_done(id));
            summary.resumed += usize::from(done);
            !done
        })
        .collect();
    let batch = (rayon::current_num_threads() * 4).max(8);
    for chunk in todo.chunks(batch) {
        let results: Vec<_> = chunk.par_iter().map(|(inst, _)| per(inst)).collect();
        for ((_, id), result) in chunk.iter().zip(results) {
            match result {
                Ok(Outcome::Rows(rows)) => {
                    for r in &rows {
                        writer.write(r)?;
                    }
                    summary.records.extend(rows);
                }
                Ok(Outcome::Skip(reason)) => {
                    log::info!("{id}: skipped: {reason}");
                    summary.skipped.push(id.clone());
                }
                Err(e) => {
                    log::error!("{id}: {e}");
                    summary.failed.push((id.clone(), e));
                }
            }
            if let Some(j) = journal.as_mut() {
                writer
                    .flush()
                    .map_err(|e| CliError::io(sink.out.clone().unwrap_or_default(), e))?;
                j.mark(id)?;
            }
        }
    }
    writer
        .flush()
        .map_err(|e| CliError::io(sink.out.clone().unwrap_or_default(), e))?;
    Ok(summary)
}

pub fn enumerate(
    instances: &[ChainInstance],
    opts: &AnalyzeOptions,
    sink: &Sink,
) -> Result<RunSummary> {
    run_batch(instances, sink, |inst| {
        Ok(Outcome::Rows(vec![analyze(inst, opts)?.record]))
    })
}

/// Paired rows per instance: the original chain and its loop-reduced form.
pub fn loop_reduction(
    instances: &[ChainInstance],
    fraction: f64,
    opts: &AnalyzeOptions,
    sink: &Sink,
) -> Result<RunSummary> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(CoreError::InvalidFraction(fraction).into());
    }
    run_batch(instances, sink, |inst| {
        let g = build_graph(inst, opts.build_cap)?;
        let reduced = match loop_reduce(&g, fraction) {
            Ok(r) => r,
            Err(CoreError::NotUniform) => {
                return Ok(Outcome::Skip(
                    "stationary distribution is not uniform".into(),
                ))
            }
            Err(e) => return Err(e),
        };
        let id = inst.to_string();
        let (mut original, _) = analyze_graph(&id, inst.kind, &g, "original", opts)?;
        if opts.theory {
            original.theory_bound = theory_bound(inst, &g, opts.epsilon);
        }
        let after = if reduced.identity || reduced.c == 0.0 {
            AnalysisRecord {
                variant: "reduced".into(),
                ..original.clone()
            }
        } else {
            analyze_graph(&id, inst.kind, &reduced.graph, "reduced", opts)?.0
        };
        Ok(Outcome::Rows(vec![original, after]))
    })
}

#[derive(Debug, Clone)]
pub struct ScaleReport {
    pub records: Vec<AnalysisRecord>,
    /// τ against the spectral lower bound on the exact rows.
    pub tau_fit: Option<LinearFit>,
    /// `ln τ` against `ln n` over exact and predicted rows.
    pub growth: Option<LinearFit>,
    pub failed: Vec<(u32, CoreError)>,
}

/// Scaling series of `family` for `n_min..=n_max`; τ beyond the mixing cap
/// is predicted from the linear fit against the spectral lower bound.
pub fn scale(
    family: Family,
    kind: ChainKind,
    n_min: u32,
    n_max: u32,
    opts: &AnalyzeOptions,
    sink: &Sink,
) -> Result<ScaleReport> {
    if kind.takes_graph() {
        return Err(CliError::Usage(format!(
            "scaling families are degree pairs; {kind} needs a graph"
        )));
    }
    let mut rows: Vec<(u32, AnalysisRecord)> = Vec::new();
    let mut failed = Vec::new();
    for n in n_min..=n_max {
        let inst = ChainInstance::new(kind, Instance::Degrees(scaling_family(family, n)?))?;
        match analyze(&inst, opts) {
            Ok(a) => {
                log::info!(
                    "{family} n={n}: {} states, tau {:?}",
                    a.record.n_states,
                    a.record.tau
                );
                rows.push((n, a.record));
            }
            Err(e) => {
                log::error!("{family} n={n}: {e}");
                failed.push((n, e));
            }
        }
    }
    let exact: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|(_, r)| Some((r.lower_spectral?, r.tau?)))
        .collect();
    let tau_fit = LinearFit::fit(&exact);
    if let Some(fit) = tau_fit {
        for (_, r) in rows.iter_mut().filter(|(_, r)| r.tau.is_none()) {
            if let Some(l) = r.lower_spectral {
                r.tau = Some(fit.predict(l));
                r.tau_predicted = true;
            }
        }
    }
    let growth = LinearFit::log_log(
        &rows
            .iter()
            .filter_map(|(n, r)| Some((f64::from(*n), r.tau?)))
            .collect::<Vec<_>>(),
    );
    let records: Vec<AnalysisRecord> = rows.into_iter().map(|(_, r)| r).collect();
    let (mut writer, _) = open_output(&Sink {
        out: sink.out.clone(),
        resume: false,
    })?;
    for r in &records {
        writer.write(r)?;
    }
    writer
        .flush()
        .map_err(|e| CliError::io(sink.out.clone().unwrap_or_default(), e))?;
    Ok(ScaleReport {
        records,
        tau_fit,
        growth,
        failed,
    })
}

/// The chain ready for simulation. Weights that depend on global state
/// counts are finalized by a full build first.
fn walk_chain(instance: &ChainInstance) -> Result<AnyChain> {
    let mut chain = instance.chain();
    if !chain.has_unit_weights() {
        build(&mut chain, BuildOptions::default())?;
    }
    Ok(chain)
}

/// Final state of one seeded walk of `steps` steps from the arbitrary start.
pub fn walk(instance: &ChainInstance, steps: u64, seed: u64) -> Result<EdgeSet> {
    let chain = walk_chain(instance)?;
    let start = chain.arbitrary_state()?;
    let mut rng = seeded_rng(seed, 0);
    Ok(random_walk(&chain, &start, steps, &mut rng)?)
}

/// Final-state counts of `walks` independent walks; walk `i` uses stream `i`.
pub fn walk_histogram(
    instance: &ChainInstance,
    steps: u64,
    seed: u64,
    walks: u64,
) -> Result<BTreeMap<EdgeSet, u64>> {
    let chain = walk_chain(instance)?;
    let start = chain.arbitrary_state()?;
    let ends = (0..walks)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(seed, i);
            random_walk(&chain, &start, steps, &mut rng)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut hist = BTreeMap::new();
    for s in ends {
        *hist.entry(s).or_insert(0) += 1;
    }
    Ok(hist)
}

pub fn write_histogram(hist: &BTreeMap<EdgeSet, u64>, out: &mut dyn Write) -> io::Result<()> {
    let total: u64 = hist.values().sum();
    for (s, &c) in hist {
        writeln!(
            out,
            "{s} {c} {}",
            crate::format::fmt_g(c as f64 / total as f64, 6)
        )?;
    }
    Ok(())
}

pub fn sink_for(out: Option<&Path>, resume: bool) -> Sink {
    Sink {
        out: out.map(Path::to_path_buf),
        resume,
    }
}
