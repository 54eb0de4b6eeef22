use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use chainlab::analysis::{analyze, analyze_graph, AnalyzeOptions, PrecisionChoice, SchemeChoice};
use chainlab::experiments::{self, sink_for, Source};
use chainlab::format::fmt_g;
use chainlab::io::{export_graph, write_loads};
use chainlab::{CliError, RecordWriter, Result};
use chainlab_core::{loop_reduce, ChainInstance, ChainKind, Family};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "chainlab",
    version,
    about = "Exact mixing-time analysis of small MCMC state graphs"
)]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Analysis {
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Largest state graph for which τ, distances and congestion are computed.
    #[arg(long, default_value_t = 20_000)]
    mixing_cap: usize,
    /// Largest state graph built at all.
    #[arg(long, default_value_t = 1_000_000)]
    build_cap: usize,
    #[arg(long, value_enum, default_value_t = SchemeChoice::Bfs)]
    scheme: SchemeChoice,
    #[arg(long, value_enum, default_value_t = PrecisionChoice::Double)]
    precision: PrecisionChoice,
    /// Skip the published worst-case bounds.
    #[arg(long)]
    no_theory: bool,
}

impl Analysis {
    fn options(&self) -> AnalyzeOptions {
        AnalyzeOptions {
            epsilon: self.eps,
            mixing_cap: self.mixing_cap,
            build_cap: self.build_cap,
            scheme: self.scheme,
            precision: self.precision,
            theory: !self.no_theory,
        }
    }
}

#[derive(Args, Clone)]
struct Universe {
    /// Graph file (one biadjacency, graph6 or sparse6 graph per line) for the matching chains.
    #[arg(long, conflicts_with_all = ["max_rows", "max_cols"])]
    file: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    max_rows: usize,
    #[arg(long, default_value_t = 4)]
    max_cols: usize,
}

impl Universe {
    fn source(&self) -> Source {
        match &self.file {
            Some(p) => Source::File(p.clone()),
            None => Source::Pairs {
                max_rows: self.max_rows,
                max_cols: self.max_cols,
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Analyse one instance and print its CSV record.
    Analyze {
        #[arg(long)]
        chain: String,
        #[arg(long)]
        instance: String,
        #[command(flatten)]
        analysis: Analysis,
        /// Also analyse the loop-reduced chain with this fraction.
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write `<prefix>.edges` and `<prefix>.states`.
        #[arg(long)]
        export: Option<PathBuf>,
        /// Write per-arc congestion loads as CSV.
        #[arg(long)]
        loads: Option<PathBuf>,
    },
    /// Analyse every instance of a universe.
    Enumerate {
        #[arg(long)]
        chain: String,
        #[command(flatten)]
        universe: Universe,
        #[command(flatten)]
        analysis: Analysis,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue a previous run using `<out>.journal`.
        #[arg(long, requires = "out")]
        resume: bool,
    },
    /// Analyse a scaling family over a range of sizes and fit growth rates.
    Scale {
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "switch1")]
        chain: String,
        #[arg(long, default_value_t = 4)]
        n_min: u32,
        #[arg(long, default_value_t = 12)]
        n_max: u32,
        #[command(flatten)]
        analysis: Analysis,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Paired rows before and after removing loop probability.
    LoopReduce {
        #[arg(long)]
        chain: String,
        #[command(flatten)]
        universe: Universe,
        #[arg(long, default_value_t = 0.99)]
        fraction: f64,
        #[command(flatten)]
        analysis: Analysis,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, requires = "out")]
        resume: bool,
    },
    /// Simulate the chain and print the final state.
    Walk {
        #[arg(long)]
        chain: String,
        #[arg(long)]
        instance: String,
        #[arg(long, default_value_t = 0)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run this many independent walks and print final-state frequencies.
        #[arg(long)]
        histogram: Option<u64>,
    },
}

fn chain_kind(s: &str) -> Result<ChainKind> {
    s.parse().map_err(|_| {
        CliError::Usage(format!(
            "unknown chain '{s}' (matching1, matching2, switch1, switch2)"
        ))
    })
}

fn stdout_error(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Analyze {
            chain,
            instance,
            analysis,
            fraction,
            out,
            export,
            loads,
        } => {
            let inst = ChainInstance::parse(chain_kind(&chain)?, &instance)?;
            let opts = analysis.options();
            let a = analyze(&inst, &opts)?;
            let mut rows = vec![a.record.clone()];
            if let Some(f) = fraction {
                let r = loop_reduce(&a.graph, f)?;
                rows.push(
                    analyze_graph(&rows[0].instance_id, inst.kind, &r.graph, "reduced", &opts)?.0,
                );
            }
            if let Some(prefix) = export {
                export_graph(&a.graph, &prefix)?;
            }
            if let (Some(path), Some(c)) = (loads, &a.congestion) {
                write_loads(&a.graph, c, &path)?;
            }
            match out {
                Some(path) => {
                    let f = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
                    let mut w = RecordWriter::new(f, true)?;
                    for r in &rows {
                        w.write(r)?;
                    }
                    w.flush().map_err(|e| CliError::io(&path, e))?;
                }
                None => {
                    let mut w = RecordWriter::new(std::io::stdout().lock(), true)?;
                    for r in &rows {
                        w.write(r)?;
                    }
                    w.flush().map_err(stdout_error)?;
                }
            }
        }
        Command::Enumerate {
            chain,
            universe,
            analysis,
            out,
            resume,
        } => {
            let list = experiments::instances(chain_kind(&chain)?, &universe.source())?;
            let s = experiments::enumerate(
                &list,
                &analysis.options(),
                &sink_for(out.as_deref(), resume),
            )?;
            log::info!(
                "{} rows, {} failed, {} resumed",
                s.records.len(),
                s.failed.len(),
                s.resumed
            );
        }
        Command::Scale {
            family,
            chain,
            n_min,
            n_max,
            analysis,
            out,
        } => {
            let family: Family = family.parse()?;
            let report = experiments::scale(
                family,
                chain_kind(&chain)?,
                n_min,
                n_max,
                &analysis.options(),
                &sink_for(out.as_deref(), false),
            )?;
            if let Some(f) = report.tau_fit {
                eprintln!(
                    "tau ~ lower_spectral: slope {} intercept {} r^2 {} ({} points)",
                    fmt_g(f.slope, 6),
                    fmt_g(f.intercept, 6),
                    fmt_g(f.r_squared, 6),
                    f.n_points
                );
            }
            if let Some(f) = report.growth {
                eprintln!(
                    "log tau ~ log n: slope {} (reference 2.27) r^2 {}",
                    fmt_g(f.slope, 6),
                    fmt_g(f.r_squared, 6)
                );
            }
        }
        Command::LoopReduce {
            chain,
            universe,
            fraction,
            analysis,
            out,
            resume,
        } => {
            let list = experiments::instances(chain_kind(&chain)?, &universe.source())?;
            let s = experiments::loop_reduction(
                &list,
                fraction,
                &analysis.options(),
                &sink_for(out.as_deref(), resume),
            )?;
            log::info!(
                "{} rows, {} skipped, {} failed",
                s.records.len(),
                s.skipped.len(),
                s.failed.len()
            );
        }
        Command::Walk {
            chain,
            instance,
            steps,
            seed,
            histogram,
        } => {
            let inst = ChainInstance::parse(chain_kind(&chain)?, &instance)?;
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            match histogram {
                Some(walks) => {
                    let hist = experiments::walk_histogram(&inst, steps, seed, walks)?;
                    experiments::write_histogram(&hist, &mut out).map_err(stdout_error)?;
                }
                None => {
                    let end = experiments::walk(&inst, steps, seed)?;
                    writeln!(out, "{end}").map_err(stdout_error)?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
