//! Experiment harness around `chainlab-core`: instance files, the analysis
//! pipeline, CSV records and the batch experiments.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod format;
pub mod io;
pub mod journal;
pub mod record;

pub use analysis::{analyze, AnalyzeOptions, SchemeChoice};
pub use error::{CliError, Result};
pub use record::{AnalysisRecord, RecordWriter};
