use alloc::string::String;

use crate::state_graph::ErgodicityReport;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parse error at position {position}: {reason}")]
    Parse { position: usize, reason: String },

    #[error("degree sequence pair has no realization")]
    NotRealizable,

    #[error("bipartite graph is not connected")]
    NotConnected,

    #[error("maximum matching has {size} edges, need at least {needed}")]
    NoNearPerfectMatching { size: usize, needed: usize },

    #[error("graph has no perfect matching; weights are undefined")]
    NoPerfectMatching,

    #[error("weights queried before they were finalized from the state list")]
    WeightsNotFinalized,

    #[error("unsupported instance: {reason}")]
    Unsupported { reason: String },

    #[error("state space exceeds the cap of {cap} states")]
    SizeCapExceeded { cap: usize },

    #[error("state graph is not ergodic: {0}")]
    NotErgodic(ErgodicityReport),

    #[error("stationary distribution is not uniform")]
    NotUniform,

    #[error("loop-reduction fraction {0} is outside [0, 1)")]
    InvalidFraction(f64),

    #[error("epsilon {0} is outside (0, 1)")]
    InvalidEpsilon(f64),

    #[error("distribution lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid distribution: {reason}")]
    InvalidDistribution { reason: String },

    #[error("chain is not reversible (detailed-balance defect {max_defect:e})")]
    NotReversible { max_defect: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    EigensolverNoConvergence { iterations: usize, residual: f64 },

    #[error("path scheme produced an invalid path from {from} to {to}: {reason}")]
    SchemePathInvalid {
        from: usize,
        to: usize,
        reason: String,
    },

    #[error("state {to} is unreachable from state {from}")]
    Unreachable { from: usize, to: usize },

    #[error("row sums drifted from 1 by {deviation:e} during matrix powering")]
    NumericalDrift { deviation: f64 },
}

impl Error {
    /// True for errors caused by the user's input rather than by a computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::NotRealizable
                | Error::NotConnected
                | Error::NoNearPerfectMatching { .. }
                | Error::NoPerfectMatching
                | Error::Unsupported { .. }
                | Error::InvalidFraction(_)
                | Error::InvalidEpsilon(_)
                | Error::LengthMismatch { .. }
                | Error::InvalidDistribution { .. }
        )
    }
}

pub(crate) fn parse_error(position: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        position,
        reason: reason.into(),
    }
}
