//! One CSV row per analysed state graph.

use std::io::Write;

use chainlab_core::ChainKind;

use crate::format::fmt_g;

/// Significant digits of every real in the CSV.
pub const DIGITS: usize = 12;

pub const HEADER: [&str; 23] = [
    "instance_id",
    "chain",
    "variant",
    "n_states",
    "n_arcs",
    "avg_degree",
    "avg_loop_prob",
    "pi_min",
    "diameter",
    "avg_path_length",
    "lambda2",
    "lambda_min",
    "lambda_max_mag",
    "tau",
    "tau_predicted_flag",
    "lower_spectral",
    "upper_spectral",
    "scheme",
    "congestion_rho",
    "congestion_bound",
    "path_length_max",
    "theory_bound",
    "epsilon",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRecord {
    pub instance_id: String,
    pub chain: ChainKind,
    /// `original`, or `reduced` for a loop-reduced graph.
    pub variant: String,
    pub n_states: usize,
    pub n_arcs: usize,
    pub avg_degree: f64,
    pub avg_loop_prob: f64,
    pub pi_min: f64,
    pub diameter: Option<u32>,
    pub avg_path_length: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_max_mag: Option<f64>,
    /// Exact τ, or a prediction when `tau_predicted` is set.
    pub tau: Option<f64>,
    pub tau_predicted: bool,
    pub lower_spectral: Option<f64>,
    pub upper_spectral: Option<f64>,
    pub scheme: Option<String>,
    pub congestion_rho: Option<f64>,
    pub congestion_bound: Option<f64>,
    pub path_length_max: Option<usize>,
    pub theory_bound: Option<f64>,
    pub epsilon: f64,
}

fn real(x: Option<f64>) -> String {
    x.map(|v| fmt_g(v, DIGITS)).unwrap_or_default()
}

fn int<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl AnalysisRecord {
    pub fn exact_tau(&self) -> Option<f64> {
        if self.tau_predicted {
            None
        } else {
            self.tau
        }
    }

    /// The congestion bound controls `1 − λ2` only, so it bounds `τ` when
    /// `λ2` is the eigenvalue of largest magnitude.
    pub fn congestion_applies(&self) -> bool {
        match (self.lambda2, self.lambda_min) {
            (Some(l2), Some(lmin)) => l2 >= lmin.abs(),
            _ => true,
        }
    }

    /// `lower ≤ τ ≤ upper`, and `τ ≤ congestion` where that bound applies,
    /// for exact τ; vacuous otherwise.
    pub fn sandwich_holds(&self) -> bool {
        let Some(tau) = self.exact_tau() else {
            return true;
        };
        self.lower_spectral.is_none_or(|l| l <= tau)
            && self.upper_spectral.is_none_or(|u| tau <= u)
            && (!self.congestion_applies() || self.congestion_bound.is_none_or(|c| tau <= c))
    }

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.instance_id.clone(),
            self.chain.to_string(),
            self.variant.clone(),
            self.n_states.to_string(),
            self.n_arcs.to_string(),
            fmt_g(self.avg_degree, DIGITS),
            fmt_g(self.avg_loop_prob, DIGITS),
            fmt_g(self.pi_min, DIGITS),
            int(self.diameter),
            real(self.avg_path_length),
            real(self.lambda2),
            real(self.lambda_min),
            real(self.lambda_max_mag),
            real(self.tau),
            u8::from(self.tau_predicted).to_string(),
            real(self.lower_spectral),
            real(self.upper_spectral),
            self.scheme.clone().unwrap_or_default(),
            real(self.congestion_rho),
            real(self.congestion_bound),
            int(self.path_length_max),
            real(self.theory_bound),
            fmt_g(self.epsilon, DIGITS),
        ]
    }
}

/// CSV writer with LF line endings and a fixed column order.
pub struct RecordWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(out: W, header: bool) -> csv::Result<Self> {
        let mut inner = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        if header {
            inner.write_record(HEADER)?;
        }
        Ok(RecordWriter { inner })
    }

    pub fn write(&mut self, r: &AnalysisRecord) -> csv::Result<()> {
        self.inner.write_record(r.fields())
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}
