//! Symmetrization of reversible transition matrices and the spectral
//! bounds on the total mixing time.
//!
//! For a reversible chain, `A(x,y) = √(π(x)/π(y)) P(x,y)` is symmetric and
//! similar to `P`. Its largest eigenvalue is 1 with eigenvector `√π`; the
//! bounds depend on `λ = max(|λ₂|, |λ_min|)`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::dense::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::lanczos::{extremal_eigenvalues, LanczosOptions};
use crate::par;
use crate::state_graph::{StateGraph, TOLERANCE};

/// Sparse symmetric matrix with the same pattern as the transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    pub diag: Vec<f64>,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()]
            .iter()
            .map(|&c| c as usize)
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let r = self.offsets[i]..self.offsets[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let parts = par::map_indices(self.n(), |i| {
            self.diag[i] * x[i] + self.row(i).map(|(j, v)| v * x[j]).sum::<f64>()
        });
        y.copy_from_slice(&parts);
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = self.diag[i];
            for (j, v) in self.row(i) {
                m[i * n + j] = v;
            }
        }
        m
    }
}

/// `A(x,y) = √(π(x)/π(y)) P(x,y)`; fails when the result is not symmetric.
pub fn symmetrize<S>(g: &StateGraph<S>) -> Result<SymmetricMatrix> {
    let pi = g.pi().probs();
    let root: Vec<f64> = pi.iter().map(|p| Float::sqrt(*p)).collect();
    let n = g.n_states();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut cols = Vec::with_capacity(g.n_arcs());
    let mut vals = Vec::with_capacity(g.n_arcs());
    for u in 0..n {
        for a in g.arcs(u) {
            cols.push(a.target);
            vals.push(root[u] / root[a.target as usize] * a.prob);
        }
        offsets.push(cols.len());
    }
    let m = SymmetricMatrix {
        diag: (0..n).map(|u| g.diag(u)).collect(),
        offsets,
        cols,
        vals,
    };
    let mut defect = 0.0f64;
    for i in 0..n {
        for (j, v) in m.row(i) {
            defect = defect.max((v - m.get(j, i)).abs());
        }
    }
    if defect > TOLERANCE {
        return Err(Error::NotReversible { max_defect: defect });
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    /// Dense solver up to `dense_limit` states, Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub method: EigenMethod,
    pub dense_limit: usize,
    pub lanczos: LanczosOptions,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            method: EigenMethod::Auto,
            dense_limit: 2_000,
            lanczos: LanczosOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralResult {
    pub lambda2: f64,
    pub lambda_min: f64,
    pub lambda_max_mag: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl SpectralResult {
    /// Bounds for `ε` from the two extremal non-trivial eigenvalues.
    pub fn from_eigenvalues(lambda2: f64, lambda_min: f64, pi_min: f64, epsilon: f64) -> Self {
        let lambda = lambda2.abs().max(lambda_min.abs());
        let gap = 1.0 - lambda;
        SpectralResult {
            lambda2,
            lambda_min,
            lambda_max_mag: lambda,
            lower_bound: 0.5 * lambda / gap * Float::ln(1.0 / (2.0 * epsilon)),
            upper_bound: (Float::ln(1.0 / epsilon) + Float::ln(1.0 / pi_min)) / gap,
        }
    }
}

/// Second-largest and smallest eigenvalue of the chain and the resulting
/// lower and upper bounds on `τ(ε)`.
pub fn spectral_bounds<S>(
    g: &StateGraph<S>,
    epsilon: f64,
    opts: &SpectralOptions,
) -> Result<SpectralResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let a = symmetrize(g)?;
    let n = a.n();
    let dense = match opts.method {
        EigenMethod::Auto => n <= opts.dense_limit,
        EigenMethod::Dense => true,
        EigenMethod::Lanczos => false,
    };
    let (lambda2, lambda_min) = if n == 1 {
        (0.0, 0.0)
    } else if dense {
        let ev = symmetric_eigenvalues(n, a.to_dense())?;
        (ev[n - 2], ev[0])
    } else {
        let q: Vec<f64> = g.pi().probs().iter().map(|p| Float::sqrt(*p)).collect();
        let apply = |x: &[f64], y: &mut [f64]| a.apply(x, y);
        let ex = extremal_eigenvalues(n, &apply, Some(&q), &opts.lanczos)?;
        (ex.largest, ex.smallest)
    };
    Ok(SpectralResult::from_eigenvalues(
        lambda2,
        lambda_min,
        g.pi_min(),
        epsilon,
    ))
}
