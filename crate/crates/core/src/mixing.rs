//! Total variation distance and the exact total mixing time.
//!
//! `τ(ε)` is the least `t` such that every row of `P^t` is within total
//! variation `ε` of `π`. [`total_mixing_time`] finds it by repeated squaring
//! followed by a binary search between the last two dyadic powers;
//! [`mixing_time_naive`] steps every start distribution one transition at a
//! time and serves as a reference.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{DenseMatrix, Scalar};
use crate::error::{Error, Result};
use crate::par;
use crate::state_graph::{check_ergodic, StateGraph};

/// Probability vector over the states of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Entries must be finite, non-negative and sum to one within `1e-9`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution {
                reason: "empty".into(),
            });
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::InvalidDistribution {
                reason: format!("entry {i} is {p}"),
            });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution {
                reason: format!("sums to {sum}"),
            });
        }
        Ok(Distribution { probs })
    }

    /// Normalizes positive weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidDistribution {
                reason: "weights must be positive and finite".into(),
            });
        }
        let total: f64 = weights.iter().sum();
        Distribution::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Distribution {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Distribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `½ Σ |μ(x) − η(x)|`.
pub fn tv_distance(mu: &Distribution, eta: &Distribution) -> Result<f64> {
    if mu.len() != eta.len() {
        return Err(Error::LengthMismatch {
            left: mu.len(),
            right: eta.len(),
        });
    }
    Ok(tv(mu.probs(), eta.probs()))
}

fn tv<T: Scalar>(row: &[T], pi: &[f64]) -> f64 {
    0.5 * row
        .iter()
        .zip(pi)
        .map(|(x, p)| (x.as_f64() - p).abs())
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    Single,
    #[default]
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingOptions {
    pub precision: Precision,
    /// Largest graph accepted for dense powering.
    pub cap: usize,
    /// Squarings allowed before giving up with `capped` set.
    pub max_doublings: u32,
}

impl Default for MixingOptions {
    fn default() -> Self {
        MixingOptions {
            precision: Precision::Double,
            cap: 20_000,
            max_doublings: 48,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingResult {
    pub tau: u64,
    pub epsilon: f64,
    pub matrix_mults: u32,
    /// True when `max_doublings` squarings did not reach `ε`; `tau` is then
    /// the last power tried, a lower bound.
    pub capped: bool,
}

fn check_inputs<S>(g: &StateGraph<S>, epsilon: f64, cap: usize) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if g.n_states() > cap {
        return Err(Error::SizeCapExceeded { cap });
    }
    let report = check_ergodic(g);
    if !report.is_ergodic() {
        return Err(Error::NotErgodic(report));
    }
    Ok(())
}

/// Worst total variation distance of any row of `m` from `pi`.
fn max_tv<T: Scalar>(m: &DenseMatrix<T>, pi: &[f64]) -> f64 {
    par::map_indices(m.n(), |i| tv(m.row(i), pi))
        .into_iter()
        .fold(0.0, f64::max)
}

/// Exact `τ(ε)` by matrix powering.
pub fn total_mixing_time<S>(
    g: &StateGraph<S>,
    epsilon: f64,
    opts: &MixingOptions,
) -> Result<MixingResult> {
    check_inputs(g, epsilon, opts.cap)?;
    match opts.precision {
        Precision::Double => powering::<f64, S>(g, epsilon, opts.max_doublings),
        Precision::Single => powering::<f32, S>(g, epsilon, opts.max_doublings),
    }
}

fn powering<T: Scalar, S>(
    g: &StateGraph<S>,
    epsilon: f64,
    max_doublings: u32,
) -> Result<MixingResult> {
    let n = g.n_states();
    let pi = g.pi().probs();
    let mut result = MixingResult {
        tau: 0,
        epsilon,
        matrix_mults: 0,
        capped: false,
    };
    // d(0) = max over starts of 1 − π(a)
    let d0 = pi.iter().map(|p| 1.0 - p).fold(0.0, f64::max);
    if d0 <= epsilon {
        return Ok(result);
    }
    let mut mults = 0u32;
    let mut multiply = |a: &DenseMatrix<T>, b: &DenseMatrix<T>| -> Result<DenseMatrix<T>> {
        let c = a.mul(b);
        mults += 1;
        let drift = c.max_row_sum_drift();
        if drift > T::DRIFT {
            return Err(Error::NumericalDrift { deviation: drift });
        }
        Ok(c)
    };

    // powers[i] = P^(2^i)
    let mut powers = vec![DenseMatrix::<T>::from_f64(n, &g.dense_rows())];
    let mut i = 0usize;
    while max_tv(&powers[i], pi) > epsilon {
        if i as u32 >= max_doublings {
            result.tau = 1u64 << i;
            result.matrix_mults = mults;
            result.capped = true;
            return Ok(result);
        }
        let next = multiply(&powers[i], &powers[i])?;
        powers.push(next);
        i += 1;
    }
    if i == 0 {
        result.tau = 1;
        result.matrix_mults = mults;
        return Ok(result);
    }
    // d(l) > ε ≥ d(r), with r − l a power of two
    let mut l = 1u64 << (i - 1);
    let mut r = 1u64 << i;
    let mut p_l = powers[i - 1].clone();
    while r - l > 1 {
        let half = (r - l) / 2;
        let m = l + half;
        let p_m = multiply(&p_l, &powers[half.trailing_zeros() as usize])?;
        if max_tv(&p_m, pi) <= epsilon {
            r = m;
        } else {
            l = m;
            p_l = p_m;
        }
    }
    result.tau = r;
    result.matrix_mults = mults;
    Ok(result)
}

/// Largest state count accepted by [`mixing_time_naive`].
pub const NAIVE_CAP: usize = 2_000;

/// Reference `τ(ε)`: evolves every point mass one sparse step at a time
/// until it is within `ε` of `π`. The total variation distance to `π` never
/// increases along a chain, so `τ` is the largest per-start hitting time.
pub fn mixing_time_naive<S: Sync>(g: &StateGraph<S>, epsilon: f64) -> Result<MixingResult> {
    check_inputs(g, epsilon, NAIVE_CAP)?;
    let n = g.n_states();
    let pi = g.pi().probs();
    let per_start = par::map_indices(n, |a| {
        let mut p = vec![0.0f64; n];
        p[a] = 1.0;
        let mut next = vec![0.0f64; n];
        let mut t = 0u64;
        while tv(&p, pi) > epsilon {
            for (v, x) in next.iter_mut().enumerate() {
                *x = p[v] * g.diag(v);
            }
            for (u, &pu) in p.iter().enumerate() {
                if pu == 0.0 {
                    continue;
                }
                for arc in g.arcs(u) {
                    next[arc.target as usize] += pu * arc.prob;
                }
            }
            core::mem::swap(&mut p, &mut next);
            t += 1;
        }
        t
    });
    Ok(MixingResult {
        tau: per_start.into_iter().max().unwrap_or(0),
        epsilon,
        matrix_mults: 0,
        capped: false,
    })
}

/// `max_a TV(row_a(P^t), π)` for a single `t`, by sparse stepping.
pub fn distance_at<S: Sync>(g: &StateGraph<S>, t: u64) -> f64 {
    let n = g.n_states();
    let pi = g.pi().probs();
    par::map_indices(n, |a| {
        let mut p = vec![0.0f64; n];
        p[a] = 1.0;
        let mut next = vec![0.0f64; n];
        for _ in 0..t {
            for (v, x) in next.iter_mut().enumerate() {
                *x = p[v] * g.diag(v);
            }
            for (u, &pu) in p.iter().enumerate() {
                for arc in g.arcs(u) {
                    next[arc.target as usize] += pu * arc.prob;
                }
            }
            core::mem::swap(&mut p, &mut next);
        }
        tv(&p, pi)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(p: f64) -> StateGraph<usize> {
        StateGraph::from_matrix(
            vec![0, 1],
            &[vec![(0, 1.0 - p), (1, p)], vec![(0, p), (1, 1.0 - p)]],
            vec![1.0, 1.0],
        )
        .unwrap()
    }

    fn complete(n: usize) -> StateGraph<usize> {
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|_| (0..n).map(|j| (j, 1.0 / n as f64)).collect())
            .collect();
        StateGraph::from_matrix((0..n).collect(), &rows, vec![1.0; n]).unwrap()
    }

    #[test]
    fn tv_examples() {
        let d = |v: Vec<f64>| Distribution::new(v).unwrap();
        assert_eq!(
            tv_distance(&d(vec![0.3, 0.7]), &d(vec![0.3, 0.7])).unwrap(),
            0.0
        );
        assert_eq!(
            tv_distance(&d(vec![1.0, 0.0]), &d(vec![0.5, 0.5])).unwrap(),
            0.5
        );
        assert!((tv_distance(&d(vec![0.2, 0.8]), &d(vec![0.5, 0.5])).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(
            tv_distance(&d(vec![1.0]), &d(vec![0.5, 0.5])),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::from_weights(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn two_state_closed_form() {
        let g = two_state(1.0 / 441.0);
        let r = total_mixing_time(&g, 1e-3, &MixingOptions::default()).unwrap();
        assert_eq!(r.tau, 1368);
        assert!(!r.capped);
        assert_eq!(mixing_time_naive(&g, 1e-3).unwrap().tau, 1368);
        assert!(distance_at(&g, 1368) <= 1e-3 && distance_at(&g, 1367) > 1e-3);
    }

    #[test]
    fn complete_chain_mixes_in_one_step() {
        let g = complete(5);
        assert_eq!(
            total_mixing_time(&g, 1e-3, &MixingOptions::default())
                .unwrap()
                .tau,
            1
        );
        assert_eq!(mixing_time_naive(&g, 1e-3).unwrap().tau, 1);
    }

    #[test]
    fn single_state_is_already_mixed() {
        let g = complete(1);
        let r = total_mixing_time(&g, 1e-3, &MixingOptions::default()).unwrap();
        assert_eq!((r.tau, r.matrix_mults), (0, 0));
    }

    #[test]
    fn single_precision_agrees_on_easy_chain() {
        let g = two_state(0.1);
        let opts = MixingOptions {
            precision: Precision::Single,
            ..Default::default()
        };
        let single = total_mixing_time(&g, 1e-2, &opts).unwrap().tau;
        let double = total_mixing_time(&g, 1e-2, &MixingOptions::default())
            .unwrap()
            .tau;
        assert_eq!(single, double);
    }

    #[test]
    fn doubling_limit_sets_capped() {
        let g = two_state(1.0 / 441.0);
        let opts = MixingOptions {
            max_doublings: 3,
            ..Default::default()
        };
        let r = total_mixing_time(&g, 1e-3, &opts).unwrap();
        assert!(r.capped);
        assert_eq!(r.tau, 8);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = two_state(0.5);
        assert_eq!(
            total_mixing_time(&g, 0.0, &MixingOptions::default()).unwrap_err(),
            Error::InvalidEpsilon(0.0)
        );
        let opts = MixingOptions {
            cap: 1,
            ..Default::default()
        };
        assert_eq!(
            total_mixing_time(&g, 0.1, &opts).unwrap_err(),
            Error::SizeCapExceeded { cap: 1 }
        );
        let flip = StateGraph::from_matrix(
            vec![0, 1],
            &[vec![(1, 1.0)], vec![(0, 1.0)]],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(matches!(
            total_mixing_time(&flip, 0.1, &MixingOptions::default()),
            Err(Error::NotErgodic(_))
        ));
    }
}
