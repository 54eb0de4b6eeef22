//! Extremal eigenvalues of a large symmetric operator by thick-restart
//! Lanczos with full reorthogonalization.
//!
//! The operator is applied through a callback. A known unit eigenvector can
//! be deflated, in which case the search runs on its orthogonal complement.
//! The small projected matrix is diagonalized with cyclic Jacobi rotations.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Largest basis size before a restart.
    pub basis: usize,
    /// Ritz vectors kept at each end of the spectrum on restart.
    pub keep: usize,
    /// Relative residual for convergence.
    pub tolerance: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            basis: 64,
            keep: 12,
            tolerance: 1e-10,
            max_restarts: 5_000,
            seed: 0x5eed,
        }
    }
}

/// Largest and smallest eigenvalue, with the number of operator applications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremes {
    pub largest: f64,
    pub smallest: f64,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    Float::sqrt(dot(a, a))
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Eigen-decomposition of a small symmetric matrix (row-major). Returns the
/// eigenvalues and the eigenvectors as columns of a row-major matrix.
pub fn jacobi_eigen(m: usize, mut a: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * m + j] * a[i * m + j])
            .sum();
        let diag: f64 = (0..m).map(|i| a[i * m + i] * a[i * m + i]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + Float::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / Float::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
                for k in 0..m {
                    let vkp = v[k * m + p];
                    let vkq = v[k * m + q];
                    v[k * m + p] = c * vkp - s * vkq;
                    v[k * m + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..m).map(|i| a[i * m + i]).collect(), v)
}

/// Removes the components along `deflate` and the basis vectors, twice.
fn orthogonalize(w: &mut [f64], deflate: Option<&[f64]>, basis: &[Vec<f64>], coeffs: &mut [f64]) {
    coeffs.iter_mut().for_each(|c| *c = 0.0);
    for _ in 0..2 {
        if let Some(q) = deflate {
            let c = dot(q, w);
            axpy(w, -c, q);
        }
        for (j, v) in basis.iter().enumerate() {
            let c = dot(v, w);
            axpy(w, -c, v);
            coeffs[j] += c;
        }
    }
}

/// Extremal eigenvalues of the symmetric operator `apply` on `R^n`,
/// restricted to the complement of `deflate` when given.
pub fn extremal_eigenvalues(
    n: usize,
    apply: &(dyn Fn(&[f64], &mut [f64]) + Sync),
    deflate: Option<&[f64]>,
    opts: &LanczosOptions,
) -> Result<Extremes> {
    let dim = n - usize::from(deflate.is_some());
    if dim == 0 {
        return Ok(Extremes {
            largest: 0.0,
            smallest: 0.0,
            matvecs: 0,
        });
    }
    let m_max = opts.basis.max(2 * opts.keep + 2).min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random_unit = |basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        for _ in 0..4 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut scratch = vec![0.0; basis.len()];
            let before = norm(&v);
            orthogonalize(&mut v, deflate, basis, &mut scratch);
            let nv = norm(&v);
            if nv > 1e-8 * before {
                v.iter_mut().for_each(|x| *x /= nv);
                return Some(v);
            }
        }
        None
    };

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max + 1);
    basis.push(random_unit(&basis).expect("non-trivial space"));
    // projected matrix, row-major with stride m_max
    let mut t = vec![0.0; m_max * m_max];
    let mut matvecs = 0;
    let mut w = vec![0.0; n];
    let mut coeffs = vec![0.0; m_max];
    let mut last_residual = f64::INFINITY;

    for _restart in 0..opts.max_restarts {
        let mut residual_vec: Option<Vec<f64>> = None;
        let mut exhausted = false;
        while basis.len() <= m_max {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w);
            matvecs += 1;
            orthogonalize(&mut w, deflate, &basis, &mut coeffs[..basis.len()]);
            for i in 0..=j {
                t[i * m_max + j] = coeffs[i];
                t[j * m_max + i] = coeffs[i];
            }
            let beta = norm(&w);
            let scale = coeffs[..=j]
                .iter()
                .fold(0.0f64, |a, c| a.max(c.abs()))
                .max(1e-300);
            if j + 1 == m_max {
                residual_vec = Some(w.clone());
                break;
            }
            if beta <= 1e-12 * scale {
                // invariant subspace; continue with a fresh direction
                match random_unit(&basis) {
                    Some(v) => basis.push(v),
                    None => {
                        exhausted = true;
                        break;
                    }
                }
            } else {
                basis.push(w.iter().map(|x| x / beta).collect());
            }
        }
        let k = basis.len();
        let mut small = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                small[i * k + j] = t[i * m_max + j];
            }
        }
        let (theta, y) = jacobi_eigen(k, small);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| theta[a].total_cmp(&theta[b]));
        let lo = order[0];
        let hi = order[k - 1];
        if exhausted || residual_vec.is_none() {
            return Ok(Extremes {
                largest: theta[hi],
                smallest: theta[lo],
                matvecs,
            });
        }
        let r = residual_vec.expect("full basis");
        let beta = norm(&r);
        let res = |i: usize| beta * y[(k - 1) * k + i].abs();
        let tol = |i: usize| opts.tolerance * theta[i].abs().max(1.0);
        last_residual = res(lo).max(res(hi));
        if res(lo) <= tol(lo) && res(hi) <= tol(hi) {
            return Ok(Extremes {
                largest: theta[hi],
                smallest: theta[lo],
                matvecs,
            });
        }
        // thick restart: keep Ritz vectors from both ends plus the residual direction
        let keep = opts.keep.min(k / 2);
        let mut kept: Vec<usize> = order[..keep].to_vec();
        kept.extend_from_slice(&order[k - keep..]);
        let mut new_basis: Vec<Vec<f64>> = Vec::with_capacity(m_max + 1);
        for &i in &kept {
            let mut u = vec![0.0; n];
            for (j, v) in basis.iter().enumerate() {
                axpy(&mut u, y[j * k + i], v);
            }
            new_basis.push(u);
        }
        t.iter_mut().for_each(|x| *x = 0.0);
        for (a, &i) in kept.iter().enumerate() {
            t[a * m_max + a] = theta[i];
        }
        let mut next = r;
        let mut scratch = vec![0.0; new_basis.len()];
        orthogonalize(&mut next, deflate, &new_basis, &mut scratch);
        let nb = norm(&next);
        basis = new_basis;
        if nb > 1e-12 {
            next.iter_mut().for_each(|x| *x /= nb);
            basis.push(next);
        } else {
            match random_unit(&basis) {
                Some(v) => basis.push(v),
                None => {
                    return Ok(Extremes {
                        largest: theta[hi],
                        smallest: theta[lo],
                        matvecs,
                    })
                }
            }
        }
    }
    Err(Error::EigensolverNoConvergence {
        iterations: matvecs,
        residual: last_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::symmetric_eigenvalues;

    fn dense_apply(n: usize, a: Vec<f64>) -> impl Fn(&[f64], &mut [f64]) + Sync {
        move |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = (0..n).map(|j| a[i * n + j] * x[j]).sum();
            }
        }
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a = vec![2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0];
        let (mut ev, _) = jacobi_eigen(3, a);
        ev.sort_by(|a, b| a.total_cmp(b));
        let s = 2f64.sqrt();
        for (x, y) in ev.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn matches_dense_on_path_laplacian() {
        // tridiagonal (1,-2,1)/4 + I/2 on 300 points, extremes clustered
        let n = 300;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 0.5;
            if i + 1 < n {
                a[i * n + i + 1] = 0.25;
                a[(i + 1) * n + i] = 0.25;
            }
        }
        let ev = symmetric_eigenvalues(n, a.clone()).unwrap();
        let f = dense_apply(n, a);
        let ex = extremal_eigenvalues(n, &f, None, &LanczosOptions::default()).unwrap();
        assert!((ex.largest - ev[n - 1]).abs() < 1e-8);
        assert!((ex.smallest - ev[0]).abs() < 1e-8);
    }

    #[test]
    fn deflation_and_small_spaces() {
        let n = 4;
        let a = vec![0.25; 16];
        let q = vec![0.5; 4];
        let f = dense_apply(n, a);
        let ex = extremal_eigenvalues(n, &f, Some(&q), &LanczosOptions::default()).unwrap();
        assert!(ex.largest.abs() < 1e-12 && ex.smallest.abs() < 1e-12);
        let one = dense_apply(1, vec![1.0]);
        let ex = extremal_eigenvalues(1, &one, Some(&[1.0]), &LanczosOptions::default()).unwrap();
        assert_eq!((ex.largest, ex.smallest), (0.0, 0.0));
    }
}
