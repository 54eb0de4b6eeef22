//! Dense square matrices, a cache-blocked parallel product, and a symmetric
//! eigenvalue solver (Householder tridiagonalization followed by implicit
//! QL iterations).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::AddAssign;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::par;

/// Floating-point element type of a dense matrix.
pub trait Scalar: Float + AddAssign + Send + Sync + Debug + 'static {
    /// Largest accepted row-sum drift of a stochastic matrix.
    const DRIFT: f64;
    fn of_f64(x: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Scalar for f64 {
    const DRIFT: f64 = 1e-9;
    fn of_f64(x: f64) -> Self {
        x
    }
    fn as_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    const DRIFT: f64 = 1e-4;
    fn of_f64(x: f64) -> Self {
        x as f32
    }
    fn as_f64(self) -> f64 {
        f64::from(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

const ROW_BLOCK: usize = 16;
const K_BLOCK: usize = 128;
const J_BLOCK: usize = 1024;

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// From row-major `f64` entries.
    pub fn from_f64(n: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), n * n);
        DenseMatrix {
            n,
            data: entries.iter().map(|&x| T::of_f64(x)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// `self · other`. Every entry accumulates over `k` in increasing
    /// order, so the result is identical for any number of workers.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        assert_eq!(n, other.n);
        let mut out = Self::zeros(n);
        if n == 0 {
            return out;
        }
        par::for_each_chunk_mut(&mut out.data, ROW_BLOCK * n, |chunk_idx, block| {
            let first = chunk_idx * ROW_BLOCK;
            let rows = block.len() / n;
            for jb in (0..n).step_by(J_BLOCK) {
                let je = (jb + J_BLOCK).min(n);
                for kb in (0..n).step_by(K_BLOCK) {
                    let ke = (kb + K_BLOCK).min(n);
                    let mut r = 0;
                    // Four rows share each streamed row of `other`.
                    while r + 4 <= rows {
                        let (c0, rest) = block[r * n..].split_at_mut(n);
                        let (c1, rest) = rest.split_at_mut(n);
                        let (c2, c3) = rest.split_at_mut(n);
                        let w = je - jb;
                        let (c0, c1, c2, c3) = (
                            &mut c0[jb..je],
                            &mut c1[jb..je],
                            &mut c2[jb..je],
                            &mut c3[jb..je],
                        );
                        let a = [
                            self.row(first + r),
                            self.row(first + r + 1),
                            self.row(first + r + 2),
                            self.row(first + r + 3),
                        ];
                        for k in kb..ke {
                            let (a0, a1, a2, a3) = (a[0][k], a[1][k], a[2][k], a[3][k]);
                            if a0 == T::zero()
                                && a1 == T::zero()
                                && a2 == T::zero()
                                && a3 == T::zero()
                            {
                                continue;
                            }
                            let b = &other.data[k * n + jb..k * n + je];
                            assert!(
                                b.len() == w
                                    && c0.len() == w
                                    && c1.len() == w
                                    && c2.len() == w
                                    && c3.len() == w
                            );
                            for j in 0..w {
                                let bj = b[j];
                                c0[j] += a0 * bj;
                                c1[j] += a1 * bj;
                                c2[j] += a2 * bj;
                                c3[j] += a3 * bj;
                            }
                        }
                        r += 4;
                    }
                    for r in r..rows {
                        let a_row = self.row(first + r);
                        let c = &mut block[r * n + jb..r * n + je];
                        for (k, &a) in a_row[kb..ke].iter().enumerate() {
                            if a == T::zero() {
                                continue;
                            }
                            let b = &other.data[(kb + k) * n + jb..(kb + k) * n + je];
                            for (cj, &bj) in c.iter_mut().zip(b) {
                                *cj += a * bj;
                            }
                        }
                    }
                }
            }
        });
        out
    }

    /// Plain triple loop in the same accumulation order as [`Self::mul`].
    pub fn mul_sequential(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Largest deviation of a row sum from one.
    pub fn max_row_sum_drift(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let s: f64 = self.row(i).iter().map(|x| x.as_f64()).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues of the symmetric `n × n` matrix `a` (row-major), ascending.
/// Only the lower triangle is read.
pub fn symmetric_eigenvalues(n: usize, mut a: Vec<f64>) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut a, &mut d, &mut e);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| x.total_cmp(y));
    Ok(d)
}

/// Householder reduction to tridiagonal form, eigenvalues only. On return
/// `d` holds the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize(n: usize, a: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let idx = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[idx(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[idx(i, l)];
            } else {
                for k in 0..=l {
                    a[idx(i, k)] /= scale;
                    h += a[idx(i, k)] * a[idx(i, k)];
                }
                let f = a[idx(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[idx(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[idx(j, k)] * a[idx(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[idx(k, j)] * a[idx(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[idx(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[idx(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[idx(j, k)] -= f * e[k] + g * a[idx(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[idx(i, l)];
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[idx(i, i)];
    }
}

const QL_MAX_ITER: usize = 60;

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal
/// matrix; `e[i]` couples `d[i-1]` and `d[i]`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::EigensolverNoConvergence {
                    iterations: iter,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.random_range(-1.0..1.0);
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    #[test]
    fn eigenvalues_match_nalgebra() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (30, 4), (97, 5)] {
            let a = random_symmetric(n, seed);
            let ours = symmetric_eigenvalues(n, a.clone()).unwrap();
            let m = nalgebra::DMatrix::from_row_slice(n, n, &a);
            let mut theirs: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            theirs.sort_by(|x, y| x.total_cmp(y));
            for (x, y) in ours.iter().zip(&theirs) {
                assert!((x - y).abs() < 1e-10, "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn eigenvalues_of_diagonal_and_degenerate() {
        let a = vec![3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 3.0];
        assert_eq!(symmetric_eigenvalues(3, a).unwrap(), vec![-1.0, 3.0, 3.0]);
        let ones = vec![0.25; 16];
        let ev = symmetric_eigenvalues(4, ones).unwrap();
        assert!((ev[3] - 1.0).abs() < 1e-14);
        assert!(ev[..3].iter().all(|x| x.abs() < 1e-14));
    }

    proptest! {
        #[test]
        fn blocked_product_equals_sequential(n in 1usize..40, seed in 0u64..1000) {
            let a = DenseMatrix::<f64>::from_f64(n, &random_symmetric(n, seed));
            let b = DenseMatrix::<f64>::from_f64(n, &random_symmetric(n, seed + 1));
            prop_assert_eq!(a.mul(&b), a.mul_sequential(&b));
        }
    }

    #[test]
    fn blocked_product_spans_blocks() {
        let n = 300;
        let a = DenseMatrix::<f32>::from_f64(n, &random_symmetric(n, 9));
        let b = DenseMatrix::<f32>::from_f64(n, &random_symmetric(n, 10));
        assert_eq!(a.mul(&b), a.mul_sequential(&b));
        let i = DenseMatrix::<f32>::identity(n);
        assert_eq!(a.mul(&i), a);
    }
}
