#![allow(dead_code)]

use std::f64::consts::PI;

use lagcoh_core::{CMatrix, Complex64, RMatrix, SegmentedSeries};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn cgauss(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(gauss(rng), gauss(rng))
}

/// `sum_t x_t exp(-2 pi i w t / N)` by direct summation.
pub fn naive_dft(x: &[f64], w: usize) -> Complex64 {
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(t, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * w as f64 * t as f64 / n))
        .sum()
}

pub fn random_series(rng: &mut ChaCha8Rng, n_seg: usize, n: usize, ch: usize) -> SegmentedSeries {
    let data = (0..n_seg * n * ch).map(|_| gauss(rng)).collect();
    SegmentedSeries::new(data, n_seg, n, ch).unwrap()
}

pub fn to_na(m: &CMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn to_na_real(m: &RMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn from_na(m: &DMatrix<Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Random Hermitian positive definite `n x n`, built as `A A* / m + eps I`.
pub fn random_hpd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let m = n + 2;
    let a = DMatrix::from_fn(n, m, |_, _| cgauss(rng));
    let mut s = &a * a.adjoint() / Complex64::new(m as f64, 0.0);
    for i in 0..n {
        s[(i, i)] += Complex64::new(0.05, 0.0);
    }
    (s.clone() + s.adjoint()) / Complex64::new(2.0, 0.0)
}

pub fn random_invertible_complex(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::from_fn(n, n, |_, _| cgauss(rng));
    for i in 0..n {
        a[(i, i)] += Complex64::new(2.0, 0.0);
    }
    a
}

pub fn random_invertible_real(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::from_fn(n, n, |_, _| gauss(rng));
    for i in 0..n {
        a[(i, i)] += 2.0;
    }
    a
}

pub fn det_re(m: &DMatrix<Complex64>) -> f64 {
    m.clone().determinant().re
}

/// Squared general coherence from a joint `(Y; X)` matrix via
/// `|S_ZZ| = |S_XX| |S_YY/X|`.
pub fn oracle_coherence(s_zz: &DMatrix<Complex64>, q: usize) -> f64 {
    let n = s_zz.nrows();
    let s_yy = s_zz.view((0, 0), (q, q)).into_owned();
    let s_xx = s_zz.view((q, q), (n - q, n - q)).into_owned();
    1.0 - det_re(s_zz) / (det_re(&s_yy) * det_re(&s_xx))
}

/// Squared lagged coherence `1 - |S| / |Re S|` by full determinants.
pub fn oracle_lagged(s_zz: &DMatrix<Complex64>) -> f64 {
    let re = s_zz.map(|v| Complex64::new(v.re, 0.0));
    1.0 - det_re(s_zz) / det_re(&re)
}

/// Splits a joint `(Y; X)` matrix into `(s_xx, s_yy, s_xy)` blocks.
pub fn blocks(s_zz: &DMatrix<Complex64>, q: usize) -> (CMatrix, CMatrix, CMatrix) {
    let n = s_zz.nrows();
    let p = n - q;
    let s_yy = s_zz.view((0, 0), (q, q)).into_owned();
    let s_xx = s_zz.view((q, q), (p, p)).into_owned();
    let s_xy = s_zz.view((q, 0), (p, q)).into_owned();
    (from_na(&s_xx), from_na(&s_yy), from_na(&s_xy))
}

pub fn block_diag(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows() + b.nrows();
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    m.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols())).copy_from(b);
    m
}

pub fn complexify(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|v| Complex64::new(v, 0.0))
}
