//! Small dense matrices over `f64` and `Complex64`.
//!
//! Covariance blocks here are at most a few dozen rows, so a row-major
//! `Vec` with hand-written Cholesky factorizations is all that is needed.
//! Determinants are always taken in log-space from the triangular factor.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Field element usable in [`Matrix`]: either `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn re(self) -> f64;
    fn conj(self) -> Self;
    fn abs_sqr(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn re(self) -> f64 {
        self
    }
    fn conj(self) -> Self {
        self
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type CMatrix = Matrix<Complex64>;
pub type RMatrix = Matrix<f64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::from_real(1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[T]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_vec(rows.len(), cols, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * factor).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs_sqr().sqrt()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| (a - b).abs_sqr().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Exact Hermitian check (symmetric for real matrices).
    pub fn is_hermitian(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i..self.cols).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    /// Replaces the matrix by `(A + A*) / 2`, making it exactly Hermitian.
    pub fn hermitize(&self) -> Self {
        assert!(self.is_square());
        let half = T::from_real(0.5);
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] = T::from_real(self[(i, i)].re());
            for j in i + 1..self.cols {
                let v = (self[(i, j)] + self[(j, i)].conj()) * half;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        out
    }

    pub fn principal_submatrix(&self, indices: &[usize]) -> Self {
        Self::from_fn(indices.len(), indices.len(), |i, j| self[(indices[i], indices[j])])
    }

    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        assert!(row0 + rows <= self.rows && col0 + cols <= self.cols);
        Self::from_fn(rows, cols, |i, j| self[(row0 + i, col0 + j)])
    }

    /// Assembles `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        assert_eq!(a.rows, b.rows);
        assert_eq!(c.rows, d.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let (top, left) = (a.rows, a.cols);
        Self::from_fn(a.rows + c.rows, a.cols + b.cols, |i, j| match (i < top, j < left) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - left)],
            (false, true) => c[(i - top, j)],
            (false, false) => d[(i - top, j - left)],
        })
    }

    /// Adds `lambda * mean(diag) * I` to a square matrix.
    pub fn with_ridge(&self, lambda: f64) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return self.clone();
        }
        let mean_diag = self.diagonal().iter().map(|v| v.re()).sum::<f64>() / n as f64;
        let mut out = self.clone();
        for i in 0..n {
            out[(i, i)] += T::from_real(lambda * mean_diag);
        }
        out
    }
}

impl CMatrix {
    pub fn real_part(&self) -> RMatrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].re)
    }

    pub fn imag_part(&self) -> RMatrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].im)
    }
}

impl RMatrix {
    pub fn to_complex(&self) -> CMatrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| Complex64::new(self[(i, j)], 0.0))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// A pivot of the triangular factorization that was not strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotFailure {
    pub index: usize,
    pub pivot: f64,
}

/// Lower-triangular factor `L` with `A = L L*` for Hermitian positive definite `A`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    lower: Matrix<T>,
    /// `L_ii^2`, the successive Schur-complement pivots.
    pivots: Vec<f64>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors a Hermitian matrix, reading only its lower triangle.
    pub fn factor(a: &Matrix<T>) -> Result<Self, PivotFailure> {
        assert!(a.is_square(), "cholesky of a non-square matrix");
        let n = a.rows();
        let mut lower = Matrix::<T>::zeros(n, n);
        let mut pivots = Vec::with_capacity(n);
        for j in 0..n {
            let mut d = a[(j, j)].re();
            for k in 0..j {
                d -= lower[(j, k)].abs_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(PivotFailure { index: j, pivot: d });
            }
            let ljj = d.sqrt();
            pivots.push(d);
            lower[(j, j)] = T::from_real(ljj);
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= lower[(i, k)] * lower[(j, k)].conj();
                }
                lower[(i, j)] = s / T::from_real(ljj);
            }
        }
        Ok(Self { lower, pivots })
    }

    pub fn lower(&self) -> &Matrix<T> {
        &self.lower
    }

    pub fn log_det(&self) -> f64 {
        self.pivots.iter().map(|d| d.ln()).sum()
    }

    /// Ratio of the smallest to the largest pivot. Every pivot lies between
    /// the extreme eigenvalues, so this never underestimates the true
    /// reciprocal condition number.
    pub fn rcond_estimate(&self) -> f64 {
        let (lo, hi) = self
            .pivots
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
        if self.pivots.is_empty() {
            1.0
        } else {
            lo / hi
        }
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &Matrix<T>) -> Matrix<T> {
        let n = self.lower.rows();
        assert_eq!(b.rows(), n, "solve dimension mismatch");
        let mut x = b.clone();
        for col in 0..b.cols() {
            for i in 0..n {
                let mut s = x[(i, col)];
                for k in 0..i {
                    s -= self.lower[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s / self.lower[(i, i)];
            }
            for i in (0..n).rev() {
                let mut s = x[(i, col)];
                for k in i + 1..n {
                    s -= self.lower[(k, i)].conj() * x[(k, col)];
                }
                x[(i, col)] = s / self.lower[(i, i)];
            }
        }
        x
    }
}

/// Relative size below which a non-positive pivot of a positive
/// semidefinite matrix is attributed to rounding.
pub const PSD_PIVOT_TOLERANCE: f64 = 1e-10;

/// Log-determinant of a Hermitian positive semidefinite matrix.
///
/// Returns `-inf` when the factorization meets a pivot in
/// `[-tol * max_diag, 0]` (a singular PSD matrix, up to rounding), and an
/// error for a clearly negative pivot.
pub fn psd_log_det<T: Scalar>(a: &Matrix<T>) -> Result<f64, PivotFailure> {
    psd_log_det_scaled(a, 0.0)
}

/// As [`psd_log_det`], with the pivot tolerance taken relative to
/// `max(diag(a), reference)`. Useful when `a` is a residual whose own
/// diagonal has cancelled to round-off.
pub fn psd_log_det_scaled<T: Scalar>(a: &Matrix<T>, reference: f64) -> Result<f64, PivotFailure> {
    assert!(a.is_square());
    if a.rows() == 0 {
        return Ok(0.0);
    }
    let scale = a.diagonal().iter().map(|v| v.re().abs()).fold(reference.abs(), f64::max);
    match Cholesky::factor(a) {
        Ok(ch) => Ok(ch.log_det()),
        Err(fail) if fail.pivot.is_finite() && fail.pivot >= -PSD_PIVOT_TOLERANCE * scale => {
            Ok(f64::NEG_INFINITY)
        }
        Err(fail) => Err(fail),
    }
}

/// Diagonally pivoted Cholesky used as a rank-revealing factorization of a
/// positive semidefinite matrix.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    /// Indices chosen as pivots, in elimination order; the first `rank` of
    /// them index a well-conditioned principal submatrix.
    pub order: Vec<usize>,
    pub rank: usize,
    /// Smallest accepted pivot divided by the largest.
    pub rcond: f64,
}

impl PivotedCholesky {
    /// Stops when the largest remaining pivot falls below `rel_tol` times
    /// the first (largest) pivot.
    pub fn factor<T: Scalar>(a: &Matrix<T>, rel_tol: f64) -> Self {
        assert!(a.is_square());
        let n = a.rows();
        let mut work = a.clone();
        let mut order: Vec<usize> = (0..n).collect();
        let mut first = 0.0;
        let mut smallest = f64::INFINITY;
        let mut rank = 0;
        for k in 0..n {
            let (best, d) = (k..n)
                .map(|i| (i, work[(order[i], order[i])].re()))
                .fold((k, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if k == 0 {
                first = d;
            }
            if !(d > 0.0) || d <= rel_tol * first {
                break;
            }
            order.swap(k, best);
            let pk = order[k];
            smallest = smallest.min(d);
            rank += 1;
            // Rank-one downdate of the trailing block.
            for &ri in &order[k + 1..] {
                let f = work[(ri, pk)] / T::from_real(d);
                for &rj in &order[k + 1..] {
                    let v = f * work[(pk, rj)];
                    work[(ri, rj)] -= v;
                }
            }
        }
        let rcond = if rank == 0 { 0.0 } else { smallest / first };
        Self { order, rank, rcond }
    }

    pub fn kept(&self) -> &[usize] {
        &self.order[..self.rank]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cholesky_reconstructs_hermitian_matrix() {
        let a = CMatrix::from_rows(&[
            &[c(4.0, 0.0), c(1.0, 2.0), c(0.0, -1.0)],
            &[c(1.0, -2.0), c(6.0, 0.0), c(0.5, 0.5)],
            &[c(0.0, 1.0), c(0.5, -0.5), c(3.0, 0.0)],
        ]);
        let ch = Cholesky::factor(&a).unwrap();
        let l = ch.lower();
        let back = l.matmul(&l.adjoint());
        assert!(back.max_abs_diff(&a) < 1e-13);
    }

    #[test]
    fn log_det_matches_hand_value() {
        // det [[2,1],[1,2]] = 3
        let a = RMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let ch = Cholesky::factor(&a).unwrap();
        assert!((ch.log_det() - 3f64.ln()).abs() < 1e-15);
        // det [[2, i],[-i, 1]] = 2 - 1 = 1
        let b = CMatrix::from_rows(&[&[c(2.0, 0.0), c(0.0, 1.0)], &[c(0.0, -1.0), c(1.0, 0.0)]]);
        assert!(Cholesky::factor(&b).unwrap().log_det().abs() < 1e-15);
    }

    #[test]
    fn solve_inverts() {
        let a = CMatrix::from_rows(&[&[c(3.0, 0.0), c(1.0, 1.0)], &[c(1.0, -1.0), c(2.0, 0.0)]]);
        let x = Cholesky::factor(&a).unwrap().solve(&CMatrix::identity(2));
        assert!(a.matmul(&x).max_abs_diff(&CMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn singular_psd_gives_negative_infinity() {
        let a = CMatrix::from_rows(&[&[c(1.0, 0.0), c(0.0, 1.0)], &[c(0.0, -1.0), c(1.0, 0.0)]]);
        assert_eq!(psd_log_det(&a).unwrap(), f64::NEG_INFINITY);
        let zero = RMatrix::zeros(3, 3);
        assert_eq!(psd_log_det(&zero).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = RMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        let err = psd_log_det(&a).unwrap_err();
        assert_eq!(err.index, 1);
        assert!(err.pivot < -1.0);
    }

    #[test]
    fn pivoted_cholesky_reveals_rank() {
        // rank-one outer product v v^T with v = (1, 2, 3) plus nothing else
        let v = [1.0, 2.0, 3.0];
        let a = RMatrix::from_fn(3, 3, |i, j| v[i] * v[j]);
        let pc = PivotedCholesky::factor(&a, 1e-12);
        assert_eq!(pc.rank, 1);
        assert_eq!(pc.kept(), &[2]);
        let full = PivotedCholesky::factor(&RMatrix::identity(4), 1e-12);
        assert_eq!(full.rank, 4);
        assert_eq!(full.rcond, 1.0);
    }

    #[test]
    fn hermitize_is_exact() {
        let a = CMatrix::from_rows(&[&[c(1.0, 1e-20), c(1.0, 1.0)], &[c(1.0, -1.0 + 1e-17), c(2.0, 0.0)]]);
        assert!(a.hermitize().is_hermitian());
    }

    #[test]
    fn block_assembly_round_trips() {
        let a = RMatrix::from_rows(&[&[1.0]]);
        let b = RMatrix::from_rows(&[&[2.0, 3.0]]);
        let cc = RMatrix::from_rows(&[&[4.0], &[5.0]]);
        let d = RMatrix::from_rows(&[&[6.0, 7.0], &[8.0, 9.0]]);
        let m = RMatrix::from_blocks(&a, &b, &cc, &d);
        assert_eq!(m.submatrix(0, 1, 1, 2), b);
        assert_eq!(m.submatrix(1, 0, 2, 1), cc);
        assert_eq!(m.submatrix(1, 1, 2, 2), d);
    }
}
