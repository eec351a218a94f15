//! Small dense real/complex linear algebra.
//!
//! Everything here is desk-scale: the matrices that show up in the metric
//! computations are at most a few dozen rows. Storage is row-major.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Denominators of rank-one updates below this magnitude are treated as singular.
pub const SINGULAR_UPDATE_THRESHOLD: f64 = 1e-12;

/// Scalar field of a [`Matrix`]: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + Default
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
    fn re(self) -> f64;
    fn from_real(x: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn re(self) -> f64 {
        self
    }
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Dense row-major matrix.
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
            m[(i, i)] = T::one();
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

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn diag(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// `x y*` for column vectors `x`, `y`.
    pub fn outer(x: &[T], y: &[T]) -> Self {
        Self::from_fn(x.len(), y.len(), |i, j| x[i] * y[j].conj())
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

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conjugate(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// `x^T M y` (no conjugation).
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let my = self.mul_vec(y);
        x.iter().zip(&my).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).modulus())
            .fold(0.0, f64::max)
    }

    /// Max entrywise difference scaled by `max(1, max|other|)`.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        self.max_abs_diff(other) / other.max_abs().max(1.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.modulus().is_finite())
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() || self.rows == 0 {
            return Err(Error::invalid("inverse of a non-square or empty matrix"));
        }
        let n = self.rows;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&i, &j| {
                    a[(i, col)]
                        .modulus()
                        .partial_cmp(&a[(j, col)].modulus())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            let pivot = a[(pivot_row, col)];
            if pivot.modulus() <= 1e-14 * scale || !pivot.modulus().is_finite() {
                return Err(Error::Singular(pivot.modulus()));
            }
            if pivot_row != col {
                a.swap_rows(pivot_row, col);
                inv.swap_rows(pivot_row, col);
            }
            let p_inv = T::one() / pivot;
            for j in 0..n {
                a[(col, j)] = a[(col, j)] * p_inv;
                inv[(col, j)] = inv[(col, j)] * p_inv;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let factor = a[(i, col)];
                if factor == T::zero() {
                    continue;
                }
                for j in 0..n {
                    a[(i, j)] = a[(i, j)] - factor * a[(col, j)];
                    inv[(i, j)] = inv[(i, j)] - factor * inv[(col, j)];
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// Block-diagonal assembly of square blocks.
    pub fn block_diag(blocks: &[Self]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::invalid("block_diag of an empty list"));
        }
        if let Some(b) = blocks.iter().find(|b| !b.is_square()) {
            return Err(Error::invalid(format!(
                "block of shape {}x{} is not square",
                b.rows, b.cols
            )));
        }
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mut out = Self::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(off + i, off + j)] = b[(i, j)];
                }
            }
            off += b.rows;
        }
        Ok(out)
    }

    /// Cholesky factorization `M = L L*`. Reports whether every pivot was
    /// positive and the smallest pivot seen (the first nonpositive one
    /// terminates the factorization).
    pub fn cholesky_pivots(&self) -> Result<PdCheck> {
        if !self.is_square() || self.rows == 0 {
            return Err(Error::invalid("Cholesky check needs a nonempty square matrix"));
        }
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        let mut min_pivot = f64::INFINITY;
        for j in 0..n {
            let mut d = self[(j, j)].re();
            for k in 0..j {
                d -= l[(j, k)].modulus().powi(2);
            }
            min_pivot = min_pivot.min(d);
            if !(d.is_finite() && d > 0.0) {
                return Ok(PdCheck {
                    is_pd: false,
                    min_pivot: if d.is_nan() { f64::NEG_INFINITY } else { d },
                });
            }
            let ljj = d.sqrt();
            l[(j, j)] = T::from_real(ljj);
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / T::from_real(ljj);
            }
        }
        Ok(PdCheck { is_pd: true, min_pivot })
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

/// Dense three-index array, indexed `(i, j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Array3<T> {
    dims: (usize, usize, usize),
    data: Vec<T>,
}

impl<T: Scalar> Array3<T> {
    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Self {
            dims: (d0, d1, d2),
            data: vec![T::zero(); d0 * d1 * d2],
        }
    }

    pub fn from_fn(d0: usize, d1: usize, d2: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(d0 * d1 * d2);
        for i in 0..d0 {
            for j in 0..d1 {
                for k in 0..d2 {
                    data.push(f(i, j, k));
                }
            }
        }
        Self {
            dims: (d0, d1, d2),
            data,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dims, other.dims);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).modulus())
            .fold(0.0, f64::max)
    }
}

impl<T> Index<(usize, usize, usize)> for Array3<T> {
    type Output = T;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &T {
        &self.data[(i * self.dims.1 + j) * self.dims.2 + k]
    }
}

impl<T> IndexMut<(usize, usize, usize)> for Array3<T> {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut T {
        &mut self.data[(i * self.dims.1 + j) * self.dims.2 + k]
    }
}

/// Outcome of a Cholesky positive-definiteness test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdCheck {
    pub is_pd: bool,
    pub min_pivot: f64,
}

/// Hermitian matrix; the constructor averages the input with its adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::invalid("Hermitian matrix must be nonempty and square"));
        }
        let adj = m.adjoint();
        Ok(Self((&m + &adj).scale(Complex64::new(0.5, 0.0))))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n))
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        Self(CMatrix::diag(
            &d.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>(),
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// `Σ m[α][β] x^α conj(y^β)`.
    pub fn form(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let yc: Vec<Complex64> = y.iter().map(|c| c.conj()).collect();
        self.0.bilinear(x, &yc)
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::new(self.0.inverse()?)
    }

    pub fn pd_check(&self) -> Result<PdCheck> {
        self.0.cholesky_pivots()
    }
}

impl std::ops::Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

/// Real symmetric matrix; the constructor averages the input with its transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricRealMatrix(RMatrix);

impl SymmetricRealMatrix {
    pub fn new(m: RMatrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::invalid("symmetric matrix must be nonempty and square"));
        }
        let n = m.rows();
        let mut s = m.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                s[(i, j)] = avg;
                s[(j, i)] = avg;
            }
        }
        Ok(Self(s))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> RMatrix {
        self.0
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.0.bilinear(x, x)
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::new(self.0.inverse()?)
    }

    pub fn pd_check(&self) -> Result<PdCheck> {
        self.0.cholesky_pivots()
    }
}

impl std::ops::Index<(usize, usize)> for SymmetricRealMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Either flavour of matrix accepted by [`cholesky_pd_check`].
pub enum PdInput<'a> {
    Hermitian(&'a HermitianMatrix),
    Symmetric(&'a SymmetricRealMatrix),
}

impl<'a> From<&'a HermitianMatrix> for PdInput<'a> {
    fn from(m: &'a HermitianMatrix) -> Self {
        PdInput::Hermitian(m)
    }
}

impl<'a> From<&'a SymmetricRealMatrix> for PdInput<'a> {
    fn from(m: &'a SymmetricRealMatrix) -> Self {
        PdInput::Symmetric(m)
    }
}

pub fn cholesky_pd_check<'a>(m: impl Into<PdInput<'a>>) -> Result<PdCheck> {
    match m.into() {
        PdInput::Hermitian(h) => h.pd_check(),
        PdInput::Symmetric(s) => s.pd_check(),
    }
}

/// `(A - λ y y*)^{-1}` from `A^{-1}` by the Sherman-Morrison formula.
pub fn rank1_update_inverse(a_inv: &HermitianMatrix, y: &[Complex64], lambda: f64) -> Result<HermitianMatrix> {
    let (m, _) = rank1_update_inverse_with_denominator(a_inv.matrix(), y, lambda)?;
    HermitianMatrix::new(m)
}

/// Same update on a general scalar matrix; also returns the denominator
/// `1 - λ y* A^{-1} y`.
pub fn rank1_update_inverse_with_denominator<T: Scalar>(
    a_inv: &Matrix<T>,
    y: &[T],
    lambda: f64,
) -> Result<(Matrix<T>, f64)> {
    if !a_inv.is_square() || a_inv.rows() != y.len() {
        return Err(Error::invalid(format!(
            "rank-one update: matrix is {}x{}, vector has length {}",
            a_inv.rows(),
            a_inv.cols(),
            y.len()
        )));
    }
    let ay = a_inv.mul_vec(y);
    // y* A^{-1} y is real for Hermitian A.
    let quad = y
        .iter()
        .zip(&ay)
        .fold(T::zero(), |acc, (&yi, &ai)| acc + yi.conj() * ai)
        .re();
    let denom = 1.0 - lambda * quad;
    if denom.abs() <= SINGULAR_UPDATE_THRESHOLD {
        return Err(Error::SingularUpdate(denom));
    }
    // A^{-1} y y* A^{-1} = (A^{-1}y)(A^{-1}y)* when A^{-1} is Hermitian.
    let corr = Matrix::outer(&ay, &ay).scale(T::from_real(lambda / denom));
    Ok((a_inv + &corr, denom))
}

/// Block-diagonal assembly of Hermitian blocks.
pub fn block_diag_inverse(blocks: &[HermitianMatrix]) -> Result<HermitianMatrix> {
    let mats: Vec<CMatrix> = blocks.iter().map(|b| b.matrix().clone()).collect();
    HermitianMatrix::new(CMatrix::block_diag(&mats)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pd_check_diagonal() {
        let m = HermitianMatrix::from_real_diag(&[1.0, 0.5]);
        let r = cholesky_pd_check(&m).unwrap();
        assert!(r.is_pd);
        assert_eq!(r.min_pivot, 0.5);
    }

    #[test]
    fn pd_check_indefinite_real() {
        let m = SymmetricRealMatrix::new(RMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]])).unwrap();
        let r = cholesky_pd_check(&m).unwrap();
        assert!(!r.is_pd);
        assert!(r.min_pivot <= 0.0);
    }

    #[test]
    fn pd_check_identity() {
        let r = cholesky_pd_check(&HermitianMatrix::identity(3)).unwrap();
        assert!(r.is_pd);
        assert_eq!(r.min_pivot, 1.0);
    }

    #[test]
    fn pd_check_rejects_empty() {
        let empty = RMatrix::zeros(0, 0);
        assert!(matches!(empty.cholesky_pivots(), Err(Error::InvalidInput(_))));
        assert!(HermitianMatrix::new(CMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn hermitian_constructor_symmetrizes() {
        let m = CMatrix::from_rows(&[vec![c(1.0, 0.3), c(2.0, 1.0)], vec![c(0.0, 0.0), c(3.0, 0.0)]]);
        let h = HermitianMatrix::new(m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[(i, j)] - h[(j, i)].conj()).norm() < 1e-12);
            }
        }
        assert_eq!(h[(0, 0)].im, 0.0);
    }

    #[test]
    fn rank1_examples() {
        let e1 = [c(1.0, 0.0), c(0.0, 0.0)];
        let r = rank1_update_inverse(&HermitianMatrix::identity(2), &e1, 0.5).unwrap();
        let want = HermitianMatrix::from_real_diag(&[2.0, 1.0]);
        assert!(r.matrix().max_abs_diff(want.matrix()) < 1e-15);

        let zero = [c(0.0, 0.0), c(0.0, 0.0)];
        let r = rank1_update_inverse(&HermitianMatrix::identity(2), &zero, 3.7).unwrap();
        assert!(r.matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-15);

        // A = diag(2,2): A - y y* with y = (1,1) is singular.
        let a_inv = HermitianMatrix::from_real_diag(&[0.5, 0.5]);
        let ones = [c(1.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            rank1_update_inverse(&a_inv, &ones, 1.0),
            Err(Error::SingularUpdate(_))
        ));
    }

    #[test]
    fn block_diag_examples() {
        let d = block_diag_inverse(&[HermitianMatrix::from_real_diag(&[2.0])]).unwrap();
        assert_eq!(d, HermitianMatrix::from_real_diag(&[2.0]));
        let d = block_diag_inverse(&[HermitianMatrix::identity(1), HermitianMatrix::identity(2)]).unwrap();
        assert_eq!(d, HermitianMatrix::identity(3));
        let d = block_diag_inverse(&[
            HermitianMatrix::from_real_diag(&[0.5]),
            HermitianMatrix::from_real_diag(&[4.0, 4.0]),
        ])
        .unwrap();
        assert_eq!(d, HermitianMatrix::from_real_diag(&[0.5, 4.0, 4.0]));
        assert!(block_diag_inverse(&[]).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let m = CMatrix::from_rows(&[
            vec![c(4.0, 0.0), c(1.0, 2.0), c(0.0, -1.0)],
            vec![c(1.0, -2.0), c(5.0, 0.0), c(0.5, 0.0)],
            vec![c(0.0, 1.0), c(0.5, 0.0), c(3.0, 0.0)],
        ]);
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).max_abs_diff(&CMatrix::identity(3)) < 1e-13);
        assert!(matches!(
            RMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).inverse(),
            Err(Error::Singular(_))
        ));
    }
}
