//! Small dense complex matrix type and the factorizations the samplers and
//! spectral diagnostics need.
//!
//! Storage is row-major. The QR factorization is our own Householder
//! implementation; the Hermitian eigensolver and the complex Schur form are
//! delegated to `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Argument(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Argument("ragged column set".into()));
        }
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Argument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        // i-k-j loop order keeps the inner loop contiguous in both operands.
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::Argument(format!(
                "cannot apply a {}x{} matrix to a vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(self
            .data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&mut self, factor: C64) {
        for v in &mut self.data {
            *v *= factor;
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A†|`.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |A†A - I|`.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                let mut dot = ZERO;
                for k in 0..n {
                    dot += self[(k, a)].conj() * self[(k, b)];
                }
                let target = if a == b { ONE } else { ZERO };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Result of a Householder QR factorization `A = Q R`.
#[derive(Debug, Clone)]
pub struct QrDecomposition {
    pub q: CMatrix,
    pub r: CMatrix,
}

/// Householder QR of a square complex matrix.
///
/// The diagonal of `R` is generally complex; callers that need the unique
/// factorization with a positive diagonal must rephase the columns of `Q`.
pub fn householder_qr(a: &CMatrix) -> Result<QrDecomposition> {
    if !a.is_square() {
        return Err(Error::Argument("QR is implemented for square matrices".into()));
    }
    let n = a.rows();
    let mut r = a.clone();
    let mut q = CMatrix::identity(n);
    let mut v = vec![ZERO; n];

    for k in 0..n.saturating_sub(1) {
        let norm_x = (k..n).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        // alpha = -phase * |x| avoids cancellation in v = x - alpha e_1.
        let alpha = -phase * norm_x;
        for i in k..n {
            v[i] = r[(i, k)];
        }
        v[k] -= alpha;
        let v_norm_sqr: f64 = (k..n).map(|i| v[i].norm_sqr()).sum();
        if v_norm_sqr == 0.0 {
            continue;
        }
        let beta = 2.0 / v_norm_sqr;

        // R <- (I - beta v v†) R
        for j in k..n {
            let mut s = ZERO;
            for i in k..n {
                s += v[i].conj() * r[(i, j)];
            }
            s *= beta;
            for i in k..n {
                let vi = v[i];
                r[(i, j)] -= vi * s;
            }
        }
        // Q <- Q (I - beta v v†)
        for i in 0..n {
            let mut s = ZERO;
            for l in k..n {
                s += q[(i, l)] * v[l];
            }
            s *= beta;
            for l in k..n {
                let vl = v[l].conj();
                q[(i, l)] -= s * vl;
            }
        }
        for i in (k + 1)..n {
            r[(i, k)] = ZERO;
        }
    }
    Ok(QrDecomposition { q, r })
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues (ascending)
/// and orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

pub fn hermitian_eigen(h: &CMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::Argument("eigendecomposition needs a square matrix".into()));
    }
    let herr = h.hermiticity_error();
    if herr > 1e-8 {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (max |A - A†| = {herr:e})"
        )));
    }
    let eig = nalgebra::linalg::SymmetricEigen::try_new(h.to_nalgebra(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical(format!("Hermitian eigensolver did not converge ({}x{})", h.rows(), h.cols())))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_nalgebra(&eig.eigenvectors);
    let columns: Vec<Vec<C64>> = order.iter().map(|&j| vecs.column(j)).collect();
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors: CMatrix::from_columns(&columns)?,
    })
}

/// `exp(-i t H)` for Hermitian `H`, assembled from its eigendecomposition.
pub fn hermitian_propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let eig = hermitian_eigen(h)?;
    let n = h.rows();
    let vecs = &eig.eigenvectors;
    let phases: Vec<C64> = eig
        .eigenvalues
        .iter()
        .map(|&e| C64::from_polar(1.0, -t * e))
        .collect();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = ZERO;
            for (k, &ph) in phases.iter().enumerate() {
                s += vecs[(i, k)] * ph * vecs[(j, k)].conj();
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

/// Eigenpairs of a normal (here: unitary) matrix.
#[derive(Debug, Clone)]
pub struct NormalEigen {
    pub eigenvalues: Vec<C64>,
    /// Eigenvectors as columns.
    pub eigenvectors: CMatrix,
    /// `max_k ||A v_k - λ_k v_k||`.
    pub max_residual: f64,
}

impl NormalEigen {
    /// Smallest distance between two distinct eigenvalue indices.
    pub fn min_spacing(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.eigenvalues.iter().enumerate() {
            for b in &self.eigenvalues[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }
}

/// Eigendecomposition of a normal matrix through its complex Schur form.
///
/// For a normal matrix the triangular Schur factor is diagonal, so the Schur
/// vectors are eigenvectors. The residual of every pair is checked against
/// `residual_tol`.
pub fn normal_eigen(a: &CMatrix, residual_tol: f64) -> Result<NormalEigen> {
    if !a.is_square() {
        return Err(Error::Argument("eigendecomposition needs a square matrix".into()));
    }
    let n = a.rows();
    let schur = nalgebra::linalg::Schur::try_new(a.to_nalgebra(), f64::EPSILON, 0).ok_or_else(|| {
        Error::Numerical(format!(
            "Schur iteration did not converge on a {n}x{n} matrix (unitarity error {:e})",
            a.unitarity_error()
        ))
    })?;
    let (q, t) = schur.unpack();
    let eigenvectors = CMatrix::from_nalgebra(&q);
    let eigenvalues: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();

    let mut max_residual = 0.0f64;
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        let v = eigenvectors.column(k);
        let av = a.matvec(&v)?;
        let res = av
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - lambda * y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        max_residual = max_residual.max(res);
    }
    if max_residual > residual_tol {
        let off_diag = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| t[(i, j)].norm())
            .fold(0.0, f64::max);
        return Err(Error::Numerical(format!(
            "eigenpair residual {max_residual:e} exceeds {residual_tol:e} on a {n}x{n} matrix \
             (largest off-diagonal Schur entry {off_diag:e}; the input may not be normal)"
        )));
    }
    Ok(NormalEigen {
        eigenvalues,
        eigenvectors,
        max_residual,
    })
}
