//! Dense matrix-function and matrix-equation kernels.
//!
//! Everything here operates on small to medium dense matrices (order up to a
//! few hundred). Real matrices are [`DenseMatrix`]; complex intermediates
//! (Schur factors, resolvents, logarithms) are [`ComplexMatrix`].

mod equations;
mod expm;
mod logm;
mod schur;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{dims, Error, Result};

pub use equations::{solve_lyapunov, solve_sylvester};
pub use expm::{flow_integral, matrix_exponential};
pub use logm::{freq_limited_fn, logm};
pub use schur::{complex_schur, eig, eigenvalues, spectral_abscissa, Eigen};

pub type DenseMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Relative pivot size below which a linear solve is treated as singular.
pub(crate) const PIVOT_TOL: f64 = 1e-14;

pub(crate) fn ensure_square(m: &DenseMatrix, context: &'static str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context,
            expected: "square matrix".into(),
            found: dims(m.nrows(), m.ncols()),
        });
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_shape(
    m: &DenseMatrix,
    rows: usize,
    cols: usize,
    context: &'static str,
) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::DimensionMismatch {
            context,
            expected: dims(rows, cols),
            found: dims(m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

pub(crate) fn ensure_finite(m: &DenseMatrix, context: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context))
    }
}

pub fn to_complex(m: &DenseMatrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Replaces `m` by `(m + mᵀ) / 2`.
pub fn symmetrize(m: &mut DenseMatrix) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_sym_eigenvalue(m: &DenseMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let mut s = m.clone();
    symmetrize(&mut s);
    SymmetricEigen::new(s).eigenvalues.min()
}

/// Spectral (2-) norm.
pub fn norm2(m: &DenseMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub(crate) fn norm1_complex(m: &ComplexMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `a x = b` with partial-pivot LU, rejecting numerically singular `a`.
pub fn solve_real(a: &DenseMatrix, b: &DenseMatrix) -> Option<DenseMatrix> {
    let lu = a.clone().lu();
    let u = lu.u();
    let diag = u.diagonal();
    let max = diag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let min = diag.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    if a.nrows() > 0 && (max == 0.0 || min <= PIVOT_TOL * max) {
        return None;
    }
    lu.solve(b)
}

/// Complex analogue of [`solve_real`].
pub fn solve_complex(a: &ComplexMatrix, b: &ComplexMatrix) -> Option<ComplexMatrix> {
    let lu = a.clone().lu();
    let u = lu.u();
    let diag = u.diagonal();
    let max = diag.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let min = diag.iter().fold(f64::INFINITY, |m, z| m.min(z.norm()));
    if a.nrows() > 0 && (max == 0.0 || min <= PIVOT_TOL * max) {
        return None;
    }
    lu.solve(b)
}

/// Inverse of a symmetric positive definite matrix, symmetrized.
pub(crate) fn spd_inverse(m: &DenseMatrix) -> Option<DenseMatrix> {
    let n = m.nrows();
    let mut inv = match m.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => solve_real(m, &DenseMatrix::identity(n, n))?,
    };
    symmetrize(&mut inv);
    Some(inv)
}

/// Square-root factor `f` with `f fᵀ = m` for a symmetric PSD `m`.
///
/// Negative round-off eigenvalues are clipped to zero, so the factor keeps all
/// `n` columns.
pub fn psd_factor(m: &DenseMatrix) -> DenseMatrix {
    let mut s = m.clone();
    symmetrize(&mut s);
    let eig = SymmetricEigen::new(s);
    let mut f = eig.eigenvectors;
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        let scale = lam.max(0.0).sqrt();
        f.column_mut(j).scale_mut(scale);
    }
    f
}

/// Block-diagonal concatenation.
pub(crate) fn block_diag(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DenseMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

pub(crate) fn hstack(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    debug_assert_eq!(a.nrows(), b.nrows());
    let mut out = DenseMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

pub(crate) fn vstack(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    debug_assert_eq!(a.ncols(), b.ncols());
    let mut out = DenseMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}
