use num_complex::Complex64;

use super::{to_complex, ComplexMatrix, DenseMatrix};
use crate::error::{Error, Result};

const SCHUR_MAX_ITER: usize = 10_000;

/// Complex Schur form `m = u t uᴴ` with `t` upper triangular.
pub fn complex_schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if m.is_empty() {
        return Ok((m.clone(), m.clone()));
    }
    let schur = m
        .clone()
        .try_schur(f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or(Error::NonFinite("Schur iteration"))?;
    Ok(schur.unpack())
}

pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    let (_, t) = complex_schur(&to_complex(a))?;
    Ok(t.diagonal().iter().copied().collect())
}

/// Largest real part over the spectrum of `a` (`-inf` for an empty matrix).
pub fn spectral_abscissa(a: &DenseMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Right eigen-decomposition `a v = v diag(values)`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    /// Unit-norm right eigenvectors, one per column.
    pub vectors: ComplexMatrix,
    /// 2-norm condition number of `vectors`.
    pub condition: f64,
}

pub fn eig(a: &DenseMatrix) -> Result<Eigen> {
    let n = a.nrows();
    let (u, t) = complex_schur(&to_complex(a))?;
    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;

    // Back-substitution on the triangular factor, one eigenvector at a time.
    let mut x = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        x[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in (i + 1)..=k {
                acc += t[(i, l)] * x[(l, k)];
            }
            let mut d = t[(i, i)] - lam;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            x[(i, k)] = -acc / d;
        }
    }
    let mut vectors = &u * x;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col.unscale_mut(nrm);
        }
    }
    let sv = vectors.clone().svd(false, false).singular_values;
    let smin = sv.min();
    let condition = if smin > 0.0 {
        sv.max() / smin
    } else {
        f64::INFINITY
    };
    Ok(Eigen {
        values: t.diagonal().iter().copied().collect(),
        vectors,
        condition,
    })
}

#[cfg(test)]
pub(crate) fn is_upper_triangular(t: &ComplexMatrix) -> bool {
    let scale = t.norm().max(1.0);
    (0..t.nrows()).all(|i| (0..i).all(|j| t[(i, j)].norm() <= 1e-12 * scale))
}
