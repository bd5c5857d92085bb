use num_complex::Complex64;

use super::{complex_schur, ensure_finite, ensure_shape, ensure_square, symmetrize, to_complex};
use super::{ComplexMatrix, DenseMatrix};
use crate::error::{Error, Result};

/// Solves `a x + x b + c = 0` for `x`.
///
/// Both coefficients are brought to complex Schur form, the transformed
/// equation is solved column by column with triangular back-substitution, and
/// the result is mapped back. The real part is returned; for real data the
/// imaginary part is round-off.
pub fn solve_sylvester(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix) -> Result<DenseMatrix> {
    let n = ensure_square(a, "solve_sylvester: A")?;
    let m = ensure_square(b, "solve_sylvester: B")?;
    ensure_shape(c, n, m, "solve_sylvester: C")?;
    ensure_finite(a, "solve_sylvester: A")?;
    ensure_finite(b, "solve_sylvester: B")?;
    ensure_finite(c, "solve_sylvester: C")?;
    if n == 0 || m == 0 {
        return Ok(DenseMatrix::zeros(n, m));
    }

    let (ua, ta) = complex_schur(&to_complex(a))?;
    let (ub, tb) = complex_schur(&to_complex(b))?;
    let rhs = ua.adjoint() * to_complex(c) * &ub;
    let y = triangular_sylvester(&ta, &tb, &rhs, a.norm() + b.norm())?;
    let x = &ua * y * ub.adjoint();
    let out = x.map(|z| z.re);
    ensure_finite(&out, "solve_sylvester: solution")?;
    Ok(out)
}

/// Solves `ta y + y tb + rhs = 0` with both coefficients upper triangular.
fn triangular_sylvester(
    ta: &ComplexMatrix,
    tb: &ComplexMatrix,
    rhs: &ComplexMatrix,
    scale: f64,
) -> Result<ComplexMatrix> {
    let n = ta.nrows();
    let m = tb.nrows();
    let tiny = 10.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let mut y = ComplexMatrix::zeros(n, m);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..m {
        for i in 0..n {
            let mut acc = -rhs[(i, j)];
            for k in 0..j {
                acc -= y[(i, k)] * tb[(k, j)];
            }
            col[i] = acc;
        }
        let shift = tb[(j, j)];
        for i in (0..n).rev() {
            let mut acc = col[i];
            for l in (i + 1)..n {
                acc -= ta[(i, l)] * y[(l, j)];
            }
            let d = ta[(i, i)] + shift;
            if d.norm() <= tiny {
                return Err(Error::SingularEquation);
            }
            y[(i, j)] = acc / d;
        }
    }
    Ok(y)
}

/// Solves `a x + x aᵀ + w = 0`; the result is symmetrized.
pub fn solve_lyapunov(a: &DenseMatrix, w: &DenseMatrix) -> Result<DenseMatrix> {
    let n = ensure_square(a, "solve_lyapunov: A")?;
    ensure_shape(w, n, n, "solve_lyapunov: W")?;
    let mut x = solve_sylvester(a, &a.transpose(), w)?;
    symmetrize(&mut x);
    Ok(x)
}
