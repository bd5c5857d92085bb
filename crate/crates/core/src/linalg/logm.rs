//! Principal matrix logarithm and the band-selector function built on it.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{
    complex_schur, ensure_finite, ensure_square, norm1_complex, solve_complex, to_complex,
};
use super::{ComplexMatrix, DenseMatrix};
use crate::error::{Error, Result};

/// `‖T − I‖₁` threshold below which the Padé approximant is applied.
const LOG_PADE_RADIUS: f64 = 0.25;
const LOG_PADE_NODES: usize = 12;
const MAX_SQRTS: usize = 100;

/// Principal logarithm of a complex matrix.
///
/// Inverse scaling and squaring on the complex Schur factor: repeated
/// triangular square roots until the factor is close to the identity, then a
/// diagonal Padé approximant of `log(I + X)` evaluated through its
/// Gauss–Legendre partial-fraction form.
pub fn logm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "logm",
            expected: "square matrix".into(),
            found: format!("{}x{}", n, m.ncols()),
        });
    }
    if n == 0 {
        return Ok(m.clone());
    }
    let (u, mut t) = complex_schur(m)?;
    let scale = t.norm().max(f64::MIN_POSITIVE);
    for z in t.diagonal().iter() {
        if z.norm() <= f64::EPSILON * scale
            || (z.re <= 0.0 && z.im.abs() <= 1e-14 * z.norm().max(scale))
        {
            return Err(Error::BranchAmbiguity);
        }
    }

    let id = ComplexMatrix::identity(n, n);
    let mut k = 0;
    while norm1_complex(&(&t - &id)) > LOG_PADE_RADIUS {
        if k == MAX_SQRTS {
            return Err(Error::NonFinite("logm: square-root iteration"));
        }
        t = sqrtm_triangular(&t);
        k += 1;
    }
    let x = &t - &id;
    let (nodes, weights) = gauss_legendre(LOG_PADE_NODES);
    let mut acc = ComplexMatrix::zeros(n, n);
    for (node, w) in nodes.iter().zip(weights) {
        let denom = &id + &x * Complex64::new(*node, 0.0);
        let term = solve_upper(&denom, &x);
        acc += term * Complex64::new(w, 0.0);
    }
    acc *= Complex64::new(2f64.powi(k as i32), 0.0);
    Ok(&u * acc * u.adjoint())
}

/// Principal square root of an upper triangular matrix (Björck–Hammarling).
fn sqrtm_triangular(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.nrows();
    let mut r = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        r[(j, j)] = t[(j, j)].sqrt();
        for i in (0..j).rev() {
            let mut s = t[(i, j)];
            for k in (i + 1)..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            r[(i, j)] = s / (r[(i, i)] + r[(j, j)]);
        }
    }
    r
}

/// Solves `u y = b` for upper triangular `u`.
fn solve_upper(u: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = u.nrows();
    let mut y = b.clone();
    for c in 0..b.ncols() {
        for i in (0..n).rev() {
            let mut s = y[(i, c)];
            for l in (i + 1)..n {
                s -= u[(i, l)] * y[(l, c)];
            }
            y[(i, c)] = s / u[(i, i)];
        }
    }
    y
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Frequency-band selector for the band `±[w1, w2]`.
///
/// Returns the real matrix `Re((j/π) · ln((j·w1·I + A)⁻¹ (j·w2·I + A)))`, which
/// equals `(1/2π) ∫ (jωI − A)⁻¹ dω` taken over both `[w1, w2]` and
/// `[−w2, −w1]`. The result commutes with `A`.
pub fn freq_limited_fn(a: &DenseMatrix, w1: f64, w2: f64) -> Result<DenseMatrix> {
    let n = ensure_square(a, "freq_limited_fn")?;
    ensure_finite(a, "freq_limited_fn")?;
    if !(w1.is_finite() && w2.is_finite() && 0.0 <= w1 && w1 < w2) {
        return Err(Error::InvalidInterval(format!(
            "frequency band [{w1}, {w2}] must satisfy 0 <= w1 < w2 < inf"
        )));
    }
    if n == 0 {
        return Ok(a.clone());
    }
    let ac = to_complex(a);
    let id = ComplexMatrix::identity(n, n);
    let lower = &ac + &id * Complex64::new(0.0, w1);
    let upper = &ac + &id * Complex64::new(0.0, w2);
    if solve_complex(&upper, &id).is_none() {
        return Err(Error::SingularShift(format!("{}j", -w2)));
    }
    let arg =
        solve_complex(&lower, &upper).ok_or_else(|| Error::SingularShift(format!("{}j", -w1)))?;
    let log = logm(&arg)?;
    // Re(j·L / π) = −Im(L) / π
    let out = log.map(|z| -z.im / PI);
    ensure_finite(&out, "freq_limited_fn")?;
    Ok(out)
}
