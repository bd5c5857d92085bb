//! Pseudo-optimal rational Krylov reduction (PORK) and its time- and
//! frequency-limited variants.
//!
//! All three share one input Krylov basis `V` and its factorization
//! `A V − V S − B L = 0`. They differ only in the interval used to build the
//! output map: the basis is transformed to `𝕍` (which solves the interval
//! version of the Sylvester equation) and the small Lyapunov equation for
//! `P⁻¹` gets the matching interval forcing. Every resulting model has poles
//! at the mirror images of the shifts and satisfies
//! `‖H − H_r‖² = ‖H‖² − ‖H_r‖²` in the corresponding norm.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{dims, Error, Result};
use crate::gramians::{interval_forcing, interval_lyapunov, Interval};
use crate::linalg::{
    eigenvalues, ensure_finite, flow_integral, freq_limited_fn, matrix_exponential, solve_complex,
    solve_lyapunov, solve_real, spd_inverse, symmetrize, to_complex, ComplexMatrix, DenseMatrix,
};
use crate::sys::StateSpace;

/// Relative tolerance for recognising repeated or conjugate shifts.
const SHIFT_TOL: f64 = 1e-12;
/// Relative size of `R` pivots below which a Krylov basis is rank deficient.
const BASIS_RANK_TOL: f64 = 1e-12;
/// Deflated input norms below this fraction of the original are treated as zero.
const DEFLATION_TOL: f64 = 1e-12;

/// One projection step: `A V − V S − B L = 0` and `A V − V Ã − B⊥ L = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovFactorization {
    /// Input subspace basis `V` (n×r).
    pub basis: DenseMatrix,
    /// `S` (r×r); its eigenvalues are the interpolation points.
    pub interpolation: DenseMatrix,
    /// `L` (m×r); encodes the tangential directions.
    pub directions: DenseMatrix,
    /// `B⊥ = B − V B̃` (n×m).
    pub deflated_input: DenseMatrix,
    /// `Ã = Wᵀ A V` (r×r).
    pub projected_a: DenseMatrix,
    /// `B̃ = Wᵀ B` (r×m).
    pub projected_b: DenseMatrix,
}

impl KrylovFactorization {
    pub fn order(&self) -> usize {
        self.basis.ncols()
    }

    /// `‖A V − V S − B L‖ / (‖A‖ ‖V‖)`.
    pub fn sylvester_residual(&self, a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        let v = &self.basis;
        let r = a * v - v * &self.interpolation - b * &self.directions;
        r.norm() / (a.norm() * v.norm()).max(f64::MIN_POSITIVE)
    }

    /// `‖A V − V Ã − B⊥ L‖ / (‖A‖ ‖V‖)`.
    pub fn deflated_residual(&self, a: &DenseMatrix) -> f64 {
        let v = &self.basis;
        let r = a * v - v * &self.projected_a - &self.deflated_input * &self.directions;
        r.norm() / (a.norm() * v.norm()).max(f64::MIN_POSITIVE)
    }
}

fn shifts_close(x: Complex64, y: Complex64) -> bool {
    (x - y).norm() <= SHIFT_TOL * x.norm().max(y.norm()).max(1.0)
}

fn directions_conjugate(x: &DVector<Complex64>, y: &DVector<Complex64>) -> bool {
    let scale = x.norm().max(y.norm()).max(f64::MIN_POSITIVE);
    (x - y.map(|z| z.conj())).norm() <= SHIFT_TOL * scale
}

/// Real orthonormal basis of `span{(σᵢ I − A)⁻¹ B bᵢ}`.
///
/// Complex shifts must come in conjugate pairs with conjugate directions; each
/// pair contributes the real and imaginary parts of one shifted solve.
pub fn krylov_basis(
    a: &DenseMatrix,
    b: &DenseMatrix,
    shifts: &[Complex64],
    dirs: &[DVector<Complex64>],
) -> Result<DenseMatrix> {
    let n = a.nrows();
    let m = b.ncols();
    if shifts.len() != dirs.len() {
        return Err(Error::DimensionMismatch {
            context: "krylov shifts and directions",
            expected: format!("{} directions", shifts.len()),
            found: format!("{}", dirs.len()),
        });
    }
    if shifts.is_empty() {
        return Err(Error::InvalidArgument("no shifts given".into()));
    }
    for (i, (s, d)) in shifts.iter().zip(dirs).enumerate() {
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::NonFinite("krylov shift"));
        }
        if d.len() != m {
            return Err(Error::DimensionMismatch {
                context: "tangential direction",
                expected: format!("length {m}"),
                found: format!("length {}", d.len()),
            });
        }
        if d.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            return Err(Error::InvalidArgument(format!("direction {i} is zero")));
        }
        if shifts[..i].iter().any(|t| shifts_close(*s, *t)) {
            return Err(Error::DuplicateShift(s.to_string()));
        }
    }

    let ac = to_complex(a);
    let bc = to_complex(b);
    let id = ComplexMatrix::identity(n, n);
    let mut columns: Vec<DVector<f64>> = Vec::with_capacity(shifts.len());
    for (i, (s, d)) in shifts.iter().zip(dirs).enumerate() {
        let real_shift = s.im == 0.0;
        if real_shift {
            if d.iter().any(|z| z.im != 0.0) {
                return Err(Error::ConjugacyViolation(s.to_string()));
            }
        } else {
            let partner = shifts
                .iter()
                .zip(dirs)
                .enumerate()
                .find(|(j, (t, _))| *j != i && shifts_close(**t, s.conj()));
            match partner {
                Some((_, (_, e))) if directions_conjugate(d, e) => {}
                _ => return Err(Error::ConjugacyViolation(s.to_string())),
            }
            if s.im < 0.0 {
                // covered by the partner with positive imaginary part
                continue;
            }
        }
        let shifted = &id * *s - &ac;
        let rhs = &bc * d;
        let rhs = ComplexMatrix::from_column_slice(n, 1, rhs.as_slice());
        let x = solve_complex(&shifted, &rhs).ok_or_else(|| Error::SingularShift(s.to_string()))?;
        let x = x.column(0);
        columns.push(x.map(|z| z.re));
        if !real_shift {
            columns.push(x.map(|z| z.im));
        }
    }

    orthonormalize(&DenseMatrix::from_columns(&columns))
}

fn orthonormalize(v: &DenseMatrix) -> Result<DenseMatrix> {
    let (n, r) = v.shape();
    if r > n {
        return Err(Error::RankDeficient);
    }
    ensure_finite(v, "krylov basis")?;
    let qr = v.clone().qr();
    let diag = qr.r().diagonal().map(f64::abs);
    let max = diag.max();
    if max == 0.0 || diag.min() <= BASIS_RANK_TOL * max {
        return Err(Error::RankDeficient);
    }
    Ok(qr.q())
}

/// Orthonormal input Krylov basis of `sys` for the given shifts and directions.
pub fn krylov_input_subspace(
    sys: &StateSpace,
    shifts: &[Complex64],
    dirs: &[DVector<Complex64>],
) -> Result<DenseMatrix> {
    krylov_basis(sys.a(), sys.b(), shifts, dirs)
}

/// Factorization of a Krylov basis `v` of `(a, b)`, using `W = V (VᵀV)⁻¹`.
pub(crate) fn factorize(
    a: &DenseMatrix,
    b: &DenseMatrix,
    v: &DenseMatrix,
) -> Result<KrylovFactorization> {
    let (n, r) = v.shape();
    if n != a.nrows() || r == 0 {
        return Err(Error::DimensionMismatch {
            context: "krylov basis",
            expected: format!("{n}xr with r >= 1", n = a.nrows()),
            found: dims(n, r),
        });
    }
    let gram = v.transpose() * v;
    let w = v * solve_real(&gram, &DenseMatrix::identity(r, r)).ok_or(Error::RankDeficient)?;
    let wt = w.transpose();
    let av = a * v;
    let projected_a = &wt * &av;
    let projected_b = &wt * b;
    let deflated_input = b - v * &projected_b;
    if deflated_input.norm() <= DEFLATION_TOL * b.norm() {
        return Err(Error::DegenerateDeflation);
    }
    let normal = deflated_input.transpose() * &deflated_input;
    let directions = solve_real(
        &normal,
        &(deflated_input.transpose() * (&av - v * &projected_a)),
    )
    .ok_or(Error::DegenerateDeflation)?;
    let interpolation = &projected_a - &projected_b * &directions;
    Ok(KrylovFactorization {
        basis: v.clone(),
        interpolation,
        directions,
        deflated_input,
        projected_a,
        projected_b,
    })
}

/// Factorization `A V − V S − B L = 0` of an input Krylov basis.
pub fn pork_factorization(sys: &StateSpace, v: &DenseMatrix) -> Result<KrylovFactorization> {
    factorize(sys.a(), sys.b(), v)
}

/// Rejects interpolation matrices with eigenvalues outside the open right half plane.
pub(crate) fn check_shift_signs(s: &DenseMatrix) -> Result<()> {
    for lam in eigenvalues(s)? {
        if lam.re <= 0.0 {
            return Err(Error::ShiftSignError(lam.to_string()));
        }
    }
    Ok(())
}

/// Interval-transformed basis `𝕍` for `A V − V S − B L = 0`:
/// `e^{At₁} V e^{−St₁} − e^{At₂} V e^{−St₂}` on a time window,
/// `𝓕(A) V + V 𝓕(−S)` on a frequency band and `V` itself otherwise.
pub fn limited_basis(
    a: &DenseMatrix,
    v: &DenseMatrix,
    s: &DenseMatrix,
    iv: &Interval,
) -> Result<DenseMatrix> {
    iv.validate()?;
    match *iv {
        Interval::Unlimited => Ok(v.clone()),
        Interval::Time { t1, t2 } => {
            let ms = -s;
            let mut out = matrix_exponential(a, t1)? * v * matrix_exponential(&ms, t1)?;
            if t2.is_finite() {
                out -= matrix_exponential(a, t2)? * v * matrix_exponential(&ms, t2)?;
            }
            Ok(out)
        }
        Interval::Frequency { w1, w2 } => {
            Ok(freq_limited_fn(a, w1, w2)? * v + v * freq_limited_fn(&-s, w1, w2)?)
        }
    }
}

/// Maps the unlimited `P⁻¹` (solution of `−SᵀX − XS + LᵀL = 0`) to its interval
/// counterpart without solving another Lyapunov equation.
pub(crate) fn limited_inverse_gramian(
    s: &DenseMatrix,
    x: &DenseMatrix,
    iv: &Interval,
) -> Result<DenseMatrix> {
    iv.validate()?;
    let ms = -s;
    match *iv {
        Interval::Unlimited => Ok(x.clone()),
        Interval::Time { t1, t2 } => {
            let e1 = matrix_exponential(&ms, t1)?;
            let mut out = e1.transpose() * x * &e1;
            if t2.is_finite() {
                let e2 = matrix_exponential(&ms, t2)?;
                out -= e2.transpose() * x * &e2;
            }
            Ok(out)
        }
        Interval::Frequency { w1, w2 } => {
            let f = freq_limited_fn(&ms, w1, w2)?;
            Ok(f.transpose() * x + x * f)
        }
    }
}

/// Window-scaled factors of a time-limited model on `[t₁, t₂]`.
///
/// Both the limited basis and the limited inverse Gramian carry
/// `E = e^{−S t₁}`, which underflows for fast shifts. With it factored out,
/// `𝕍 = 𝕍′ E` and `P⁻¹ = Eᵀ K E`, where
/// `𝕍′ = e^{At₁}V − e^{At₂}V e^{−S(t₂−t₁)} = −e^{At₁}∫₀^{t₂−t₁} e^{Aτ} B L e^{−Sτ} dτ`
/// and `K = X − e^{−Sᵀ(t₂−t₁)} X e^{−S(t₂−t₁)} = ∫₀^{t₂−t₁} e^{−Sᵀτ} LᵀL e^{−Sτ} dτ`
/// for the unlimited inverse Gramian `X`. Evaluating the integrals instead
/// of the end-point differences avoids cancellation for shifts that are slow
/// relative to the window. Returns `(𝕍′, K)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn window_factors(
    a: &DenseMatrix,
    b: &DenseMatrix,
    v: &DenseMatrix,
    s: &DenseMatrix,
    l: &DenseMatrix,
    x: &DenseMatrix,
    t1: f64,
    t2: f64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let start = matrix_exponential(a, t1)?;
    if !t2.is_finite() {
        return Ok((start * v, x.clone()));
    }
    let span = t2 - t1;
    let ms = -s;
    let (sweep, _, _) = flow_integral(a, &(b * l), &ms, span)?;
    let (mut inner, _, _) = flow_integral(&-s.transpose(), &(l.transpose() * l), &ms, span)?;
    symmetrize(&mut inner);
    Ok((-(start * sweep), inner))
}

/// Pseudo-optimal model for `iv`.
///
/// The model is realized as `(−Sᵀ, −Lᵀ, C 𝕍 P)`, where `P⁻¹` is the interval
/// Gramian of `(−Sᵀ, Lᵀ)`. This is the transfer function of
/// `(−P Sᵀ P⁻¹, −P Lᵀ, C 𝕍)` without the similarity by `P⁻¹`, which is badly
/// conditioned for limited intervals. On a time window `C 𝕍 P` is assembled
/// from [`window_factors`] as `C 𝕍′ K⁻¹ e^{Sᵀt₁}`.
pub fn pseudo_optimal_rom(
    a: &DenseMatrix,
    c: &DenseMatrix,
    fact: &KrylovFactorization,
    iv: &Interval,
) -> Result<StateSpace> {
    let s = &fact.interpolation;
    check_shift_signs(s)?;
    iv.validate()?;
    let st = s.transpose();
    let lt = fact.directions.transpose();
    let output = if let Interval::Time { t1, t2 } = *iv {
        let b = &fact.deflated_input + &fact.basis * &fact.projected_b;
        let x = solve_lyapunov(&-&st, &(&lt * &fact.directions))?;
        let (window, inner) = window_factors(a, &b, &fact.basis, s, &fact.directions, &x, t1, t2)?;
        let core = spd_inverse(&inner).ok_or(Error::SingularEquation)?;
        c * window * core * matrix_exponential(&st, t1)?
    } else {
        let x = interval_lyapunov(&-&st, &lt, iv)?;
        let p = spd_inverse(&x).ok_or(Error::SingularEquation)?;
        c * limited_basis(a, &fact.basis, s, iv)? * p
    };
    StateSpace::new(-st, -lt, output)
}

pub fn pork_rom(fact: &KrylovFactorization, sys: &StateSpace) -> Result<StateSpace> {
    pseudo_optimal_rom(sys.a(), sys.c(), fact, &Interval::Unlimited)
}

pub fn tlpork_rom(
    fact: &KrylovFactorization,
    sys: &StateSpace,
    t1: f64,
    t2: f64,
) -> Result<StateSpace> {
    pseudo_optimal_rom(sys.a(), sys.c(), fact, &Interval::time(t1, t2)?)
}

pub fn flpork_rom(
    fact: &KrylovFactorization,
    sys: &StateSpace,
    w1: f64,
    w2: f64,
) -> Result<StateSpace> {
    pseudo_optimal_rom(sys.a(), sys.c(), fact, &Interval::frequency(w1, w2)?)
}

/// Verification of the transformed basis: substitutes `𝕍` into the interval
/// Sylvester equation `A 𝕍 − 𝕍 S − F = 0`, where `F` is `B L` restricted to
/// `iv`, and returns the relative residual.
pub fn limited_basis_residual(
    a: &DenseMatrix,
    b: &DenseMatrix,
    fact: &KrylovFactorization,
    iv: &Interval,
) -> Result<f64> {
    let s = &fact.interpolation;
    let basis = limited_basis(a, &fact.basis, s, iv)?;
    let forcing = interval_forcing(a, b, &-s.transpose(), &fact.directions.transpose(), iv)?;
    let r = a * &basis - &basis * s - &forcing;
    let scale = a.norm() * basis.norm() + basis.norm() * s.norm() + forcing.norm();
    Ok(r.norm() / scale.max(f64::MIN_POSITIVE))
}
