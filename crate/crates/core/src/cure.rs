//! Cumulative reduction: the model is grown a few interpolation conditions at a
//! time, and at every step a (limited) pseudo-optimal model can be emitted for
//! any interval from the same accumulators.
//!
//! Input-side (V-type) accumulation keeps
//! `A V_tot − V_tot S_tot − B L_tot = 0` with a block-diagonal `P_tot`. Each
//! step builds its Krylov basis from the current deflated input `B⊥`, runs
//! the PORK factorization on it, and deflates `B⊥ ← B⊥ − V B̄` with
//! `B̄ = −P Lᵀ`. Output-side (W-type) accumulation is the same procedure on
//! the dual system `(Aᵀ, Cᵀ, Bᵀ)`; its emitted models are transposed back.
//!
//! Because every emitted model is pseudo-optimal for its interval and nests
//! the previous one, the limited ℋ₂ error cannot grow from one step to the
//! next.

use log::warn;
use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gramians::Interval;
use crate::linalg::{
    block_diag, hstack, matrix_exponential, solve_lyapunov, spd_inverse, symmetrize, vstack,
    DenseMatrix,
};
use crate::pork::{
    factorize, krylov_basis, limited_basis, limited_inverse_gramian, window_factors,
};
use crate::sys::StateSpace;

/// Window-start gains `‖e^{Sᵀt₁}‖` above this are reported when emitting.
const TWIST_WARN: f64 = 1e8;

/// Relative size below which the deflated map, measured against the original
/// input map, counts as fully captured.
const CAPTURE_TOL: f64 = 1e-10;

/// Smallest singular value of the column-normalized accumulated basis below
/// which it counts as rank deficient.
const BASIS_RANK_TOL: f64 = 1e-10;

/// Which reduction subspace is accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Input Krylov subspace (V-type); directions are input vectors.
    Input,
    /// Output Krylov subspace (W-type); directions are output vectors.
    Output,
}

#[derive(Debug, Clone)]
pub struct CureState {
    side: Side,
    /// The system for input-side accumulation, its dual for output-side.
    work: StateSpace,
    steps: usize,
    shifts: Vec<Complex64>,
    basis: DenseMatrix,
    interpolation: DenseMatrix,
    directions: DenseMatrix,
    /// Block-diagonal `P_tot`.
    gram: DenseMatrix,
    /// Block-diagonal `P_tot⁻¹`, kept from the per-step Lyapunov solves.
    gram_inv: DenseMatrix,
    /// Stacked `B̄ = −P Lᵀ` blocks.
    input_images: DenseMatrix,
    deflated: DenseMatrix,
}

/// Approximate limited Gramian `factor · core · factorᵀ`.
///
/// For a time window the factor is `𝕍 e^{St₁}` and the core is scaled to
/// match, which keeps both well defined when `e^{−St₁}` underflows.
#[derive(Debug, Clone, PartialEq)]
pub struct GramianApprox {
    pub dense: DenseMatrix,
    /// `𝕍` (n×ρ).
    pub factor: DenseMatrix,
    /// `ℙ` (ρ×ρ), symmetric positive definite.
    pub core: DenseMatrix,
}

impl CureState {
    pub fn new(sys: &StateSpace, side: Side) -> Result<Self> {
        sys.require_hurwitz()?;
        let work = match side {
            Side::Input => sys.clone(),
            Side::Output => sys.dual(),
        };
        let n = work.order();
        let m = work.inputs();
        Ok(Self {
            side,
            deflated: work.b().clone(),
            work,
            steps: 0,
            shifts: Vec::new(),
            basis: DenseMatrix::zeros(n, 0),
            interpolation: DenseMatrix::zeros(0, 0),
            directions: DenseMatrix::zeros(m, 0),
            gram: DenseMatrix::zeros(0, 0),
            gram_inv: DenseMatrix::zeros(0, 0),
            input_images: DenseMatrix::zeros(0, m),
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Accumulated order ρ.
    pub fn order(&self) -> usize {
        self.basis.ncols()
    }

    /// All shifts used so far, in order.
    pub fn shifts(&self) -> &[Complex64] {
        &self.shifts
    }

    /// `V_tot` (input side) or `W_tot` (output side), n×ρ.
    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    /// `S_tot`, ρ×ρ.
    pub fn interpolation(&self) -> &DenseMatrix {
        &self.interpolation
    }

    /// `L_tot`: m×ρ on the input side, p×ρ (the transpose of the output-side
    /// convention) on the output side.
    pub fn directions(&self) -> &DenseMatrix {
        &self.directions
    }

    /// Block-diagonal `P_tot` (or `Q_tot`).
    pub fn block_gramian(&self) -> &DenseMatrix {
        &self.gram
    }

    /// Deflated input `B⊥` (n×m) or deflated output `C⊥` (p×n).
    pub fn deflated_map(&self) -> DenseMatrix {
        match self.side {
            Side::Input => self.deflated.clone(),
            Side::Output => self.deflated.transpose(),
        }
    }

    /// `‖A V_tot − V_tot S_tot − B L_tot‖ / (‖A‖ ‖V_tot‖)` for the working system.
    pub fn invariant_residual(&self) -> f64 {
        let a = self.work.a();
        let v = &self.basis;
        let r = a * v - v * &self.interpolation - self.work.b() * &self.directions;
        r.norm() / (a.norm() * v.norm()).max(f64::MIN_POSITIVE)
    }

    /// Adds interpolation conditions at `shifts` along `dirs`.
    ///
    /// On error the state is left untouched.
    pub fn step(&mut self, shifts: &[Complex64], dirs: &[DVector<Complex64>]) -> Result<()> {
        if let Some(s) = shifts.iter().find(|s| s.re.is_nan() || s.re <= 0.0) {
            return Err(Error::ShiftSignError(s.to_string()));
        }
        let a = self.work.a();
        // the accumulated basis must stay a proper subspace of the state space
        if self.order() + shifts.len() >= a.nrows() {
            return Err(Error::DegenerateDeflation);
        }
        let v = krylov_basis(a, &self.deflated, shifts, dirs)?;
        let combined = hstack(&self.basis, &v);
        if min_normalized_singular_value(&combined) <= BASIS_RANK_TOL {
            return Err(Error::RankDeficient);
        }
        let f = factorize(a, &self.deflated, &v)?;
        let s = f.interpolation;
        let l = f.directions;
        let lt = l.transpose();
        let x = solve_lyapunov(&-s.transpose(), &(&lt * &l))?;
        let p = spd_inverse(&x).ok_or(Error::SingularEquation)?;
        let image = -(&p * &lt);

        let coupling = -(&self.input_images * &l);
        let top = hstack(&self.interpolation, &coupling);
        let bottom = hstack(&DenseMatrix::zeros(s.nrows(), self.order()), &s);
        let interpolation = vstack(&top, &bottom);
        let deflated = &self.deflated - &v * &image;
        if deflated.norm() <= CAPTURE_TOL * self.work.b().norm() {
            return Err(Error::DegenerateDeflation);
        }

        self.basis = combined;
        self.interpolation = interpolation;
        self.directions = hstack(&self.directions, &l);
        self.gram = block_diag(&self.gram, &p);
        self.gram_inv = block_diag(&self.gram_inv, &x);
        self.input_images = vstack(&self.input_images, &image);
        self.deflated = deflated;
        self.shifts.extend_from_slice(shifts);
        self.steps += 1;
        Ok(())
    }

    /// Factors of the emitted output map `C 𝕍 ℙ` and of the Gramian
    /// approximation `𝕍 ℙ 𝕍ᵀ`.
    ///
    /// On a time window the `e^{−S t₁}` factors cancel: with the window
    /// factors `(𝕍′, K)`, `𝕍 ℙ 𝕍ᵀ = 𝕍′K⁻¹𝕍′ᵀ` and `𝕍 ℙ = 𝕍′K⁻¹ e^{Sᵀt₁}`.
    fn limited_factors(&self, iv: &Interval) -> Result<LimitedFactors> {
        if self.steps == 0 {
            return Err(Error::EmptyState);
        }
        iv.validate()?;
        let a = self.work.a();
        let s = &self.interpolation;
        let x = &self.gram_inv;
        match *iv {
            Interval::Unlimited => Ok(LimitedFactors {
                factor: self.basis.clone(),
                core: self.gram.clone(),
                twist: None,
            }),
            Interval::Time { t1, t2 } => {
                let (factor, inner) = window_factors(
                    a,
                    self.work.b(),
                    &self.basis,
                    s,
                    &self.directions,
                    x,
                    t1,
                    t2,
                )?;
                let core = spd_inverse(&inner).ok_or(Error::SingularEquation)?;
                let twist = (t1 > 0.0)
                    .then(|| matrix_exponential(&s.transpose(), t1))
                    .transpose()?;
                Ok(LimitedFactors {
                    factor,
                    core,
                    twist,
                })
            }
            Interval::Frequency { .. } => {
                let factor = limited_basis(a, &self.basis, s, iv)?;
                let inv = limited_inverse_gramian(s, x, iv)?;
                let core = spd_inverse(&inv).ok_or(Error::SingularEquation)?;
                Ok(LimitedFactors {
                    factor,
                    core,
                    twist: None,
                })
            }
        }
    }

    /// Pseudo-optimal model for `iv` built from the current accumulators.
    pub fn emit(&self, iv: &Interval) -> Result<StateSpace> {
        let f = self.limited_factors(iv)?;
        let mut c = self.work.c() * f.factor * f.core;
        if let Some(t) = f.twist {
            let gain = t.norm();
            if gain > TWIST_WARN {
                warn!(
                    "emitted model for {iv} carries a gain of {gain:e} from fast shifts; \
                     its limited norms lose precision"
                );
            }
            c *= t;
        }
        let rom = StateSpace::new(
            -self.interpolation.transpose(),
            -self.directions.transpose(),
            c,
        )?;
        Ok(match self.side {
            Side::Input => rom,
            Side::Output => rom.dual(),
        })
    }

    /// Low-rank approximation of the limited controllability (input side) or
    /// observability (output side) Gramian; it grows monotonically towards
    /// the exact one.
    pub fn gramian_approx(&self, iv: &Interval) -> Result<GramianApprox> {
        let LimitedFactors { factor, core, .. } = self.limited_factors(iv)?;
        let mut dense = &factor * &core * factor.transpose();
        symmetrize(&mut dense);
        Ok(GramianApprox {
            dense,
            factor,
            core,
        })
    }
}

struct LimitedFactors {
    factor: DenseMatrix,
    core: DenseMatrix,
    /// Right factor of the output map beyond `factor · core`, if any.
    twist: Option<DenseMatrix>,
}

/// Smallest singular value of `m` after scaling every column to unit length.
fn min_normalized_singular_value(m: &DenseMatrix) -> f64 {
    let mut scaled = m.clone();
    for mut col in scaled.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    scaled
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
