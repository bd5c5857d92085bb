//! ℋ₂, time-limited ℋ₂ and frequency-limited ℋ₂ norms and error norms.

use log::warn;

use crate::error::Result;
use crate::gramians::{
    check_io, controllability_gramian, error_cross_gramians, gramians, Interval,
};
use crate::linalg::DenseMatrix;
use crate::sys::StateSpace;

/// Relative disagreement tolerated between the `P`- and `Q`-based traces.
const TRACE_CONSISTENCY: f64 = 1e-8;
/// Squared errors below `-CLAMP_WARN · ‖H‖²` are reported before clamping.
const CLAMP_WARN: f64 = 1e-8;

fn trace_sandwich(c: &DenseMatrix, x: &DenseMatrix, d: &DenseMatrix) -> f64 {
    (c * x * d.transpose()).trace()
}

/// Squared limited norm from both Gramians: `(tr(C P Cᵀ), tr(Bᵀ Q B))`.
pub fn limited_h2_norm_sq_pair(sys: &StateSpace, iv: &Interval) -> Result<(f64, f64)> {
    let g = gramians(sys, iv)?;
    let via_p = trace_sandwich(sys.c(), &g.p, sys.c());
    let bt = sys.b().transpose();
    let via_q = trace_sandwich(&bt, &g.q, &bt);
    Ok((via_p, via_q))
}

pub fn limited_h2_norm_sq(sys: &StateSpace, iv: &Interval) -> Result<f64> {
    let (via_p, via_q) = limited_h2_norm_sq_pair(sys, iv)?;
    let scale = via_p.abs().max(via_q.abs()).max(f64::MIN_POSITIVE);
    if (via_p - via_q).abs() > TRACE_CONSISTENCY * scale {
        warn!("limited norm traces disagree: tr(CPCᵀ) = {via_p:e}, tr(BᵀQB) = {via_q:e} ({iv})");
    }
    Ok(via_p)
}

pub fn limited_h2_norm(sys: &StateSpace, iv: &Interval) -> Result<f64> {
    Ok(limited_h2_norm_sq(sys, iv)?.max(0.0).sqrt())
}

/// The three Gramian traces making up the squared error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorTerms {
    /// `tr(C P Cᵀ)`
    pub full: f64,
    /// `tr(C_r P_r C_rᵀ)`
    pub reduced: f64,
    /// `tr(C P₂ C_rᵀ)`
    pub cross: f64,
}

impl ErrorTerms {
    /// Unclamped `‖H − H_r‖²`.
    pub fn error_sq(&self) -> f64 {
        self.full + self.reduced - 2.0 * self.cross
    }

    /// `‖H − H_r‖² − (‖H‖² − ‖H_r‖²)`.
    pub fn pseudo_optimality_gap(&self) -> f64 {
        self.error_sq() - (self.full - self.reduced)
    }

    pub fn error(&self) -> f64 {
        let e2 = self.error_sq();
        if e2 < -CLAMP_WARN * self.full.abs() {
            warn!("squared error {e2:e} is negative beyond round-off; clamping to zero");
        }
        e2.max(0.0).sqrt()
    }
}

pub fn error_terms(sys: &StateSpace, rom: &StateSpace, iv: &Interval) -> Result<ErrorTerms> {
    check_io(sys, rom)?;
    let p = controllability_gramian(sys, iv)?;
    let pr = controllability_gramian(rom, iv)?;
    let (p2, _) = error_cross_gramians(sys, rom, iv)?;
    Ok(ErrorTerms {
        full: trace_sandwich(sys.c(), &p, sys.c()),
        reduced: trace_sandwich(rom.c(), &pr, rom.c()),
        cross: trace_sandwich(sys.c(), &p2, rom.c()),
    })
}

/// `‖H − H_r‖` over the interval, from the Gramian expansion.
pub fn limited_h2_error(sys: &StateSpace, rom: &StateSpace, iv: &Interval) -> Result<f64> {
    Ok(error_terms(sys, rom, iv)?.error())
}

/// `‖H − H_r‖² − (‖H‖² − ‖H_r‖²)`; zero iff the model is pseudo-optimal for `iv`.
pub fn pseudo_optimality_gap(sys: &StateSpace, rom: &StateSpace, iv: &Interval) -> Result<f64> {
    Ok(error_terms(sys, rom, iv)?.pseudo_optimality_gap())
}
