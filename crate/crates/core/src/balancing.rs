//! Square-root balanced truncation over an interval, optionally driven by
//! externally supplied (e.g. cumulative low-rank) Gramians.

use nalgebra::SVD;
use num_complex::Complex64;

use crate::cure::GramianApprox;
use crate::error::{dims, Error, Result};
use crate::gramians::{gramians, GramianPair, Interval};
use crate::linalg::{psd_factor, DenseMatrix};
use crate::sys::StateSpace;

/// Singular values below `HSV_RANK_TOL · n · σ₁` count as zero.
const HSV_RANK_TOL: f64 = f64::EPSILON;

/// Square-root factors `P = p pᵀ`, `Q = q qᵀ` (n×k each, k may differ).
#[derive(Debug, Clone, PartialEq)]
pub struct GramianFactors {
    pub p: DenseMatrix,
    pub q: DenseMatrix,
}

impl GramianFactors {
    /// Factors dense symmetric PSD Gramians; negative round-off is clipped.
    pub fn from_dense(pair: &GramianPair) -> Self {
        Self {
            p: psd_factor(&pair.p),
            q: psd_factor(&pair.q),
        }
    }

    /// Factors low-rank approximations `𝕍 ℙ 𝕍ᵀ` as `𝕍 chol(ℙ)` without
    /// forming the dense product.
    pub fn from_low_rank(p: &GramianApprox, q: &GramianApprox) -> Self {
        Self {
            p: low_rank_factor(p),
            q: low_rank_factor(q),
        }
    }
}

fn low_rank_factor(g: &GramianApprox) -> DenseMatrix {
    let l = match g.core.clone().cholesky() {
        Some(ch) => ch.l(),
        None => psd_factor(&g.core),
    };
    &g.factor * l
}

#[derive(Debug, Clone)]
pub struct BalancedTruncation {
    pub rom: StateSpace,
    /// Hankel-type singular values `sqrt(eig(P Q))`, descending, length n.
    pub hsv: Vec<f64>,
    /// Whether the reduced model is Hurwitz; limited variants need not be.
    pub stable: bool,
    /// Set when fewer than the requested number of singular values are
    /// nonzero; the model then has the achievable order instead.
    pub rank_collapse: Option<Error>,
}

/// Truncates `sys` to order `r` in the coordinates balancing the interval
/// Gramians (or the supplied factors).
pub fn balanced_truncation(
    sys: &StateSpace,
    r: usize,
    iv: &Interval,
    factors: Option<&GramianFactors>,
) -> Result<BalancedTruncation> {
    sys.require_hurwitz()?;
    let n = sys.order();
    if r == 0 || r >= n {
        return Err(Error::InvalidArgument(format!(
            "truncation order {r} must satisfy 1 <= r < {n}"
        )));
    }
    let owned;
    let f = match factors {
        Some(f) => {
            for (m, name) in [
                (&f.p, "controllability factor"),
                (&f.q, "observability factor"),
            ] {
                if m.nrows() != n {
                    return Err(Error::DimensionMismatch {
                        context: name,
                        expected: format!("{n} rows"),
                        found: dims(m.nrows(), m.ncols()),
                    });
                }
            }
            f
        }
        None => {
            owned = GramianFactors::from_dense(&gramians(sys, iv)?);
            &owned
        }
    };

    let cross = f.q.transpose() * &f.p;
    let svd = SVD::new(cross, true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::NonFinite("balanced_truncation: SVD")),
    };
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let mut hsv = sigma.clone();
    hsv.resize(n, 0.0);
    hsv.truncate(n);

    let top = sigma.first().copied().unwrap_or(0.0);
    let available = sigma
        .iter()
        .take_while(|&&s| s > HSV_RANK_TOL * n as f64 * top && s > 0.0)
        .count();
    if available == 0 {
        return Err(Error::RankCollapse {
            requested: r,
            available,
        });
    }
    let kept = r.min(available);
    let rank_collapse = (kept < r).then_some(Error::RankCollapse {
        requested: r,
        available,
    });

    let mut right = DenseMatrix::zeros(n, kept);
    let mut left = DenseMatrix::zeros(kept, n);
    let lp = &f.p;
    let lqt = f.q.transpose();
    for (k, &idx) in order.iter().take(kept).enumerate() {
        let scale = sigma[k].sqrt().recip();
        right.set_column(k, &((lp * vt.row(idx).transpose()) * scale));
        left.set_row(k, &((u.column(idx).transpose() * &lqt) * scale));
    }
    let rom = StateSpace::new(&left * sys.a() * &right, &left * sys.b(), sys.c() * &right)?;
    Ok(BalancedTruncation {
        stable: rom.is_hurwitz(),
        rom,
        hsv,
        rank_collapse,
    })
}

/// Largest singular value of `H(jω)` at every grid frequency.
pub fn sigma_response(sys: &StateSpace, omegas: &[f64]) -> Result<Vec<f64>> {
    omegas
        .iter()
        .map(|&w| {
            let h = sys.transfer_eval(Complex64::new(0.0, w))?;
            Ok(h.singular_values().max())
        })
        .collect()
}

/// In-band error from the sigma response of `sys − rom`:
/// `sqrt((1/π) ∫_{ω₁}^{ω₂} σ_max(H(jω) − H_r(jω))² dω)` by the trapezoidal rule
/// on `points` uniform nodes. For single-input single-output models it is
/// the band-limited ℋ₂ error; unlike the Gramian form it does not need a
/// stable reduced model.
pub fn sigma_band_error(
    sys: &StateSpace,
    rom: &StateSpace,
    w1: f64,
    w2: f64,
    points: usize,
) -> Result<f64> {
    Interval::frequency(w1, w2)?;
    if points < 2 || !w2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sigma band error needs a finite band and at least 2 nodes, got {points}"
        )));
    }
    let grid = uniform_grid(w1, w2, points);
    let sigma = sigma_response(&sys.error_system(rom)?, &grid)?;
    let h = (w2 - w1) / (points - 1) as f64;
    let sum: f64 = sigma.iter().map(|s| s * s).sum::<f64>()
        - 0.5 * (sigma[0].powi(2) + sigma[points - 1].powi(2));
    Ok((sum * h / std::f64::consts::PI).sqrt())
}

/// `points` uniformly spaced values from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (points - 1) as f64;
            (0..points).map(|k| lo + h * k as f64).collect()
        }
    }
}
