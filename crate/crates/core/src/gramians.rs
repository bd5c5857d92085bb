//! Standard, time-limited and frequency-limited Gramians.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{
    freq_limited_fn, matrix_exponential, solve_lyapunov, solve_sylvester, DenseMatrix,
};
use crate::sys::StateSpace;

/// Time window `[t1, t2]`, two-sided frequency band `±[w1, w2]`, or the whole axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    /// `t2` may be `f64::INFINITY`.
    Time {
        t1: f64,
        t2: f64,
    },
    Frequency {
        w1: f64,
        w2: f64,
    },
    Unlimited,
}

impl Interval {
    pub fn time(t1: f64, t2: f64) -> Result<Self> {
        let iv = Interval::Time { t1, t2 };
        iv.validate()?;
        Ok(iv)
    }

    pub fn frequency(w1: f64, w2: f64) -> Result<Self> {
        let iv = Interval::Frequency { w1, w2 };
        iv.validate()?;
        Ok(iv)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Interval::Time { t1, t2 } => {
                if t1.is_finite() && t1 >= 0.0 && t2 > t1 && !t2.is_nan() {
                    Ok(())
                } else {
                    Err(Error::InvalidInterval(format!(
                        "time window [{t1}, {t2}] must satisfy 0 <= t1 < t2 <= inf"
                    )))
                }
            }
            Interval::Frequency { w1, w2 } => {
                if w1.is_finite() && w2.is_finite() && w1 >= 0.0 && w2 > w1 {
                    Ok(())
                } else {
                    Err(Error::InvalidInterval(format!(
                        "frequency band [{w1}, {w2}] must satisfy 0 <= w1 < w2 < inf"
                    )))
                }
            }
            Interval::Unlimited => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Interval::Time { .. } => "time",
            Interval::Frequency { .. } => "freq",
            Interval::Unlimited => "unlimited",
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Time { t1, t2 } if t2.is_infinite() => write!(f, "time:{t1},inf"),
            Interval::Time { t1, t2 } => write!(f, "time:{t1},{t2}"),
            Interval::Frequency { w1, w2 } => write!(f, "freq:{w1},{w2}"),
            Interval::Unlimited => write!(f, "unlimited"),
        }
    }
}

/// Parses `unlimited`, `time:<t1>,<t2>` (with `inf` allowed) or `freq:<w1>,<w2>`.
impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("unlimited") {
            return Ok(Interval::Unlimited);
        }
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInterval(format!("cannot parse interval '{s}'")))?;
        let bounds: Vec<f64> = rest
            .split(',')
            .map(|x| parse_bound(x.trim()))
            .collect::<Result<_>>()?;
        if bounds.len() != 2 {
            return Err(Error::InvalidInterval(format!(
                "interval '{s}' needs two bounds"
            )));
        }
        match kind.trim().to_ascii_lowercase().as_str() {
            "time" | "t" => Interval::time(bounds[0], bounds[1]),
            "freq" | "frequency" | "f" => Interval::frequency(bounds[0], bounds[1]),
            other => Err(Error::InvalidInterval(format!(
                "unknown interval kind '{other}'"
            ))),
        }
    }
}

fn parse_bound(x: &str) -> Result<f64> {
    match x.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        _ => x
            .parse()
            .map_err(|_| Error::InvalidInterval(format!("cannot parse bound '{x}'"))),
    }
}

/// Controllability (`p`) and observability (`q`) Gramians.
#[derive(Debug, Clone, PartialEq)]
pub struct GramianPair {
    pub p: DenseMatrix,
    pub q: DenseMatrix,
}

/// Forcing term that restricts the product `B₁ B₂ᵀ` to the interval, so that
/// `A₁ X + X A₂ᵀ + F = 0` yields the (mixed) interval Gramian.
pub(crate) fn interval_forcing(
    a1: &DenseMatrix,
    b1: &DenseMatrix,
    a2: &DenseMatrix,
    b2: &DenseMatrix,
    iv: &Interval,
) -> Result<DenseMatrix> {
    iv.validate()?;
    let bb = b1 * b2.transpose();
    let forcing = match *iv {
        Interval::Unlimited => bb,
        Interval::Time { t1, t2 } => {
            let mut f = matrix_exponential(a1, t1)? * &bb * matrix_exponential(a2, t1)?.transpose();
            if t2.is_finite() {
                f -= matrix_exponential(a1, t2)? * &bb * matrix_exponential(a2, t2)?.transpose();
            }
            f
        }
        Interval::Frequency { w1, w2 } => {
            let f1 = freq_limited_fn(a1, w1, w2)?;
            let f2 = freq_limited_fn(a2, w1, w2)?;
            &f1 * &bb + &bb * f2.transpose()
        }
    };
    Ok(forcing)
}

pub(crate) fn interval_lyapunov(
    a: &DenseMatrix,
    b: &DenseMatrix,
    iv: &Interval,
) -> Result<DenseMatrix> {
    solve_lyapunov(a, &interval_forcing(a, b, a, b, iv)?)
}

fn interval_sylvester(
    a1: &DenseMatrix,
    b1: &DenseMatrix,
    a2: &DenseMatrix,
    b2: &DenseMatrix,
    iv: &Interval,
) -> Result<DenseMatrix> {
    solve_sylvester(a1, &a2.transpose(), &interval_forcing(a1, b1, a2, b2, iv)?)
}

pub fn controllability_gramian(sys: &StateSpace, iv: &Interval) -> Result<DenseMatrix> {
    sys.require_hurwitz()?;
    interval_lyapunov(sys.a(), sys.b(), iv)
}

pub fn observability_gramian(sys: &StateSpace, iv: &Interval) -> Result<DenseMatrix> {
    sys.require_hurwitz()?;
    interval_lyapunov(&sys.a().transpose(), &sys.c().transpose(), iv)
}

pub fn gramians(sys: &StateSpace, iv: &Interval) -> Result<GramianPair> {
    Ok(GramianPair {
        p: controllability_gramian(sys, iv)?,
        q: observability_gramian(sys, iv)?,
    })
}

/// Mixed Gramians `(P₂, Q₂)` between a system and a reduced model, both `n×r`.
pub fn error_cross_gramians(
    sys: &StateSpace,
    rom: &StateSpace,
    iv: &Interval,
) -> Result<(DenseMatrix, DenseMatrix)> {
    sys.require_hurwitz()?;
    rom.require_hurwitz()?;
    check_io(sys, rom)?;
    let p2 = interval_sylvester(sys.a(), sys.b(), rom.a(), rom.b(), iv)?;
    let q2 = interval_sylvester(
        &sys.a().transpose(),
        &sys.c().transpose(),
        &rom.a().transpose(),
        &rom.c().transpose(),
        iv,
    )?;
    Ok((p2, q2))
}

pub(crate) fn check_io(sys: &StateSpace, rom: &StateSpace) -> Result<()> {
    if sys.inputs() != rom.inputs() || sys.outputs() != rom.outputs() {
        return Err(Error::DimensionMismatch {
            context: "reduced model input/output dimensions",
            expected: format!("{} inputs, {} outputs", sys.inputs(), sys.outputs()),
            found: format!("{} inputs, {} outputs", rom.inputs(), rom.outputs()),
        });
    }
    Ok(())
}
