//! Continuous-time LTI systems `ẋ = A x + B u`, `y = C x` (no feedthrough).

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{dims, Error, Result};
use crate::linalg::{
    block_diag, eig, ensure_finite, hstack, matrix_exponential, solve_complex, solve_real,
    spectral_abscissa, to_complex, vstack, ComplexMatrix, DenseMatrix,
};

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: DenseMatrix,
    b: DenseMatrix,
    c: DenseMatrix,
}

impl StateSpace {
    pub fn new(a: DenseMatrix, b: DenseMatrix, c: DenseMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "state matrix A",
                expected: "square".into(),
                found: dims(a.nrows(), a.ncols()),
            });
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch {
                context: "input matrix B",
                expected: format!("{n} rows"),
                found: dims(b.nrows(), b.ncols()),
            });
        }
        if c.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "output matrix C",
                expected: format!("{n} columns"),
                found: dims(c.nrows(), c.ncols()),
            });
        }
        ensure_finite(&a, "state matrix A")?;
        ensure_finite(&b, "input matrix B")?;
        ensure_finite(&c, "output matrix C")?;
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn into_parts(self) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
        (self.a, self.b, self.c)
    }

    /// Largest real part of the poles.
    pub fn spectral_abscissa(&self) -> Result<f64> {
        spectral_abscissa(&self.a)
    }

    pub fn is_hurwitz(&self) -> bool {
        matches!(self.spectral_abscissa(), Ok(x) if x < 0.0)
    }

    pub fn require_hurwitz(&self) -> Result<()> {
        let alpha = self.spectral_abscissa()?;
        if alpha < 0.0 {
            Ok(())
        } else {
            Err(Error::NotHurwitz(alpha))
        }
    }

    /// Dual system `(Aᵀ, Cᵀ, Bᵀ)`; its transfer function is `H(s)ᵀ`.
    pub fn dual(&self) -> Self {
        Self {
            a: self.a.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
        }
    }

    /// Realization in the coordinates `x = t z`: `(t⁻¹ A t, t⁻¹ B, C t)`.
    pub fn similarity(&self, t: &DenseMatrix) -> Result<Self> {
        let n = self.order();
        let tinv = solve_real(t, &DenseMatrix::identity(n, n)).ok_or(Error::RankDeficient)?;
        Self::new(&tinv * &self.a * t, &tinv * &self.b, &self.c * t)
    }

    /// `H(s) = C (sI − A)⁻¹ B`.
    pub fn transfer_eval(&self, s: Complex64) -> Result<ComplexMatrix> {
        let n = self.order();
        let shifted = ComplexMatrix::identity(n, n) * s - to_complex(&self.a);
        let x = solve_complex(&shifted, &to_complex(&self.b))
            .ok_or_else(|| Error::SingularShift(s.to_string()))?;
        Ok(to_complex(&self.c) * x)
    }

    /// Impulse response `C e^{At} B`.
    pub fn impulse(&self, t: f64) -> Result<DenseMatrix> {
        Ok(&self.c * matrix_exponential(&self.a, t)? * &self.b)
    }

    pub fn pole_residue(&self) -> Result<PoleResidue> {
        let n = self.order();
        let e = eig(&self.a)?;
        if e.condition > DEFECTIVE_CONDITION {
            return Err(Error::DefectiveMatrix(e.condition));
        }
        let left = solve_complex(&e.vectors, &ComplexMatrix::identity(n, n))
            .ok_or(Error::DefectiveMatrix(f64::INFINITY))?;
        let cv = to_complex(&self.c) * &e.vectors;
        let wb = left * to_complex(&self.b);
        Ok(PoleResidue {
            poles: e.values,
            output_residues: cv.column_iter().map(|c| c.into_owned()).collect(),
            input_residues: wb.row_iter().map(|r| r.transpose()).collect(),
        })
    }

    /// Realization of `H(s) − H_other(s)`.
    pub fn error_system(&self, other: &StateSpace) -> Result<Self> {
        if self.inputs() != other.inputs() || self.outputs() != other.outputs() {
            return Err(Error::DimensionMismatch {
                context: "error system",
                expected: format!("{} inputs, {} outputs", self.inputs(), self.outputs()),
                found: format!("{} inputs, {} outputs", other.inputs(), other.outputs()),
            });
        }
        Self::new(
            block_diag(&self.a, &other.a),
            vstack(&self.b, &other.b),
            hstack(&self.c, &-&other.c),
        )
    }

    /// Oblique projection `(Wᵀ A V, Wᵀ B, C V)` after rescaling `W` so `WᵀV = I`.
    pub fn project(&self, v: &DenseMatrix, w: &DenseMatrix) -> Result<Self> {
        let n = self.order();
        if v.nrows() != n || w.nrows() != n || v.ncols() != w.ncols() {
            return Err(Error::DimensionMismatch {
                context: "projection bases",
                expected: format!("two {n}xr matrices"),
                found: format!(
                    "{} and {}",
                    dims(v.nrows(), v.ncols()),
                    dims(w.nrows(), w.ncols())
                ),
            });
        }
        let vtw = v.transpose() * w;
        let r = v.ncols();
        let inv = solve_real(&vtw, &DenseMatrix::identity(r, r)).ok_or(Error::RankDeficient)?;
        let w = w * inv;
        let wt = w.transpose();
        Self::new(&wt * &self.a * v, &wt * &self.b, &self.c * v)
    }
}

/// Eigenvector condition number above which the pole-residue form is refused.
pub const DEFECTIVE_CONDITION: f64 = 1e8;

/// `H(s) = Σ lᵢ rᵢᵀ / (s − λᵢ)`.
#[derive(Debug, Clone)]
pub struct PoleResidue {
    pub poles: Vec<Complex64>,
    pub output_residues: Vec<DVector<Complex64>>,
    pub input_residues: Vec<DVector<Complex64>>,
}

impl PoleResidue {
    pub fn eval(&self, s: Complex64) -> ComplexMatrix {
        let p = self.output_residues.first().map_or(0, |l| l.len());
        let m = self.input_residues.first().map_or(0, |r| r.len());
        let mut h = ComplexMatrix::zeros(p, m);
        for ((lam, l), r) in self
            .poles
            .iter()
            .zip(&self.output_residues)
            .zip(&self.input_residues)
        {
            h += l * r.transpose() / (s - lam);
        }
        h
    }
}
