use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },
    #[error("matrix equation has no unique solution (spectra overlap)")]
    SingularEquation,
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("shifted matrix is singular at s = {0}")]
    SingularShift(String),
    #[error("matrix logarithm argument has an eigenvalue on the closed negative real axis")]
    BranchAmbiguity,
    #[error("state matrix is not Hurwitz (spectral abscissa {0:e})")]
    NotHurwitz(f64),
    #[error("eigenvector matrix is ill-conditioned (condition number {0:e})")]
    DefectiveMatrix(f64),
    #[error("projection matrix is rank deficient")]
    RankDeficient,
    #[error("deflated input/output map is rank deficient; the reduction has captured it")]
    DegenerateDeflation,
    #[error("shift {0} appears more than once")]
    DuplicateShift(String),
    #[error("complex shift {0} lacks a conjugate partner with conjugate direction")]
    ConjugacyViolation(String),
    #[error("shift {0} does not lie in the open right half plane")]
    ShiftSignError(String),
    #[error("reduction state is empty; run at least one step")]
    EmptyState,
    #[error("only {available} nonzero Hankel-type singular values, requested order {requested}")]
    RankCollapse { requested: usize, available: usize },
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dims(r: usize, c: usize) -> String {
    format!("{r}x{c}")
}
