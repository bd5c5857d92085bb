//! Time- and frequency-limited ℋ₂ model order reduction by cumulative
//! pseudo-optimal rational Krylov steps, with the supporting Gramian, norm and
//! balanced-truncation machinery.

pub mod balancing;
pub mod cure;
pub mod error;
pub mod gramians;
pub mod linalg;
pub mod norms;
pub mod pork;
pub mod sys;

pub use balancing::{
    balanced_truncation, sigma_band_error, sigma_response, BalancedTruncation, GramianFactors,
};
pub use cure::{CureState, GramianApprox, Side};
pub use error::{Error, Result};
pub use gramians::{GramianPair, Interval};
pub use linalg::{ComplexMatrix, DenseMatrix};
pub use norms::{limited_h2_error, limited_h2_norm, pseudo_optimality_gap};
pub use pork::KrylovFactorization;
pub use sys::{PoleResidue, StateSpace};
