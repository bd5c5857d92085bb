//! Fixtures shared by the benchmarks.

use limred_core::linalg::spectral_abscissa;
use limred_core::{DenseMatrix, StateSpace};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random Hurwitz system of order `n` with spectral abscissa at most −0.1.
pub fn random_system(n: usize, m: usize, p: usize, seed: u64) -> StateSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let alpha = spectral_abscissa(&a).expect("finite random matrix");
    for i in 0..n {
        a[(i, i)] -= alpha + 0.1;
    }
    let b = DenseMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
    let c = DenseMatrix::from_fn(p, n, |_, _| rng.gen_range(-1.0..1.0));
    StateSpace::new(a, b, c).expect("consistent dimensions")
}

/// The lightly damped sixth-order benchmark model with one input and output.
pub fn example1() -> StateSpace {
    StateSpace::new(
        DenseMatrix::from_row_slice(
            6,
            6,
            &[
                0.0, 0.0, 0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, 0.0, 1.0, //
                -5.4545, 4.5455, 0.0, -0.0545, 0.0455, 0.0, //
                10.0, -21.0, 11.0, 0.1, -0.21, 0.11, //
                0.0, 5.5, -6.5, 0.0, 0.055, -0.065,
            ],
        ),
        DenseMatrix::from_column_slice(6, 1, &[0.0, 0.0, 0.0, 0.0909, 0.4, -0.5]),
        DenseMatrix::from_row_slice(1, 6, &[2.0, -2.0, 3.0, 0.0, 0.0, 0.0]),
    )
    .expect("consistent dimensions")
}

/// One step with a single real shift and a unit direction of length `dim`.
pub fn real_step(shift: f64, dim: usize) -> (Vec<Complex64>, Vec<DVector<Complex64>>) {
    (
        vec![Complex64::new(shift, 0.0)],
        vec![DVector::from_element(dim, Complex64::new(1.0, 0.0))],
    )
}
