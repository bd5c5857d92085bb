//! Balanced truncation against an independent eigenvalue-based balancing,
//! realization invariance, interval limits, stability and the pipeline
//! driven by cumulative approximate Gramians.

mod common;

use common::*;
use limred_core::gramians::gramians;
use limred_core::linalg::{eigenvalues, solve_lyapunov};
use limred_core::{
    balanced_truncation, sigma_band_error, CureState, DenseMatrix, GramianFactors, Interval, Side,
    StateSpace,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Balancing by symmetric eigendecomposition: `P = R Rᵀ` (Cholesky),
/// `Rᵀ Q R = U Σ² Uᵀ`, `T = R U Σ^{-1/2}`, `T⁻¹ = Σ^{1/2} Uᵀ R⁻¹`. Returns the
/// singular values (descending) and the order-`r` truncation.
fn eigen_balancing(sys: &StateSpace, r: usize) -> (Vec<f64>, StateSpace) {
    let p = solve_lyapunov(sys.a(), &(sys.b() * sys.b().transpose())).unwrap();
    let q = solve_lyapunov(&sys.a().transpose(), &(sys.c().transpose() * sys.c())).unwrap();
    let chol = p.cholesky().unwrap().l();
    let core = chol.transpose() * q * &chol;
    let eig = core.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let sigma: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i].sqrt()).collect();
    let n = sys.order();
    let mut t = DenseMatrix::zeros(n, r);
    let mut ti = DenseMatrix::zeros(r, n);
    let chol_inv = chol.clone().try_inverse().unwrap();
    for (k, &i) in idx.iter().take(r).enumerate() {
        let u = eig.eigenvectors.column(i);
        t.set_column(k, &(&chol * u / sigma[k].sqrt()));
        ti.set_row(k, &(u.transpose() * &chol_inv * sigma[k].sqrt()));
    }
    let rom = StateSpace::new(&ti * sys.a() * &t, &ti * sys.b(), sys.c() * &t).unwrap();
    (sigma, rom)
}

fn transfer_gap(h1: &StateSpace, h2: &StateSpace, rng: &mut ChaCha8Rng) -> f64 {
    (0..10)
        .map(|_| {
            let s = Complex64::new(rng.gen_range(0.0..1.0), rng.gen_range(-20.0..20.0));
            let a = h1.transfer_eval(s).unwrap();
            let b = h2.transfer_eval(s).unwrap();
            (&a - &b).norm() / a.norm().max(b.norm())
        })
        .fold(0.0, f64::max)
}

#[test]
fn example1_matches_eigenvalue_balancing() {
    let sys = example1();
    let bt = balanced_truncation(&sys, 2, &Interval::Unlimited, None).unwrap();
    let (sigma, rom) = eigen_balancing(&sys, 2);
    assert_eq!(bt.hsv.len(), 6);
    for (x, y) in bt.hsv.iter().zip(&sigma) {
        assert!((x - y).abs() <= 1e-8 * sigma[0], "{x} vs {y}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(transfer_gap(&bt.rom, &rom, &mut rng) < 1e-8);
    assert!(bt.stable && bt.rank_collapse.is_none());
}

#[test]
fn unlimited_truncation_is_balanced_and_obeys_the_error_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let n = rng.gen_range(5..=10);
        let sys = random_stable(&mut rng, n, 2, 2);
        let r = rng.gen_range(1..n);
        let bt = balanced_truncation(&sys, r, &Interval::Unlimited, None).unwrap();
        // A truncated balanced realization is balanced with the leading values.
        let g = gramians(&bt.rom, &Interval::Unlimited).unwrap();
        let want = DenseMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&bt.hsv[..r]));
        assert!((&g.p - &want).norm() <= 1e-8 * bt.hsv[0]);
        assert!((&g.q - &want).norm() <= 1e-8 * bt.hsv[0]);
        // ‖H − H_r‖∞ ≤ 2 Σ_{k>r} σ_k, sampled.
        let bound = 2.0 * bt.hsv[r..].iter().sum::<f64>();
        for k in 0..200 {
            let w = 0.05 * k as f64;
            let e = sys.transfer_eval(Complex64::new(0.0, w)).unwrap()
                - bt.rom.transfer_eval(Complex64::new(0.0, w)).unwrap();
            assert!(e.singular_values().max() <= bound * (1.0 + 1e-9));
        }
    }
}

#[test]
fn singular_values_are_similarity_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for iv in [
        Interval::Unlimited,
        Interval::time(0.2, 2.0).unwrap(),
        Interval::frequency(0.5, 2.5).unwrap(),
    ] {
        let sys = random_stable(&mut rng, 7, 2, 1);
        let t = DenseMatrix::from_fn(7, 7, |i, j| {
            f64::from(u8::from(i == j)) * 2.0 + rng.gen_range(-0.5..0.5)
        });
        let moved = sys.similarity(&t).unwrap();
        let a = balanced_truncation(&sys, 3, &iv, None).unwrap();
        let b = balanced_truncation(&moved, 3, &iv, None).unwrap();
        for (x, y) in a.hsv.iter().zip(&b.hsv) {
            assert!((x - y).abs() <= 1e-9 * a.hsv[0], "{iv}: {x} vs {y}");
        }
    }
}

#[test]
fn semi_infinite_window_from_zero_is_plain_truncation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let sys = random_stable(&mut rng, 8, 1, 2);
        let bt = balanced_truncation(&sys, 3, &Interval::Unlimited, None).unwrap();
        let window = Interval::time(0.0, f64::INFINITY).unwrap();
        let tl = balanced_truncation(&sys, 3, &window, None).unwrap();
        assert!(transfer_gap(&bt.rom, &tl.rom, &mut rng) < 1e-9);
    }
}

#[test]
fn unlimited_truncation_preserves_stability() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.gen_range(3..=12);
        let (m, p) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let sys = random_stable(&mut rng, n, m, p);
        let r = rng.gen_range(1..n);
        let bt = balanced_truncation(&sys, r, &Interval::Unlimited, None).unwrap();
        assert!(bt.stable);
        assert!(eigenvalues(bt.rom.a()).unwrap().iter().all(|z| z.re < 0.0));
    }
}

#[test]
fn cumulative_gramians_drive_band_truncation_on_example1() {
    let sys = example1();
    let iv = Interval::frequency(8.0, 9.0).unwrap();
    let mut v = CureState::new(&sys, Side::Input).unwrap();
    let mut w = CureState::new(&sys, Side::Output).unwrap();
    for s in [1.0, 2.0] {
        v.step(&real_shift(s), &real_dir(&[1.0])).unwrap();
        w.step(&real_shift(s), &real_dir(&[1.0])).unwrap();
    }
    let factors = GramianFactors::from_low_rank(
        &v.gramian_approx(&iv).unwrap(),
        &w.gramian_approx(&iv).unwrap(),
    );
    let approx = balanced_truncation(&sys, 2, &iv, Some(&factors)).unwrap();
    let exact = balanced_truncation(&sys, 2, &iv, None).unwrap();
    let e_approx = sigma_band_error(&sys, &approx.rom, 8.0, 9.0, 2001).unwrap();
    let e_exact = sigma_band_error(&sys, &exact.rom, 8.0, 9.0, 2001).unwrap();
    assert!(e_approx.is_finite() && e_exact.is_finite());
    assert!(e_approx <= 10.0 * e_exact, "{e_approx} vs {e_exact}");
}

#[test]
fn invalid_orders_and_unstable_systems_are_rejected() {
    let sys = example1();
    assert!(balanced_truncation(&sys, 0, &Interval::Unlimited, None).is_err());
    assert!(balanced_truncation(&sys, 6, &Interval::Unlimited, None).is_err());
    let unstable = StateSpace::new(
        DenseMatrix::from_element(2, 2, 0.5),
        DenseMatrix::from_element(2, 1, 1.0),
        DenseMatrix::from_element(1, 2, 1.0),
    )
    .unwrap();
    assert!(matches!(
        balanced_truncation(&unstable, 1, &Interval::Unlimited, None),
        Err(limred_core::Error::NotHurwitz(_))
    ));
}
