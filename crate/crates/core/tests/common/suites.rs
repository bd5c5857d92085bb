//! Randomized suites that measure worst-case discrepancies; the focused tests
//! and the acceptance run both assert on their results.

use std::f64::consts::PI;

use limred_core::gramians::{controllability_gramian, gramians};
use limred_core::linalg::{eig, matrix_exponential, to_complex, ComplexMatrix};
use limred_core::norms::{limited_h2_norm_sq, limited_h2_norm_sq_pair};
use limred_core::pork::{
    flpork_rom, krylov_input_subspace, pork_factorization, pork_rom, tlpork_rom,
};
use limred_core::{DenseMatrix, Interval, StateSpace};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{freq_cross_oracle, random_stable, rel_err, time_cross_oracle, unlimited_cross_oracle};

/// Worst relative error of every limited Gramian and norm against the
/// quadrature oracles, over `count` random systems of order 2–8.
pub fn oracle_suite(seed: u64, count: usize) -> Vec<(&'static str, f64)> {
    let mut worst = vec![
        ("time P", 0.0f64),
        ("time Q", 0.0),
        ("time norm", 0.0),
        ("band P", 0.0),
        ("band Q", 0.0),
        ("band norm via P", 0.0),
        ("band norm via Q", 0.0),
        ("unlimited P", 0.0),
    ];
    let scalar = |x: f64, r: f64| (x - r).abs() / r.abs().max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let n = rng.gen_range(2..=8);
        let m = rng.gen_range(1..=2);
        let p = rng.gen_range(1..=2);
        let sys = random_stable(&mut rng, n, m, p);
        let (a, b, c) = (sys.a(), sys.b(), sys.c());
        let at = a.transpose();
        let ct = c.transpose();

        let t1 = rng.gen_range(0.0..0.5);
        let t2 = t1 + rng.gen_range(0.5..2.0);
        let tiv = Interval::time(t1, t2).unwrap();
        let g = gramians(&sys, &tiv).unwrap();
        let p_ref = time_cross_oracle(a, b, a, b, t1, t2, 400);
        let q_ref = time_cross_oracle(&at, &ct, &at, &ct, t1, t2, 400);
        let norm_ref = (c * &p_ref * c.transpose()).trace();
        let norm = limited_h2_norm_sq(&sys, &tiv).unwrap();

        let w1 = rng.gen_range(0.0..2.0);
        let w2 = w1 + rng.gen_range(0.5..3.0);
        let fiv = Interval::frequency(w1, w2).unwrap();
        let gf = gramians(&sys, &fiv).unwrap();
        let pf_ref = freq_cross_oracle(a, b, a, b, w1, w2, 1e-12);
        let qf_ref = freq_cross_oracle(&at, &ct, &at, &ct, w1, w2, 1e-12);
        let (via_p, via_q) = limited_h2_norm_sq_pair(&sys, &fiv).unwrap();
        let fnorm_ref = (c * &pf_ref * c.transpose()).trace();

        let pu = controllability_gramian(&sys, &Interval::Unlimited).unwrap();
        let pu_ref = unlimited_cross_oracle(a, b, a, b, 1e-12);

        let errs = [
            rel_err(&g.p, &p_ref),
            rel_err(&g.q, &q_ref),
            scalar(norm, norm_ref),
            rel_err(&gf.p, &pf_ref),
            rel_err(&gf.q, &qf_ref),
            scalar(via_p, fnorm_ref),
            scalar(via_q, fnorm_ref),
            rel_err(&pu, &pu_ref),
        ];
        for (w, e) in worst.iter_mut().zip(errs) {
            w.1 = w.1.max(e);
        }
    }
    worst
}

/// The interpolation property being measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolationProperty {
    /// Any oblique projection onto the Krylov subspace matches `H(σ) b`.
    KrylovProjection,
    /// The pseudo-optimal model interpolates at its mirrored poles.
    PseudoOptimal,
    /// The time-limited model interpolates the window-augmented response.
    TimeLimited,
    /// The band-limited model interpolates the band-augmented response.
    BandLimited,
}

struct Instance {
    sys: StateSpace,
    shifts: Vec<Complex64>,
    dirs: Vec<DVector<Complex64>>,
}

fn instance(rng: &mut ChaCha8Rng) -> Instance {
    let m = rng.gen_range(1..=3);
    let p = rng.gen_range(1..=3);
    let r = rng.gen_range(1..=3);
    // B⊥ = (I − V Wᵀ) B keeps full column rank only if m ≤ n − r
    let n = rng.gen_range(m + r + 1..=10);
    let sys = random_stable(rng, n, m, p);
    let shifts = (0..r)
        .map(|_| Complex64::new(10f64.powf(rng.gen_range(-1.0..1.0)), 0.0))
        .collect();
    let dirs = (0..r)
        .map(|_| DVector::from_fn(m, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)))
        .collect();
    Instance { sys, shifts, dirs }
}

/// `C (sI − A)⁻¹ X` for a complex right-hand side.
fn resolvent(sys: &StateSpace, s: Complex64, x: &ComplexMatrix) -> ComplexMatrix {
    let n = sys.order();
    let m = ComplexMatrix::identity(n, n) * s - to_complex(sys.a());
    to_complex(sys.c()) * m.lu().solve(x).unwrap()
}

fn mismatch(lhs: &ComplexMatrix, rhs: &ComplexMatrix) -> f64 {
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE)
}

fn column(v: &DVector<Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

/// Scalar band selector as an analytic function of a complex argument.
pub fn band_scalar(z: Complex64, w1: f64, w2: f64) -> Complex64 {
    let j = Complex64::new(0.0, 1.0);
    let up = ((j * w2 + z) / (j * w1 + z)).ln();
    let down = ((-j * w2 + z) / (-j * w1 + z)).ln();
    j / (2.0 * PI) * (up - down)
}

/// Band selector of a diagonalizable real matrix through its eigen-decomposition.
pub fn band_matrix(a: &DenseMatrix, w1: f64, w2: f64) -> ComplexMatrix {
    let e = eig(a).unwrap();
    let n = a.nrows();
    let d = ComplexMatrix::from_diagonal(&DVector::from_iterator(
        n,
        e.values.iter().map(|z| band_scalar(*z, w1, w2)),
    ));
    let vinv = e.vectors.clone().try_inverse().unwrap();
    &e.vectors * d * vinv
}

/// Response of a model at a mirrored pole along a residue direction.
type Augmented = Box<dyn Fn(&StateSpace, Complex64, &DVector<Complex64>) -> ComplexMatrix>;

/// Worst relative mismatch of one interpolation property over `count`
/// random instances. For the pseudo-optimal model the distance of the
/// reduced poles from the mirrored shifts is included.
pub fn interpolation_suite(property: InterpolationProperty, seed: u64, count: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let inst = instance(&mut rng);
        let v = krylov_input_subspace(&inst.sys, &inst.shifts, &inst.dirs).unwrap();
        let fact = || pork_factorization(&inst.sys, &v).unwrap();
        // a reduced model and the response evaluated at its mirrored poles
        let (rom, augmented): (StateSpace, Augmented) = match property {
            InterpolationProperty::KrylovProjection => {
                // any W with invertible VᵀW works; use a random one
                let w = DenseMatrix::from_fn(v.nrows(), v.ncols(), |_, _| rng.gen_range(-1.0..1.0));
                let rom = inst.sys.project(&v, &w).unwrap();
                for (s, d) in inst.shifts.iter().zip(&inst.dirs) {
                    let lhs = inst.sys.transfer_eval(*s).unwrap() * column(d);
                    let rhs = rom.transfer_eval(*s).unwrap() * column(d);
                    worst = worst.max(mismatch(&lhs, &rhs));
                }
                continue;
            }
            InterpolationProperty::PseudoOptimal => {
                let rom = pork_rom(&fact(), &inst.sys).unwrap();
                let mut poles: Vec<f64> = rom
                    .pole_residue()
                    .unwrap()
                    .poles
                    .iter()
                    .map(|z| z.re)
                    .collect();
                let mut mirrored: Vec<f64> = inst.shifts.iter().map(|z| -z.re).collect();
                poles.sort_by(f64::total_cmp);
                mirrored.sort_by(f64::total_cmp);
                for (x, y) in poles.iter().zip(&mirrored) {
                    worst = worst.max((x - y).abs() / y.abs().max(1.0));
                }
                (
                    rom,
                    Box::new(|sys: &StateSpace, lam: Complex64, r: &DVector<Complex64>| {
                        resolvent(sys, -lam, &(to_complex(sys.b()) * column(r)))
                    }),
                )
            }
            InterpolationProperty::TimeLimited => {
                let t1 = rng.gen_range(0.0..0.5);
                let t2 = t1 + rng.gen_range(0.3..1.5);
                let rom = tlpork_rom(&fact(), &inst.sys, t1, t2).unwrap();
                // G(s) = C (sI − A)⁻¹ [e^{At₁}B, −e^{At₂}B] along
                // [r e^{λt₁}; r e^{λt₂}], λ a reduced pole with input residue r
                (
                    rom,
                    Box::new(
                        move |sys: &StateSpace, lam: Complex64, r: &DVector<Complex64>| {
                            let e1 =
                                to_complex(&(matrix_exponential(sys.a(), t1).unwrap() * sys.b()));
                            let e2 =
                                to_complex(&(matrix_exponential(sys.a(), t2).unwrap() * sys.b()));
                            let x = e1 * column(r) * (lam * t1).exp()
                                - e2 * column(r) * (lam * t2).exp();
                            resolvent(sys, -lam, &x)
                        },
                    ),
                )
            }
            InterpolationProperty::BandLimited => {
                let w1 = rng.gen_range(0.0..2.0);
                let w2 = w1 + rng.gen_range(0.5..3.0);
                let rom = flpork_rom(&fact(), &inst.sys, w1, w2).unwrap();
                // H(s) = C (sI − A)⁻¹ [B, F(A)B] along [r F(λ); r]
                (
                    rom,
                    Box::new(
                        move |sys: &StateSpace, lam: Complex64, r: &DVector<Complex64>| {
                            let b = to_complex(sys.b());
                            let fb = band_matrix(sys.a(), w1, w2) * &b;
                            let x = &b * column(r) * band_scalar(lam, w1, w2) + fb * column(r);
                            resolvent(sys, -lam, &x)
                        },
                    ),
                )
            }
        };
        let pr = rom.pole_residue().unwrap();
        for (lam, r) in pr.poles.iter().zip(&pr.input_residues) {
            let lhs = augmented(&inst.sys, *lam, r);
            let rhs = augmented(&rom, *lam, r);
            worst = worst.max(mismatch(&lhs, &rhs));
        }
    }
    worst
}
