//! Shared fixtures and independent oracles for the integration tests.
//!
//! The oracles deliberately avoid the library's matrix-equation solvers:
//! time-domain quantities come from RK4 integration of `ẋ = A x` plus
//! composite Simpson quadrature, frequency-domain ones from adaptive Simpson
//! quadrature of resolvent products.

#![allow(dead_code)]

use limred_core::{ComplexMatrix, DenseMatrix, StateSpace};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub mod suites;

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
    .unwrap()
}

pub fn example2() -> StateSpace {
    let mut a = DenseMatrix::zeros(6, 6);
    a.row_mut(0)
        .copy_from_slice(&[-9.0, -29.0, -100.0, -82.0, -19.0, -2.0]);
    for i in 1..6 {
        a[(i, i - 1)] = 1.0;
    }
    let mut b = DenseMatrix::zeros(6, 1);
    b[(0, 0)] = 1.0;
    StateSpace::new(
        a,
        b,
        DenseMatrix::from_row_slice(1, 6, &[2.0, -2.0, 3.0, 0.0, 0.0, 0.0]),
    )
    .unwrap()
}

pub fn real_shift(x: f64) -> Vec<Complex64> {
    vec![Complex64::new(x, 0.0)]
}

pub fn real_dir(xs: &[f64]) -> Vec<DVector<Complex64>> {
    vec![DVector::from_iterator(
        xs.len(),
        xs.iter().map(|x| Complex64::new(*x, 0.0)),
    )]
}

/// Random Hurwitz system: a random matrix shifted so its spectral abscissa is
/// at most `-margin`, with a mild rotation to create complex poles.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> StateSpace {
    let mut a = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let alpha = limred_core::linalg::spectral_abscissa(&a).unwrap();
    let margin = rng.gen_range(0.1..1.0);
    for i in 0..n {
        a[(i, i)] -= alpha + margin;
    }
    let b = DenseMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
    let c = DenseMatrix::from_fn(p, n, |_, _| rng.gen_range(-1.0..1.0));
    StateSpace::new(a, b, c).unwrap()
}

/// `e^{At} X` by classical RK4 on `Ẏ = A Y` with `steps` uniform steps.
pub fn rk4_propagate(a: &DenseMatrix, x: &DenseMatrix, t: f64, steps: usize) -> DenseMatrix {
    let h = t / steps as f64;
    let mut y = x.clone();
    for _ in 0..steps {
        let k1 = a * &y;
        let k2 = a * (&y + &k1 * (h / 2.0));
        let k3 = a * (&y + &k2 * (h / 2.0));
        let k4 = a * (&y + &k3 * h);
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    y
}

/// `∫_{t1}^{t2} e^{A₁t} B₁ B₂ᵀ e^{A₂ᵀt} dt` by RK4 trajectories sampled on a
/// composite Simpson grid of `2k` panels.
pub fn time_cross_oracle(
    a1: &DenseMatrix,
    b1: &DenseMatrix,
    a2: &DenseMatrix,
    b2: &DenseMatrix,
    t1: f64,
    t2: f64,
    panels: usize,
) -> DenseMatrix {
    let panels = panels + panels % 2;
    let h = (t2 - t1) / panels as f64;
    let sub = 8;
    let mut y1 = rk4_propagate(a1, b1, t1, (t1 / h).ceil() as usize * sub + 1);
    let mut y2 = rk4_propagate(a2, b2, t1, (t1 / h).ceil() as usize * sub + 1);
    let mut acc = DenseMatrix::zeros(a1.nrows(), a2.nrows());
    for k in 0..=panels {
        let w = if k == 0 || k == panels {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += &y1 * y2.transpose() * w;
        if k < panels {
            y1 = rk4_propagate(a1, &y1, h, sub);
            y2 = rk4_propagate(a2, &y2, h, sub);
        }
    }
    acc * (h / 3.0)
}

fn resolvent_product(
    a1: &DenseMatrix,
    b1: &DenseMatrix,
    a2: &DenseMatrix,
    b2: &DenseMatrix,
    w: f64,
) -> DenseMatrix {
    let jw = Complex64::new(0.0, w);
    let solve = |a: &DenseMatrix, b: &DenseMatrix| -> ComplexMatrix {
        let n = a.nrows();
        let m = ComplexMatrix::identity(n, n) * jw - a.map(|x| Complex64::new(x, 0.0));
        m.lu().solve(&b.map(|x| Complex64::new(x, 0.0))).unwrap()
    };
    let x1 = solve(a1, b1);
    let x2 = solve(a2, b2);
    // the band ±[w1, w2] contributes the integrand and its conjugate
    (x1 * x2.adjoint()).map(|z| 2.0 * z.re)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &dyn Fn(f64) -> DenseMatrix,
    lo: f64,
    hi: f64,
    fl: &DenseMatrix,
    fm: &DenseMatrix,
    fh: &DenseMatrix,
    whole: &DenseMatrix,
    tol: f64,
    depth: usize,
) -> DenseMatrix {
    let mid = 0.5 * (lo + hi);
    let lm = 0.5 * (lo + mid);
    let rm = 0.5 * (mid + hi);
    let flm = f(lm);
    let frm = f(rm);
    let left = (fl + &flm * 4.0 + fm) * ((mid - lo) / 6.0);
    let right = (fm + &frm * 4.0 + fh) * ((hi - mid) / 6.0);
    let diff = (&left + &right - whole).norm();
    if depth == 0 || diff <= 15.0 * tol {
        return &left + &right + (&left + &right - whole) / 15.0;
    }
    adaptive_simpson(f, lo, mid, fl, &flm, fm, &left, tol / 2.0, depth - 1)
        + adaptive_simpson(f, mid, hi, fm, &frm, fh, &right, tol / 2.0, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> DenseMatrix, lo: f64, hi: f64, tol: f64) -> DenseMatrix {
    // a fixed pre-split keeps narrow resonances from being stepped over
    let pieces = 64;
    let h = (hi - lo) / pieces as f64;
    let mut acc = f(lo) * 0.0;
    for k in 0..pieces {
        let a = lo + k as f64 * h;
        let b = a + h;
        let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
        let whole = (&fa + &fm * 4.0 + &fb) * (h / 6.0);
        acc += adaptive_simpson(f, a, b, &fa, &fm, &fb, &whole, tol / pieces as f64, 40);
    }
    acc
}

/// `(1/2π) ∫_{±[w1,w2]} (jωI − A₁)⁻¹ B₁ B₂ᵀ (jωI − A₂)⁻* dω` by adaptive Simpson.
pub fn freq_cross_oracle(
    a1: &DenseMatrix,
    b1: &DenseMatrix,
    a2: &DenseMatrix,
    b2: &DenseMatrix,
    w1: f64,
    w2: f64,
    tol: f64,
) -> DenseMatrix {
    let f = |w: f64| resolvent_product(a1, b1, a2, b2, w);
    integrate(&f, w1, w2, tol) / (2.0 * std::f64::consts::PI)
}

/// Whole-axis version of [`freq_cross_oracle`] via `ω = tan θ`.
pub fn unlimited_cross_oracle(
    a1: &DenseMatrix,
    b1: &DenseMatrix,
    a2: &DenseMatrix,
    b2: &DenseMatrix,
    tol: f64,
) -> DenseMatrix {
    let f = |th: f64| {
        let w = th.tan();
        resolvent_product(a1, b1, a2, b2, w) * (1.0 + w * w)
    };
    integrate(&f, 0.0, std::f64::consts::FRAC_PI_2 * (1.0 - 1e-12), tol)
        / (2.0 * std::f64::consts::PI)
}

pub fn rel_err(x: &DenseMatrix, y: &DenseMatrix) -> f64 {
    (x - y).norm() / y.norm().max(f64::MIN_POSITIVE)
}

/// One cumulative run of the property corpus: a random Hurwitz system,
/// interval and side, reduced over up to four steps.
pub struct CorpusRun {
    pub sys: StateSpace,
    pub iv: limred_core::Interval,
    pub side: limred_core::Side,
    /// Squared limited norm of the full model.
    pub full_sq: f64,
    /// Exact limited controllability (input side) or observability (output
    /// side) Gramian.
    pub exact: DenseMatrix,
    pub steps: Vec<CorpusStep>,
}

pub struct CorpusStep {
    pub order: usize,
    pub rom: StateSpace,
    pub terms: limred_core::norms::ErrorTerms,
    pub approx: DenseMatrix,
}

/// Interval of the given kind (0 unlimited, 1 time, 2 frequency).
pub fn corpus_interval(rng: &mut ChaCha8Rng, kind: usize) -> limred_core::Interval {
    use limred_core::Interval;
    match kind {
        0 => Interval::Unlimited,
        1 => {
            let t1 = if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(0.0..1.0)
            };
            let t2 = if rng.gen_bool(0.2) {
                f64::INFINITY
            } else {
                t1 + rng.gen_range(0.5..3.0)
            };
            Interval::time(t1, t2).unwrap()
        }
        _ => {
            let w1 = if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(0.0..3.0)
            };
            Interval::frequency(w1, w1 + rng.gen_range(0.5..5.0)).unwrap()
        }
    }
}

/// Admissible step: a real shift or a conjugate pair with real parts
/// log-uniform in `[0.1, 10]` (capped at `8/t₁` on late time windows, where a
/// shift σ gives the emitted model residues of order `e^{σ t₁}`), and random
/// tangential directions.
pub fn corpus_step(
    rng: &mut ChaCha8Rng,
    dim: usize,
    iv: &limred_core::Interval,
    pair: bool,
) -> (Vec<Complex64>, Vec<DVector<Complex64>>) {
    let hi: f64 = match *iv {
        limred_core::Interval::Time { t1, .. } if t1 > 0.0 => (8.0 / t1).min(10.0),
        _ => 10.0,
    };
    let re = 10f64.powf(rng.gen_range(-1.0..hi.log10()));
    let dir = |rng: &mut ChaCha8Rng, complex: bool| {
        DVector::from_fn(dim, |_, _| {
            let im = if complex {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            };
            Complex64::new(rng.gen_range(-1.0..1.0), im)
        })
    };
    if pair {
        let s = Complex64::new(re, rng.gen_range(0.2..5.0));
        let d = dir(rng, true);
        let dc = d.map(|z| z.conj());
        (vec![s, s.conj()], vec![d, dc])
    } else {
        (vec![Complex64::new(re, 0.0)], vec![dir(rng, false)])
    }
}

/// Runs the corpus case `(seed, kind, side)`: order 4–20, up to 3 inputs and
/// outputs, up to four steps while the accumulated order stays at most
/// `n − dim − 1` (the deflated map keeps full column rank and the model stays
/// a genuine reduction).
pub fn corpus_run(seed: u64, kind: usize, side: limred_core::Side) -> CorpusRun {
    use limred_core::gramians::gramians;
    use limred_core::norms::{error_terms, limited_h2_norm_sq};
    use limred_core::{CureState, Side};
    use rand::SeedableRng;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=20);
    let m = rng.gen_range(1..=3);
    let p = rng.gen_range(1..=3);
    let sys = random_stable(&mut rng, n, m, p);
    let iv = corpus_interval(&mut rng, kind);
    let g = gramians(&sys, &iv).unwrap();
    let (exact, dim) = match side {
        Side::Input => (g.p, m),
        Side::Output => (g.q, p),
    };
    let full_sq = limited_h2_norm_sq(&sys, &iv).unwrap();
    let mut st = CureState::new(&sys, side).unwrap();
    let mut steps = Vec::new();
    for _ in 0..4 {
        let pair = rng.gen_bool(0.3);
        let width = if pair { 2 } else { 1 };
        if st.order() + width + dim + 1 > n {
            break;
        }
        let (s, d) = corpus_step(&mut rng, dim, &iv, pair);
        st.step(&s, &d).unwrap();
        let rom = st.emit(&iv).unwrap();
        let terms = error_terms(&sys, &rom, &iv).unwrap();
        let approx = st.gramian_approx(&iv).unwrap().dense;
        steps.push(CorpusStep {
            order: st.order(),
            rom,
            terms,
            approx,
        });
    }
    CorpusRun {
        sys,
        iv,
        side,
        full_sq,
        exact,
        steps,
    }
}
