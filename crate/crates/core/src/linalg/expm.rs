//! Matrix exponential by scaling and squaring with diagonal Padé approximants,
//! and integrals of matrix flows built on it.

use super::{ensure_finite, ensure_shape, ensure_square, solve_real, DenseMatrix};
use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm1(m: &DenseMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Returns `exp(a t)`.
pub fn matrix_exponential(a: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    let n = ensure_square(a, "matrix_exponential")?;
    if !t.is_finite() {
        return Err(Error::NonFinite("matrix_exponential: time"));
    }
    ensure_finite(a, "matrix_exponential")?;
    let id = DenseMatrix::identity(n, n);
    if t == 0.0 || n == 0 {
        return Ok(id);
    }
    let m = a * t;
    let nrm = norm1(&m);

    for (deg, theta) in THETA {
        if nrm <= theta {
            return pade_low(&m, deg);
        }
    }

    let s = if nrm > THETA_13 {
        (nrm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = &m / 2f64.powi(s);
    let mut r = pade13(&scaled)?;
    for _ in 0..s {
        r = &r * &r;
    }
    ensure_finite(&r, "matrix_exponential: squaring")?;
    Ok(r)
}

/// Returns `∫₀ʰ e^{xτ} y e^{zτ} dτ` together with `e^{xh}` and `e^{zh}`.
///
/// The integral is seeded on a step short enough for the block exponential
/// `exp([[x, y], [0, −z]]·h₀)` to be accurate and then extended by doubling,
/// `I(2h) = I(h) + e^{xh} I(h) e^{zh}`. For decaying `x` and `z` every update is
/// a sum of like-signed terms, so nothing cancels even when `h` is short
/// compared with the time scales of `x` and `z`.
pub fn flow_integral(
    x: &DenseMatrix,
    y: &DenseMatrix,
    z: &DenseMatrix,
    h: f64,
) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix)> {
    let p = ensure_square(x, "flow_integral: left generator")?;
    let q = ensure_square(z, "flow_integral: right generator")?;
    ensure_shape(y, p, q, "flow_integral: forcing")?;
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::NonFinite("flow_integral: horizon"));
    }
    let scale = (norm1(x) + norm1(z)) * h;
    let doublings = if scale > 1.0 {
        scale.log2().ceil() as i32
    } else {
        0
    };
    let h0 = h / 2f64.powi(doublings);

    let mut block = DenseMatrix::zeros(p + q, p + q);
    block.view_mut((0, 0), (p, p)).copy_from(x);
    block.view_mut((0, p), (p, q)).copy_from(y);
    block.view_mut((p, p), (q, q)).copy_from(&-z);
    let e = matrix_exponential(&block, h0)?;
    let mut ex = e.view((0, 0), (p, p)).into_owned();
    let mut ez = matrix_exponential(z, h0)?;
    let mut integral = e.view((0, p), (p, q)) * &ez;
    for _ in 0..doublings {
        integral += &ex * &integral * &ez;
        ex = &ex * &ex;
        ez = &ez * &ez;
    }
    ensure_finite(&integral, "flow_integral")?;
    Ok((integral, ex, ez))
}

fn pade_low(m: &DenseMatrix, deg: usize) -> Result<DenseMatrix> {
    let n = m.nrows();
    let b: &[f64] = match deg {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let id = DenseMatrix::identity(n, n);
    let m2 = m * m;
    // Even powers feed V, odd powers (times m) feed U.
    let mut u_acc = &id * b[1];
    let mut v_acc = &id * b[0];
    let mut pow = id.clone();
    for k in 1..=(deg / 2) {
        pow = &pow * &m2;
        u_acc += &pow * b[2 * k + 1];
        v_acc += &pow * b[2 * k];
    }
    let u = m * u_acc;
    finish(&u, &v_acc)
}

fn pade13(m: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.nrows();
    let id = DenseMatrix::identity(n, n);
    let b = &B13;
    let m2 = m * m;
    let m4 = &m2 * &m2;
    let m6 = &m4 * &m2;
    let u_inner = &m6 * b[13] + &m4 * b[11] + &m2 * b[9];
    let u = m * (&m6 * u_inner + &m6 * b[7] + &m4 * b[5] + &m2 * b[3] + &id * b[1]);
    let v_inner = &m6 * b[12] + &m4 * b[10] + &m2 * b[8];
    let v = &m6 * v_inner + &m6 * b[6] + &m4 * b[4] + &m2 * b[2] + &id * b[0];
    finish(&u, &v)
}

fn finish(u: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
    let p = v + u;
    let q = v - u;
    let r = solve_real(&q, &p).ok_or(Error::NonFinite("matrix_exponential: Padé denominator"))?;
    ensure_finite(&r, "matrix_exponential")?;
    Ok(r)
}
