//! Integer-order Bessel and Hankel functions of real argument.
//!
//! `J_n` comes from Miller's backward recurrence normalized by
//! `J_0 + 2 Σ J_2k = 1`; `Y_0` and `Y_1` follow from the Neumann series over
//! the same sequence, and higher `Y_n` from the (stable) upward recurrence.
//! For the kernel evaluations in the solver, `H_0` and `H_1` switch to
//! Hankel's asymptotic expansion once the argument is large enough for it to
//! reach full double precision.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const RESCALE_ABOVE: f64 = 1e250;
const ASYMPTOTIC_FROM: f64 = 20.0;

fn miller_start(nmax: usize, x: f64) -> usize {
    let top = (nmax as f64).max(x);
    let m = (top + 20.0 + (40.0 * top).sqrt()).ceil() as usize;
    m + (m & 1)
}

/// `J_0(x) .. J_{len-1}(x)` with the full normalized Miller sequence, which
/// extends well past `nmax`; callers needing tails (Neumann series) use it all.
fn miller_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let start = miller_start(nmax, x);
    let mut j = vec![0.0; start + 2];
    if x == 0.0 {
        j[0] = 1.0;
        return j;
    }
    j[start + 1] = 0.0;
    j[start] = 1e-300;
    for n in (1..=start).rev() {
        j[n - 1] = 2.0 * n as f64 / x * j[n] - j[n + 1];
        if j[n - 1].abs() > RESCALE_ABOVE {
            for v in &mut j[n - 1..] {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    let mut norm = j[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * j[k];
    }
    for v in &mut j {
        *v /= norm;
    }
    j
}

/// Bessel functions of the first kind, orders `0..=nmax`.
pub fn bessel_j_seq(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0, "negative argument");
    let mut j = miller_sequence(nmax, x);
    j.truncate(nmax + 1);
    j
}

/// `(Y_0, Y_1)` from the Neumann series over a normalized `J` sequence.
fn y01_from_sequence(x: f64, j: &[f64]) -> (f64, f64) {
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = 2.0 / PI * log_term * j[0] - 4.0 / PI * s0;
    let y1 = -2.0 / (PI * x) * j[0] + 2.0 / PI * log_term * j[1] + 2.0 / PI * s1;
    (y0, y1)
}

/// `J_n(x)` and `Y_n(x)` for `n = 0..=nmax`, `x > 0`.
pub fn bessel_jy_seq(nmax: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(x > 0.0, "Y_n needs a positive argument");
    let full = miller_sequence(nmax.max(1), x);
    let (y0, y1) = y01_from_sequence(x, &full);
    let mut y = Vec::with_capacity(nmax + 1);
    y.push(y0);
    if nmax >= 1 {
        y.push(y1);
    }
    for n in 1..nmax {
        let next = 2.0 * n as f64 / x * y[n] - y[n - 1];
        y.push(next);
    }
    let mut j = full;
    j.truncate(nmax + 1);
    (j, y)
}

/// Hankel functions of the first kind `(H_0^(1)(x), H_1^(1)(x))`, `x > 0`.
pub fn hankel01(x: f64) -> (Complex64, Complex64) {
    if x >= ASYMPTOTIC_FROM {
        (hankel_asymptotic(0.0, x), hankel_asymptotic(1.0, x))
    } else {
        let full = miller_sequence(1, x);
        let (y0, y1) = y01_from_sequence(x, &full);
        (Complex64::new(full[0], y0), Complex64::new(full[1], y1))
    }
}

fn hankel_asymptotic(nu: f64, x: f64) -> Complex64 {
    let mu = 4.0 * nu * nu;
    let mut sum = Complex64::new(1.0, 0.0);
    let mut coeff = 1.0;
    let mut ik = Complex64::new(1.0, 0.0);
    let mut last = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        coeff *= (mu - odd * odd) / (8.0 * k as f64 * x);
        ik *= Complex64::i();
        let size = coeff.abs();
        if size > last {
            break;
        }
        sum += ik * coeff;
        if size < 1e-17 {
            break;
        }
        last = size;
    }
    let phase = x - 0.5 * nu * PI - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * Complex64::from_polar(1.0, phase) * sum
}
