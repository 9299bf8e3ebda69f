//! Integer-order Bessel functions of the first kind and their positive zeros.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// `J_n(x)` from the periodic integral `(1/2π) ∫ cos(nτ - x sin τ) dτ`
/// evaluated with the trapezoidal rule.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let m = (2.0 * (x.abs() + n as f64)) as usize + 64;
    let nf = n as f64;
    let mut s = 0.0;
    for k in 0..m {
        let tau = -PI + 2.0 * PI * k as f64 / m as f64;
        s += libm::cos(nf * tau - x * libm::sin(tau));
    }
    s / m as f64
}

/// `J_n'(x)`.
pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    }
}

/// The first `count` positive zeros of `J_n`, ascending.
pub fn bessel_j_zeros(n: u32, count: usize) -> Vec<f64> {
    let mut zeros = Vec::with_capacity(count);
    let step = 0.05;
    let mut a = if n == 0 { step } else { n as f64 };
    let mut fa = bessel_j(n, a);
    while zeros.len() < count {
        let b = a + step;
        let fb = bessel_j(n, b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            zeros.push(refine_zero(n, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    zeros
}

fn refine_zero(n: u32, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = bessel_j(n, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm * flo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    // a Newton polish from the bracket midpoint
    let x = 0.5 * (lo + hi);
    let x1 = x - bessel_j(n, x) / bessel_j_prime(n, x);
    if x1 > lo - 1e-14 && x1 < hi + 1e-14 {
        x1
    } else {
        x
    }
}

/// The `k`-th positive zero of `J_n` (`k >= 1`).
pub fn bessel_j_zero(n: u32, k: usize) -> f64 {
    assert!(k >= 1);
    bessel_j_zeros(n, k)[k - 1]
}
