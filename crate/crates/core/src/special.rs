//! Bessel and Hankel functions of integer order and real argument.
//!
//! Small arguments use the power series, moderate ones Miller's backward
//! recurrence, and large ones the Hankel asymptotic expansion.

use num_complex::Complex64;
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const ASYMPTOTIC_FROM: f64 = 25.0;

/// Gamma function for positive real arguments.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// `J_0(x) .. J_nmax(x)` for `x >= 0`.
pub fn bessel_j_upto(nmax: usize, x: f64) -> Vec<f64> {
    let x = x.abs();
    if x <= 1.0 {
        return (0..=nmax).map(|n| j_series(n, x)).collect();
    }
    if x > ASYMPTOTIC_FROM && (nmax as f64) < x {
        let (j0, _) = hankel_asymptotic(0, x);
        let (j1, _) = hankel_asymptotic(1, x);
        let mut out = vec![j0, j1];
        for n in 1..nmax {
            let next = 2.0 * n as f64 / x * out[n] - out[n - 1];
            out.push(next);
        }
        out.truncate(nmax + 1);
        return out;
    }
    miller(nmax, x)
}

/// `J_n(x)` for integer `n` (negative orders via `J_{-n} = (-1)^n J_n`).
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let sign_x = if x < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
    let v = bessel_j_upto(m, x.abs())[m] * sign_x;
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `(J_0(x), J_1(x))`, fast path used by kernel tables.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    let x = x.abs();
    if x > ASYMPTOTIC_FROM {
        (hankel_asymptotic(0, x).0, hankel_asymptotic(1, x).0)
    } else {
        let v = bessel_j_upto(1, x);
        (v[0], v[1])
    }
}

/// `Y_0(x) .. Y_nmax(x)` for `x > 0`.
pub fn bessel_y_upto(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x > 0.0, "Y_n needs a positive argument");
    let (y0, y1) = if x > ASYMPTOTIC_FROM {
        (hankel_asymptotic(0, x).1, hankel_asymptotic(1, x).1)
    } else {
        y01_neumann(x)
    };
    let mut out = vec![y0, y1];
    for n in 1..nmax {
        let next = 2.0 * n as f64 / x * out[n] - out[n - 1];
        out.push(next);
    }
    out.truncate(nmax + 1);
    out
}

/// `H^{(1)}_0(x) .. H^{(1)}_nmax(x)` for `x > 0`.
pub fn hankel1_upto(nmax: usize, x: f64) -> Vec<Complex64> {
    let j = bessel_j_upto(nmax, x);
    let y = bessel_y_upto(nmax, x);
    j.iter().zip(&y).map(|(&a, &b)| Complex64::new(a, b)).collect()
}

/// `H^{(1)}_n(x)` for integer order.
pub fn hankel1(n: i32, x: f64) -> Complex64 {
    let m = n.unsigned_abs() as usize;
    let h = hankel1_upto(m, x)[m];
    if n < 0 && m % 2 == 1 {
        -h
    } else {
        h
    }
}

/// Derivative `J_n'(x)` from the three-term relation.
pub fn bessel_j_prime(n: i32, x: f64) -> f64 {
    0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
}

/// Derivative `H^{(1)}_n'(x)`.
pub fn hankel1_prime(n: i32, x: f64) -> Complex64 {
    0.5 * (hankel1(n - 1, x) - hankel1(n + 1, x))
}

fn j_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let q = -half * half;
    for s in 1..200 {
        term *= q / (s as f64 * (s + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(nmax: usize, x: f64) -> Vec<f64> {
    let top = (nmax as f64).max(x);
    let mut start = (top + 30.0 + (40.0 * top).sqrt()) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut vals = vec![0.0; start + 2];
    vals[start + 1] = 0.0;
    vals[start] = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            norm *= 1e-250;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * vals[k - 1];
        }
    }
    norm += vals[0];
    vals.truncate(nmax + 1);
    vals.iter().map(|v| v / norm).collect()
}

fn y01_neumann(x: f64) -> (f64, f64) {
    let kmax = (x as usize) + 40;
    let j = bessel_j_upto(2 * kmax + 1, x);
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 1..=kmax {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
    }
    let y0 = 2.0 / PI * lg * j[0] - 4.0 / PI * s0;
    let y1 = -2.0 / PI * (j[0] / x - lg * j[1]) + 2.0 / PI * s1;
    (y0, y1)
}

/// Hankel asymptotic expansion returning `(J_n(x), Y_n(x))`.
fn hankel_asymptotic(n: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (n as f64) * (n as f64);
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * eight_x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * n as f64 + 0.25) * PI;
    let amp = (2.0 / (PI * x)).sqrt();
    let (s, c) = chi.sin_cos();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from scipy.special (jv, yv) at double precision.
    #[test]
    fn bessel_j_matches_reference() {
        let cases: [(i32, f64, f64); 8] = [
            (0, 0.5, 0.938_469_807_240_812_9),
            (1, 2.0, 0.576_724_807_756_873_4),
            (2, 10.0, 0.254_630_313_685_121),
            (5, 3.0, 0.043_028_434_877_047_58),
            (0, 30.0, -0.086_367_983_581_040_23),
            (1, 100.0, -0.077_145_352_014_112_16),
            (12, 7.5, 0.005_225_044_685_803_462_5),
            (3, 40.0, -0.126_144_815_505_820_82),
        ];
        for (n, x, want) in cases {
            let got = bessel_j(n, x);
            assert!((got - want).abs() < 1e-13, "J_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn bessel_y_matches_reference() {
        let cases: [(usize, f64, f64); 6] = [
            (0, 0.5, -0.444_518_733_506_706_6),
            (1, 2.0, -0.107_032_431_540_937_5),
            (0, 12.3, -0.198_593_094_635_026_28),
            (1, 25.5, -0.145_361_058_723_049_39),
            (3, 4.0, -0.182_022_115_953_485_4),
            (0, 60.0, 0.047_358_952_209_449_4),
        ];
        for (n, x, want) in cases {
            let got = bessel_y_upto(n, x)[n];
            assert!((got - want).abs() < 1e-12, "Y_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn wronskian_holds() {
        for &x in &[0.1, 1.0, 3.7, 24.9, 25.1, 80.0] {
            let j = bessel_j_upto(1, x);
            let y = bessel_y_upto(1, x);
            let w = j[1] * y[0] - j[0] * y[1];
            assert!((w - 2.0 / (PI * x)).abs() < 1e-13 * (1.0 + 1.0 / x));
        }
    }
}
