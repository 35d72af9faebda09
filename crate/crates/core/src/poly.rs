//! Homogeneous bivariate polynomials stored as coefficient tables.
//!
//! A table `c` of degree `j` has `j + 1` entries and represents
//! `sum_a c[a] x1^(j-a) x2^a`.

use num_complex::Complex64;

pub type Table = Vec<Complex64>;

pub fn degree(t: &[Complex64]) -> usize {
    t.len() - 1
}

pub fn zero(deg: usize) -> Table {
    vec![Complex64::new(0.0, 0.0); deg + 1]
}

pub fn d1(t: &[Complex64]) -> Table {
    let j = degree(t);
    if j == 0 {
        return zero(0);
    }
    (0..j).map(|a| t[a] * (j - a) as f64).collect()
}

pub fn d2(t: &[Complex64]) -> Table {
    let j = degree(t);
    if j == 0 {
        return zero(0);
    }
    (1..=j).map(|a| t[a] * a as f64).collect()
}

pub fn laplacian(t: &[Complex64]) -> Table {
    if degree(t) < 2 {
        return zero(0);
    }
    add(&d1(&d1(t)), &d2(&d2(t)))
}

pub fn add(a: &[Complex64], b: &[Complex64]) -> Table {
    assert_eq!(a.len(), b.len(), "degree mismatch");
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> Table {
    assert_eq!(a.len(), b.len(), "degree mismatch");
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Complex64], s: Complex64) -> Table {
    a.iter().map(|x| x * s).collect()
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Table {
    let mut out = zero(degree(a) + degree(b));
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn max_abs(t: &[Complex64]) -> f64 {
    t.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn eval(t: &[Complex64], x: [f64; 2]) -> Complex64 {
    let j = degree(t);
    let mut s = Complex64::new(0.0, 0.0);
    for (a, c) in t.iter().enumerate() {
        s += c * x[0].powi((j - a) as i32) * x[1].powi(a as i32);
    }
    s
}

/// Table of `z^p z̄^q` with `z = x1 + i x2`.
pub fn zpow(p: usize, q: usize) -> Table {
    let z = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
    let zb = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..p {
        out = mul(&out, &z);
    }
    for _ in 0..q {
        out = mul(&out, &zb);
    }
    out
}

/// Coordinates of a degree-`j` table in the basis `z^{j-s} z̄^s`, `s = 0..j`.
pub fn to_z_basis(t: &[Complex64]) -> Table {
    let j = degree(t);
    // x1 = (z + z̄)/2, x2 = (z - z̄)/(2i); expand each monomial.
    let half = Complex64::new(0.5, 0.0);
    let x1 = vec![half, half];
    let x2 = vec![Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5)];
    let mut out = zero(j);
    for (a, c) in t.iter().enumerate() {
        let mut m = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..(j - a) {
            m = mul(&m, &x1);
        }
        for _ in 0..a {
            m = mul(&m, &x2);
        }
        for (s, v) in m.iter().enumerate() {
            out[s] += c * v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_basis_round_trip() {
        let t: Table = (0..5).map(|a| Complex64::new(a as f64 - 1.5, 0.3 * a as f64)).collect();
        let zc = to_z_basis(&t);
        let mut back = zero(4);
        for (s, c) in zc.iter().enumerate() {
            back = add(&back, &scale(&zpow(4 - s, s), *c));
        }
        for (x, y) in t.iter().zip(&back) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn powers_of_z_are_harmonic() {
        for n in 0..7 {
            assert!(max_abs(&laplacian(&zpow(n, 0))) < 1e-12);
            assert!(max_abs(&laplacian(&zpow(0, n))) < 1e-12);
        }
        assert!(max_abs(&laplacian(&zpow(1, 1))) > 1.0);
    }
}
