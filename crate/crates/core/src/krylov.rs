//! Restarted GMRES for matrix-free complex operators.

use num_complex::Complex64 as C64;

#[derive(Debug, Clone)]
pub struct GmresResult {
    pub x: Vec<C64>,
    /// `‖b − Ax‖ / ‖b‖` from the last true residual evaluation.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// GMRES(`restart`) with modified Gram–Schmidt and Givens rotations.
pub fn gmres(
    apply: impl Fn(&[C64]) -> Vec<C64>,
    b: &[C64],
    x0: Option<Vec<C64>>,
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> GmresResult {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = x0.unwrap_or_else(|| vec![C64::new(0.0, 0.0); n]);
    if bnorm == 0.0 {
        return GmresResult { x: vec![C64::new(0.0, 0.0); n], residual: 0.0, iterations: 0, converged: true };
    }
    let restart = restart.max(1);
    let mut its = 0;
    loop {
        let ax = apply(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= tol || its >= max_iter {
            return GmresResult { x, residual: rel, iterations: its, converged: rel <= tol };
        }
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|c| c / beta).collect()];
        let mut h = vec![vec![C64::new(0.0, 0.0); restart]; restart + 1];
        let mut cs = vec![C64::new(0.0, 0.0); restart];
        let mut sn = vec![C64::new(0.0, 0.0); restart];
        let mut g = vec![C64::new(0.0, 0.0); restart + 1];
        g[0] = C64::new(beta, 0.0);
        let mut m = 0;
        while m < restart && its < max_iter {
            let mut w = apply(&v[m]);
            for (i, vi) in v.iter().enumerate() {
                let hij = dotc(vi, &w);
                h[i][m] = hij;
                w.iter_mut().zip(vi).for_each(|(a, b)| *a -= hij * b);
            }
            let hn = norm(&w);
            h[m + 1][m] = C64::new(hn, 0.0);
            for i in 0..m {
                let t = cs[i].conj() * h[i][m] + sn[i].conj() * h[i + 1][m];
                h[i + 1][m] = -sn[i] * h[i][m] + cs[i] * h[i + 1][m];
                h[i][m] = t;
            }
            let (a, bb) = (h[m][m], h[m + 1][m]);
            let d = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if d == 0.0 {
                cs[m] = C64::new(1.0, 0.0);
                sn[m] = C64::new(0.0, 0.0);
            } else {
                cs[m] = a / d;
                sn[m] = bb / d;
            }
            h[m][m] = C64::new(d, 0.0);
            h[m + 1][m] = C64::new(0.0, 0.0);
            g[m + 1] = -sn[m] * g[m];
            g[m] = cs[m].conj() * g[m];
            its += 1;
            m += 1;
            let est = g[m].norm() / bnorm;
            if hn == 0.0 || est <= 0.5 * tol {
                break;
            }
            v.push(w.iter().map(|c| c / hn).collect());
        }
        // Back substitution for the m×m upper-triangular system.
        let mut y = vec![C64::new(0.0, 0.0); m];
        for i in (0..m).rev() {
            let s: C64 = (i + 1..m).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            x.iter_mut().zip(&v[j]).for_each(|(a, b)| *a += yj * b);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_nonsymmetric_system() {
        let n = 50;
        let a = |x: &[C64]| -> Vec<C64> {
            (0..n)
                .map(|i| {
                    let mut s = x[i] * C64::new(3.0, 0.5);
                    if i > 0 {
                        s += x[i - 1] * C64::new(-1.0, 0.2);
                    }
                    if i + 1 < n {
                        s += x[i + 1] * 0.7;
                    }
                    s
                })
                .collect()
        };
        let xt: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), 1.0 / (1.0 + i as f64))).collect();
        let b = a(&xt);
        let r = gmres(a, &b, None, 1e-12, 10, 500);
        assert!(r.converged, "{}", r.residual);
        let err = xt.iter().zip(&r.x).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let r = gmres(|x| x.to_vec(), &[C64::new(0.0, 0.0); 4], None, 1e-10, 5, 10);
        assert!(r.converged && r.x.iter().all(|v| v.norm() == 0.0));
    }
}
