//! Lippmann–Schwinger solver for `∇·a∇u + k²cu = 0` with an outgoing
//! scattered field.
//!
//! The volume equation
//! `u = u^in + Φ_k * (k²(c−1)u) + ∇·Φ_k * ((a−1)∇u)`
//! is solved for the pair `(u, ∇u)` on the whole grid. Convolution uses the
//! Green's kernel truncated at radius `R` (exact for sources and targets in
//! the support when `R` exceeds its diameter and the box exceeds `R + D`).

use crate::error::{Error, Result};
use crate::fields::IncidentField;
use crate::geometry::Point;
use crate::grid::{Grid2, Spectral};
use crate::krylov::gmres;
use crate::medium::MediumSpec;
use crate::special::{bessel_j, bessel_j01, bessel_j_prime, hankel1, hankel1_prime, hankel1_upto};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Fourier transform of `(i/4)H₀^{(1)}(k|x|)·1_{|x|<R}` at `|ξ| = ρ`.
pub fn truncated_kernel_hat(rho: f64, k: f64, radius: f64) -> C64 {
    let eval = |rho: f64| {
        let h = hankel1_upto(1, k * radius);
        let (j0, j1) = bessel_j01(rho * radius);
        let bracket = rho * h[0] * j1 - k * h[1] * j0;
        (1.0 + I * (PI * radius / 2.0) * bracket) / (rho * rho - k * k)
    };
    let d = 1e-4 * k;
    if (rho - k).abs() < d {
        0.5 * (eval(k - d) + eval(k + d))
    } else {
        eval(rho)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, restart: 40, max_iter: 600 }
    }
}

#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    pub k: f64,
    pub incident: IncidentField,
    pub grid: Grid2,
    pub u_total: Vec<C64>,
    pub u_scattered: Vec<C64>,
    pub grad_u: [Vec<C64>; 2],
    pub solver_residual: f64,
    pub iterations: usize,
}

struct LsOperator<'a> {
    sp: Spectral,
    kernel: Vec<C64>,
    k2: f64,
    dc: Vec<f64>,
    da: Vec<f64>,
    with_gradient: bool,
    m: &'a MediumSpec,
}

impl LsOperator<'_> {
    fn n(&self) -> usize {
        self.m.grid.len()
    }

    /// `(U, ∇U)` for the sources built from `(u, g)`.
    fn potential(&self, x: &[C64]) -> [Vec<C64>; 3] {
        let n = self.n();
        let nn = self.m.grid.n;
        let mut s0: Vec<C64> = (0..n).map(|i| self.k2 * self.dc[i] * x[i]).collect();
        self.sp.forward(&mut s0);
        if self.with_gradient {
            let mut s1: Vec<C64> = (0..n).map(|i| self.da[i] * x[n + i]).collect();
            let mut s2: Vec<C64> = (0..n).map(|i| self.da[i] * x[2 * n + i]).collect();
            self.sp.forward(&mut s1);
            self.sp.forward(&mut s2);
            for iy in 0..nn {
                for ix in 0..nn {
                    let i = iy * nn + ix;
                    s0[i] += I * (self.sp.freqs[ix] * s1[i] + self.sp.freqs[iy] * s2[i]);
                }
            }
        }
        s0.iter_mut().zip(&self.kernel).for_each(|(a, b)| *a *= b);
        let mut gx = s0.clone();
        let mut gy = s0.clone();
        for iy in 0..nn {
            for ix in 0..nn {
                let i = iy * nn + ix;
                let kx = if ix == nn / 2 { 0.0 } else { self.sp.freqs[ix] };
                let ky = if iy == nn / 2 { 0.0 } else { self.sp.freqs[iy] };
                gx[i] *= I * kx;
                gy[i] *= I * ky;
            }
        }
        self.sp.inverse(&mut s0);
        self.sp.inverse(&mut gx);
        self.sp.inverse(&mut gy);
        [s0, gx, gy]
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n();
        let [u, gx, gy] = self.potential(x);
        let mut out = x.to_vec();
        for i in 0..n {
            out[i] -= u[i];
        }
        if self.with_gradient {
            for i in 0..n {
                out[n + i] -= gx[i];
                out[2 * n + i] -= gy[i];
            }
        }
        out
    }
}

/// Points per wavelength for the largest local wavenumber.
pub fn points_per_wavelength(m: &MediumSpec, k: f64) -> f64 {
    let cmax = m.c_values.iter().cloned().fold(1.0, f64::max);
    let amin = m.a_values.iter().cloned().fold(1.0, f64::min);
    2.0 * PI / (k * (cmax / amin).sqrt() * m.grid.h())
}

pub fn solve_scattering(m: &MediumSpec, f: &IncidentField, opts: &SolverOptions) -> Result<ScatteringSolution> {
    let k = f.k();
    if !(k > 0.0) {
        return Err(Error::PreconditionViolated("wavenumber must be positive".into()));
    }
    let ppw = points_per_wavelength(m, k);
    if ppw < 10.0 {
        return Err(Error::ResolutionTooCoarse { ppw });
    }
    let g = m.grid;
    let (_, diam) = m.config.extent();
    let reach = diam + 2.0 * g.h();
    if m.kernel_radius <= reach || g.side < m.kernel_radius + reach {
        return Err(Error::PreconditionViolated(format!(
            "box side {} cannot hold kernel radius {} for support diameter {diam}",
            g.side, m.kernel_radius
        )));
    }
    let n = g.len();
    let pts = g.points();
    let mut rhs: Vec<C64> = Vec::with_capacity(3 * n);
    let grads: Vec<[C64; 2]> = pts.par_iter().map(|x| f.gradient(*x)).collect();
    let u_in: Vec<C64> = pts.par_iter().map(|x| f.evaluate(*x)).collect();
    let with_gradient = m.a_values.iter().any(|&a| a != 1.0);
    rhs.extend_from_slice(&u_in);
    if with_gradient {
        rhs.extend(grads.iter().map(|d| d[0]));
        rhs.extend(grads.iter().map(|d| d[1]));
    }
    let sp = Spectral::new(g, false);
    let nn = g.n;
    let mut kernel = vec![C64::new(0.0, 0.0); n];
    for iy in 0..nn {
        for ix in 0..nn {
            let rho = sp.freqs[ix].hypot(sp.freqs[iy]);
            kernel[iy * nn + ix] = truncated_kernel_hat(rho, k, m.kernel_radius);
        }
    }
    let op = LsOperator {
        sp,
        kernel,
        k2: k * k,
        dc: m.c_values.iter().map(|c| c - 1.0).collect(),
        da: m.a_values.iter().map(|a| a - 1.0).collect(),
        with_gradient,
        m,
    };
    let res = gmres(|x| op.apply(x), &rhs, Some(rhs.clone()), opts.tol, opts.restart, opts.max_iter);
    if !res.converged {
        return Err(Error::NoConvergence { residual: res.residual, iterations: res.iterations });
    }
    // u = u^in + U; ∇u follows from the same potential.
    let [su, sgx, sgy] = op.potential(&res.x);
    let u_total: Vec<C64> = (0..n).map(|i| u_in[i] + su[i]).collect();
    let grad_u = [
        (0..n).map(|i| grads[i][0] + sgx[i]).collect(),
        (0..n).map(|i| grads[i][1] + sgy[i]).collect(),
    ];
    Ok(ScatteringSolution {
        k,
        incident: f.clone(),
        grid: g,
        u_total,
        u_scattered: su,
        grad_u,
        solver_residual: res.residual,
        iterations: res.iterations,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FarField {
    pub k: f64,
    pub angles: Vec<f64>,
    pub values: Vec<C64>,
    pub l2_norm: f64,
    pub sup_norm: f64,
}

impl FarField {
    pub fn new(k: f64, angles: Vec<f64>, values: Vec<C64>) -> Self {
        let mut f = Self { k, angles, values, l2_norm: 0.0, sup_norm: 0.0 };
        f.recompute_norms();
        f
    }

    /// Trapezoid `L²(S¹)` norm on the uniform angle grid.
    pub fn recompute_norms(&mut self) {
        let n = self.values.len().max(1) as f64;
        self.l2_norm = (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * 2.0 * PI / n).sqrt();
        self.sup_norm = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }

    /// `‖self − other‖_{L²(S¹)}` on matching angle grids.
    pub fn l2_distance(&self, other: &FarField) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        let n = self.values.len() as f64;
        (self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() * 2.0 * PI / n).sqrt()
    }
}

pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

/// `c₂(k) = e^{iπ/4}/√(8πk)`.
pub fn far_field_constant(k: f64) -> C64 {
    C64::from_polar(1.0 / (8.0 * PI * k).sqrt(), PI / 4.0)
}

pub fn far_field(sol: &ScatteringSolution, m: &MediumSpec, n_angles: usize) -> FarField {
    let k = sol.k;
    let h2 = sol.grid.h().powi(2);
    let src: Vec<(Point, C64, [C64; 2])> = m
        .support()
        .into_iter()
        .map(|i| {
            let dc = m.c_values[i] - 1.0;
            let da = m.a_values[i] - 1.0;
            (sol.grid.point_at(i), k * k * dc * sol.u_total[i], [da * sol.grad_u[0][i], da * sol.grad_u[1][i]])
        })
        .collect();
    let c2 = far_field_constant(k);
    let angles = uniform_angles(n_angles);
    let values = angles
        .par_iter()
        .map(|&t| {
            let xh = [t.cos(), t.sin()];
            let s: C64 = src
                .iter()
                .map(|(y, s0, s1)| {
                    let e = C64::from_polar(1.0, -k * (xh[0] * y[0] + xh[1] * y[1]));
                    (s0 + I * k * (xh[0] * s1[0] + xh[1] * s1[1])) * e
                })
                .sum();
            c2 * s * h2
        })
        .collect();
    FarField::new(k, angles, values)
}

/// Series coefficients `β_n` for plane-wave scattering by a homogeneous
/// disc `(a, c)` of radius `radius` centred at the origin.
pub fn disc_series_coefficients(k: f64, radius: f64, a: f64, c: f64, incidence: f64) -> Vec<(i32, C64)> {
    let k1 = k * (c / a).sqrt();
    let x = k * radius;
    let x1 = k1 * radius;
    let nmax = (x1.max(x) + 4.0 * x1.max(x).cbrt() + 15.0).ceil() as i32;
    (-nmax..=nmax)
        .map(|n| {
            let an = I.powi(n) * C64::from_polar(1.0, -(n as f64) * incidence);
            let jn = bessel_j(n, x);
            let jn1 = bessel_j(n, x1);
            let djn = bessel_j_prime(n, x);
            let djn1 = bessel_j_prime(n, x1);
            let hn = hankel1(n, x);
            let dhn = hankel1_prime(n, x);
            let num = k * djn * jn1 - a * k1 * djn1 * jn;
            let den = a * k1 * djn1 * hn - k * dhn * jn1;
            (n, an * num / den)
        })
        .collect()
}

/// Far field of the disc series solution for a disc centred at `center`.
pub fn disc_series_far_field(k: f64, center: Point, radius: f64, a: f64, c: f64, incidence: f64, angles: &[f64]) -> Vec<C64> {
    let beta = disc_series_coefficients(k, radius, a, c, incidence);
    let d = [incidence.cos(), incidence.sin()];
    angles
        .iter()
        .map(|&t| {
            let s: C64 = beta
                .iter()
                .map(|(n, b)| b * C64::from_polar(1.0, -((*n as f64) * PI / 2.0 + PI / 4.0) + (*n as f64) * t))
                .sum();
            // translation: incident phase at the centre and outgoing phase shift
            let shift = C64::from_polar(1.0, k * ((d[0] - t.cos()) * center[0] + (d[1] - t.sin()) * center[1]));
            s * (2.0 / (PI * k)).sqrt() * shift
        })
        .collect()
}

/// `∫|u^∞|² + √(8π/k)·Re[e^{iπ/4}u^∞(d̂)]`, which vanishes for real
/// coefficients under plane-wave incidence along `d̂`.
pub fn optical_theorem_defect(ff: &FarField, incidence: f64) -> (f64, f64) {
    let forward = interpolate_periodic(ff, incidence);
    let lhs = ff.l2_norm.powi(2);
    let rhs = -(8.0 * PI / ff.k).sqrt() * (C64::from_polar(1.0, PI / 4.0) * forward).re;
    (lhs, rhs)
}

fn interpolate_periodic(ff: &FarField, t: f64) -> C64 {
    // trigonometric interpolation of the uniform samples
    let n = ff.values.len();
    let mut s = C64::new(0.0, 0.0);
    let half = (n / 2) as i64;
    for m in -half..half {
        let cm: C64 = ff
            .angles
            .iter()
            .zip(&ff.values)
            .map(|(a, v)| v * C64::from_polar(1.0, -(m as f64) * a))
            .sum::<C64>()
            / n as f64;
        s += cm * C64::from_polar(1.0, m as f64 * t);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;

    #[test]
    fn truncated_kernel_matches_radial_quadrature() {
        let (k, r) = (2.0, 3.0);
        for &rho in &[0.0, 0.7, 1.999, 2.0, 3.3, 11.0] {
            let f = |t: f64| {
                let h0 = hankel1(0, k * t);
                I / 4.0 * h0 * bessel_j(0, rho * t) * 2.0 * PI * t
            };
            let mut want = C64::new(0.0, 0.0);
            let cuts = [0.0, 1e-3, 0.1, 1.0, 2.0, 3.0];
            for w in cuts.windows(2) {
                want += adaptive(f, w[0], w[1], 1e-13, 1e-12, 2000).value;
            }
            let got = truncated_kernel_hat(rho, k, r);
            assert!((got - want).norm() < 1e-7 * want.norm().max(1.0), "rho {rho}: {got} vs {want}");
        }
    }

    #[test]
    fn series_satisfies_optical_theorem() {
        let k = 2.0;
        let angles = uniform_angles(256);
        let v = disc_series_far_field(k, [0.0, 0.0], 1.0, 1.0, 2.0, 0.3, &angles);
        let ff = FarField::new(k, angles, v);
        let (l, r) = optical_theorem_defect(&ff, 0.3);
        assert!((l - r).abs() < 1e-10 * l, "{l} {r}");
    }
}
