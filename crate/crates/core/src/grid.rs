//! Uniform square grids and FFT-based spectral calculus on them.
//!
//! Two bases are supported: the ordinary periodic one and a "twisted" one
//! whose frequencies sit at half-integer multiples of `2π/L`. The twisted
//! basis never contains `ξ = 0`.

use crate::geometry::Point;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// `n × n` points `origin + h·(ix, iy)` with `h = side/n`; storage is
/// row-major, index `iy·n + ix`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub n: usize,
    pub side: f64,
    pub origin: Point,
}

impl Grid2 {
    pub fn new(n: usize, side: f64, origin: Point) -> Self {
        assert!(n >= 2 && side > 0.0);
        Self { n, side, origin }
    }

    /// Box `[c − side/2, c + side/2)²`.
    pub fn centered(n: usize, side: f64, center: Point) -> Self {
        Self::new(n, side, [center[0] - side / 2.0, center[1] - side / 2.0])
    }

    pub fn h(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn point(&self, ix: usize, iy: usize) -> Point {
        let h = self.h();
        [self.origin[0] + ix as f64 * h, self.origin[1] + iy as f64 * h]
    }

    pub fn point_at(&self, idx: usize) -> Point {
        self.point(idx % self.n, idx / self.n)
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.point_at(i)).collect()
    }

    pub fn sample<T>(&self, f: impl Fn(Point) -> T) -> Vec<T> {
        (0..self.len()).map(|i| f(self.point_at(i))).collect()
    }

    /// Distance from a grid index to the box boundary, in cells.
    pub fn cells_from_edge(&self, idx: usize) -> usize {
        let (ix, iy) = (idx % self.n, idx / self.n);
        ix.min(iy).min(self.n - 1 - ix).min(self.n - 1 - iy)
    }
}

fn frequencies(n: usize, side: f64, twisted: bool) -> Vec<f64> {
    let shift = if twisted { 0.5 } else { 0.0 };
    (0..n)
        .map(|k| {
            let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            2.0 * PI * (kk + shift) / side
        })
        .collect()
}

/// FFT plans and frequency tables for one grid and basis.
#[derive(Clone)]
pub struct Spectral {
    pub grid: Grid2,
    pub twisted: bool,
    pub freqs: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    twist: Vec<Complex64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).field("twisted", &self.twisted).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid2, twisted: bool) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n;
        let twist = (0..n).map(|j| Complex64::from_polar(1.0, -PI * j as f64 / n as f64)).collect();
        Self {
            grid,
            twisted,
            freqs: frequencies(n, grid.side, twisted),
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            twist,
        }
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n;
        fft.process(data);
        transpose(data, n);
        fft.process(data);
        transpose(data, n);
    }

    fn apply_twist(&self, data: &mut [Complex64], conj: bool) {
        let n = self.grid.n;
        for iy in 0..n {
            for ix in 0..n {
                let t = self.twist[ix] * self.twist[iy];
                data[iy * n + ix] *= if conj { t.conj() } else { t };
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        if self.twisted {
            self.apply_twist(data, false);
        }
        self.transform(data, &self.fwd);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
        let s = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
        if self.twisted {
            self.apply_twist(data, true);
        }
    }

    /// Multiply in frequency space by `m(ξ)`.
    pub fn apply(&self, f: &[Complex64], m: impl Fn(f64, f64) -> Complex64) -> Vec<Complex64> {
        let n = self.grid.n;
        let mut d = f.to_vec();
        self.forward(&mut d);
        for iy in 0..n {
            for ix in 0..n {
                d[iy * n + ix] *= m(self.freqs[ix], self.freqs[iy]);
            }
        }
        self.inverse(&mut d);
        d
    }

    pub fn gradient(&self, f: &[Complex64]) -> [Vec<Complex64>; 2] {
        let n = self.grid.n;
        let mut d = f.to_vec();
        self.forward(&mut d);
        let mut gx = d.clone();
        let mut gy = d;
        for iy in 0..n {
            for ix in 0..n {
                let i = iy * n + ix;
                // Drop the unpaired Nyquist mode in the plain basis.
                let kx = if !self.twisted && n.is_multiple_of(2) && ix == n / 2 { 0.0 } else { self.freqs[ix] };
                let ky = if !self.twisted && n.is_multiple_of(2) && iy == n / 2 { 0.0 } else { self.freqs[iy] };
                gx[i] *= Complex64::new(0.0, kx);
                gy[i] *= Complex64::new(0.0, ky);
            }
        }
        self.inverse(&mut gx);
        self.inverse(&mut gy);
        [gx, gy]
    }

    pub fn divergence(&self, v: &[Vec<Complex64>; 2]) -> Vec<Complex64> {
        let a = self.gradient(&v[0])[0].clone();
        let b = self.gradient(&v[1]);
        a.iter().zip(&b[1]).map(|(x, y)| x + y).collect()
    }

    pub fn laplacian(&self, f: &[Complex64]) -> Vec<Complex64> {
        self.apply(f, |kx, ky| Complex64::new(-(kx * kx + ky * ky), 0.0))
    }
}

fn transpose(d: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            d.swap(i * n + j, j * n + i);
        }
    }
}

pub fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Discrete `L^p` norm with midpoint weights `h²` over the selected indices.
pub fn lp_norm(v: &[Complex64], h: f64, p: f64, mask: impl Fn(usize) -> bool) -> f64 {
    let s: f64 = v.iter().enumerate().filter(|(i, _)| mask(*i)).map(|(_, c)| c.norm().powf(p)).sum();
    (s * h * h).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(g: &Grid2, c: Point, s: f64) -> Vec<Complex64> {
        g.sample(|x| {
            let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
            Complex64::new((-r2 / (2.0 * s * s)).exp(), 0.0)
        })
    }

    #[test]
    fn round_trip_both_bases() {
        let g = Grid2::centered(32, 4.0, [0.0, 0.0]);
        for tw in [false, true] {
            let sp = Spectral::new(g, tw);
            let f: Vec<Complex64> = (0..g.len()).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
            let mut d = f.clone();
            sp.forward(&mut d);
            sp.inverse(&mut d);
            for (a, b) in d.iter().zip(&f) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_derivatives_of_gaussian() {
        let g = Grid2::centered(64, 8.0, [0.1, -0.2]);
        let s = 0.45;
        let f = gaussian(&g, [0.3, 0.1], s);
        for tw in [false, true] {
            let sp = Spectral::new(g, tw);
            let lap = sp.laplacian(&f);
            let grad = sp.gradient(&f);
            for (i, x) in g.points().iter().enumerate() {
                let dx = x[0] - 0.3;
                let dy = x[1] - 0.1;
                let r2 = dx * dx + dy * dy;
                let v = f[i].re;
                let want_lap = v * (r2 / s.powi(4) - 2.0 / (s * s));
                assert!((lap[i].re - want_lap).abs() < 1e-10, "lap at {x:?}");
                assert!((grad[0][i].re + v * dx / (s * s)).abs() < 1e-10);
                assert!((grad[1][i].re + v * dy / (s * s)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn twisted_frequencies_avoid_zero() {
        let f = frequencies(16, 2.0, true);
        assert!(f.iter().all(|k| k.abs() > 1.0));
        let f = frequencies(16, 2.0, false);
        assert_eq!(f[0], 0.0);
    }
}
