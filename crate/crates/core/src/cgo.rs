//! Complex geometrical optics solutions `w = γ^{−1/2}(1+r)e^{η·x}` of
//! `∇·γ∇w + k²ρw = 0`.
//!
//! The residual solves `(Δ + 2η·∇)r = q(1+r)`. The inverse of `Δ + 2η·∇` is a
//! Fourier multiplier applied in the twisted basis of [`Spectral`], which has
//! no frequency at the real zero `ξ = 0` of the symbol.
//!
//! `q` is kept compactly supported. Its contrast part is
//! `q_c = γ^{−1/2}Δγ^{1/2} − k²(ρ/γ − 1)`; the background value `−k²` is only
//! added under an explicit window, so the full equation holds where the
//! window equals one.

use crate::asymptotics::{fit_decay, AsymptoticFit, EtaVector};
use crate::error::{Error, Result};
use crate::geometry::{Point, Sector};
use crate::grid::{lp_norm, max_abs, Grid2, Spectral};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sampled `q` on a periodic box.
#[derive(Debug, Clone)]
pub struct ContrastPotential {
    pub grid: Grid2,
    pub q_values: Vec<Complex64>,
    /// `k²` carried by the window, zero when no background is included.
    pub background_k2: f64,
    pub window: Option<Vec<f64>>,
    /// The coefficients `q` was built from, when known.
    pub gamma: Option<Vec<f64>>,
    pub rho: Option<Vec<f64>>,
}

impl ContrastPotential {
    pub fn from_values(grid: Grid2, q_values: Vec<Complex64>) -> Result<Self> {
        let q = Self { grid, q_values, background_k2: 0.0, window: None, gamma: None, rho: None };
        q.check_margin()?;
        Ok(q)
    }

    pub fn is_zero(&self) -> bool {
        self.q_values.iter().all(|v| v.norm() == 0.0)
    }

    /// `q` must vanish on the outer quarter of the box.
    fn check_margin(&self) -> Result<()> {
        let n = self.grid.n;
        let scale = max_abs(&self.q_values);
        let margin = n / 4;
        for (i, v) in self.q_values.iter().enumerate() {
            if self.grid.cells_from_edge(i) < margin && v.norm() > 1e-12 * scale.max(1e-300) {
                return Err(Error::SupportViolated(format!(
                    "q = {:.3e} at {:?}, within a quarter box of the boundary",
                    v.norm(),
                    self.grid.point_at(i)
                )));
            }
        }
        Ok(())
    }

    /// Adds `−k²χ` for a smooth window `χ`.
    pub fn with_background(mut self, k: f64, window: Vec<f64>) -> Result<Self> {
        assert_eq!(window.len(), self.grid.len());
        let k2 = k * k;
        for (q, w) in self.q_values.iter_mut().zip(&window) {
            *q -= k2 * w;
        }
        self.background_k2 = k2;
        self.window = Some(window);
        self.check_margin()?;
        Ok(self)
    }
}

/// `C^∞` step: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Radial plateau: one on `|x − c| ≤ r1`, zero beyond `r2`.
pub fn plateau(grid: &Grid2, c: Point, r1: f64, r2: f64) -> Vec<f64> {
    grid.sample(|x| {
        let r = (x[0] - c[0]).hypot(x[1] - c[1]);
        smooth_step((r2 - r) / (r2 - r1))
    })
}

/// Smooth compactly supported bump `amp·exp(1 − 1/(1−|x−c|²/R²))`.
pub fn bump(grid: &Grid2, c: Point, radius: f64, amp: f64) -> Vec<f64> {
    grid.sample(|x| {
        let t = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (radius * radius);
        if t < 1.0 {
            amp * (1.0 - 1.0 / (1.0 - t)).exp()
        } else {
            0.0
        }
    })
}

/// `q_c = γ^{−1/2}Δγ^{1/2} − k²(ρ/γ − 1)`.
pub fn build_q(grid: Grid2, gamma: &[f64], rho: &[f64], k: f64) -> Result<ContrastPotential> {
    let lo = gamma.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(lo > 0.0) {
        return Err(Error::EllipticityViolated(lo));
    }
    let sp = Spectral::new(grid, false);
    let sq: Vec<Complex64> = gamma.iter().map(|g| Complex64::new(g.sqrt() - 1.0, 0.0)).collect();
    let lap = sp.laplacian(&sq);
    let k2 = k * k;
    // Spectral leakage is discarded where γ is exactly the background value.
    let q: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let l = if gamma[i] == 1.0 { 0.0 } else { lap[i].re / gamma[i].sqrt() };
            let v = l - k2 * (rho[i] / gamma[i] - 1.0);
            Complex64::new(v, 0.0)
        })
        .collect();
    let mut c = ContrastPotential::from_values(grid, q)?;
    c.gamma = Some(gamma.to_vec());
    c.rho = Some(rho.to_vec());
    Ok(c)
}

/// `b⃗ = ∇γ^{1/2}/γ^{1/2}`.
#[derive(Debug, Clone)]
pub struct DriftField {
    pub b_values: [Vec<f64>; 2],
}

pub fn drift_field(grid: Grid2, gamma: &[f64]) -> DriftField {
    let sp = Spectral::new(grid, false);
    let sq: Vec<Complex64> = gamma.iter().map(|g| Complex64::new(g.sqrt() - 1.0, 0.0)).collect();
    let g = sp.gradient(&sq);
    // Exactly zero wherever γ is exactly the background value.
    let b = |c: &Vec<Complex64>| {
        c.iter().zip(gamma).map(|(v, &gm)| if gm == 1.0 { 0.0 } else { v.re / gm.sqrt() }).collect()
    };
    DriftField { b_values: [b(&g[0]), b(&g[1])] }
}

/// Symbol of `Δ + 2η·∇`.
fn symbol(eta: &[Complex64; 2], kx: f64, ky: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    -(kx * kx + ky * ky) + 2.0 * i * (eta[0] * kx + eta[1] * ky)
}

/// Smallest `|symbol|` over the twisted grid.
pub fn min_symbol(sp: &Spectral, eta: &EtaVector) -> f64 {
    let e = eta.eta();
    let mut m = f64::INFINITY;
    for &ky in &sp.freqs {
        for &kx in &sp.freqs {
            m = m.min(symbol(&e, kx, ky).norm());
        }
    }
    m
}

/// Solves `(Δ + 2η·∇)r = f` by the Fourier multiplier `1/(−|ξ|² + 2iη·ξ)`.
pub fn faddeev_apply(sp: &Spectral, f: &[Complex64], eta: &EtaVector) -> Result<Vec<Complex64>> {
    assert!(sp.twisted, "faddeev_apply needs the twisted basis");
    let floor = 1e-8 * eta.tau * eta.tau;
    let m = min_symbol(sp, eta);
    if m < floor {
        return Err(Error::SymbolTooSmall(m));
    }
    let scale = max_abs(f);
    if scale > 0.0 {
        let edge = f
            .iter()
            .enumerate()
            .filter(|(i, _)| sp.grid.cells_from_edge(*i) < 2)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        if edge > 1e-8 * scale {
            return Err(Error::PreconditionViolated(format!(
                "source is not small at the box boundary ({edge:.2e} vs {scale:.2e})"
            )));
        }
    }
    let e = eta.eta();
    Ok(sp.apply(f, |kx, ky| 1.0 / symbol(&e, kx, ky)))
}

/// `(Δ + 2η·∇)r` in the twisted basis.
pub fn faddeev_operator(sp: &Spectral, r: &[Complex64], eta: &EtaVector) -> Vec<Complex64> {
    let e = eta.eta();
    sp.apply(r, |kx, ky| symbol(&e, kx, ky))
}

#[derive(Debug, Clone)]
pub struct CgoSolution {
    pub eta: EtaVector,
    pub grid: Grid2,
    pub r_values: Vec<Complex64>,
    pub iterations: usize,
    pub fixed_point_residual: f64,
}

/// Fixed point `r ← G_η(q(1+r))`.
pub fn solve_cgo(q: &ContrastPotential, eta: &EtaVector, tol: f64, max_iter: usize) -> Result<CgoSolution> {
    let sp = Spectral::new(q.grid, true);
    let n = q.grid.len();
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    if q.is_zero() {
        return Ok(CgoSolution { eta: *eta, grid: q.grid, r_values: r, iterations: 1, fixed_point_residual: 0.0 });
    }
    let mut prev_step = f64::INFINITY;
    let mut bad = 0;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let src: Vec<Complex64> = q.q_values.iter().zip(&r).map(|(qv, rv)| qv * (1.0 + rv)).collect();
        let next = faddeev_apply(&sp, &src, eta)?;
        let step = next.iter().zip(&r).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let size = next.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        r = next;
        residual = if size > 0.0 { step / size } else { 0.0 };
        if !residual.is_finite() {
            return Err(Error::NoContraction { tau: eta.tau });
        }
        if residual <= tol {
            return Ok(CgoSolution { eta: *eta, grid: q.grid, r_values: r, iterations: it, fixed_point_residual: residual });
        }
        if it > 1 && step >= prev_step {
            bad += 1;
            if bad >= 5 {
                return Err(Error::NoContraction { tau: eta.tau });
            }
        } else {
            bad = 0;
        }
        prev_step = step;
    }
    Err(Error::NoConvergence { residual, iterations: max_iter })
}

impl CgoSolution {
    /// `max|(Δ+2η·∇)r − q(1+r)| / max|q(1+r)|` over cells at least
    /// `margin` cells from the boundary.
    pub fn pde_residual(&self, q: &ContrastPotential, margin: usize) -> f64 {
        let sp = Spectral::new(self.grid, true);
        let lhs = faddeev_operator(&sp, &self.r_values, &self.eta);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for (i, l) in lhs.iter().enumerate() {
            if self.grid.cells_from_edge(i) < margin {
                continue;
            }
            let rhs = q.q_values[i] * (1.0 + self.r_values[i]);
            num = num.max((l - rhs).norm());
            den = den.max(rhs.norm());
        }
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// `φ = γ^{−1/2}(1+r)`, so that `w = φ e^{η·x}`.
    pub fn phi(&self, gamma: &[f64]) -> Vec<Complex64> {
        self.r_values.iter().zip(gamma).map(|(r, g)| (1.0 + r) / g.sqrt()).collect()
    }

    /// `w(x)` at one grid index (may overflow far from the origin for large τ).
    pub fn w_at(&self, gamma: &[f64], idx: usize) -> Complex64 {
        let x = self.grid.point_at(idx);
        (1.0 + self.r_values[idx]) / gamma[idx].sqrt() * self.eta.dot(x).exp()
    }

    /// Relative residual of `∇·γ∇w + k²ρw` divided by `e^{η·x}`,
    /// i.e. `(∇+η)·[γ(∇+η)φ] + k²ρφ`, over the indices in `mask`.
    /// Derivatives are spectral: twisted for everything involving `r`.
    pub fn full_pde_residual(&self, gamma: &[f64], rho: &[f64], k: f64, mask: impl Fn(usize) -> bool) -> f64 {
        let sp = Spectral::new(self.grid, true);
        let e = self.eta.eta();
        let one = Complex64::new(1.0, 0.0);
        // φ = 1 + ψ with ψ representable in the twisted basis.
        let psi: Vec<Complex64> = self.phi(gamma).iter().map(|p| p - one).collect();
        let gpsi = sp.gradient(&psi);
        // G = (γ−1)η + γ(∇+η)ψ.
        let big_g: [Vec<Complex64>; 2] = [0, 1].map(|c| {
            (0..psi.len())
                .map(|i| (gamma[i] - 1.0) * e[c] + gamma[i] * (gpsi[c][i] + e[c] * psi[i]))
                .collect()
        });
        let div = sp.divergence(&big_g);
        let mut num = 0.0f64;
        let mut scale = 0.0f64;
        let tau2 = self.eta.tau * self.eta.tau;
        for i in 0..psi.len() {
            if !mask(i) {
                continue;
            }
            let phi = one + psi[i];
            let res = div[i] + e[0] * big_g[0][i] + e[1] * big_g[1][i] + k * k * rho[i] * phi;
            num = num.max(res.norm());
            scale = scale.max((tau2 + k * k) * phi.norm());
        }
        if scale == 0.0 {
            num
        } else {
            num / scale
        }
    }

    /// Largest mismatch in `∇w e^{−η·x} = γ^{−1/2}(∇r + (1+r)(η − b⃗))`,
    /// relative to the right-hand side, with the left side differentiated
    /// spectrally.
    pub fn gradient_identity_residual(&self, gamma: &[f64], drift: &DriftField) -> f64 {
        let sp = Spectral::new(self.grid, true);
        let e = self.eta.eta();
        let one = Complex64::new(1.0, 0.0);
        let psi: Vec<Complex64> = self.phi(gamma).iter().map(|p| p - one).collect();
        let gpsi = sp.gradient(&psi);
        let gr = sp.gradient(&self.r_values);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..psi.len() {
            let phi = one + psi[i];
            let ig = 1.0 / gamma[i].sqrt();
            for c in 0..2 {
                let lhs = gpsi[c][i] + e[c] * phi;
                let rhs = ig * (gr[c][i] + (1.0 + self.r_values[i]) * (e[c] - drift.b_values[c][i]));
                num = num.max((lhs - rhs).norm());
                den = den.max(rhs.norm());
            }
        }
        num / den
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayRow {
    pub tau: f64,
    pub norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub p: f64,
    pub rows: Vec<DecayRow>,
    /// `None` when every norm vanishes.
    pub fit: Option<AsymptoticFit>,
    pub degenerate: bool,
    /// `−n/p + 0.1`.
    pub bound: f64,
    pub passed: bool,
}

/// Point evaluation of `w = (1+r)e^{η·x}` through the trigonometric
/// interpolant of `r`. Valid where `γ = 1`.
#[derive(Debug, Clone)]
pub struct CgoField {
    pub eta: EtaVector,
    grid: Grid2,
    freqs: Vec<f64>,
    r_hat: Vec<Complex64>,
}

impl CgoField {
    pub fn new(sol: &CgoSolution) -> Self {
        let sp = Spectral::new(sol.grid, true);
        let mut r_hat = sol.r_values.clone();
        sp.forward(&mut r_hat);
        let s = 1.0 / sol.grid.len() as f64;
        r_hat.iter_mut().for_each(|v| *v *= s);
        Self { eta: sol.eta, grid: sol.grid, freqs: sp.freqs.clone(), r_hat }
    }

    /// `(r, ∇r)` at an arbitrary point.
    pub fn r_grad(&self, x: Point) -> (Complex64, [Complex64; 2]) {
        let n = self.grid.n;
        let ex: Vec<Complex64> =
            self.freqs.iter().map(|k| Complex64::from_polar(1.0, k * (x[0] - self.grid.origin[0]))).collect();
        let mut r = Complex64::new(0.0, 0.0);
        let mut rx = Complex64::new(0.0, 0.0);
        let mut ry = Complex64::new(0.0, 0.0);
        for iy in 0..n {
            let row = &self.r_hat[iy * n..(iy + 1) * n];
            let mut s = Complex64::new(0.0, 0.0);
            let mut sx = Complex64::new(0.0, 0.0);
            for ix in 0..n {
                let t = row[ix] * ex[ix];
                s += t;
                sx += t * self.freqs[ix];
            }
            let ey = Complex64::from_polar(1.0, self.freqs[iy] * (x[1] - self.grid.origin[1]));
            r += s * ey;
            rx += sx * ey;
            ry += s * ey * self.freqs[iy];
        }
        let i = Complex64::new(0.0, 1.0);
        (r, [i * rx, i * ry])
    }
}

impl crate::fields::FieldEval for CgoField {
    fn value_grad(&self, x: Point) -> (Complex64, [Complex64; 2]) {
        let (r, g) = self.r_grad(x);
        let eta = self.eta.eta();
        let e = (eta[0] * x[0] + eta[1] * x[1]).exp();
        let w = (1.0 + r) * e;
        (w, [(g[0] + (1.0 + r) * eta[0]) * e, (g[1] + (1.0 + r) * eta[1]) * e])
    }
}

/// `‖r‖_{L^p(C_ε)}` over a τ ladder, with `d` along the sector bisector.
pub fn residual_decay_report(q: &ContrastPotential, sector: &Sector, taus: &[f64], p: f64) -> Result<DecayReport> {
    let phi = sector.bisector();
    let rows: Vec<DecayRow> = taus
        .par_iter()
        .map(|&tau| {
            let eta = EtaVector::new(tau, phi, 1)?;
            let sol = solve_cgo(q, &eta, 1e-12, 200)?;
            let norm = lp_norm(&sol.r_values, q.grid.h(), p, |i| sector.contains(q.grid.point_at(i)));
            Ok(DecayRow { tau, norm, iterations: sol.iterations })
        })
        .collect::<Result<_>>()?;
    let bound = -2.0 / p + 0.1;
    if rows.iter().all(|r| r.norm == 0.0) {
        return Ok(DecayReport { p, rows, fit: None, degenerate: true, bound, passed: true });
    }
    let vals: Vec<Complex64> = rows.iter().map(|r| Complex64::new(r.norm, 0.0)).collect();
    let fit = fit_decay(taus, &vals)?;
    Ok(DecayReport { p, rows, fit: Some(fit), degenerate: false, bound, passed: fit.exponent <= bound })
}

/// Convenience: `q` for a smooth conductivity bump and density bump centred
/// in the box, with everything inside the inner half.
pub fn bump_medium(grid: Grid2, center: Point, radius: f64, gamma_amp: f64, rho_amp: f64) -> (Vec<f64>, Vec<f64>) {
    let g: Vec<f64> = bump(&grid, center, radius, gamma_amp).iter().map(|b| 1.0 + b).collect();
    let r: Vec<f64> = bump(&grid, center, radius, rho_amp).iter().map(|b| 1.0 + b).collect();
    (g, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid2 {
        Grid2::centered(n, 8.0, [0.0, 0.0])
    }

    #[test]
    fn background_gives_zero_q() {
        let g = grid(32);
        let ones = vec![1.0; g.len()];
        let q = build_q(g, &ones, &ones, 2.0).unwrap();
        assert!(q.is_zero());
    }

    #[test]
    fn density_bump_only() {
        let g = grid(64);
        let b = bump(&g, [0.0, 0.0], 1.0, 0.4);
        let rho: Vec<f64> = b.iter().map(|v| 1.0 + v).collect();
        let ones = vec![1.0; g.len()];
        let q = build_q(g, &ones, &rho, 1.5).unwrap();
        for (qv, bv) in q.q_values.iter().zip(&b) {
            assert!((qv.re + 2.25 * bv).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipticity_is_checked() {
        let g = grid(16);
        let mut gam = vec![1.0; g.len()];
        gam[40] = -0.1;
        assert_eq!(build_q(g, &gam, &vec![1.0; g.len()], 1.0).unwrap_err(), Error::EllipticityViolated(-0.1));
    }

    #[test]
    fn drift_vanishes_in_background() {
        let g = grid(64);
        let (gam, _) = bump_medium(g, [0.5, 0.0], 1.0, 0.5, 0.0);
        let d = drift_field(g, &gam);
        for i in 0..g.len() {
            let x = g.point_at(i);
            if (x[0] - 0.5).hypot(x[1]) > 1.05 {
                assert!(d.b_values[0][i].abs() < 1e-10 && d.b_values[1][i].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_source_gives_zero() {
        let g = grid(32);
        let sp = Spectral::new(g, true);
        let eta = EtaVector::new(5.0, 0.3, 1).unwrap();
        let r = faddeev_apply(&sp, &vec![Complex64::new(0.0, 0.0); g.len()], &eta).unwrap();
        assert!(max_abs(&r) == 0.0);
    }

    #[test]
    fn q_zero_converges_at_once() {
        let g = grid(32);
        let q = ContrastPotential::from_values(g, vec![Complex64::new(0.0, 0.0); g.len()]).unwrap();
        let s = solve_cgo(&q, &EtaVector::new(10.0, 0.0, 1).unwrap(), 1e-12, 10).unwrap();
        assert_eq!(s.iterations, 1);
        assert_eq!(max_abs(&s.r_values), 0.0);
    }

    #[test]
    fn support_margin_enforced() {
        let g = grid(32);
        let mut v = vec![Complex64::new(0.0, 0.0); g.len()];
        v[33] = Complex64::new(1.0, 0.0);
        assert!(matches!(ContrastPotential::from_values(g, v), Err(Error::SupportViolated(_))));
    }
}
