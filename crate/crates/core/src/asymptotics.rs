//! Laplace-type asymptotics of corner integrals.
//!
//! All integrals are taken over a sector in coordinates centred at its
//! vertex, `∫_{C_ε} f(y) e^{η·y} dy`; the global factor `e^{η·x₀}` is left
//! out. Closed-form constants assume the sector frame, i.e. the first edge
//! along the positive `x1` axis and `φ` measured from it.

use crate::error::{Error, Result};
use crate::fields::HarmonicPolynomial2D;
use crate::geometry::{unit, Point, Sector};
use crate::mp::{self, Ctx, C as Mpc, RM};
use crate::poly;
use crate::quad::GaussLegendre;
use crate::special::gamma;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, LOG2_E, PI};
use std::sync::OnceLock;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dimension; the closed forms below are only instantiated in the plane.
pub const DIM: f64 = 2.0;

/// `η = −τ(d + i d⊥)` with `d = (cos φ, sin φ)` and `d⊥` at angle
/// `φ − branch·π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaVector {
    pub tau: f64,
    pub phi: f64,
    pub branch: i8,
}

impl EtaVector {
    pub fn new(tau: f64, phi: f64, branch: i8) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::PreconditionViolated(format!("tau must be positive, got {tau}")));
        }
        if branch != 1 && branch != -1 {
            return Err(Error::PreconditionViolated(format!("branch must be ±1, got {branch}")));
        }
        Ok(Self { tau, phi, branch })
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self { tau, ..*self }
    }

    pub fn d(&self) -> Point {
        unit(self.phi)
    }

    pub fn d_perp(&self) -> Point {
        unit(self.phi - self.branch as f64 * PI / 2.0)
    }

    pub fn eta(&self) -> [Complex64; 2] {
        let d = self.d();
        let p = self.d_perp();
        [
            -self.tau * Complex64::new(d[0], p[0]),
            -self.tau * Complex64::new(d[1], p[1]),
        ]
    }

    /// `η/τ`.
    pub fn unit_eta(&self) -> [Complex64; 2] {
        let e = self.eta();
        [e[0] / self.tau, e[1] / self.tau]
    }

    pub fn dot(&self, x: Point) -> Complex64 {
        let e = self.eta();
        e[0] * x[0] + e[1] * x[1]
    }

    pub fn dot_c(&self, v: [Complex64; 2]) -> Complex64 {
        let e = self.eta();
        e[0] * v[0] + e[1] * v[1]
    }

    /// Bilinear `η·η`; zero up to rounding.
    pub fn self_dot(&self) -> Complex64 {
        let e = self.eta();
        e[0] * e[0] + e[1] * e[1]
    }
}

// ---------------------------------------------------------------------------
// Incomplete gamma law

#[derive(Debug, Clone, Serialize)]
pub struct GammaCheck {
    pub b: f64,
    pub mu: Complex64,
    pub s: f64,
    pub numeric: Complex64,
    pub closed_form: Complex64,
    /// `|numeric − closed_form|`, evaluated in extended precision.
    pub error: f64,
    /// `10·e^{−s Re μ / 2}`.
    pub bound: f64,
    pub precision_bits: usize,
    /// False when `Γ(b)` had to be taken at double precision (2b not an integer).
    pub exact_gamma: bool,
    pub nodes: usize,
}

impl GammaCheck {
    pub fn within_bound(&self) -> bool {
        self.error <= self.bound
    }
}

/// Compares `∫_0^s t^{b−1} e^{−μt} dt` with `Γ(b)/μ^b`.
///
/// The integral runs in `u = √t` so the integrand `2u^{2b−1}e^{−μu²}` is
/// smooth, with a power series on `[0, u₀]` and Gauss–Legendre panels of
/// bounded phase above. The working precision scales with `s Re μ` so the
/// difference, which is of size `e^{−s Re μ}`, is resolved.
pub fn incomplete_gamma_check(b: f64, mu: Complex64, s: f64) -> Result<GammaCheck> {
    if !(b > 0.0) || !(s > 0.0) || !(mu.re > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "need b > 0, s > 0, Re mu > 0 (b={b}, s={s}, mu={mu})"
        )));
    }
    if mu.re <= 2.0 * (b - 1.0) / s {
        return Err(Error::PreconditionViolated(format!(
            "Re mu = {} must exceed 2(b-1)/s = {}",
            mu.re,
            2.0 * (b - 1.0) / s
        )));
    }
    let bits = (0.5 * s * mu.re * LOG2_E).ceil() as usize + 64;
    let mut ctx = Ctx::new(bits);
    let p = ctx.p;
    let two_b = 2.0 * b;
    let two_b_int = two_b.fract() == 0.0 && two_b < 1e6;
    let mu_abs = mu.norm();
    let neg_mu = Mpc::from_c64(&ctx, -mu);

    let u_end = s.sqrt().min(((p + 32) as f64 * LN_2 / mu.re).sqrt());
    let u0 = u_end.min((4.0 / mu_abs).sqrt());

    // Series: Σ (−μ u₀²)^k u₀^{2b} / (k! (b+k)).
    let u0m = ctx.f(u0);
    let u0_2b = if two_b_int {
        u0m.powi(two_b as usize, p, RM)
    } else {
        u0m.pow(&ctx.f(two_b), p, RM, &mut ctx.cc)
    };
    let x = neg_mu.scale(&u0m.mul(&u0m, p, RM), p);
    let mut term = Mpc::real(u0_2b, &ctx);
    let mut total = Mpc::zero(&ctx);
    let ratio = mu_abs * u0 * u0;
    let mut mag = 1.0f64;
    for k in 0..10_000usize {
        let contrib = term.scale(&ctx.f(1.0).div(&ctx.f(b + k as f64), p, RM), p);
        total = total.add(&contrib, p);
        mag *= ratio / (k + 1) as f64;
        if mag.log2() < -(p as f64) - 16.0 {
            break;
        }
        term = term.mul(&x, p).scale(&ctx.f(1.0).div(&ctx.int(k as i64 + 1), p, RM), p);
    }

    // Panels with phase |μ|(hi² − lo²) ≤ 2Φ.
    const PHI: f64 = 20.0;
    const NODES: usize = 96;
    let rule = mp::gauss_legendre(&ctx, NODES);
    let (gx, gw) = (&rule.0, &rule.1);
    let expo = two_b - 1.0;
    let expo_int = two_b_int && expo >= 0.0;
    let expo_m = ctx.f(expo);
    let two = ctx.f(2.0);
    let mut lo = u0;
    let mut nodes = 0usize;
    while lo < u_end {
        let w = lo.min(PHI / (2.0 * mu_abs * lo)).min((PHI / mu_abs).sqrt());
        let hi = (lo + w).min(u_end);
        // Bits already lost to the decay of e^{−Re μ u²} need not be carried.
        let lost = (mu.re * lo * lo * LOG2_E) as usize;
        let p = (p.saturating_sub(lost)).max(128).div_ceil(64) * 64;
        let (lo_m, hi_m) = (ctx.f(lo), ctx.f(hi));
        let half = hi_m.sub(&lo_m, p, RM).div(&two, p, RM);
        let mid = hi_m.add(&lo_m, p, RM).div(&two, p, RM);
        for (xi, wi) in gx.iter().zip(gw.iter()) {
            let u = mid.add(&half.mul(xi, p, RM), p, RM);
            let u2 = u.mul(&u, p, RM);
            let e = neg_mu.scale(&u2, p).exp_at(p, &mut ctx);
            let pw = if expo_int {
                u.powi(expo as usize, p, RM)
            } else {
                u.pow(&expo_m, p, RM, &mut ctx.cc)
            };
            let wgt = wi.mul(&half, p, RM).mul(&two, p, RM).mul(&pw, p, RM);
            total = total.add(&e.scale(&wgt, p), ctx.p);
        }
        nodes += NODES;
        lo = hi;
    }

    // Γ(b) μ^{−b}.
    let (gam, exact_gamma) = if two_b_int {
        let n = two_b as i64;
        if n % 2 == 0 {
            let mut g = ctx.f(1.0);
            for j in 1..(n / 2) {
                g = g.mul(&ctx.int(j), p, RM);
            }
            (g, true)
        } else {
            let mut g = ctx.pi().sqrt(p, RM);
            for j in 0..(n - 1) / 2 {
                g = g.mul(&ctx.f(j as f64 + 0.5), p, RM);
            }
            (g, true)
        }
    } else {
        (ctx.f(gamma(b)), false)
    };
    let mu_m = Mpc::from_c64(&ctx, mu);
    let ln_abs = mu_m.abs(p).ln(p, RM, &mut ctx.cc);
    let arg = mu_m.im.div(&mu_m.re, p, RM).atan(p, RM, &mut ctx.cc);
    let nb = ctx.f(-b);
    let pow = Mpc { re: ln_abs.mul(&nb, p, RM), im: arg.mul(&nb, p, RM) }.exp(&mut ctx);
    let closed = pow.scale(&gam, p);
    let error = mp::to_f64(&total.sub(&closed, p).abs(p));

    Ok(GammaCheck {
        b,
        mu,
        s,
        numeric: total.to_c64(),
        closed_form: closed.to_c64(),
        error,
        bound: 10.0 * (-0.5 * s * mu.re).exp(),
        precision_bits: p,
        exact_gamma,
        nodes,
    })
}

// ---------------------------------------------------------------------------
// Corner integrals by quadrature

/// Angular factor of a corner integrand, as a function of the local angle
/// `ψ ∈ (0, ψ₀)`.
pub enum Angular<'a> {
    Constant(Complex64),
    Scalar(&'a (dyn Fn(f64) -> Complex64 + Sync)),
    /// `V(ψ)·η` for a complex vector profile `V`.
    EtaDot(&'a (dyn Fn(f64) -> [Complex64; 2] + Sync)),
}

/// `|y|^p h(ψ)`.
pub struct CornerIntegrand<'a> {
    pub radial_power: f64,
    pub angular: Angular<'a>,
}

fn gl16() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(16))
}

/// `∫_0^ε r^q e^{−m r} dr` for `Re m > 0`, `q > −1`.
fn radial_integral(q: f64, m: Complex64, eps: f64) -> Complex64 {
    let gl = gl16();
    let am = m.norm();
    let r0 = eps.min(0.05 / am);
    // Power series on [0, r0].
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(r0.powf(q + 1.0), 0.0);
    for k in 0..60 {
        let c = term / (q + 1.0 + k as f64);
        sum += c;
        if c.norm() < 1e-18 * sum.norm() {
            break;
        }
        term *= -m * r0 / (k + 1) as f64;
    }
    // Geometric panels, each cut so that |m|·width ≤ 3.
    let mut lo = r0;
    while lo < eps {
        if m.re * lo > 110.0 {
            break;
        }
        let hi = (2.0 * lo).min(eps);
        let pieces = ((am * (hi - lo) / 3.0).ceil() as usize).max(1);
        let w = (hi - lo) / pieces as f64;
        for j in 0..pieces {
            let a = lo + j as f64 * w;
            for (r, wr) in gl.on(a, a + w) {
                sum += wr * r.powf(q) * (-m * r).exp();
            }
        }
        lo = hi;
    }
    sum
}

/// `∫_{C_ε} |y|^p h(ψ) e^{η·y} dy` by polar tensor Gauss–Legendre quadrature.
pub fn corner_integral(s: &Sector, f: &CornerIntegrand, eta: &EtaVector) -> Result<Complex64> {
    let p = f.radial_power;
    if !(p > -DIM) {
        return Err(Error::NonIntegrable(p));
    }
    if let Angular::Constant(c) = f.angular {
        if c == Complex64::new(0.0, 0.0) {
            return Ok(c);
        }
    }
    let gl = gl16();
    let eps = s.radius;
    let psi0 = s.aperture;
    let panels = ((eta.tau * eps * psi0 / 6.0).ceil() as usize).clamp(4, 600);
    let width = psi0 / panels as f64;
    let e = eta.eta();
    let total: Complex64 = (0..panels)
        .into_par_iter()
        .map(|j| {
            let a = j as f64 * width;
            let mut acc = Complex64::new(0.0, 0.0);
            for (psi, w) in gl.on(a, a + width) {
                let xh = unit(s.theta_ref + psi);
                let m = -(e[0] * xh[0] + e[1] * xh[1]);
                let h = match &f.angular {
                    Angular::Constant(c) => *c,
                    Angular::Scalar(g) => g(psi),
                    Angular::EtaDot(v) => {
                        let v = v(psi);
                        e[0] * v[0] + e[1] * v[1]
                    }
                };
                if h == Complex64::new(0.0, 0.0) {
                    continue;
                }
                acc += w * h * radial_integral(p + 1.0, m, eps);
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total)
}

// ---------------------------------------------------------------------------
// Closed-form constants

/// `∫_0^{ψ₀} e^{i m ψ} dψ`.
fn angular_moment(m: f64, psi0: f64) -> Complex64 {
    if m == 0.0 {
        Complex64::new(psi0, 0.0)
    } else {
        ((I * m * psi0).exp() - 1.0) / (I * m)
    }
}

/// `lim τ^{j+2} ∫ r^j e^{iℓψ} e^{η·y} dy`. With `μ(ψ) = −η·ŷ = τe^{−is(ψ−φ)}`
/// the radial integral gives `Γ(j+2)/μ^{j+2}`, leaving an exponential in ψ.
fn moment(j: usize, ell: i64, psi0: f64, eta: &EtaVector) -> Complex64 {
    let s = eta.branch as f64;
    let q = (j + 2) as f64;
    gamma(q) * (-I * s * q * eta.phi).exp() * angular_moment(ell as f64 + s * q, psi0)
}

/// Leading constant of `∫ v e^{η·y} dy ≈ C τ^{−(J+2)}` for a homogeneous
/// polynomial `v` of degree `J`.
pub fn value_constant(v: &[Complex64], psi0: f64, eta: &EtaVector) -> Complex64 {
    let jdeg = poly::degree(v);
    let zc = poly::to_z_basis(v);
    zc.iter()
        .enumerate()
        .map(|(sidx, c)| c * moment(jdeg, jdeg as i64 - 2 * sidx as i64, psi0, eta))
        .sum()
}

/// Leading constant of `∫ ∇v·η e^{η·y} dy ≈ C τ^{−J}` for a homogeneous
/// polynomial `v` of degree `J ≥ 1`.
pub fn gradient_constant(v: &[Complex64], psi0: f64, eta: &EtaVector) -> Complex64 {
    let jdeg = poly::degree(v);
    if jdeg == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let u = eta.unit_eta();
    let dz = u[0] + I * u[1];
    let dzb = u[0] - I * u[1];
    let zc = poly::to_z_basis(v);
    let mut out = Complex64::new(0.0, 0.0);
    for (sidx, c) in zc.iter().enumerate() {
        let a = (jdeg - sidx) as i64;
        let b = sidx as i64;
        let jm = jdeg - 1;
        if a > 0 {
            out += c * dz * a as f64 * moment(jm, a - 1 - b, psi0, eta);
        }
        if b > 0 {
            out += c * dzb * b as f64 * moment(jm, a - b + 1, psi0, eta);
        }
    }
    out
}

/// `C₀` for `Ṽ = ∇v`, `v` harmonic of degree `N+1`:
/// `∫ Ṽ·η e^{η·y} dy = C₀ τ^{1−n−N} + …`.
pub fn c0_constant(v: &HarmonicPolynomial2D, psi0: f64, eta: &EtaVector) -> Result<Complex64> {
    if v.is_zero() || v.degree == 0 {
        return Err(Error::ZeroField);
    }
    Ok(gradient_constant(&v.table(), psi0, eta))
}

/// `C₁` with `∫ e^{η·y} dy = C₁ τ^{−n} + …`.
pub fn c1_constant(psi0: f64, eta: &EtaVector) -> Complex64 {
    moment(0, 0, psi0, eta)
}

/// `C_{1,N₀}` with `∫ v e^{η·y} dy = C_{1,N₀} τ^{−n−N₀} + …`.
pub fn c1n0_constant(v: &HarmonicPolynomial2D, psi0: f64, eta: &EtaVector) -> Result<Complex64> {
    if v.is_zero() {
        return Err(Error::ZeroField);
    }
    Ok(value_constant(&v.table(), psi0, eta))
}

/// Data for the `N₀ = 0, N = 1` corner constants: `v₂` is the degree-2 Taylor
/// term (so `Ṽ = ∇v₂`, `∇·Ṽ = −k²v₀`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtildeInput {
    pub v0: Complex64,
    pub gamma0: f64,
    pub rho0: f64,
    pub k: f64,
}

fn check_ctilde(v2: &[Complex64], inp: &CtildeInput) -> Result<()> {
    if poly::degree(v2) != 2 {
        return Err(Error::PreconditionViolated("v2 must be a degree-2 table".into()));
    }
    if inp.v0.norm() == 0.0 {
        return Err(Error::PreconditionViolated("v0 must be nonzero".into()));
    }
    let div = poly::laplacian(v2)[0];
    let want = -inp.k * inp.k * inp.v0;
    if (div - want).norm() > 1e-8 * (1.0 + want.norm()) {
        return Err(Error::PreconditionViolated(format!(
            "div V = {div} does not equal -k^2 v0 = {want}"
        )));
    }
    Ok(())
}

/// `(C̃₀, C̃₁)` with `C̃₁ = γ₀C̃₀ − k²v₀ρ₀C₁`, where
/// `∫ Ṽ·η e^{η·y} dy = C̃₀ τ^{−2} + …`.
pub fn ctilde_constants(
    v2: &[Complex64],
    inp: &CtildeInput,
    psi0: f64,
    eta: &EtaVector,
) -> Result<(Complex64, Complex64)> {
    check_ctilde(v2, inp)?;
    let c0 = gradient_constant(v2, psi0, eta);
    let c1 = c1_constant(psi0, eta);
    Ok((c0, inp.gamma0 * c0 - inp.k * inp.k * inp.v0 * inp.rho0 * c1))
}

/// The same constants from the alternative closed form, where the
/// `k²v₀` part pairs `C_{±,1}` from both branches. Kept for comparison; it
/// does not agree with quadrature.
pub fn ctilde_constants_printed(
    v2: &[Complex64],
    inp: &CtildeInput,
    psi0: f64,
    eta: &EtaVector,
) -> Result<(Complex64, Complex64)> {
    check_ctilde(v2, inp)?;
    let zc = poly::to_z_basis(v2);
    // Ṽ₁ = b₁₁ z + b₁₂ z̄,  Ṽ₂ = b₂₁ z + b₂₂ z̄.
    let b11 = 2.0 * zc[0] + zc[1];
    let b22 = I * zc[1] - 2.0 * I * zc[2];
    let phi = eta.phi;
    let cp = I * (1.0 - (4.0 * I * psi0).exp()) * (-3.0 * I * phi).exp() / 4.0;
    let cm = -I * (1.0 - (-4.0 * I * psi0).exp()) * (3.0 * I * phi).exp() / 4.0;
    let kv = inp.k * inp.k * inp.v0;
    let c0 = if eta.branch == 1 {
        (I * phi).exp() * gamma(3.0) * (-2.0 * b11 * cp + kv * (cm - cp) / 2.0)
    } else {
        (-I * phi).exp() * gamma(3.0) * (-2.0 * I * b22 * cm + kv * (cm + cp) / 2.0)
    };
    let c1 = c1_constant(psi0, eta);
    Ok((c0, inp.gamma0 * c0 - kv * inp.rho0 * c1))
}

// ---------------------------------------------------------------------------
// Power-law fits

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub exponent: f64,
    pub constant: Complex64,
    pub rms_residual: f64,
    pub tau_range: [f64; 2],
}

/// Least-squares line through `(log τ, log|value|)`.
pub fn fit_decay(taus: &[f64], values: &[Complex64]) -> Result<AsymptoticFit> {
    if taus.len() != values.len() {
        return Err(Error::PreconditionViolated("taus and values differ in length".into()));
    }
    if taus.len() < 5 {
        return Err(Error::PreconditionViolated(format!("need at least 5 samples, got {}", taus.len())));
    }
    if taus.windows(2).any(|w| !(w[1] > w[0])) || !(taus[0] > 0.0) {
        return Err(Error::PreconditionViolated("taus must be positive and increasing".into()));
    }
    if let Some(i) = values.iter().position(|v| !(v.norm() > 0.0) || !v.norm().is_finite()) {
        return Err(Error::ZeroSample(i));
    }
    let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.norm().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    let last = taus.len() - 1;
    Ok(AsymptoticFit {
        exponent: slope,
        constant: values[last] * taus[last].powf(-slope),
        rms_residual: rms,
        tau_range: [taus[0], taus[last]],
    })
}

/// Integral values `I(τ)` over a ladder of τ for a fixed integrand.
pub fn tau_ladder(s: &Sector, f: &CornerIntegrand, eta: &EtaVector, taus: &[f64]) -> Result<Vec<Complex64>> {
    taus.iter().map(|&t| corner_integral(s, f, &eta.with_tau(t))).collect()
}

/// Geometric ladder of `n` values from `lo` to `hi`.
pub fn geometric_taus(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|j| lo * (hi / lo).powf(j as f64 / (n - 1) as f64)).collect()
}

// ---------------------------------------------------------------------------
// General-exponent bounds

/// Samples of an angular profile on a uniform grid over `[0, ψ₀]`,
/// evaluated by linear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile<T> {
    pub psi0: f64,
    pub samples: Vec<T>,
}

impl<T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>> Profile<T> {
    pub fn from_fn(psi0: f64, n: usize, f: impl Fn(f64) -> T) -> Self {
        assert!(n >= 2);
        let samples = (0..n).map(|j| f(psi0 * j as f64 / (n - 1) as f64)).collect();
        Self { psi0, samples }
    }

    pub fn constant(psi0: f64, v: T) -> Self {
        Self { psi0, samples: vec![v, v] }
    }

    pub fn eval(&self, psi: f64) -> T {
        let n = self.samples.len();
        let t = (psi / self.psi0).clamp(0.0, 1.0) * (n - 1) as f64;
        let j = (t.floor() as usize).min(n - 2);
        let f = t - j as f64;
        self.samples[j] * (1.0 - f) + self.samples[j + 1] * f
    }
}

impl Profile<Complex64> {
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Vector profile stored componentwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorProfile {
    pub x: Profile<Complex64>,
    pub y: Profile<Complex64>,
}

impl VectorProfile {
    pub fn eval(&self, psi: f64) -> [Complex64; 2] {
        [self.x.eval(psi), self.y.eval(psi)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.x.sup_norm().max(self.y.sup_norm())
    }
}

/// Local behaviour near a vertex: `γ − γ(x₀) ~ |x|^β γ_β(ψ)`,
/// `∇v ~ |x|^α V(ψ)`, `ρ − 1 ~ |x|^{β₀} ρ₀(ψ)`, `v ~ |x|^{α₀} ṽ(ψ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalExpansion {
    pub alpha: f64,
    pub beta: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub sigma: f64,
    pub gamma_beta: Profile<Complex64>,
    pub rho0_profile: Profile<Complex64>,
    pub v_profile: VectorProfile,
    pub vtilde_profile: Profile<Complex64>,
}

impl LocalExpansion {
    pub fn validate(&self) -> Result<()> {
        if (self.alpha + 1.0).abs() < 1e-12 {
            return Err(Error::PreconditionViolated("alpha must differ from -1".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::PreconditionViolated("sigma must be positive".into()));
        }
        let sups = [
            self.gamma_beta.sup_norm(),
            self.rho0_profile.sup_norm(),
            self.v_profile.sup_norm(),
            self.vtilde_profile.sup_norm(),
        ];
        if sups.iter().any(|s| !s.is_finite()) {
            return Err(Error::PreconditionViolated("profiles must be bounded".into()));
        }
        Ok(())
    }

    /// Constant profiles over `[0, ψ₀]`.
    pub fn constant(psi0: f64, alpha: f64, beta: f64, alpha0: f64, beta0: f64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            alpha,
            beta,
            alpha0,
            beta0,
            sigma: 0.5,
            gamma_beta: Profile::constant(psi0, one),
            rho0_profile: Profile::constant(psi0, one),
            v_profile: VectorProfile {
                x: Profile::constant(psi0, one),
                y: Profile::constant(psi0, Complex64::new(0.5, 0.0)),
            },
            vtilde_profile: Profile::constant(psi0, one),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub fit: AsymptoticFit,
    /// Exponent the bound allows.
    pub bound: f64,
    pub slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub gradient: BoundCheck,
    pub potential: BoundCheck,
    pub taus: Vec<f64>,
    pub gradient_values: Vec<Complex64>,
    pub potential_values: Vec<Complex64>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.gradient.passed && self.potential.passed
    }
}

/// Fits the τ-decay of `∫ γ_β V·η |y|^{α+β} e^{η·y}` and
/// `k² ∫ ρ₀ ṽ |y|^{α₀+β₀} e^{η·y}` and compares with `−(n+β+α−1)` and
/// `−(n+β₀+α₀)`.
pub fn general_bound_check(
    le: &LocalExpansion,
    s: &Sector,
    eta: &EtaVector,
    taus: &[f64],
    k: f64,
) -> Result<BoundReport> {
    le.validate()?;
    const SLACK: f64 = 0.05;
    let grad_profile = |psi: f64| {
        let g = le.gamma_beta.eval(psi);
        let v = le.v_profile.eval(psi);
        [g * v[0], g * v[1]]
    };
    let pot_profile = |psi: f64| k * k * le.rho0_profile.eval(psi) * le.vtilde_profile.eval(psi);
    let gi = CornerIntegrand { radial_power: le.alpha + le.beta, angular: Angular::EtaDot(&grad_profile) };
    let pi = CornerIntegrand { radial_power: le.alpha0 + le.beta0, angular: Angular::Scalar(&pot_profile) };
    let gv = tau_ladder(s, &gi, eta, taus)?;
    let pv = tau_ladder(s, &pi, eta, taus)?;
    let gfit = fit_decay(taus, &gv)?;
    let pfit = fit_decay(taus, &pv)?;
    let gb = -(DIM + le.beta + le.alpha - 1.0);
    let pb = -(DIM + le.beta0 + le.alpha0);
    Ok(BoundReport {
        gradient: BoundCheck {
            name: "gradient".into(),
            fit: gfit,
            bound: gb,
            slack: SLACK,
            passed: gfit.exponent <= gb + SLACK,
        },
        potential: BoundCheck {
            name: "potential".into(),
            fit: pfit,
            bound: pb,
            slack: SLACK,
            passed: pfit.exponent <= pb + SLACK,
        },
        taus: taus.to_vec(),
        gradient_values: gv,
        potential_values: pv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn sector(psi0: f64) -> Sector {
        Sector::new([0.0, 0.0], 0.0, psi0, 1.0).unwrap()
    }

    #[test]
    fn eta_is_isotropic() {
        for &(phi, b) in &[(0.3, 1), (2.0, -1), (-1.0, 1)] {
            let e = EtaVector::new(7.0, phi, b).unwrap();
            assert!(e.self_dot().norm() < 1e-13 * 49.0);
            let v = e.eta();
            assert!(((v[0].re.powi(2) + v[1].re.powi(2)).sqrt() - 7.0).abs() < 1e-13);
            assert!(((v[0].im.powi(2) + v[1].im.powi(2)).sqrt() - 7.0).abs() < 1e-13);
        }
    }

    #[test]
    fn gamma_b1_is_elementary() {
        let g = incomplete_gamma_check(1.0, Complex64::new(100.0, 0.0), 1.0).unwrap();
        let want = (1.0 - (-100f64).exp()) / 100.0;
        assert!((g.numeric.re - want).abs() < 1e-17);
        let rel = g.error / ((-100f64).exp() / 100.0);
        assert!((rel - 1.0).abs() < 1e-6, "{rel}");
    }

    #[test]
    fn gamma_half_complex() {
        let mu = Complex64::new(50.0, 50.0);
        let g = incomplete_gamma_check(0.5, mu, 1.0).unwrap();
        assert!(g.within_bound(), "{g:?}");
        assert!(g.exact_gamma);
    }

    #[test]
    fn gamma_generic_b_falls_back() {
        let g = incomplete_gamma_check(1.3, Complex64::new(40.0, 10.0), 1.0).unwrap();
        assert!(!g.exact_gamma);
        assert!(g.error < 1e-15 * g.closed_form.norm());
    }

    #[test]
    fn gamma_precondition() {
        assert!(incomplete_gamma_check(3.0, Complex64::new(3.0, 0.0), 1.0).is_err());
        assert!(incomplete_gamma_check(0.5, Complex64::new(-1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn c1_right_angle_value() {
        let eta = EtaVector::new(1.0, 0.0, 1).unwrap();
        assert!((c1_constant(FRAC_PI_2, &eta) - I).norm() < 1e-14);
    }

    #[test]
    fn radial_integral_matches_gamma() {
        let m = Complex64::new(40.0, 25.0);
        let got = radial_integral(2.5, m, 1.0);
        let want = gamma(3.5) / m.powf(3.5);
        assert!((got - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn corner_integral_rejects_singular_power() {
        let eta = EtaVector::new(10.0, 0.7, 1).unwrap();
        let f = CornerIntegrand { radial_power: -2.0, angular: Angular::Constant(1.0.into()) };
        assert_eq!(corner_integral(&sector(1.4), &f, &eta), Err(Error::NonIntegrable(-2.0)));
    }

    #[test]
    fn c0_matches_quadrature_for_random_harmonics() {
        let cases = [(1.0, 0.4, 0usize, 1), (2.2, 1.0, 1, -1), (0.7, 0.2, 2, 1), (1.3, 0.5, 3, -1)];
        for &(psi0, phi, n, br) in &cases {
            let v = HarmonicPolynomial2D::new(n + 1, Complex64::new(0.3, -1.1), Complex64::new(-0.8, 0.4));
            let tau = 300.0;
            let eta = EtaVector::new(tau, phi, br).unwrap();
            let grad = |psi: f64| v.gradient(unit(psi));
            let f = CornerIntegrand { radial_power: n as f64, angular: Angular::EtaDot(&grad) };
            let q = corner_integral(&sector(psi0), &f, &eta).unwrap() * tau.powi(1 + n as i32);
            let c = c0_constant(&v, psi0, &eta).unwrap();
            assert!((q - c).norm() < 1e-3 * c.norm().max(1e-3), "{psi0} {n}: {q} vs {c}");
        }
    }

    #[test]
    fn c1n0_matches_quadrature() {
        let v = HarmonicPolynomial2D::new(2, Complex64::new(0.5, 0.5), Complex64::new(1.0, -0.2));
        let eta = EtaVector::new(250.0, 0.6, -1).unwrap();
        let val = |psi: f64| v.eval(unit(psi));
        let f = CornerIntegrand { radial_power: 2.0, angular: Angular::Scalar(&val) };
        let q = corner_integral(&sector(1.2), &f, &eta).unwrap() * 250f64.powi(4);
        let c = c1n0_constant(&v, 1.2, &eta).unwrap();
        assert!((q - c).norm() < 1e-6 * c.norm());
        let one = HarmonicPolynomial2D::new(0, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        assert!((c1n0_constant(&one, 1.2, &eta).unwrap() - c1_constant(1.2, &eta)).norm() < 1e-14);
    }

    /// The quadrature-verified closed form in the variables `b₁₁, b₂₂`
    /// (an independent transcription used as an oracle).
    fn ctilde0_oracle(v2: &[Complex64], kv: Complex64, psi0: f64, eta: &EtaVector) -> Complex64 {
        let zc = poly::to_z_basis(v2);
        let b11 = 2.0 * zc[0] + zc[1];
        let b22 = I * zc[1] - 2.0 * I * zc[2];
        let phi = eta.phi;
        if eta.branch == 1 {
            let cp = I * (1.0 - (4.0 * I * psi0).exp()) * (-3.0 * I * phi).exp() / 4.0;
            let jm = (-3.0 * I * phi).exp() * I * (1.0 - (2.0 * I * psi0).exp()) / 2.0;
            -(I * phi).exp() * 2.0 * (2.0 * b11 * cp + kv / 2.0 * (cp - jm))
        } else {
            let cm = -I * (1.0 - (-4.0 * I * psi0).exp()) * (3.0 * I * phi).exp() / 4.0;
            let jp = (3.0 * I * phi).exp() * (-I) * (1.0 - (-2.0 * I * psi0).exp()) / 2.0;
            -(-I * phi).exp() * 2.0 * (2.0 * I * b22 * cm - kv / 2.0 * (jp + cm))
        }
    }

    fn v2_table(k: f64, v0: Complex64, bp: Complex64, bm: Complex64) -> Vec<Complex64> {
        let c = -k * k * v0 / 4.0;
        let mut t = poly::scale(&poly::zpow(2, 0), bp);
        t = poly::add(&t, &poly::scale(&poly::zpow(0, 2), bm));
        poly::add(&t, &poly::scale(&poly::zpow(1, 1), c))
    }

    #[test]
    fn ctilde_agrees_with_oracle_and_quadrature() {
        let k = 1.3;
        let v0 = Complex64::new(0.7, -0.2);
        let v2 = v2_table(k, v0, Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.4));
        let inp = CtildeInput { v0, gamma0: 0.6, rho0: 0.4, k };
        for &(psi0, phi, br) in &[(FRAC_PI_2, FRAC_PI_2 / 2.0, 1), (1.1, 0.3, -1), (2.0, 1.0, 1)] {
            let tau = 300.0;
            let eta = EtaVector::new(tau, phi, br).unwrap();
            let (c0, c1t) = ctilde_constants(&v2, &inp, psi0, &eta).unwrap();
            let oracle = ctilde0_oracle(&v2, k * k * v0, psi0, &eta);
            assert!((c0 - oracle).norm() < 1e-12 * (1.0 + oracle.norm()));
            let grad = |psi: f64| {
                let x = unit(psi);
                [poly::eval(&poly::d1(&v2), x), poly::eval(&poly::d2(&v2), x)]
            };
            let f = CornerIntegrand { radial_power: 1.0, angular: Angular::EtaDot(&grad) };
            let q = corner_integral(&sector(psi0), &f, &eta).unwrap() * tau * tau;
            assert!((q - c0).norm() < 1e-6 * c0.norm(), "{q} vs {c0}");
            let want = 0.6 * c0 - k * k * v0 * 0.4 * c1_constant(psi0, &eta);
            assert!((c1t - want).norm() < 1e-14);
        }
    }

    #[test]
    fn printed_ctilde_disagrees_with_quadrature_at_right_angle() {
        let k = 1.0;
        let v0 = Complex64::new(1.0, 0.0);
        let v2 = v2_table(k, v0, 0.0.into(), 0.0.into());
        let inp = CtildeInput { v0, gamma0: 1.0, rho0: 0.0, k };
        let eta = EtaVector::new(200.0, FRAC_PI_2 / 2.0, 1).unwrap();
        let (printed, _) = ctilde_constants_printed(&v2, &inp, FRAC_PI_2, &eta).unwrap();
        let (fixed, _) = ctilde_constants(&v2, &inp, FRAC_PI_2, &eta).unwrap();
        assert!(printed.norm() < 1e-14);
        assert!((fixed.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ctilde_requires_nonzero_v0() {
        let v2 = poly::zpow(2, 0);
        let inp = CtildeInput { v0: 0.0.into(), gamma0: 1.0, rho0: 0.5, k: 1.0 };
        let eta = EtaVector::new(10.0, 0.5, 1).unwrap();
        assert!(matches!(ctilde_constants(&v2, &inp, 1.0, &eta), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn fit_recovers_power_law() {
        let taus = geometric_taus(20.0, 200.0, 8);
        let vals: Vec<Complex64> = taus.iter().map(|t| Complex64::new(3.0 * t.powi(-2), 0.0)).collect();
        let f = fit_decay(&taus, &vals).unwrap();
        assert!((f.exponent + 2.0).abs() < 1e-12);
        assert!((f.constant.re - 3.0).abs() < 1e-10);
        let vals: Vec<Complex64> = taus.iter().map(|t| Complex64::new(t.powi(-2) * (1.0 + 1.0 / t), 0.0)).collect();
        let f = fit_decay(&taus, &vals).unwrap();
        assert!(f.exponent > -2.05 && f.exponent < -1.95);
        let mut bad = vals.clone();
        bad[3] = 0.0.into();
        assert_eq!(fit_decay(&taus, &bad), Err(Error::ZeroSample(3)));
    }

    #[test]
    fn bound_check_constant_profiles() {
        let s = sector(1.2);
        let eta = EtaVector::new(1.0, 0.6, 1).unwrap();
        let taus = geometric_taus(20.0, 300.0, 6);
        let le = LocalExpansion::constant(1.2, 0.0, 2.0, 0.0, 0.0);
        let r = general_bound_check(&le, &s, &eta, &taus, 1.0).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!((r.gradient.fit.exponent + 3.0).abs() < 0.05);
        assert!((r.potential.fit.exponent + 2.0).abs() < 0.05);
    }
}
