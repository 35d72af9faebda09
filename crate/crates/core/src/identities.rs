//! Integral identities for transmission pairs on a domain and on a corner.
//!
//! For `u` solving `∇·a∇u + k²cu = 0`, `v` solving `Δv + k²v = 0` and a test
//! solution `w` of the `u`-equation,
//!
//! `∫_Ω (a−1)∇v·∇w − k²(c−1)vw = ∫_{∂Ω} a∂_νw(v−u) − w(∂_νv − a∂_νu)`.
//!
//! On a corner `C_ε` with Cauchy data of `u`, `v` matching on the two edges,
//! only the arc contributes to the right-hand side.

use crate::error::{Error, Result};
use crate::fields::FieldEval;
use crate::geometry::{ConvexPolygon, Point, Sector};
use crate::medium::Coefficients;
use crate::quad::GaussLegendre;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Quadrature nodes `(x, weight)`.
pub type Rule = Vec<(Point, f64)>;

/// Fan triangulation from the centroid, each triangle split into `m²`
/// congruent pieces of diameter `≈ h` with the centroid rule on each piece.
pub fn polygon_rule(p: &ConvexPolygon, h: f64) -> Rule {
    let c = p.centroid();
    let mut out = Vec::new();
    for (a, b) in p.edges() {
        let l = [a, b, c]
            .iter()
            .zip([b, c, a].iter())
            .map(|(x, y)| (x[0] - y[0]).hypot(x[1] - y[1]))
            .fold(0.0, f64::max);
        let m = (l / h).ceil().max(1.0) as usize;
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs();
        let w = area / (m * m) as f64;
        let at = |i: f64, j: f64| {
            let (s, t) = (i / m as f64, j / m as f64);
            [a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]), a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1])]
        };
        for i in 0..m {
            for j in 0..m - i {
                let (fi, fj) = (i as f64, j as f64);
                out.push((at(fi + 1.0 / 3.0, fj + 1.0 / 3.0), w));
                if i + j + 1 < m {
                    out.push((at(fi + 2.0 / 3.0, fj + 2.0 / 3.0), w));
                }
            }
        }
    }
    out
}

/// Edgewise Gauss rule `(x, outward normal, weight)` with panels of length `≤ h`.
pub fn boundary_rule(p: &ConvexPolygon, h: f64) -> Vec<(Point, Point, f64)> {
    let gl = GaussLegendre::new(8);
    let mut out = Vec::new();
    for (a, b) in p.edges() {
        let e = [b[0] - a[0], b[1] - a[1]];
        let len = e[0].hypot(e[1]);
        let nrm = [e[1] / len, -e[0] / len];
        let panels = (len / h).ceil().max(1.0) as usize;
        for k in 0..panels {
            let (t0, t1) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            for (t, w) in gl.on(t0, t1) {
                out.push(([a[0] + t * e[0], a[1] + t * e[1]], nrm, w * len));
            }
        }
    }
    out
}

/// Polar rule on `C_ε` with radial panels refined towards the vertex at
/// length scale `scale`, plus the arc rule `(x, normal, weight)`.
pub fn sector_rule(s: &Sector, scale: f64, angular_panels: usize) -> (Rule, Vec<(Point, Point, f64)>) {
    let gl = GaussLegendre::new(16);
    let eps = s.radius;
    let mut edges = vec![0.0];
    let mut r = scale.min(eps);
    while r < eps {
        edges.push(r);
        r *= 2.0;
    }
    edges.push(eps);
    let mut ang = Vec::new();
    for k in 0..angular_panels {
        let a0 = s.aperture * k as f64 / angular_panels as f64;
        let a1 = s.aperture * (k + 1) as f64 / angular_panels as f64;
        ang.extend(gl.on(a0, a1));
    }
    let mut vol = Vec::new();
    for w in edges.windows(2) {
        for (r, wr) in gl.on(w[0], w[1]) {
            for &(psi, wp) in &ang {
                vol.push((s.point(r, psi), wr * wp * r));
            }
        }
    }
    let arc = ang
        .iter()
        .map(|&(psi, wp)| {
            let x = s.point(eps, psi);
            let d = [(x[0] - s.vertex[0]) / eps, (x[1] - s.vertex[1]) / eps];
            (x, d, wp * eps)
        })
        .collect();
    (vol, arc)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: C64,
    pub rhs: C64,
    /// `|lhs − rhs|` over the integrand mass `max(∫|lhs integrand|, ∫|rhs integrand|)`.
    pub residual: f64,
    pub absolute: f64,
    pub scale: f64,
    pub boundary_term: f64,
    pub pde_residual: f64,
}

/// Pointwise relative residual of `∇·a∇w + k²cw` by fourth-order
/// differences of the flux, maximized over `pts`.
pub fn pde_residual(coef: &dyn Coefficients, k: f64, w: &dyn FieldEval, pts: &[Point]) -> f64 {
    let d = 1e-4;
    pts.par_iter()
        .map(|&x| {
            let (wx, gx) = w.value_grad(x);
            let mut div = C64::new(0.0, 0.0);
            for (dim, st) in [(0usize, [d, 0.0]), (1, [0.0, d])] {
                let flux = |s: f64| {
                    let y = [x[0] + s * st[0], x[1] + s * st[1]];
                    coef.a(y) * w.value_grad(y).1[dim]
                };
                div += (-flux(2.0) + 8.0 * flux(1.0) - 8.0 * flux(-1.0) + flux(-2.0)) / (12.0 * d);
            }
            let c = coef.c(x);
            let res = div + k * k * c * wx;
            let gn = (gx[0].norm_sqr() + gx[1].norm_sqr()).sqrt();
            let scale = if wx.norm() > 0.0 { gn * gn / wx.norm() } else { gn } + k * k * c.norm() * wx.norm();
            if scale > 0.0 {
                res.norm() / scale
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max)
}

fn check_points(vol: &Rule, m: usize) -> Vec<Point> {
    let step = (vol.len() / m).max(1);
    vol.iter().step_by(step).map(|p| p.0).collect()
}

fn volume_term(coef: &dyn Coefficients, k: f64, v: &dyn FieldEval, w: &dyn FieldEval, vol: &Rule) -> (C64, f64) {
    vol.par_iter()
        .map(|&(x, wt)| {
            let (vv, gv) = v.value_grad(x);
            let (ww, gw) = w.value_grad(x);
            let f = (coef.a(x) - 1.0) * (gv[0] * gw[0] + gv[1] * gw[1]) - k * k * (coef.c(x) - 1.0) * vv * ww;
            (f * wt, f.norm() * wt)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((C64::new(0.0, 0.0), 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
}

fn boundary_term(
    coef: &dyn Coefficients,
    u: &dyn FieldEval,
    v: &dyn FieldEval,
    w: &dyn FieldEval,
    bnd: &[(Point, Point, f64)],
) -> (C64, f64) {
    bnd.par_iter()
        .map(|&(x, nu, wt)| {
            // interior trace of a
            let a = coef.a([x[0] - 1e-9 * nu[0], x[1] - 1e-9 * nu[1]]);
            let (uu, gu) = u.value_grad(x);
            let (vv, gv) = v.value_grad(x);
            let (ww, gw) = w.value_grad(x);
            let dn = |g: [C64; 2]| g[0] * nu[0] + g[1] * nu[1];
            let f = a * dn(gw) * (vv - uu) - ww * (dn(gv) - a * dn(gu));
            (f * wt, f.norm() * wt)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((C64::new(0.0, 0.0), 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
}

fn report(lhs: (C64, f64), rhs: (C64, f64), pde: f64) -> IdentityReport {
    let scale = lhs.1.max(rhs.1);
    let absolute = (lhs.0 - rhs.0).norm();
    IdentityReport {
        lhs: lhs.0,
        rhs: rhs.0,
        residual: if scale > 0.0 { absolute / scale } else { 0.0 },
        absolute,
        scale,
        boundary_term: rhs.0.norm(),
        pde_residual: pde,
    }
}

pub fn transmission_identity_residual(
    coef: &dyn Coefficients,
    k: f64,
    u: &dyn FieldEval,
    v: &dyn FieldEval,
    w: &dyn FieldEval,
    omega: &ConvexPolygon,
    h: f64,
) -> Result<IdentityReport> {
    let vol = polygon_rule(omega, h);
    let pde = pde_residual(coef, k, w, &check_points(&vol, 40));
    if pde > 1e-6 {
        return Err(Error::TestFieldInvalid(pde));
    }
    let bnd = boundary_rule(omega, h);
    Ok(report(volume_term(coef, k, v, w, &vol), boundary_term(coef, u, v, w, &bnd), pde))
}

/// Corner version: the right-hand side is the arc integral only.
/// `scale` is the radial length scale of the integrands (`1/τ` for CGO fields).
pub fn sector_identity_residual(
    coef: &dyn Coefficients,
    k: f64,
    u: &dyn FieldEval,
    v: &dyn FieldEval,
    w: &dyn FieldEval,
    s: &Sector,
    scale: f64,
) -> Result<IdentityReport> {
    let (vol, arc) = sector_rule(s, scale, 12);
    let pde = pde_residual(coef, k, w, &check_points(&vol, 40));
    if pde > 1e-6 {
        return Err(Error::TestFieldInvalid(pde));
    }
    Ok(report(volume_term(coef, k, v, w, &vol), boundary_term(coef, u, v, w, &arc), pde))
}

/// `e^{ζ·x}` for a complex vector `ζ`.
#[derive(Debug, Clone, Copy)]
pub struct ExpField {
    pub zeta: [C64; 2],
}

impl ExpField {
    /// Exponential solution of `aΔw + k²cw = 0` decaying along `d`:
    /// `ζ = −τ(d + i s d⊥)` with `s = √(1 + κ²/τ²)`, `κ² = k²c/a`.
    pub fn cgo_like(tau: f64, phi: f64, kappa: f64) -> Self {
        let s = (1.0 + (kappa / tau).powi(2)).sqrt();
        let d = [phi.cos(), phi.sin()];
        let p = [-d[1], d[0]];
        Self { zeta: [-tau * C64::new(d[0], s * p[0]), -tau * C64::new(d[1], s * p[1])] }
    }
}

impl FieldEval for ExpField {
    fn value_grad(&self, x: Point) -> (C64, [C64; 2]) {
        let e = (self.zeta[0] * x[0] + self.zeta[1] * x[1]).exp();
        (e, [self.zeta[0] * e, self.zeta[1] * e])
    }
}

/// A transmission pair on a corner at the origin: `v = e^{ik d·x}` and
/// `u = v + z` with `z = A ℓ₁²ℓ₂² e^{−|x|²/(2s²)} e^{ik d'·x}` vanishing to
/// second order on both edges, in the medium `a = 1`,
/// `c = 1 − (Δz + k²z)/(k²u)`.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedCornerPair {
    pub k: f64,
    pub sector: Sector,
    pub amplitude: f64,
    pub width: f64,
    pub d_v: Point,
    pub d_z: Point,
}

pub struct PairField<'a> {
    pair: &'a ManufacturedCornerPair,
    with_z: bool,
}

impl FieldEval for PairField<'_> {
    fn value_grad(&self, x: Point) -> (C64, [C64; 2]) {
        let (v, gv) = self.pair.v(x);
        if !self.with_z {
            return (v, gv);
        }
        let (z, gz, _) = self.pair.z(x);
        (v + z, [gv[0] + gz[0], gv[1] + gz[1]])
    }
}

impl ManufacturedCornerPair {
    pub fn new(k: f64, sector: Sector) -> Self {
        let b = sector.theta_ref + sector.aperture / 2.0;
        Self {
            k,
            sector,
            amplitude: 20.0,
            width: 0.22,
            d_v: [(b + 0.4).cos(), (b + 0.4).sin()],
            d_z: [(b - 1.1).cos(), (b - 1.1).sin()],
        }
    }

    fn v(&self, x: Point) -> (C64, [C64; 2]) {
        let i = C64::new(0.0, 1.0);
        let e = C64::from_polar(1.0, self.k * (self.d_v[0] * x[0] + self.d_v[1] * x[1]));
        (e, [i * self.k * self.d_v[0] * e, i * self.k * self.d_v[1] * e])
    }

    /// `(z, ∇z, Δz)`.
    fn z(&self, x: Point) -> (C64, [C64; 2], C64) {
        let s = &self.sector;
        let y = [x[0] - s.vertex[0], x[1] - s.vertex[1]];
        let t1 = s.theta_ref;
        let t2 = s.theta_ref + s.aperture;
        let n1 = [-t1.sin(), t1.cos()];
        let n2 = [t2.sin(), -t2.cos()];
        let l1 = n1[0] * y[0] + n1[1] * y[1];
        let l2 = n2[0] * y[0] + n2[1] * y[1];
        let p = l1 * l1 * l2 * l2;
        let gp = [
            2.0 * l1 * l2 * l2 * n1[0] + 2.0 * l1 * l1 * l2 * n2[0],
            2.0 * l1 * l2 * l2 * n1[1] + 2.0 * l1 * l1 * l2 * n2[1],
        ];
        let lp = 2.0 * l2 * l2 + 2.0 * l1 * l1 + 8.0 * l1 * l2 * (n1[0] * n2[0] + n1[1] * n2[1]);
        let s2 = self.width * self.width;
        let r2 = y[0] * y[0] + y[1] * y[1];
        let g = (-r2 / (2.0 * s2)).exp();
        let gg = [-g * y[0] / s2, -g * y[1] / s2];
        let lg = g * (r2 / (s2 * s2) - 2.0 / s2);
        let i = C64::new(0.0, 1.0);
        let e = C64::from_polar(1.0, self.k * (self.d_z[0] * y[0] + self.d_z[1] * y[1]));
        let ge = [i * self.k * self.d_z[0] * e, i * self.k * self.d_z[1] * e];
        let le = -self.k * self.k * e;
        let a = self.amplitude;
        let z = a * p * g * e;
        let gz = [
            a * (gp[0] * g * e + p * gg[0] * e + p * g * ge[0]),
            a * (gp[1] * g * e + p * gg[1] * e + p * g * ge[1]),
        ];
        let cross = (gp[0] * gg[0] + gp[1] * gg[1]) * e
            + (gp[0] * ge[0] + gp[1] * ge[1]) * g
            + (gg[0] * ge[0] + gg[1] * ge[1]) * p;
        let lz = a * (lp * g * e + p * lg * e + p * g * le + 2.0 * cross);
        (z, gz, lz)
    }

    /// `c − 1`.
    pub fn contrast(&self, x: Point) -> C64 {
        let (v, _) = self.v(x);
        let (z, _, lz) = self.z(x);
        let k2 = self.k * self.k;
        -(lz + k2 * z) / (k2 * (v + z))
    }

    pub fn u(&self) -> PairField<'_> {
        PairField { pair: self, with_z: true }
    }

    pub fn v_field(&self) -> PairField<'_> {
        PairField { pair: self, with_z: false }
    }
}

impl Coefficients for ManufacturedCornerPair {
    fn a(&self, _: Point) -> f64 {
        1.0
    }
    fn c(&self, x: Point) -> C64 {
        1.0 + self.contrast(x)
    }
}
