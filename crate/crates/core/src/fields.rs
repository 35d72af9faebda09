//! Entire solutions of the Helmholtz equation, their Taylor jets at a point
//! and the structural facts those jets satisfy.

use crate::error::{Error, Result};
use crate::geometry::{exceptional_angle, Point, Sector};
use crate::poly::{self, Table};
use crate::special::bessel_j;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Anything that can report a value and a gradient at a point.
pub trait FieldEval: Sync {
    fn value_grad(&self, x: Point) -> (Complex64, [Complex64; 2]);
}

/// `b_plus z^N + b_minus z̄^N` with `z = x1 + i x2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPolynomial2D {
    pub degree: usize,
    pub b_plus: Complex64,
    pub b_minus: Complex64,
}

impl HarmonicPolynomial2D {
    pub fn new(degree: usize, b_plus: Complex64, b_minus: Complex64) -> Self {
        Self { degree, b_plus, b_minus }
    }

    pub fn is_zero(&self) -> bool {
        self.b_plus == Complex64::new(0.0, 0.0) && self.b_minus == Complex64::new(0.0, 0.0)
    }

    pub fn table(&self) -> Table {
        let n = self.degree;
        poly::add(
            &poly::scale(&poly::zpow(n, 0), self.b_plus),
            &poly::scale(&poly::zpow(0, n), self.b_minus),
        )
    }

    pub fn eval(&self, x: Point) -> Complex64 {
        let z = Complex64::new(x[0], x[1]);
        let n = self.degree as i32;
        self.b_plus * z.powi(n) + self.b_minus * z.conj().powi(n)
    }

    pub fn gradient(&self, x: Point) -> [Complex64; 2] {
        if self.degree == 0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        let z = Complex64::new(x[0], x[1]);
        let n = self.degree as i32;
        let p = self.b_plus * z.powi(n - 1) * n as f64;
        let m = self.b_minus * z.conj().powi(n - 1) * n as f64;
        [p + m, I * (p - m)]
    }

    /// Split a homogeneous table into its harmonic part; also returns the
    /// size of the discarded non-harmonic remainder.
    pub fn from_table(t: &[Complex64]) -> (Self, f64) {
        let n = poly::degree(t);
        let zc = poly::to_z_basis(t);
        let rest = if n >= 2 { zc[1..n].iter().map(|c| c.norm()).fold(0.0, f64::max) } else { 0.0 };
        let h = if n == 0 {
            Self::new(0, zc[0], Complex64::new(0.0, 0.0))
        } else {
            Self::new(n, zc[0], zc[n])
        };
        (h, rest)
    }
}

/// Incident fields: plane waves, Herglotz wave functions and Bessel modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum IncidentField {
    PlaneWave { k: f64, direction: Point },
    /// Kernel samples at the angles `2πj/M`.
    Herglotz { k: f64, kernel: Vec<Complex64> },
    /// `amplitude · J_m(k|x−c|) e^{i m θ}` about `center`.
    BesselMode { k: f64, order: i32, amplitude: Complex64, center: Point },
}

impl IncidentField {
    pub fn plane(k: f64, angle: f64) -> Self {
        IncidentField::PlaneWave { k, direction: [angle.cos(), angle.sin()] }
    }

    pub fn bessel(k: f64, order: i32) -> Self {
        IncidentField::BesselMode { k, order, amplitude: Complex64::new(1.0, 0.0), center: [0.0, 0.0] }
    }

    /// `sin(k x1)` written as a two-node Herglotz function.
    pub fn sine_x1(k: f64) -> Self {
        let c = 1.0 / (2.0 * PI) / I;
        IncidentField::Herglotz { k, kernel: vec![c, -c] }
    }

    pub fn k(&self) -> f64 {
        match self {
            IncidentField::PlaneWave { k, .. }
            | IncidentField::Herglotz { k, .. }
            | IncidentField::BesselMode { k, .. } => *k,
        }
    }

    pub fn evaluate(&self, x: Point) -> Complex64 {
        self.value_grad(x).0
    }

    pub fn gradient(&self, x: Point) -> [Complex64; 2] {
        self.value_grad(x).1
    }

    /// Short human-readable label for reports.
    pub fn descriptor(&self) -> String {
        match self {
            IncidentField::PlaneWave { k, direction } => {
                format!("plane(k={k},angle={:.6})", direction[1].atan2(direction[0]))
            }
            IncidentField::Herglotz { k, kernel } => format!("herglotz(k={k},M={})", kernel.len()),
            IncidentField::BesselMode { k, order, .. } => format!("bessel(k={k},m={order})"),
        }
    }
}

pub fn herglotz_directions(m: usize) -> Vec<Point> {
    (0..m)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / m as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

fn plane_value_grad(k: f64, d: Point, x: Point) -> (Complex64, [Complex64; 2]) {
    let e = (I * k * (d[0] * x[0] + d[1] * x[1])).exp();
    (e, [I * k * d[0] * e, I * k * d[1] * e])
}

/// `J_m(k r) e^{i m θ}` at offset `y` from the mode's center.
fn mode_value(k: f64, m: i32, y: Point) -> Complex64 {
    let r = y[0].hypot(y[1]);
    if r == 0.0 {
        return if m == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let th = y[1].atan2(y[0]);
    bessel_j(m, k * r) * Complex64::from_polar(1.0, m as f64 * th)
}

fn mode_value_grad(k: f64, m: i32, y: Point) -> (Complex64, [Complex64; 2]) {
    let a = -k * mode_value(k, m + 1, y);
    let b = k * mode_value(k, m - 1, y);
    (mode_value(k, m, y), [0.5 * (a + b), (a - b) / (2.0 * I)])
}

impl FieldEval for IncidentField {
    fn value_grad(&self, x: Point) -> (Complex64, [Complex64; 2]) {
        match self {
            IncidentField::PlaneWave { k, direction } => plane_value_grad(*k, *direction, x),
            IncidentField::Herglotz { k, kernel } => {
                let w = 2.0 * PI / kernel.len() as f64;
                let mut v = Complex64::new(0.0, 0.0);
                let mut g = [Complex64::new(0.0, 0.0); 2];
                for (g_j, d) in kernel.iter().zip(herglotz_directions(kernel.len())) {
                    let (e, de) = plane_value_grad(*k, d, x);
                    v += g_j * e;
                    g[0] += g_j * de[0];
                    g[1] += g_j * de[1];
                }
                (v * w, [g[0] * w, g[1] * w])
            }
            IncidentField::BesselMode { k, order, amplitude, center } => {
                let (v, g) = mode_value_grad(*k, *order, [x[0] - center[0], x[1] - center[1]]);
                (amplitude * v, [amplitude * g[0], amplitude * g[1]])
            }
        }
    }
}

/// Taylor jet of a Helmholtz solution at `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldExpansion {
    pub center: Point,
    pub k: f64,
    /// `terms[j]`: homogeneous degree-`j` part `v_j` of `v`.
    pub terms: Vec<Table>,
    /// `grad_terms[j]`: the two components of `V_j`, from the series of `∇v`.
    pub grad_terms: Vec<[Table; 2]>,
    pub n0: usize,
    pub n: usize,
    pub v0: Complex64,
    /// Table of `v_{N+1}`, so that `V_N = ∇v_{N+1}`.
    pub vlead: Table,
}

impl FieldExpansion {
    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }

    /// Harmonic part of `v_{N+1}`; exact unless `(N0, N) = (0, 1)`.
    pub fn vlead_harmonic(&self) -> HarmonicPolynomial2D {
        HarmonicPolynomial2D::from_table(&self.vlead).0
    }

    /// Largest coefficient magnitude over all tables.
    pub fn scale(&self) -> f64 {
        let a = self.terms.iter().map(|t| poly::max_abs(t)).fold(0.0, f64::max);
        let b = self
            .grad_terms
            .iter()
            .map(|[x, y]| poly::max_abs(x).max(poly::max_abs(y)))
            .fold(0.0, f64::max);
        a.max(b)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn plane_jet(k: f64, d: Point, center: Point, order: usize, weight: Complex64) -> Vec<Table> {
    let phase = weight * (I * k * (d[0] * center[0] + d[1] * center[1])).exp();
    let a1 = I * k * d[0];
    let a2 = I * k * d[1];
    (0..=order)
        .map(|j| {
            (0..=j)
                .map(|a| phase * a1.powi((j - a) as i32) * a2.powi(a as i32) / (factorial(j - a) * factorial(a)))
                .collect()
        })
        .collect()
}

/// Jet of `J_m(k r) e^{i m θ}` about its own center.
fn centered_mode_jet(k: f64, m: i32, order: usize) -> Vec<Table> {
    let mut out: Vec<Table> = (0..=order).map(poly::zero).collect();
    let ma = m.unsigned_abs() as usize;
    let sign = if m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
    let mut s = 0;
    while 2 * s + ma <= order {
        let c = sign * (-1f64).powi(s as i32) * (0.5 * k).powi((2 * s + ma) as i32)
            / (factorial(s) * factorial(s + ma));
        let t = if m >= 0 { poly::zpow(s + ma, s) } else { poly::zpow(s, s + ma) };
        let j = 2 * s + ma;
        out[j] = poly::add(&out[j], &poly::scale(&t, Complex64::new(c, 0.0)));
        s += 1;
    }
    out
}

/// Jet at `center` of a mode centered at `c`, via Graf's addition theorem.
fn mode_jet(k: f64, m: i32, c: Point, center: Point, order: usize) -> Vec<Table> {
    let off = [center[0] - c[0], center[1] - c[1]];
    if off[0] == 0.0 && off[1] == 0.0 {
        return centered_mode_jet(k, m, order);
    }
    let mut out: Vec<Table> = (0..=order).map(poly::zero).collect();
    let j = order as i32;
    for nu in -j..=j {
        let coef = mode_value(k, m - nu, off);
        if coef == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (deg, t) in centered_mode_jet(k, nu, order).into_iter().enumerate() {
            out[deg] = poly::add(&out[deg], &poly::scale(&t, coef));
        }
    }
    out
}

fn combine(a: &mut [Table], b: &[Table], s: Complex64) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = poly::add(x, &poly::scale(y, s));
    }
}

/// `(v jets, ∇v jets)` through degree `order`.
fn raw_jets(f: &IncidentField, center: Point, order: usize) -> (Vec<Table>, Vec<[Table; 2]>) {
    let mut v: Vec<Table> = (0..=order).map(poly::zero).collect();
    let mut g1 = v.clone();
    let mut g2 = v.clone();
    match f {
        IncidentField::PlaneWave { k, direction } => {
            let t = plane_jet(*k, *direction, center, order, Complex64::new(1.0, 0.0));
            combine(&mut v, &t, Complex64::new(1.0, 0.0));
            combine(&mut g1, &t, I * k * direction[0]);
            combine(&mut g2, &t, I * k * direction[1]);
        }
        IncidentField::Herglotz { k, kernel } => {
            let w = 2.0 * PI / kernel.len() as f64;
            for (g, d) in kernel.iter().zip(herglotz_directions(kernel.len())) {
                let t = plane_jet(*k, d, center, order, g * w);
                combine(&mut v, &t, Complex64::new(1.0, 0.0));
                combine(&mut g1, &t, I * k * d[0]);
                combine(&mut g2, &t, I * k * d[1]);
            }
        }
        IncidentField::BesselMode { k, order: m, amplitude, center: c } => {
            let t = mode_jet(*k, *m, *c, center, order);
            combine(&mut v, &t, *amplitude);
            let up = mode_jet(*k, m + 1, *c, center, order);
            let down = mode_jet(*k, m - 1, *c, center, order);
            // ∂1 = (A + B)/2, ∂2 = (A − B)/(2i) with A = −k·mode_{m+1}, B = k·mode_{m−1}
            combine(&mut g1, &up, -0.5 * k * amplitude);
            combine(&mut g1, &down, 0.5 * k * amplitude);
            combine(&mut g2, &up, -k * amplitude / (2.0 * I));
            combine(&mut g2, &down, -k * amplitude / (2.0 * I));
        }
    }
    let grads = g1.into_iter().zip(g2).map(|(a, b)| [a, b]).collect();
    (v, grads)
}

/// Relative threshold deciding which jet coefficients count as nonzero.
pub const JET_THRESHOLD: f64 = 1e-12;

/// Taylor jet of `f` at `center` through degree `order` (at least 2).
pub fn taylor_jet(f: &IncidentField, center: Point, order: usize) -> Result<FieldExpansion> {
    if order < 2 {
        return Err(Error::PreconditionViolated("jet order must be at least 2".into()));
    }
    let (terms, grad_terms) = raw_jets(f, center, order);
    let scale = terms
        .iter()
        .map(|t| poly::max_abs(t))
        .chain(grad_terms.iter().map(|[a, b]| poly::max_abs(a).max(poly::max_abs(b))))
        .fold(0.0, f64::max);
    let thr = JET_THRESHOLD * scale;
    let n0 = terms.iter().position(|t| poly::max_abs(t) > thr);
    let n = grad_terms.iter().position(|[a, b]| poly::max_abs(a).max(poly::max_abs(b)) > thr);
    let (Some(n0), Some(n)) = (n0, n) else {
        return Err(Error::DegenerateJet { order });
    };
    if n + 1 > order {
        return taylor_jet(f, center, n + 2);
    }
    let v0 = terms[0][0];
    let vlead = terms[n + 1].clone();
    Ok(FieldExpansion { center, k: f.k(), terms, grad_terms, n0, n, v0, vlead })
}

/// One line of a [`JetReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetCheck {
    pub item: u8,
    pub name: String,
    pub evaluated: bool,
    pub passed: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetReport {
    pub checks: Vec<JetCheck>,
}

impl JetReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

/// Checks the four structural items of the jet together with the
/// consistency `V_j = ∇v_{j+1}` between the two series.
pub fn verify_jet_structure(e: &FieldExpansion, tol: f64) -> JetReport {
    let scale = e.scale().max(f64::MIN_POSITIVE);
    let rel = |t: &Table| poly::max_abs(t) / scale;
    let div = |g: &[Table; 2]| poly::add(&poly::d1(&g[0]), &poly::d2(&g[1]));
    let j_max = e.order();
    let mut checks = Vec::new();
    let mut push = |item: u8, name: &str, evaluated: bool, residual: f64| {
        checks.push(JetCheck {
            item,
            name: name.to_string(),
            evaluated,
            passed: evaluated && residual <= tol,
            residual,
        });
    };

    let curl = e
        .grad_terms
        .iter()
        .filter(|g| poly::degree(&g[0]) >= 1)
        .map(|g| rel(&poly::sub(&poly::d1(&g[1]), &poly::d2(&g[0]))))
        .fold(0.0, f64::max);
    push(1, "curl_free", true, curl);

    let consistency = (0..j_max)
        .map(|j| {
            let v = &e.terms[j + 1];
            let g = &e.grad_terms[j];
            rel(&poly::sub(&poly::d1(v), &g[0])).max(rel(&poly::sub(&poly::d2(v), &g[1])))
        })
        .fold(0.0, f64::max);
    push(1, "gradient_series_consistent", true, consistency);

    let (n0, n) = (e.n0, e.n);
    if n0 == 0 && n == 1 {
        let ok = j_max >= 3;
        let residual = if ok {
            rel(&e.terms[1]).max(rel(&div(&e.grad_terms[2]))).max(rel(&poly::laplacian(&e.terms[3])))
        } else {
            f64::INFINITY
        };
        push(2, "degree_relation_exceptional", ok, residual);
    } else {
        let residual = if n <= n0 && n0 <= n + 1 { 0.0 } else { f64::INFINITY };
        push(2, "degree_relation", true, residual);
    }

    if n < e.grad_terms.len() {
        let d = div(&e.grad_terms[n]);
        let residual = if n == 1 {
            (d[0] + e.k * e.k * e.v0).norm() / scale
        } else {
            rel(&d)
        };
        push(3, "leading_divergence", true, residual);
    } else {
        push(3, "leading_divergence", false, f64::INFINITY);
    }

    let mut harm = Vec::new();
    for j in [n0, n0 + 1] {
        if j <= j_max {
            harm.push(rel(&poly::laplacian(&e.terms[j])));
        }
    }
    for j in [n, n + 1] {
        if j < e.grad_terms.len() {
            let g = &e.grad_terms[j];
            harm.push(rel(&poly::laplacian(&g[0])).max(rel(&poly::laplacian(&g[1]))));
        }
    }
    let complete = harm.len() == 4;
    push(4, "leading_terms_harmonic", complete, harm.into_iter().fold(0.0, f64::max));

    let ok_declared = e.terms.iter().position(|t| poly::max_abs(t) > JET_THRESHOLD * scale) == Some(n0)
        && e.grad_terms
            .iter()
            .position(|[a, b]| poly::max_abs(a).max(poly::max_abs(b)) > JET_THRESHOLD * scale)
            == Some(n);
    push(2, "declared_degrees_match_tables", true, if ok_declared { 0.0 } else { f64::INFINITY });

    JetReport { checks }
}

/// `Some(l)` when `(f, corner)` falls in the exceptional class.
pub fn class_e_membership(f: &IncidentField, s: &Sector, order: usize) -> Result<Option<u32>> {
    let jet = taylor_jet(f, s.vertex, order.max(2))?;
    Ok(exceptional_angle(s.aperture, jet.n))
}

/// Cauchy data of a field sampled on a closed curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub points: Vec<Point>,
    pub normals: Vec<Point>,
    /// Arc-length quadrature weights.
    pub weights: Vec<f64>,
    pub values: Vec<Complex64>,
    pub normal_derivatives: Vec<Complex64>,
}

impl BoundaryTrace {
    /// Trace of `f` on the circle of given center and radius (`n` points).
    pub fn on_circle(f: &dyn FieldEval, center: Point, radius: f64, n: usize) -> Self {
        let mut t = Self::empty();
        for j in 0..n {
            let th = 2.0 * PI * j as f64 / n as f64;
            let nrm = [th.cos(), th.sin()];
            let x = [center[0] + radius * nrm[0], center[1] + radius * nrm[1]];
            let (v, g) = f.value_grad(x);
            t.points.push(x);
            t.normals.push(nrm);
            t.weights.push(2.0 * PI * radius / n as f64);
            t.values.push(v);
            t.normal_derivatives.push(g[0] * nrm[0] + g[1] * nrm[1]);
        }
        t
    }

    pub fn empty() -> Self {
        Self { points: vec![], normals: vec![], weights: vec![], values: vec![], normal_derivatives: vec![] }
    }

    pub fn zeroed(&self) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            values: vec![z; self.values.len()],
            normal_derivatives: vec![z; self.values.len()],
            ..self.clone()
        }
    }
}

/// Regularized Herglotz fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerglotzFit {
    pub kernel: Vec<Complex64>,
    /// Data term `‖v_g − t‖² / ‖t‖²` of the objective (unnormalized when
    /// the target vanishes).
    pub misfit: f64,
    /// `‖g‖_{L²(S¹)}` with trapezoid weights.
    pub g_norm: f64,
}

/// Minimizes `‖v_g − target‖² + λ‖g‖²` over kernels on an `m`-point grid.
/// Normal derivatives are weighted by `1/k` so both data types are O(1).
pub fn herglotz_least_squares(target: &BoundaryTrace, k: f64, m: usize, lambda: f64) -> Result<HerglotzFit> {
    if !(lambda > 0.0) {
        return Err(Error::PreconditionViolated("regularization weight must be positive".into()));
    }
    if m == 0 || target.points.is_empty() {
        return Err(Error::PreconditionViolated("empty kernel grid or boundary".into()));
    }
    let nb = target.points.len();
    let dw = 2.0 * PI / m as f64;
    let dirs = herglotz_directions(m);
    let rows = 2 * nb + m;
    let mut a = DMatrix::<Complex64>::zeros(rows, m);
    let mut b = DVector::<Complex64>::zeros(rows);
    for i in 0..nb {
        let sw = target.weights[i].sqrt();
        let x = target.points[i];
        let nu = target.normals[i];
        for (j, d) in dirs.iter().enumerate() {
            let e = (I * k * (x[0] * d[0] + x[1] * d[1])).exp() * dw;
            a[(i, j)] = sw * e;
            a[(nb + i, j)] = sw * I * (nu[0] * d[0] + nu[1] * d[1]) * e;
        }
        b[i] = sw * target.values[i];
        b[nb + i] = sw * target.normal_derivatives[i] / k;
    }
    let reg = (lambda * dw).sqrt();
    for j in 0..m {
        a[(2 * nb + j, j)] = Complex64::new(reg, 0.0);
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let diag_max = (0..m).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    let diag_min = (0..m).map(|i| r[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if !(diag_min > 1e-14 * diag_max) {
        return Err(Error::SingularSystem);
    }
    let qtb = qr.q().adjoint() * &b;
    let g = r.solve_upper_triangular(&qtb).ok_or(Error::SingularSystem)?;
    let fitted = a.rows(0, 2 * nb) * &g;
    let resid = (fitted - b.rows(0, 2 * nb)).norm();
    let data = b.rows(0, 2 * nb).norm();
    let misfit = if data > 0.0 { (resid / data).powi(2) } else { resid * resid };
    let g_norm = (g.iter().map(|c| c.norm_sqr()).sum::<f64>() * dw).sqrt();
    Ok(HerglotzFit { kernel: g.iter().copied().collect(), misfit, g_norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluation_examples() {
        let p = IncidentField::plane(1.0, 0.0);
        assert!((p.evaluate([0.0, 0.0]) - 1.0).norm() < 1e-15);
        assert!((p.gradient([0.0, 0.0])[0] - I).norm() < 1e-15);
        let b = IncidentField::bessel(1.0, 0);
        assert!((b.evaluate([0.0, 0.0]) - 1.0).norm() < 1e-15);
        assert!(b.gradient([0.0, 0.0])[0].norm() < 1e-15);
        let h = IncidentField::Herglotz { k: 1.0, kernel: vec![c(1.0 / (2.0 * PI), 0.0); 32] };
        assert!((h.evaluate([0.0, 0.0]) - 1.0).norm() < 1e-14);
        // constant kernel reproduces J0
        let x = [0.7, -0.4];
        assert!((h.evaluate(x) - bessel_j(0, 0.7f64.hypot(0.4))).norm() < 1e-13);
    }

    #[test]
    fn jet_examples() {
        let e = taylor_jet(&IncidentField::plane(1.0, 0.0), [0.0, 0.0], 4).unwrap();
        assert_eq!((e.n0, e.n), (0, 0));
        assert!((e.v0 - 1.0).norm() < 1e-15);
        assert!((e.grad_terms[0][0][0] - I).norm() < 1e-15);
        let e = taylor_jet(&IncidentField::bessel(1.0, 2), [0.0, 0.0], 4).unwrap();
        assert_eq!((e.n0, e.n), (2, 1));
        let e = taylor_jet(&IncidentField::sine_x1(1.0), [0.0, 0.0], 3).unwrap();
        assert_eq!((e.n0, e.n), (1, 0));
        assert!(e.v0.norm() < 1e-15);
        assert!((e.grad_terms[0][0][0] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn jets_reproduce_the_field_locally() {
        let fields = [
            IncidentField::PlaneWave { k: 2.0, direction: [0.6, 0.8] },
            IncidentField::BesselMode { k: 1.5, order: -3, amplitude: c(0.5, 1.0), center: [0.3, -0.2] },
            IncidentField::Herglotz { k: 1.0, kernel: (0..8).map(|j| c(j as f64, 1.0)).collect() },
        ];
        for f in &fields {
            let x0 = [0.1, 0.25];
            let e = taylor_jet(f, x0, 8).unwrap();
            for h in [1e-2, 2e-2] {
                let y = [h * 0.6, -h * 0.3];
                let approx: Complex64 = e.terms.iter().map(|t| poly::eval(t, y)).sum();
                let exact = f.evaluate([x0[0] + y[0], x0[1] + y[1]]);
                assert!((approx - exact).norm() < 1e-14 * (1.0 + exact.norm()) + 1e-13, "{f:?}");
            }
        }
    }

    #[test]
    fn structure_holds_for_examples() {
        for f in [IncidentField::plane(1.3, 0.4), IncidentField::bessel(1.0, 2), IncidentField::sine_x1(0.7)] {
            let e = taylor_jet(&f, [0.0, 0.0], 6).unwrap();
            let rep = verify_jet_structure(&e, 1e-12);
            assert!(rep.all_passed(), "{rep:?}");
        }
    }

    #[test]
    fn hand_built_table_fails_auxiliary_condition() {
        let k = 1.0;
        let z = c(0.0, 0.0);
        let terms = vec![
            vec![c(1.0, 0.0)],
            vec![c(1.0, 0.0), z],
            vec![c(-0.25, 0.0), z, c(-0.25, 0.0)],
            vec![c(1.0, 0.0), z, z, z],
        ];
        let grad_terms = (0..3).map(|j| [poly::d1(&terms[j + 1]), poly::d2(&terms[j + 1])]).collect();
        let e = FieldExpansion {
            center: [0.0, 0.0],
            k,
            vlead: terms[2].clone(),
            terms,
            grad_terms,
            n0: 0,
            n: 1,
            v0: c(1.0, 0.0),
        };
        let rep = verify_jet_structure(&e, 1e-10);
        let aux = rep.checks.iter().find(|c| c.name == "degree_relation_exceptional").unwrap();
        assert!(!aux.passed);
    }

    #[test]
    fn class_e_examples() {
        let sq = Sector::new([0.0, 0.0], 0.0, PI / 2.0, 0.5).unwrap();
        assert_eq!(class_e_membership(&IncidentField::plane(1.0, 0.3), &sq, 6).unwrap(), None);
        assert_eq!(class_e_membership(&IncidentField::bessel(1.0, 2), &sq, 6).unwrap(), Some(1));
        let tri = Sector::new([0.0, 0.0], 0.0, PI / 3.0, 0.5).unwrap();
        assert_eq!(class_e_membership(&IncidentField::bessel(1.0, 3), &tri, 6).unwrap(), Some(1));
    }

    #[test]
    fn harmonic_polynomial_gradient_matches_table() {
        let h = HarmonicPolynomial2D::new(3, c(0.5, -1.0), c(2.0, 0.25));
        let t = h.table();
        assert!(poly::max_abs(&poly::laplacian(&t)) < 1e-13);
        let x = [0.3, -0.7];
        let g = h.gradient(x);
        assert!((g[0] - poly::eval(&poly::d1(&t), x)).norm() < 1e-13);
        assert!((g[1] - poly::eval(&poly::d2(&t), x)).norm() < 1e-13);
        let (back, rest) = HarmonicPolynomial2D::from_table(&t);
        assert!(rest < 1e-13 && (back.b_plus - h.b_plus).norm() < 1e-13);
    }

    #[test]
    fn herglotz_fit_examples() {
        let k = 2.0;
        let pw = IncidentField::plane(k, 0.3);
        let target = BoundaryTrace::on_circle(&pw, [0.0, 0.0], 1.0, 128);
        let fit = herglotz_least_squares(&target, k, 64, 1e-8).unwrap();
        assert!(fit.misfit <= 1e-6, "{}", fit.misfit);
        assert!(fit.g_norm.is_finite());
        let zero = herglotz_least_squares(&target.zeroed(), k, 64, 1e-8).unwrap();
        assert!(zero.kernel.iter().all(|g| g.norm() == 0.0));
    }
}
