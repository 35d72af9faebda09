//! Media `(a, c)` on a convex hull, sampled onto a solver grid.
//!
//! Polygonal media are built from one profile per vertex, blended with a
//! bulk profile by a smooth partition of unity. Inside the inner half of
//! each vertex patch the declared corner law holds exactly:
//!
//! * `c − 1 = ρ₀ + A_ρ (r/r_c)^σ`
//! * `a − 1 = A_γ (r/r_c)^β` for `β > 0`, or `γ₀ (1 + A_γ (r/r_c)^σ)` for `β = 0`
//!
//! Grid values near the hull boundary are cell averages.

use crate::cgo::smooth_step;
use crate::error::{Error, Result};
use crate::geometry::{norm, sub, ConvexPolygon, Point};
use crate::grid::Grid2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn default_rho_amp() -> f64 {
    0.2
}

fn default_gamma_amp() -> f64 {
    0.3
}

fn default_a0() -> f64 {
    0.05
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerRecord {
    pub rho0: f64,
    /// Vanishing order `β` of `a − 1`; zero selects a jump of size `gamma0`.
    pub gamma_order: f64,
    #[serde(default)]
    pub gamma0: f64,
    pub sigma: f64,
    #[serde(default = "default_rho_amp")]
    pub rho_amp: f64,
    #[serde(default = "default_gamma_amp")]
    pub gamma_amp: f64,
}

impl CornerRecord {
    pub fn potential(rho0: f64, gamma_order: f64, sigma: f64) -> Self {
        Self { rho0, gamma_order, gamma0: 0.0, sigma, rho_amp: default_rho_amp(), gamma_amp: default_gamma_amp() }
    }

    pub fn conductivity(gamma0: f64, rho0: f64, sigma: f64) -> Self {
        Self { rho0, gamma_order: 0.0, gamma0, sigma, rho_amp: default_rho_amp(), gamma_amp: default_gamma_amp() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::Config { field: "sigma".into(), message: format!("must be positive, got {}", self.sigma) });
        }
        if !(self.gamma_order >= 0.0) {
            return Err(Error::Config {
                field: "gamma_order".into(),
                message: format!("must be nonnegative, got {}", self.gamma_order),
            });
        }
        Ok(())
    }

    /// `(a − 1, c − 1)` at distance `t = r/r_c` inside the vertex plateau.
    pub fn profile(&self, t: f64) -> (f64, f64) {
        let c = self.rho0 + self.rho_amp * t.powf(self.sigma);
        let a = if self.gamma_order == 0.0 {
            self.gamma0 * (1.0 + self.gamma_amp * t.powf(self.sigma))
        } else {
            self.gamma_amp * t.powf(self.gamma_order)
        };
        (a, c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonMedium {
    pub vertices: Vec<Point>,
    /// One record per vertex, or a single record used at every vertex.
    pub corners: Vec<CornerRecord>,
    #[serde(default)]
    pub bulk_c: f64,
    #[serde(default)]
    pub bulk_a: f64,
    /// Vertex patch radius; defaults to 0.45 × the closest vertex pair distance.
    #[serde(default)]
    pub corner_radius: Option<f64>,
    #[serde(default = "default_a0")]
    pub a0: f64,
}

/// Homogeneous disc; the hull is a circumscribed regular polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscMedium {
    pub center: Point,
    pub radius: f64,
    pub c: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "default_a0")]
    pub a0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum MediumConfig {
    Polygon(PolygonMedium),
    Disc(DiscMedium),
}

impl MediumConfig {
    pub fn polygon(vertices: Vec<Point>, corners: Vec<CornerRecord>) -> Self {
        MediumConfig::Polygon(PolygonMedium {
            vertices,
            corners,
            bulk_c: 0.0,
            bulk_a: 0.0,
            corner_radius: None,
            a0: default_a0(),
        })
    }

    pub fn disc(center: Point, radius: f64, c: f64) -> Self {
        MediumConfig::Disc(DiscMedium { center, radius, c, a: 1.0, a0: default_a0() })
    }

    /// `(center, diameter)` of the contrast support.
    pub fn extent(&self) -> (Point, f64) {
        match self {
            MediumConfig::Polygon(p) => {
                let (lo, hi) = bounds(&p.vertices);
                let c = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
                let d = p.vertices.iter().map(|v| 2.0 * norm(sub(*v, c))).fold(0.0, f64::max);
                (c, d)
            }
            MediumConfig::Disc(d) => (d.center, 2.0 * d.radius),
        }
    }
}

fn bounds(v: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in v {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Grid of side `3D` around the support, `D` its diameter.
pub fn solver_grid(cfg: &MediumConfig, n: usize) -> Grid2 {
    let (c, d) = cfg.extent();
    Grid2::centered(n, 3.0 * d, c)
}

/// Point evaluation of `(a − 1, c − 1)`.
pub trait Coefficients: Sync {
    fn a(&self, x: Point) -> f64;
    fn c(&self, x: Point) -> Complex64;
}

/// Constant coefficients, used for manufactured identity tests.
#[derive(Debug, Clone, Copy)]
pub struct ConstantMedium {
    pub a: f64,
    pub c: f64,
}

impl Coefficients for ConstantMedium {
    fn a(&self, _: Point) -> f64 {
        self.a
    }
    fn c(&self, _: Point) -> Complex64 {
        Complex64::new(self.c, 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct MediumSpec {
    pub config: MediumConfig,
    pub hull: ConvexPolygon,
    pub grid: Grid2,
    pub a_values: Vec<f64>,
    pub c_values: Vec<f64>,
    pub corners: Vec<CornerRecord>,
    pub corner_radius: f64,
    pub a0: f64,
    pub no_contrast: bool,
    /// Truncation radius of the Green's kernel used by the forward solver.
    pub kernel_radius: f64,
}

impl MediumSpec {
    /// `(a − 1, c − 1)` at a point, without cell averaging.
    pub fn contrast_at(&self, x: Point) -> (f64, f64) {
        match &self.config {
            MediumConfig::Polygon(p) => {
                if !self.hull.contains(x) {
                    return (0.0, 0.0);
                }
                let mut wsum = 0.0;
                let mut a = 0.0;
                let mut c = 0.0;
                for (v, rec) in p.vertices.iter().zip(&self.corners) {
                    let t = norm(sub(x, *v)) / self.corner_radius;
                    let w = smooth_step(2.0 * (1.0 - t));
                    if w > 0.0 {
                        let (pa, pc) = rec.profile(t);
                        a += w * pa;
                        c += w * pc;
                        wsum += w;
                    }
                }
                let wb = 1.0 - wsum;
                (a + wb * p.bulk_a, c + wb * p.bulk_c)
            }
            MediumConfig::Disc(d) => {
                if norm(sub(x, d.center)) < d.radius {
                    (d.a - 1.0, d.c - 1.0)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }

    fn boundary_distance(&self, x: Point) -> f64 {
        match &self.config {
            MediumConfig::Polygon(_) => self.hull.signed_distance(x).abs(),
            MediumConfig::Disc(d) => (norm(sub(x, d.center)) - d.radius).abs(),
        }
    }

    /// Indices of grid nodes carrying contrast.
    pub fn support(&self) -> Vec<usize> {
        (0..self.grid.len()).filter(|&i| self.a_values[i] != 1.0 || self.c_values[i] != 1.0).collect()
    }

    /// Samples `(r, a − 1, c − 1)` along the bisector of corner `j`.
    pub fn bisector_samples(&self, j: usize, m: usize) -> Vec<(f64, f64, f64)> {
        let v = self.hull.vertices();
        let n = v.len();
        let p = v[j];
        let e1 = sub(v[(j + 1) % n], p);
        let e2 = sub(v[(j + n - 1) % n], p);
        let (l1, l2) = (norm(e1), norm(e2));
        let b = [e1[0] / l1 + e2[0] / l2, e1[1] / l1 + e2[1] / l2];
        let lb = norm(b);
        let dir = [b[0] / lb, b[1] / lb];
        let (lo, hi) = (1e-3 * self.corner_radius, 0.4 * self.corner_radius);
        (0..m)
            .map(|i| {
                let r = lo * (hi / lo).powf(i as f64 / (m - 1).max(1) as f64);
                let (a, c) = self.contrast_at([p[0] + r * dir[0], p[1] + r * dir[1]]);
                (r, a, c)
            })
            .collect()
    }
}

impl Coefficients for MediumSpec {
    fn a(&self, x: Point) -> f64 {
        1.0 + self.contrast_at(x).0
    }
    fn c(&self, x: Point) -> Complex64 {
        Complex64::new(1.0 + self.contrast_at(x).1, 0.0)
    }
}

/// Least-squares slope of `log|v|` against `log r`; `None` when every
/// sample vanishes.
pub fn fit_log_slope(rs: &[f64], vals: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        rs.iter().zip(vals).filter(|(_, v)| v.abs() > 1e-300).map(|(r, v)| (r.ln(), v.abs().ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Builds `a`, `c` on `grid` and verifies the medium invariants.
pub fn assemble_medium(cfg: &MediumConfig, grid: Grid2) -> Result<MediumSpec> {
    let (hull, corners, corner_radius, a0) = match cfg {
        MediumConfig::Polygon(p) => {
            let hull = ConvexPolygon::new(p.vertices.clone())?;
            let corners = match p.corners.len() {
                1 => vec![p.corners[0]; hull.len()],
                n if n == hull.len() => p.corners.clone(),
                n => {
                    return Err(Error::Config {
                        field: "corners".into(),
                        message: format!("expected 1 or {} records, got {n}", hull.len()),
                    })
                }
            };
            for c in &corners {
                c.validate()?;
            }
            let v = hull.vertices();
            let mut dmin = f64::INFINITY;
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    dmin = dmin.min(norm(sub(v[i], v[j])));
                }
            }
            let rc = p.corner_radius.unwrap_or(0.45 * dmin);
            if !(rc > 0.0 && rc <= 0.5 * dmin) {
                return Err(Error::Config {
                    field: "corner_radius".into(),
                    message: format!("must lie in (0, {}]", 0.5 * dmin),
                });
            }
            (hull, corners, rc, p.a0)
        }
        MediumConfig::Disc(d) => {
            if !(d.radius > 0.0) {
                return Err(Error::Config { field: "radius".into(), message: "must be positive".into() });
            }
            let m = 64;
            let rr = d.radius / (PI / m as f64).cos() * (1.0 + 1e-9);
            let verts = (0..m)
                .map(|j| {
                    let t = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                    [d.center[0] + rr * t.cos(), d.center[1] + rr * t.sin()]
                })
                .collect();
            (ConvexPolygon::new(verts)?, Vec::new(), 0.0, d.a0)
        }
    };
    if !(a0 > 0.0) {
        return Err(Error::Config { field: "a0".into(), message: "ellipticity floor must be positive".into() });
    }
    let (_, diam) = cfg.extent();
    let mut m = MediumSpec {
        config: cfg.clone(),
        hull,
        grid,
        a_values: Vec::new(),
        c_values: Vec::new(),
        corners,
        corner_radius,
        a0,
        no_contrast: false,
        kernel_radius: 1.5 * diam,
    };
    let h = grid.h();
    let sub_n = 4;
    let (a_values, c_values): (Vec<f64>, Vec<f64>) = (0..grid.len())
        .map(|i| {
            let x = grid.point_at(i);
            let (da, dc) = if m.boundary_distance(x) < h {
                let mut s = (0.0, 0.0);
                for iy in 0..sub_n {
                    for ix in 0..sub_n {
                        let off = |k: usize| h * ((k as f64 + 0.5) / sub_n as f64 - 0.5);
                        let v = m.contrast_at([x[0] + off(ix), x[1] + off(iy)]);
                        s.0 += v.0;
                        s.1 += v.1;
                    }
                }
                let w = (sub_n * sub_n) as f64;
                (s.0 / w, s.1 / w)
            } else {
                m.contrast_at(x)
            };
            (1.0 + da, 1.0 + dc)
        })
        .unzip();
    m.a_values = a_values;
    m.c_values = c_values;
    validate(&m)?;
    m.no_contrast = m.support().is_empty();
    Ok(m)
}

fn validate(m: &MediumSpec) -> Result<()> {
    let amin = m.a_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(amin >= m.a0) {
        return Err(Error::EllipticityViolated(amin));
    }
    let h = m.grid.h();
    for i in 0..m.grid.len() {
        let x = m.grid.point_at(i);
        if (m.a_values[i] != 1.0 || m.c_values[i] != 1.0) && m.hull.signed_distance(x) > h {
            return Err(Error::SupportViolated(format!("contrast at {x:?}")));
        }
    }
    for (j, rec) in m.corners.iter().enumerate() {
        let s = m.bisector_samples(j, 24);
        let rs: Vec<f64> = s.iter().map(|t| t.0).collect();
        let dc: Vec<f64> = s.iter().map(|t| t.2 - rec.rho0).collect();
        let da: Vec<f64> = s.iter().map(|t| if rec.gamma_order == 0.0 { t.1 - rec.gamma0 } else { t.1 }).collect();
        let want_a = if rec.gamma_order == 0.0 { rec.sigma } else { rec.gamma_order };
        let ok = |v: &[f64], want: f64| fit_log_slope(&rs, v).is_none_or(|p| p >= want - 0.1);
        if !ok(&dc, rec.sigma) || !ok(&da, want_a) {
            return Err(Error::PreconditionViolated(format!("corner {j} does not follow its declared profile")));
        }
    }
    Ok(())
}
