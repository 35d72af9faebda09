//! Corners, admissible probing directions and convex polygons.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Point = [f64; 2];

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

pub fn unit(angle: f64) -> Point {
    [angle.cos(), angle.sin()]
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Truncated open cone `{vertex + r(cos θ, sin θ) : 0 < r < ε, θ_ref < θ < θ_ref + ψ₀}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub vertex: Point,
    pub theta_ref: f64,
    pub aperture: f64,
    pub radius: f64,
}

impl Sector {
    pub fn new(vertex: Point, theta_ref: f64, aperture: f64, radius: f64) -> Result<Self> {
        if !(aperture > 0.0 && aperture < PI) {
            return Err(Error::InvalidSector(format!("aperture {aperture} not in (0, pi)")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSector(format!("radius {radius} must be positive")));
        }
        Ok(Self { vertex, theta_ref, aperture, radius })
    }

    /// Angle of `x - vertex` measured from the first edge, in `[0, 2π)`.
    pub fn local_angle(&self, x: Point) -> f64 {
        let v = sub(x, self.vertex);
        wrap_angle(v[1].atan2(v[0]) - self.theta_ref)
    }

    pub fn contains(&self, x: Point) -> bool {
        let r = norm(sub(x, self.vertex));
        if !(r > 0.0 && r < self.radius) {
            return false;
        }
        let t = self.local_angle(x);
        t > 0.0 && t < self.aperture
    }

    /// Direction of the bisector.
    pub fn bisector(&self) -> f64 {
        self.theta_ref + 0.5 * self.aperture
    }

    /// Unit vectors along the two edge rays.
    pub fn edge_rays(&self) -> [Point; 2] {
        [unit(self.theta_ref), unit(self.theta_ref + self.aperture)]
    }

    /// Global point at local polar coordinates `(r, ψ)`.
    pub fn point(&self, r: f64, psi: f64) -> Point {
        let u = unit(self.theta_ref + psi);
        [self.vertex[0] + r * u[0], self.vertex[1] + r * u[1]]
    }
}

/// Directions `d` with `d·x̂ > δ` on the whole corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionCone {
    pub sector: Sector,
    pub delta: f64,
}

impl DirectionCone {
    pub fn new(sector: Sector, delta: f64) -> Self {
        Self { sector, delta }
    }

    /// Half-width of the admissible angular window around the bisector.
    pub fn half_width(&self) -> Result<f64> {
        let bound = (0.5 * self.sector.aperture).cos();
        if self.delta >= bound {
            return Err(Error::EmptyDirectionCone { delta: self.delta, bound });
        }
        Ok(self.delta.clamp(-1.0, 1.0).acos() - 0.5 * self.sector.aperture)
    }

    /// Margin `min over edge rays of d·x̂ − δ` for direction angle `phi`.
    pub fn margin(&self, phi: f64) -> f64 {
        let d = unit(phi);
        let [e1, e2] = self.sector.edge_rays();
        dot(d, e1).min(dot(d, e2)) - self.delta
    }

    /// `m` unit directions spread symmetrically inside the open window.
    pub fn samples(&self, m: usize) -> Result<Vec<Point>> {
        Ok(self.sample_angles(m)?.into_iter().map(unit).collect())
    }

    /// Angles of the directions returned by [`samples`](Self::samples).
    pub fn sample_angles(&self, m: usize) -> Result<Vec<f64>> {
        if m == 0 {
            return Err(Error::PreconditionViolated("direction count must be at least 1".into()));
        }
        let w = self.half_width()?;
        let c = self.sector.bisector();
        if m == 1 {
            return Ok(vec![c]);
        }
        let span = 0.9 * w;
        Ok((0..m)
            .map(|j| c - span + 2.0 * span * j as f64 / (m - 1) as f64)
            .collect())
    }
}

/// Free-function form of [`DirectionCone::samples`].
pub fn direction_samples(dc: &DirectionCone, m: usize) -> Result<Vec<Point>> {
    dc.samples(m)
}

/// Free-function form of [`Sector::contains`].
pub fn sector_contains(s: &Sector, x: Point) -> bool {
    s.contains(x)
}

/// Integer `l` with `ψ₀(1+N) = lπ` to relative tolerance 1e-12, if any.
pub fn exceptional_angle(psi0: f64, n: usize) -> Option<u32> {
    exceptional_angle_within(psi0, n, 1e-12)
}

/// As [`exceptional_angle`] with a caller-chosen relative tolerance.
pub fn exceptional_angle_within(psi0: f64, n: usize, tol: f64) -> Option<u32> {
    let ratio = psi0 * (1 + n) as f64 / PI;
    let l = ratio.round();
    if l >= 1.0 && (ratio - l).abs() <= tol * ratio.max(1.0) {
        Some(l as u32)
    } else {
        None
    }
}

/// Strictly convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl TryFrom<Vec<Point>> for ConvexPolygon {
    type Error = Error;
    fn try_from(v: Vec<Point>) -> Result<Self> {
        ConvexPolygon::new(v)
    }
}

impl From<ConvexPolygon> for Vec<Point> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolygon(format!("{n} vertices")));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite coordinate".into()));
        }
        let scale = vertices
            .iter()
            .flat_map(|a| vertices.iter().map(move |b| norm(sub(*a, *b))))
            .fold(0.0, f64::max);
        let mut turning = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let e1 = sub(b, a);
            let e2 = sub(c, b);
            let cross = e1[0] * e2[1] - e1[1] * e2[0];
            if cross <= 1e-12 * scale * scale {
                return Err(Error::InvalidPolygon(format!(
                    "not strictly convex and counter-clockwise at vertex {}",
                    (i + 1) % n
                )));
            }
            turning += cross.atan2(dot(e1, e2));
        }
        if (turning - 2.0 * PI).abs() > 1e-9 {
            return Err(Error::InvalidPolygon("boundary winds more than once".into()));
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned square `[x0, x0+side] × [y0, y0+side]`.
    pub fn square(x0: f64, y0: f64, side: f64) -> Result<Self> {
        Self::new(vec![[x0, y0], [x0 + side, y0], [x0 + side, y0 + side], [x0, y0 + side]])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn min_edge(&self) -> f64 {
        self.edges().map(|(a, b)| norm(sub(b, a))).fold(f64::INFINITY, f64::min)
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for a in v {
            for b in v {
                d = d.max(norm(sub(*a, *b)));
            }
        }
        d
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len() as f64;
        let s = self.vertices.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        [s[0] / n, s[1] / n]
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Signed distance to the boundary, negative inside.
    pub fn signed_distance(&self, x: Point) -> f64 {
        let mut inside = true;
        let mut dmin = f64::INFINITY;
        for (a, b) in self.edges() {
            let e = sub(b, a);
            let len = norm(e);
            let nrm = [e[1] / len, -e[0] / len];
            if dot(sub(x, a), nrm) > 0.0 {
                inside = false;
            }
            let t = (dot(sub(x, a), e) / (len * len)).clamp(0.0, 1.0);
            let proj = [a[0] + t * e[0], a[1] + t * e[1]];
            dmin = dmin.min(norm(sub(x, proj)));
        }
        if inside {
            -dmin
        } else {
            dmin
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        self.signed_distance(x) < 0.0
    }

    /// Interior angle at each vertex.
    pub fn interior_angles(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let p = self.vertices[i];
                let next = sub(self.vertices[(i + 1) % n], p);
                let prev = sub(self.vertices[(i + n - 1) % n], p);
                wrap_angle(prev[1].atan2(prev[0]) - next[1].atan2(next[0]))
            })
            .collect()
    }

    /// Polygon area (positive for counter-clockwise order).
    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a[0] * b[1] - a[1] * b[0]).sum::<f64>()
    }
}

/// One sector per vertex, opening from the outgoing edge to the incoming one.
pub fn corner_sectors(p: &ConvexPolygon, eps: f64) -> Result<Vec<Sector>> {
    let limit = 0.5 * p.min_edge();
    if !(eps > 0.0) {
        return Err(Error::InvalidSector(format!("radius {eps} must be positive")));
    }
    if eps >= limit {
        return Err(Error::EpsilonTooLarge { eps, limit });
    }
    let n = p.len();
    let v = p.vertices();
    let angles = p.interior_angles();
    (0..n)
        .map(|i| {
            let next = sub(v[(i + 1) % n], v[i]);
            Sector::new(v[i], next[1].atan2(next[0]), angles[i], eps)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter() -> Sector {
        Sector::new([0.0, 0.0], 0.0, PI / 2.0, 1.0).unwrap()
    }

    #[test]
    fn sector_membership() {
        let s = quarter();
        assert!(s.contains([0.3, 0.3]));
        assert!(!s.contains([-0.1, 0.1]));
        assert!(!s.contains([0.8, 0.8]));
        assert!(!s.contains([0.5, 0.0]));
        assert!(!s.contains([0.0, 0.0]));
    }

    #[test]
    fn bisector_direction_for_single_sample() {
        let dc = DirectionCone::new(quarter(), 0.5);
        let d = dc.samples(1).unwrap()[0];
        assert!((d[0] - (PI / 4.0).cos()).abs() < 1e-15);
        assert!(dot(d, [1.0, 0.0]) > 0.5 && dot(d, [0.0, 1.0]) > 0.5);
    }

    #[test]
    fn empty_cone_is_reported() {
        let dc = DirectionCone::new(quarter(), 0.8);
        assert!(matches!(dc.samples(2), Err(Error::EmptyDirectionCone { .. })));
    }

    #[test]
    fn zero_delta_gives_distinct_positive_directions() {
        let s = Sector::new([0.0, 0.0], 0.0, PI / 3.0, 1.0).unwrap();
        let ds = DirectionCone::new(s, 0.0).samples(3).unwrap();
        assert_eq!(ds.len(), 3);
        for d in &ds {
            for e in s.edge_rays() {
                assert!(dot(*d, e) > 0.0);
            }
        }
        assert!(norm(sub(ds[0], ds[1])) > 1e-3 && norm(sub(ds[1], ds[2])) > 1e-3);
    }

    #[test]
    fn exceptional_angles() {
        assert_eq!(exceptional_angle(PI / 2.0, 1), Some(1));
        assert_eq!(exceptional_angle(PI / 2.0, 0), None);
        assert_eq!(exceptional_angle(PI / 3.0, 2), Some(1));
        assert_eq!(exceptional_angle(2.0, 5), None);
    }

    #[test]
    fn square_and_triangle_sectors() {
        let sq = ConvexPolygon::square(0.0, 0.0, 1.0).unwrap();
        let ss = corner_sectors(&sq, 0.2).unwrap();
        assert_eq!(ss.len(), 4);
        for s in &ss {
            assert!((s.aperture - PI / 2.0).abs() < 1e-14);
            // the bisector points into the square
            assert!(sq.contains(s.point(0.1, 0.5 * s.aperture)));
        }
        let h = 3f64.sqrt() / 2.0;
        let tri = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.5, h]]).unwrap();
        for s in corner_sectors(&tri, 0.1).unwrap() {
            assert!((s.aperture - PI / 3.0).abs() < 1e-14);
        }
        assert!(matches!(corner_sectors(&sq, 0.6), Err(Error::EpsilonTooLarge { .. })));
    }

    #[test]
    fn polygon_validation() {
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 1.0]]).is_err());
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
    }
}
