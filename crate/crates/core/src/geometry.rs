//! Coverage geometry in 3D: points, transmission spheres, segment/sphere
//! crossings and sphere/sphere intersection circles.
//!
//! Everything here is a pure function on `Copy` values. Distances are in
//! meters; positions along a segment `a -> b` are expressed as a parameter
//! `t` in `[0, 1]` with `point_at(a, b, t) = a + t (b - a)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Boundary-membership tolerance in meters.
pub const EPS: f64 = 1e-9;

/// Largest gap (in segment-parameter units) still treated as covered.
pub const GAP_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum GeometryError {
    #[error("segment does not intersect the sphere")]
    NoIntersection,
    #[error("ray origin coincides with the sphere center")]
    DegenerateRay,
    #[error("spheres are disjoint")]
    Disjoint,
    #[error("one sphere is contained in the other")]
    Contained,
    #[error("spheres touch in a single point")]
    Tangent,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        euclidean_distance(self, other)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        (n > 0.0).then(|| self * (1.0 / n))
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, k: f64) -> Point3 {
        Point3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// Omnidirectional transmission range of a single drone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereCoverage {
    pub center: Point3,
    pub radius: f64,
}

impl SphereCoverage {
    pub fn new(center: Point3, radius: f64) -> Self {
        debug_assert!(radius > 0.0 && radius.is_finite());
        Self { center, radius }
    }

    /// Closed-ball membership with the [`EPS`] boundary tolerance.
    pub fn contains(&self, p: Point3) -> bool {
        euclidean_distance(p, self.center) <= self.radius + EPS
    }

    /// True when the two spheres intersect in a proper circle.
    pub fn overlaps(&self, other: &SphereCoverage) -> bool {
        sphere_intersection_circle(self, other).is_ok()
    }
}

/// Sub-interval `[t_in, t_out]` of a segment's parameter range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageInterval {
    pub t_in: f64,
    pub t_out: f64,
}

impl CoverageInterval {
    pub fn len(&self) -> f64 {
        self.t_out - self.t_in
    }

    pub fn contains(&self, t: f64) -> bool {
        self.t_in <= t && t <= self.t_out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionCircle {
    pub center: Point3,
    pub radius: f64,
    /// Unit normal of the circle's plane, pointing from the first sphere's
    /// center towards the second.
    pub axis: Point3,
}

pub fn euclidean_distance(p: Point3, q: Point3) -> f64 {
    (p - q).norm()
}

pub fn point_at(a: Point3, b: Point3, t: f64) -> Point3 {
    Point3::new(
        a.x + t * (b.x - a.x),
        a.y + t * (b.y - a.y),
        a.z + t * (b.z - a.z),
    )
}

/// Real roots of `|a + t (b - a) - c|^2 = r^2`, ascending, unclipped.
/// A double root is reported once.
fn segment_sphere_roots(a: Point3, b: Point3, s: &SphereCoverage) -> Option<(f64, f64)> {
    let d = b - a;
    let f = a - s.center;
    let qa = d.norm_squared();
    if qa == 0.0 {
        return None;
    }
    let qb = 2.0 * f.dot(d);
    let qc = f.norm_squared() - s.radius * s.radius;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Stable form: avoid cancellation between -qb and sq.
    let q = -0.5 * (qb + qb.signum() * sq);
    let (t1, t2) = if q == 0.0 {
        // qb == 0 and disc == 0, hence qc == 0: double root at t = 0
        (0.0, 0.0)
    } else {
        let r1 = q / qa;
        let r2 = qc / q;
        (r1.min(r2), r1.max(r2))
    };
    Some((t1, t2))
}

/// Parameters in `[0, 1]` where the segment `a -> b` crosses the sphere's
/// boundary, ascending. A tangency is reported once.
pub fn segment_sphere_intersections(a: Point3, b: Point3, s: &SphereCoverage) -> Vec<f64> {
    let Some((t1, t2)) = segment_sphere_roots(a, b, s) else {
        return Vec::new();
    };
    let in_range = |t: f64| (0.0..=1.0).contains(&t);
    let mut out = Vec::with_capacity(2);
    if in_range(t1) {
        out.push(t1);
    }
    if in_range(t2) && t2 != t1 {
        out.push(t2);
    }
    out
}

/// The crossing of segment `a -> b` with `sphere`'s boundary that lies
/// closest to `toward`. Returns the crossing point and its parameter.
pub fn exit_point_param(
    a: Point3,
    b: Point3,
    sphere: &SphereCoverage,
    toward: Point3,
) -> Result<(f64, Point3), GeometryError> {
    segment_sphere_intersections(a, b, sphere)
        .into_iter()
        .map(|t| (t, point_at(a, b, t)))
        .min_by(|(_, p), (_, q)| {
            euclidean_distance(*p, toward).total_cmp(&euclidean_distance(*q, toward))
        })
        .ok_or(GeometryError::NoIntersection)
}

pub fn exit_point(
    a: Point3,
    b: Point3,
    sphere: &SphereCoverage,
    toward: Point3,
) -> Result<Point3, GeometryError> {
    exit_point_param(a, b, sphere, toward).map(|(_, p)| p)
}

/// Boundary point of `s` on the ray from `a` through `s.center`, nearest to
/// `a`. From inside the sphere the ray crosses the boundary beyond the
/// center.
pub fn boundary_point_toward(a: Point3, s: &SphereCoverage) -> Result<Point3, GeometryError> {
    let offset = a - s.center;
    let dist = offset.norm();
    if dist == 0.0 {
        return Err(GeometryError::DegenerateRay);
    }
    let unit = offset * (1.0 / dist);
    if dist >= s.radius {
        Ok(s.center + unit * s.radius)
    } else {
        Ok(s.center - unit * s.radius)
    }
}

pub fn sphere_intersection_circle(
    s1: &SphereCoverage,
    s2: &SphereCoverage,
) -> Result<IntersectionCircle, GeometryError> {
    let between = s2.center - s1.center;
    let d = between.norm();
    let (r1, r2) = (s1.radius, s2.radius);
    if d <= EPS {
        return Err(GeometryError::Contained);
    }
    if (d - (r1 + r2)).abs() <= EPS || (d - (r1 - r2).abs()).abs() <= EPS {
        return Err(GeometryError::Tangent);
    }
    if d > r1 + r2 {
        return Err(GeometryError::Disjoint);
    }
    if d < (r1 - r2).abs() {
        return Err(GeometryError::Contained);
    }
    let axis = between * (1.0 / d);
    let h = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let radius = (r1 * r1 - h * h).max(0.0).sqrt();
    Ok(IntersectionCircle {
        center: s1.center + axis * h,
        radius,
        axis,
    })
}

/// Component of `v` orthogonal to the unit vector `axis`.
fn reject(v: Point3, axis: Point3) -> Point3 {
    v - axis * v.dot(axis)
}

/// Point on the intersection circle of `s1` and `s2` nearest to `target`.
///
/// When `target` lies on the circle's axis every circle point is equally
/// near; the tie is broken towards global +y projected into the circle
/// plane, or +z when the axis is parallel to y.
pub fn eligible_intersection(
    s1: &SphereCoverage,
    s2: &SphereCoverage,
    target: Point3,
) -> Result<Point3, GeometryError> {
    let circle = sphere_intersection_circle(s1, s2)?;
    let radial = reject(target - circle.center, circle.axis);
    let scale = 1.0 + (target - circle.center).norm();
    let dir = if radial.norm() > EPS * scale {
        radial
    } else {
        let y = reject(Point3::new(0.0, 1.0, 0.0), circle.axis);
        if y.norm() > 1e-6 {
            y
        } else {
            reject(Point3::new(0.0, 0.0, 1.0), circle.axis)
        }
    };
    let unit = dir.normalized().ok_or(GeometryError::Tangent)?;
    Ok(circle.center + unit * circle.radius)
}

/// Parameter interval of segment `a -> b` lying inside `s`, if any.
///
/// Endpoints within [`EPS`] of the sphere count as inside, which makes the
/// result exact for chords whose endpoints sit on the boundary.
pub fn sphere_interval(a: Point3, b: Point3, s: &SphereCoverage) -> Option<CoverageInterval> {
    let a_in = s.contains(a);
    let b_in = s.contains(b);
    if a_in && b_in {
        return Some(CoverageInterval { t_in: 0.0, t_out: 1.0 });
    }
    let (t1, t2) = match segment_sphere_roots(a, b, s) {
        Some(roots) => roots,
        None if a_in => return Some(CoverageInterval { t_in: 0.0, t_out: 0.0 }),
        None if b_in => return Some(CoverageInterval { t_in: 1.0, t_out: 1.0 }),
        None => return None,
    };
    let t_in = if a_in { 0.0 } else { t1.max(0.0) };
    let t_out = if b_in { 1.0 } else { t2.min(1.0) };
    (t_in <= t_out && t_out >= 0.0 && t_in <= 1.0).then_some(CoverageInterval { t_in, t_out })
}

/// Union of the per-sphere intervals as maximal disjoint intervals,
/// ascending.
pub fn coverage_intervals(a: Point3, b: Point3, spheres: &[SphereCoverage]) -> Vec<CoverageInterval> {
    let mut pieces: Vec<CoverageInterval> = spheres
        .iter()
        .filter_map(|s| sphere_interval(a, b, s))
        .collect();
    pieces.sort_by(|x, y| x.t_in.total_cmp(&y.t_in));
    let mut merged: Vec<CoverageInterval> = Vec::with_capacity(pieces.len());
    for piece in pieces {
        match merged.last_mut() {
            Some(last) if piece.t_in <= last.t_out => last.t_out = last.t_out.max(piece.t_out),
            _ => merged.push(piece),
        }
    }
    merged
}

/// Uncovered stretches of `[0, 1]` given merged intervals.
fn gaps(intervals: &[CoverageInterval]) -> Vec<CoverageInterval> {
    let mut out = Vec::new();
    let mut cursor = 0.0;
    for iv in intervals {
        if iv.t_in > cursor {
            out.push(CoverageInterval { t_in: cursor, t_out: iv.t_in });
        }
        cursor = f64::max(cursor, iv.t_out);
    }
    if cursor < 1.0 {
        out.push(CoverageInterval { t_in: cursor, t_out: 1.0 });
    }
    out
}

/// Longest uncovered stretch of segment `a -> b`, in meters.
pub fn max_uncovered_gap(a: Point3, b: Point3, spheres: &[SphereCoverage]) -> f64 {
    let len = euclidean_distance(a, b);
    gaps(&coverage_intervals(a, b, spheres))
        .iter()
        .map(|g| g.len() * len)
        .fold(0.0, f64::max)
}

/// Total uncovered length of segment `a -> b`, in meters.
pub fn uncovered_length(a: Point3, b: Point3, spheres: &[SphereCoverage]) -> f64 {
    let len = euclidean_distance(a, b);
    gaps(&coverage_intervals(a, b, spheres))
        .iter()
        .map(|g| g.len() * len)
        .sum()
}

/// Whether every point of `a -> b` lies in at least one sphere, up to gaps
/// of [`GAP_EPS`] in parameter units.
pub fn is_segment_covered(a: Point3, b: Point3, spheres: &[SphereCoverage]) -> bool {
    if a == b {
        return spheres.iter().any(|s| s.contains(a));
    }
    gaps(&coverage_intervals(a, b, spheres))
        .iter()
        .all(|g| g.len() < GAP_EPS)
}
