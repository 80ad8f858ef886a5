//! Planar geometry for room and doorway contours.
//!
//! Wall planes are projected to 2D lines, rooms become convex polygons by
//! half-plane intersection, doorways become quadrilaterals fitted between the
//! two rooms they connect, and unions of contours are realised as cell masks
//! on the planning grid.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridmap::{rasterize, CellMask, OccupancyGrid};
use crate::scalar::Scalar;
use crate::scenegraph::{Doorway, Room, WallPlane};

/// Tolerance of the point-in-polygon test (boundary counts as inside).
pub const CONTAINS_TOL: f64 = 1e-9;
/// Vertices closer than this are merged, and vertices within this distance
/// of the line through their neighbours are dropped.
pub const VERTEX_TOL: f64 = 1e-7;
/// Doorway rays longer than this multiple of the doorway width are rejected.
pub const MAX_RAY_WIDTHS: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("wall plane normal {0:?} is not horizontal (z must be zero)")]
    NonVerticalWall([f64; 3]),
    #[error("line normal must be non-zero")]
    ZeroNormal,
    #[error("room `{0}`: wall half-planes do not bound a region")]
    Unbounded(String),
    #[error("room `{0}`: wall half-planes have an empty intersection")]
    EmptyIntersection(String),
    #[error("polygon needs at least three distinct vertices")]
    Degenerate,
    #[error("doorway `{0}`: offset ray misses a room boundary")]
    RayMissed(String),
    #[error("composed contour is empty after rasterization")]
    EmptyUnion,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
pub struct Point2<T: Scalar> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> From<[T; 2]> for Point2<T> {
    fn from(v: [T; 2]) -> Self {
        Self { x: v[0], y: v[1] }
    }
}

impl<T: Scalar> From<Point2<T>> for [T; 2] {
    fn from(p: Point2<T>) -> Self {
        [p.x, p.y]
    }
}

impl<T: Scalar> Point2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Counter-clockwise perpendicular.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self * (T::one() / n))
        } else {
            None
        }
    }

    #[inline]
    pub fn lerp(self, o: Self, t: T) -> Self {
        self + (o - self) * t
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Scalar> Neg for Point2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Oriented line `normal·p + offset = 0`; the interior side is where the
/// expression is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line2D<T: Scalar> {
    pub normal: Point2<T>,
    pub offset: T,
}

impl<T: Scalar> Line2D<T> {
    /// Builds a line from a possibly unnormalised normal, rescaling the offset.
    pub fn new(normal: Point2<T>, offset: T) -> Result<Self, GeometryError> {
        let n = normal.norm();
        if !(n > T::zero()) {
            return Err(GeometryError::ZeroNormal);
        }
        Ok(Self { normal: normal * (T::one() / n), offset: offset / n })
    }

    #[inline]
    pub fn signed_distance(&self, p: Point2<T>) -> T {
        self.normal.dot(p) + self.offset
    }

    /// Intersection point of two lines, `None` when (nearly) parallel.
    pub fn intersect(&self, o: &Self) -> Option<Point2<T>> {
        let det = self.normal.cross(o.normal);
        if det.abs() < T::lit(1e-12) {
            return None;
        }
        let x = (self.normal.y * o.offset - o.normal.y * self.offset) / det;
        let y = (o.normal.x * self.offset - self.normal.x * o.offset) / det;
        Some(Point2::new(x, y))
    }
}

/// Drops the z-component of a vertical wall plane.
pub fn project_wall<T: Scalar>(w: &WallPlane) -> Result<Line2D<T>, GeometryError> {
    if w.normal[2].abs() > 1e-9 {
        return Err(GeometryError::NonVerticalWall(w.normal));
    }
    Line2D::new(Point2::new(T::lit(w.normal[0]), T::lit(w.normal[1])), T::lit(w.offset))
}

/// Convex polygon with counter-clockwise vertices and an extrusion height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon<T: Scalar> {
    vertices: Vec<Point2<T>>,
    pub height: T,
}

impl<T: Scalar> ConvexPolygon<T> {
    /// Normalises orientation to CCW, merges repeated vertices and removes
    /// collinear ones. The input is assumed to be in convex position.
    pub fn new(vertices: Vec<Point2<T>>, height: T) -> Result<Self, GeometryError> {
        let mut v = clean_ring(vertices);
        if v.len() < 3 {
            return Err(GeometryError::Degenerate);
        }
        if signed_area(&v) < T::zero() {
            v.reverse();
        }
        if signed_area(&v) <= T::lit(VERTEX_TOL * VERTEX_TOL) {
            return Err(GeometryError::Degenerate);
        }
        Ok(Self { vertices: v, height })
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    /// Iterator over directed edges `(a, b)`.
    pub fn edges(&self) -> impl Iterator<Item = (Point2<T>, Point2<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Closed point-in-polygon test.
    pub fn contains(&self, p: Point2<T>) -> bool {
        let tol = T::lit(CONTAINS_TOL);
        self.edges().all(|(a, b)| {
            let e = b - a;
            let len = e.norm();
            e.cross(p - a) / len >= -tol
        })
    }

    /// Shoelace area.
    pub fn area(&self) -> T {
        signed_area(&self.vertices).abs()
    }

    pub fn perimeter(&self) -> T {
        self.edges().fold(T::zero(), |acc, (a, b)| acc + a.dist(b))
    }

    pub fn bbox(&self) -> (Point2<T>, Point2<T>) {
        let mut lo = self.vertices[0];
        let mut hi = lo;
        for v in &self.vertices[1..] {
            lo = Point2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    pub fn centroid(&self) -> Point2<T> {
        let mut cx = T::zero();
        let mut cy = T::zero();
        let mut a2 = T::zero();
        for (p, q) in self.edges() {
            let c = p.cross(q);
            a2 = a2 + c;
            cx = cx + (p.x + q.x) * c;
            cy = cy + (p.y + q.y) * c;
        }
        let k = T::one() / (T::lit(3.0) * a2);
        Point2::new(cx * k, cy * k)
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point2<T>) -> T {
        self.edges().map(|(a, b)| point_segment_distance(p, a, b)).fold(T::infinity(), T::min)
    }

    /// Parameter interval `[lo, hi]` of the line `origin + t·dir` inside the
    /// polygon, or `None` when the line misses it.
    pub fn clip_line(&self, origin: Point2<T>, dir: Point2<T>) -> Option<(T, T)> {
        let mut lo = T::neg_infinity();
        let mut hi = T::infinity();
        let eps = T::lit(1e-12);
        for (a, b) in self.edges() {
            let e = b - a;
            let num = e.cross(origin - a);
            let den = e.cross(dir);
            if den.abs() < eps {
                if num < -eps {
                    return None;
                }
                continue;
            }
            let t = -num / den;
            if den > T::zero() {
                lo = lo.max(t);
            } else {
                hi = hi.min(t);
            }
        }
        (lo <= hi + T::lit(VERTEX_TOL)).then_some((lo, hi))
    }

    /// Lossy conversion to another scalar type.
    pub fn cast<U: Scalar>(&self) -> ConvexPolygon<U> {
        ConvexPolygon {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point2::new(U::lit(p.x.to_f64_lossy()), U::lit(p.y.to_f64_lossy())))
                .collect(),
            height: U::lit(self.height.to_f64_lossy()),
        }
    }
}

/// Area of a polygon by the shoelace formula.
pub fn polygon_area<T: Scalar>(poly: &ConvexPolygon<T>) -> T {
    poly.area()
}

/// Closed point-in-polygon test.
pub fn contains<T: Scalar>(poly: &ConvexPolygon<T>, p: Point2<T>) -> bool {
    poly.contains(p)
}

fn signed_area<T: Scalar>(v: &[Point2<T>]) -> T {
    let n = v.len();
    let mut s = T::zero();
    for i in 0..n {
        s = s + v[i].cross(v[(i + 1) % n]);
    }
    s / T::two()
}

pub fn point_segment_distance<T: Scalar>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    let e = b - a;
    let l2 = e.dot(e);
    if l2 <= T::zero() {
        return p.dist(a);
    }
    let t = ((p - a).dot(e) / l2).max(T::zero()).min(T::one());
    p.dist(a + e * t)
}

fn clean_ring<T: Scalar>(mut v: Vec<Point2<T>>) -> Vec<Point2<T>> {
    let tol = T::lit(VERTEX_TOL);
    loop {
        let n = v.len();
        if n < 3 {
            return v;
        }
        let mut removed = false;
        for i in 0..n {
            let prev = v[(i + n - 1) % n];
            let cur = v[i];
            let next = v[(i + 1) % n];
            let dup = cur.dist(prev) <= tol;
            let base = next - prev;
            let blen = base.norm();
            let collinear = blen > tol && (base.cross(cur - prev) / blen).abs() <= tol;
            if dup || collinear || blen <= tol {
                v.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return v;
        }
    }
}

/// Keeps the part of a convex ring with `line.signed_distance >= 0`.
fn clip_ring<T: Scalar>(ring: &[Point2<T>], line: &Line2D<T>) -> Vec<Point2<T>> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let da = line.signed_distance(a);
        let db = line.signed_distance(b);
        if da >= T::zero() {
            out.push(a);
        }
        if (da >= T::zero()) != (db >= T::zero()) {
            let t = da / (da - db);
            out.push(a.lerp(b, t));
        }
    }
    out
}

/// Intersection of the interior half-planes of `lines`.
pub fn half_plane_intersection<T: Scalar>(
    lines: &[Line2D<T>],
    height: T,
    label: &str,
) -> Result<ConvexPolygon<T>, GeometryError> {
    if lines.len() < 3 || !normals_positively_span(lines) {
        return Err(GeometryError::Unbounded(label.to_string()));
    }
    // The region is bounded, so all of its vertices are pairwise line
    // intersections; a box enclosing those encloses the region.
    let mut extent = T::one();
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            if let Some(p) = a.intersect(b) {
                extent = extent.max(p.x.abs()).max(p.y.abs());
            }
        }
    }
    let m = extent * T::two() + T::one();
    let mut ring = vec![Point2::new(-m, -m), Point2::new(m, -m), Point2::new(m, m), Point2::new(-m, m)];
    for l in lines {
        ring = clip_ring(&ring, l);
        if ring.is_empty() {
            return Err(GeometryError::EmptyIntersection(label.to_string()));
        }
    }
    ConvexPolygon::new(ring, height).map_err(|_| GeometryError::EmptyIntersection(label.to_string()))
}

/// True when no closed half-plane of directions contains every normal,
/// i.e. the largest angular gap between consecutive normals is below π.
fn normals_positively_span<T: Scalar>(lines: &[Line2D<T>]) -> bool {
    let mut ang: Vec<f64> = lines.iter().map(|l| l.normal.y.to_f64_lossy().atan2(l.normal.x.to_f64_lossy())).collect();
    ang.sort_by(f64::total_cmp);
    let mut max_gap = ang[0] + std::f64::consts::TAU - ang[ang.len() - 1];
    for w in ang.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    max_gap < std::f64::consts::PI - 1e-12
}

/// Convex polygon of a room: the intersection of its wall half-planes.
pub fn room_contour<T: Scalar>(room: &Room) -> Result<ConvexPolygon<T>, GeometryError> {
    let lines = room.walls.iter().map(project_wall::<T>).collect::<Result<Vec<_>, _>>()?;
    half_plane_intersection(&lines, T::lit(room.height), &room.id)
}

/// Quadrilateral spanning the gap between the two rooms a doorway connects.
///
/// The centre ray runs along the outward normal of the boundary segment
/// closest to the doorway centroid (searched over both rooms); rays offset by
/// half the width on either side are clipped against both rooms. Quads
/// shallower than `min_depth` (e.g. artificial doorways on a shared edge)
/// are widened symmetrically to `min_depth`.
pub fn doorway_contour<T: Scalar>(
    door: &Doorway,
    room_a: &ConvexPolygon<T>,
    room_b: &ConvexPolygon<T>,
    min_depth: T,
) -> Result<ConvexPolygon<T>, GeometryError> {
    let miss = || GeometryError::RayMissed(door.id.clone());
    let center = Point2::new(T::lit(door.centroid[0]), T::lit(door.centroid[1]));
    let width = T::lit(door.width);

    let mut best: Option<(T, Point2<T>, bool)> = None;
    for (poly, in_a) in [(room_a, true), (room_b, false)] {
        for (a, b) in poly.edges() {
            let d = point_segment_distance(center, a, b);
            if best.map_or(true, |(bd, _, _)| d < bd) {
                best = Some((d, b - a, in_a));
            }
        }
    }
    let (_, edge, in_a) = best.ok_or_else(miss)?;
    // Outward normal of a CCW edge, oriented from room A towards room B.
    let outward = Point2::new(edge.y, -edge.x).normalized().ok_or_else(miss)?;
    let dir = if in_a { outward } else { -outward };
    let lateral = dir.perp();
    let max_t = T::lit(MAX_RAY_WIDTHS) * width;
    let half = width / T::two();

    let mut sides = Vec::with_capacity(2);
    for s in [-half, half] {
        let origin = center + lateral * s;
        let (_, exit_a) = room_a.clip_line(origin, dir).ok_or_else(miss)?;
        let (entry_b, _) = room_b.clip_line(origin, dir).ok_or_else(miss)?;
        if exit_a.abs() > max_t || entry_b.abs() > max_t {
            return Err(miss());
        }
        let (mut ta, mut tb) = (exit_a, entry_b);
        if tb - ta < min_depth {
            let mid = (ta + tb) / T::two();
            ta = mid - min_depth / T::two();
            tb = mid + min_depth / T::two();
        }
        sides.push((origin, ta, tb));
    }
    let (o0, a0, b0) = sides[0];
    let (o1, a1, b1) = sides[1];
    let quad = vec![o0 + dir * a0, o0 + dir * b0, o1 + dir * b1, o1 + dir * a1];
    ConvexPolygon::new(quad, room_a.height.min(room_b.height))
}

/// Contour polygon tagged with the scene-graph element it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourMember {
    pub id: String,
    pub polygon: ConvexPolygon<f64>,
}

/// Union of contours realised as a cell mask on the planning grid.
#[derive(Debug, Clone)]
pub struct ComposedContour {
    pub members: Vec<ContourMember>,
    /// Rasterized union area in square meters.
    pub area: f64,
    pub mask: Arc<CellMask>,
}

impl ComposedContour {
    pub fn contains(&self, p: Point2<f64>) -> bool {
        self.members.iter().any(|m| m.polygon.contains(p))
    }

    pub fn member_ids(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|m| m.id.as_str())
    }

    /// Union with another composed contour (members deduplicated by id).
    pub fn union(&self, other: &Self, grid: &OccupancyGrid) -> Result<Self, GeometryError> {
        let mut members = self.members.clone();
        for m in &other.members {
            if !members.iter().any(|x| x.id == m.id) {
                members.push(m.clone());
            }
        }
        compose(members, grid)
    }
}

/// Boolean union of contours, rasterized on `grid`.
pub fn compose(members: Vec<ContourMember>, grid: &OccupancyGrid) -> Result<ComposedContour, GeometryError> {
    let polys: Vec<&ConvexPolygon<f64>> = members.iter().map(|m| &m.polygon).collect();
    let mask = rasterize(&polys, grid).map_err(|_| GeometryError::EmptyUnion)?;
    let area = mask.area();
    Ok(ComposedContour { members, area, mask: Arc::new(mask) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type P = Point2<f64>;

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> ConvexPolygon<f64> {
        ConvexPolygon::new(vec![P::new(x0, y0), P::new(x1, y0), P::new(x1, y1), P::new(x0, y1)], 3.0).unwrap()
    }

    fn wall(nx: f64, ny: f64, d: f64) -> WallPlane {
        WallPlane { normal: [nx, ny, 0.0], offset: d }
    }

    fn room(walls: Vec<WallPlane>) -> Room {
        Room { id: "r".into(), centroid: [0.0; 3], height: 3.0, walls }
    }

    #[test]
    fn project_axis_aligned_walls() {
        let l: Line2D<f64> = project_wall(&wall(1.0, 0.0, -2.0)).unwrap();
        assert_eq!(l.signed_distance(P::new(2.0, 7.0)), 0.0);
        assert!(l.signed_distance(P::new(3.0, 0.0)) > 0.0);

        let l: Line2D<f64> = project_wall(&wall(0.0, -1.0, 5.0)).unwrap();
        assert_eq!(l.signed_distance(P::new(-4.0, 5.0)), 0.0);
        assert!(l.signed_distance(P::new(0.0, 4.0)) > 0.0);
        assert!(l.signed_distance(P::new(0.0, 6.0)) < 0.0);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let l: Line2D<f64> = project_wall(&wall(h, h, 0.0)).unwrap();
        assert!(l.signed_distance(P::new(1.0, -1.0)).abs() < 1e-15);
        assert!(l.signed_distance(P::new(1.0, 1.0)) > 0.0);
    }

    #[test]
    fn non_vertical_wall_rejected() {
        let w = WallPlane { normal: [0.0, 0.6, 0.8], offset: 0.0 };
        assert!(matches!(project_wall::<f64>(&w), Err(GeometryError::NonVerticalWall(_))));
    }

    #[test]
    fn unit_square_room() {
        let r = room(vec![wall(1.0, 0.0, 0.0), wall(-1.0, 0.0, 1.0), wall(0.0, 1.0, 0.0), wall(0.0, -1.0, 1.0)]);
        let p: ConvexPolygon<f64> = room_contour(&r).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_relative_eq!(p.area(), 1.0, epsilon = 1e-12);
        assert_eq!(p.height, 3.0);
    }

    #[test]
    fn right_triangle_room() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // x >= 0, y >= 0, x + y <= 2
        let r = room(vec![wall(1.0, 0.0, 0.0), wall(0.0, 1.0, 0.0), wall(-h, -h, 2.0 * h)]);
        let p: ConvexPolygon<f64> = room_contour(&r).unwrap();
        assert_eq!(p.vertices().len(), 3);
        assert_relative_eq!(p.area(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn redundant_wall_dropped() {
        let r = room(vec![
            wall(1.0, 0.0, 0.0),
            wall(-1.0, 0.0, 1.0),
            wall(0.0, 1.0, 0.0),
            wall(0.0, -1.0, 1.0),
            wall(1.0, 0.0, 5.0),
        ]);
        let p: ConvexPolygon<f64> = room_contour(&r).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_relative_eq!(p.area(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unbounded_and_empty_rooms() {
        let strip = room(vec![wall(1.0, 0.0, 0.0), wall(-1.0, 0.0, 1.0), wall(1.0, 0.0, 0.5)]);
        assert!(matches!(room_contour::<f64>(&strip), Err(GeometryError::Unbounded(_))));
        let empty = room(vec![wall(1.0, 0.0, -2.0), wall(-1.0, 0.0, 1.0), wall(0.0, 1.0, 0.0), wall(0.0, -1.0, 1.0)]);
        assert!(matches!(room_contour::<f64>(&empty), Err(GeometryError::EmptyIntersection(_))));
    }

    #[test]
    fn contains_with_closed_boundary() {
        let s = square(0.0, 0.0, 1.0, 1.0);
        assert!(s.contains(P::new(0.5, 0.5)));
        assert!(s.contains(P::new(1.0, 0.5)));
        assert!(!s.contains(P::new(1.1, 0.5)));
    }

    #[test]
    fn areas() {
        assert_relative_eq!(square(0.0, 0.0, 1.0, 1.0).area(), 1.0);
        let t = ConvexPolygon::new(vec![P::new(0.0, 0.0), P::new(2.0, 0.0), P::new(0.0, 2.0)], 1.0).unwrap();
        assert_relative_eq!(polygon_area(&t), 2.0);
        let hex: Vec<P> = (0..6)
            .map(|k| {
                let a = k as f64 * std::f64::consts::PI / 3.0;
                P::new(a.cos(), a.sin())
            })
            .collect();
        let hex = ConvexPolygon::new(hex, 1.0).unwrap();
        assert!((hex.area() - 3.0 * 3f64.sqrt() / 2.0).abs() < 1e-9);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let cw = ConvexPolygon::new(vec![P::new(0.0, 0.0), P::new(0.0, 1.0), P::new(1.0, 1.0), P::new(1.0, 0.0)], 1.0)
            .unwrap();
        let v = cw.vertices();
        assert!(signed_area(v) > 0.0);
    }

    #[test]
    fn works_in_single_precision() {
        let s: ConvexPolygon<f32> = square(0.0, 0.0, 2.0, 1.0).cast();
        assert!((s.area() - 2.0f32).abs() < 1e-6);
        assert!(s.contains(Point2::new(1.0f32, 1.0)));
    }

    fn door(x: f64, y: f64, w: f64) -> Doorway {
        Doorway {
            id: "d".into(),
            centroid: [x, y, 0.0],
            width: w,
            traversable: true,
            connects: ["a".into(), "b".into()],
        }
    }

    #[test]
    fn doorway_quad_spans_wall_gap() {
        let a = square(0.0, 0.0, 1.0, 1.0);
        let b = square(1.2, 0.0, 2.2, 1.0);
        let q = doorway_contour(&door(1.1, 0.5, 0.6), &a, &b, 0.1).unwrap();
        assert!((q.area() - 0.12).abs() < 1e-12);
        let (lo, hi) = q.bbox();
        assert!((lo.x - 1.0).abs() < 1e-12 && (hi.x - 1.2).abs() < 1e-12);
        assert!((lo.y - 0.2).abs() < 1e-12 && (hi.y - 0.8).abs() < 1e-12);

        let q = doorway_contour(&door(1.1, 0.5, 0.2), &a, &b, 0.1).unwrap();
        assert!((q.area() - 0.04).abs() < 1e-12);
        // Room order does not matter.
        let q = doorway_contour(&door(1.1, 0.5, 0.6), &b, &a, 0.1).unwrap();
        assert!((q.area() - 0.12).abs() < 1e-12);
    }

    #[test]
    fn zero_thickness_doorway_gets_min_depth() {
        let a = square(0.0, 0.0, 1.0, 1.0);
        let b = square(1.0, 0.0, 2.0, 1.0);
        let q = doorway_contour(&door(1.0, 0.5, 0.6), &a, &b, 0.1).unwrap();
        let (lo, hi) = q.bbox();
        assert!((hi.x - lo.x - 0.1).abs() < 1e-12);
        assert!((hi.y - lo.y - 0.6).abs() < 1e-12);
        assert!(q.contains(P::new(1.0, 0.5)));
    }

    #[test]
    fn doorway_ray_missing_room() {
        let a = square(0.0, 0.0, 1.0, 1.0);
        let b = square(1.2, 5.0, 2.2, 6.0);
        assert!(matches!(doorway_contour(&door(1.1, 0.5, 0.6), &a, &b, 0.1), Err(GeometryError::RayMissed(_))));
    }

    #[test]
    fn doorway_between_rotated_rooms() {
        // Two squares rotated by 30° separated by a 0.2 m gap along the rotated x axis.
        let (s, c) = (30f64.to_radians().sin(), 30f64.to_radians().cos());
        let rot = |x: f64, y: f64| P::new(c * x - s * y, s * x + c * y);
        let a = ConvexPolygon::new(vec![rot(0.0, 0.0), rot(1.0, 0.0), rot(1.0, 1.0), rot(0.0, 1.0)], 2.0).unwrap();
        let b = ConvexPolygon::new(vec![rot(1.2, 0.0), rot(2.2, 0.0), rot(2.2, 1.0), rot(1.2, 1.0)], 2.0).unwrap();
        let cen = rot(1.1, 0.5);
        let q = doorway_contour(&door(cen.x, cen.y, 0.4), &a, &b, 0.01).unwrap();
        assert!((q.area() - 0.08).abs() < 1e-9);
        // lateral extent equals the doorway width
        let v = q.vertices();
        let widths: Vec<f64> = (0..4).map(|i| v[i].dist(v[(i + 1) % 4])).collect();
        assert!(widths.iter().any(|w| (w - 0.4).abs() < 1e-6));
    }
}
