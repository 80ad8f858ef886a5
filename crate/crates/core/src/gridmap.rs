//! Planar occupancy grid, exact Euclidean distance field, region masks and
//! clearance checks for a disc-shaped robot.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConvexPolygon, Point2};
use crate::rng::PortableRng;

type Point = Point2<f64>;

pub const DEFAULT_RESOLUTION: f64 = 0.05;
pub const DEFAULT_ROBOT_RADIUS: f64 = 0.3;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid resolution must be positive and dimensions at least 1")]
    BadGeometry,
    #[error("mask is empty")]
    EmptyMask,
    #[error("malformed PGM image: {0}")]
    Pgm(String),
    #[error("malformed grid metadata: {0}")]
    Json(#[from] serde_json::Error),
}

/// Row-major occupancy grid; row 0 is the lowest `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub origin: Point,
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    occupied: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(origin: Point, resolution: f64, width: usize, height: usize) -> Result<Self, GridError> {
        if !(resolution > 0.0) || width == 0 || height == 0 {
            return Err(GridError::BadGeometry);
        }
        Ok(Self { origin, resolution, width, height, occupied: vec![false; width * height] })
    }

    /// Grid covering `[min, max]` with the given rectangles marked occupied.
    pub fn from_rects(min: Point, max: Point, resolution: f64, rects: &[Rect]) -> Result<Self, GridError> {
        let w = ((max.x - min.x) / resolution).round().max(1.0) as usize;
        let h = ((max.y - min.y) / resolution).round().max(1.0) as usize;
        let mut g = Self::new(min, resolution, w, h)?;
        for r in rects {
            g.fill_rect(r.min.into(), r.max.into(), true);
        }
        Ok(g)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    #[inline]
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let u = ((p.x - self.origin.x) / self.resolution).floor();
        let v = ((p.y - self.origin.y) / self.resolution).floor();
        if u >= 0.0 && v >= 0.0 && (u as usize) < self.width && (v as usize) < self.height {
            Some((u as usize, v as usize))
        } else {
            None
        }
    }

    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + (i as f64 + 0.5) * self.resolution,
            self.origin.y + (j as f64 + 0.5) * self.resolution,
        )
    }

    #[inline]
    pub fn is_occupied(&self, i: usize, j: usize) -> bool {
        self.occupied[self.index(i, j)]
    }

    pub fn set_occupied(&mut self, i: usize, j: usize, value: bool) {
        let k = self.index(i, j);
        self.occupied[k] = value;
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    pub fn bounds(&self) -> (Point, Point) {
        let hi = Point::new(
            self.origin.x + self.width as f64 * self.resolution,
            self.origin.y + self.height as f64 * self.resolution,
        );
        (self.origin, hi)
    }

    pub fn area(&self) -> f64 {
        (self.width * self.height) as f64 * self.resolution * self.resolution
    }

    /// Cell index ranges whose centres may fall inside `[lo, hi]`.
    fn cell_range(&self, lo: Point, hi: Point) -> (usize, usize, usize, usize) {
        let clampi = |v: f64, n: usize| v.max(0.0).min(n as f64) as usize;
        let i0 = clampi(((lo.x - self.origin.x) / self.resolution - 0.5).floor(), self.width);
        let i1 = clampi(((hi.x - self.origin.x) / self.resolution - 0.5).ceil() + 1.0, self.width);
        let j0 = clampi(((lo.y - self.origin.y) / self.resolution - 0.5).floor(), self.height);
        let j1 = clampi(((hi.y - self.origin.y) / self.resolution - 0.5).ceil() + 1.0, self.height);
        (i0, i1, j0, j1)
    }

    /// Sets every cell whose centre lies in the closed rectangle.
    pub fn fill_rect(&mut self, min: Point, max: Point, value: bool) {
        let (i0, i1, j0, j1) = self.cell_range(min, max);
        for j in j0..j1 {
            for i in i0..i1 {
                let c = self.cell_center(i, j);
                if c.x >= min.x && c.x <= max.x && c.y >= min.y && c.y <= max.y {
                    self.set_occupied(i, j, value);
                }
            }
        }
    }

    /// Sets every cell whose centre lies in the polygon.
    pub fn fill_polygon(&mut self, poly: &ConvexPolygon<f64>, value: bool) {
        let (lo, hi) = poly.bbox();
        let (i0, i1, j0, j1) = self.cell_range(lo, hi);
        for j in j0..j1 {
            for i in i0..i1 {
                if poly.contains(self.cell_center(i, j)) {
                    self.set_occupied(i, j, value);
                }
            }
        }
    }

    /// 8-bit binary PGM: 0 = occupied, 255 = free, first row is the top.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        for j in (0..self.height).rev() {
            for i in 0..self.width {
                out.push(if self.is_occupied(i, j) { 0 } else { 255 });
            }
        }
        out
    }

    /// Reads a P5 or P2 image; pixels darker than 128 are occupied.
    pub fn from_pgm(bytes: &[u8], meta: &GridMeta) -> Result<Self, GridError> {
        let (width, height, maxval, pixels) = parse_pgm(bytes)?;
        let mut g = Self::new(meta.origin.into(), meta.resolution, width, height)?;
        let threshold = 128.0 * maxval as f64 / 255.0;
        for (k, &v) in pixels.iter().enumerate() {
            let (row, col) = (k / width, k % width);
            g.set_occupied(col, height - 1 - row, (v as f64) < threshold);
        }
        Ok(g)
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta { origin: self.origin.into(), resolution: self.resolution }
    }
}

/// Sidecar metadata of a PGM grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub origin: [f64; 2],
    pub resolution: f64,
}

/// Axis-aligned obstacle rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

pub fn parse_rects(bytes: &[u8]) -> Result<Vec<Rect>, GridError> {
    Ok(serde_json::from_slice(bytes)?)
}

fn parse_pgm(bytes: &[u8]) -> Result<(usize, usize, u32, Vec<u32>), GridError> {
    let err = |m: &str| GridError::Pgm(m.to_string());
    let mut pos = 0;
    let mut token = || -> Option<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (pos > start).then(|| String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token().ok_or_else(|| err("missing magic"))?;
    let mut num =
        |what: &str| -> Result<usize, GridError> { token().and_then(|t| t.parse().ok()).ok_or_else(|| err(what)) };
    let width = num("width")?;
    let height = num("height")?;
    let maxval = num("maxval")? as u32;
    if maxval == 0 || maxval > 255 {
        return Err(err("only 8-bit images are supported"));
    }
    let n = width * height;
    let pixels = match magic.as_str() {
        "P5" => {
            let start = pos + 1;
            let data = bytes.get(start..start + n).ok_or_else(|| err("truncated raster"))?;
            data.iter().map(|&b| b as u32).collect()
        }
        "P2" => (0..n).map(|_| num("pixel").map(|v| v as u32)).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(err("unsupported magic")),
    };
    Ok((width, height, maxval, pixels))
}

/// Distance from each cell centre to the nearest occupied cell centre.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub origin: Point,
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    dist: Vec<f64>,
    empty: bool,
}

impl DistanceField {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.dist[j * self.width + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.dist
    }

    /// Bilinear interpolation of cell-centre distances; zero inside occupied cells.
    #[inline]
    pub fn interpolate(&self, p: Point) -> f64 {
        if self.empty {
            return f64::INFINITY;
        }
        let u = (p.x - self.origin.x) / self.resolution;
        let v = (p.y - self.origin.y) / self.resolution;
        let (ci, cj) = (u.floor(), v.floor());
        if ci < 0.0 || cj < 0.0 || ci as usize >= self.width || cj as usize >= self.height {
            return 0.0;
        }
        if self.at(ci as usize, cj as usize) == 0.0 {
            return 0.0;
        }
        let (fu, fv) = (u - 0.5, v - 0.5);
        let i0f = fu.floor().max(0.0).min((self.width - 1) as f64);
        let j0f = fv.floor().max(0.0).min((self.height - 1) as f64);
        let (i0, j0) = (i0f as usize, j0f as usize);
        let i1 = (i0 + 1).min(self.width - 1);
        let j1 = (j0 + 1).min(self.height - 1);
        let tx = (fu - i0f).clamp(0.0, 1.0);
        let ty = (fv - j0f).clamp(0.0, 1.0);
        let a = self.at(i0, j0) * (1.0 - tx) + self.at(i1, j0) * tx;
        let b = self.at(i0, j1) * (1.0 - tx) + self.at(i1, j1) * tx;
        a * (1.0 - ty) + b * ty
    }
}

/// Exact Euclidean distance transform (separable lower-envelope algorithm
/// with integer arithmetic).
pub fn distance_field(g: &OccupancyGrid) -> DistanceField {
    let (m, n) = (g.width, g.height);
    let empty = g.occupied_count() == 0;
    let mut out = DistanceField {
        origin: g.origin,
        resolution: g.resolution,
        width: m,
        height: n,
        dist: vec![f64::INFINITY; m * n],
        empty,
    };
    if empty {
        return out;
    }
    let inf = (m + n) as i64;
    // Column pass: vertical distance to the nearest occupied cell.
    let mut col = vec![0i64; m * n];
    for i in 0..m {
        col[i] = if g.is_occupied(i, 0) { 0 } else { inf };
        for j in 1..n {
            col[j * m + i] = if g.is_occupied(i, j) { 0 } else { (col[(j - 1) * m + i] + 1).min(inf) };
        }
        for j in (0..n - 1).rev() {
            let below = col[(j + 1) * m + i];
            if below < col[j * m + i] {
                col[j * m + i] = below + 1;
            }
        }
    }
    // Row pass: lower envelope of parabolas.
    let mut s = vec![0usize; m];
    let mut t = vec![0i64; m];
    for j in 0..n {
        let gv = |i: usize| col[j * m + i];
        let f = |x: i64, i: usize| (x - i as i64) * (x - i as i64) + gv(i) * gv(i);
        let sep = |i: usize, u: usize| {
            let (ii, uu) = (i as i64, u as i64);
            (uu * uu - ii * ii + gv(u) * gv(u) - gv(i) * gv(i)).div_euclid(2 * (uu - ii))
        };
        let mut q: isize = 0;
        s[0] = 0;
        t[0] = 0;
        for u in 1..m {
            while q >= 0 && f(t[q as usize], s[q as usize]) > f(t[q as usize], u) {
                q -= 1;
            }
            if q < 0 {
                q = 0;
                s[0] = u;
            } else {
                let w = 1 + sep(s[q as usize], u);
                if w < m as i64 {
                    q += 1;
                    s[q as usize] = u;
                    t[q as usize] = w;
                }
            }
        }
        for u in (0..m).rev() {
            let d2 = f(u as i64, s[q as usize]);
            out.dist[j * m + u] = (d2 as f64).sqrt() * g.resolution;
            if u as i64 == t[q as usize] {
                q -= 1;
            }
        }
    }
    out
}

/// Set of grid cells, with a cached list of members for sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMask {
    pub origin: Point,
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    member: Vec<bool>,
    cells: Vec<u32>,
}

impl CellMask {
    fn from_bits(g: &OccupancyGrid, member: Vec<bool>) -> Self {
        let cells = member.iter().enumerate().filter(|(_, &m)| m).map(|(k, _)| k as u32).collect();
        Self { origin: g.origin, resolution: g.resolution, width: g.width, height: g.height, member, cells }
    }

    /// Every cell of the grid.
    pub fn full(g: &OccupancyGrid) -> Self {
        Self::from_bits(g, vec![true; g.width * g.height])
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.cells.len() as f64 * self.resolution * self.resolution
    }

    #[inline]
    pub fn contains_cell(&self, i: usize, j: usize) -> bool {
        self.member[j * self.width + i]
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        let u = ((p.x - self.origin.x) / self.resolution).floor();
        let v = ((p.y - self.origin.y) / self.resolution).floor();
        u >= 0.0
            && v >= 0.0
            && (u as usize) < self.width
            && (v as usize) < self.height
            && self.member[v as usize * self.width + u as usize]
    }

    pub fn is_subset_of(&self, other: &CellMask) -> bool {
        self.cells.iter().all(|&k| other.member[k as usize])
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells.iter().map(move |&k| (k as usize % self.width, k as usize / self.width))
    }
}

/// Cells whose centre lies in any of the polygons.
pub fn rasterize(polys: &[&ConvexPolygon<f64>], g: &OccupancyGrid) -> Result<CellMask, GridError> {
    let mut member = vec![false; g.width * g.height];
    for poly in polys {
        let (lo, hi) = poly.bbox();
        let (i0, i1, j0, j1) = g.cell_range(lo, hi);
        for j in j0..j1 {
            for i in i0..i1 {
                let k = g.index(i, j);
                if !member[k] && poly.contains(g.cell_center(i, j)) {
                    member[k] = true;
                }
            }
        }
    }
    let mask = CellMask::from_bits(g, member);
    if mask.is_empty() {
        return Err(GridError::EmptyMask);
    }
    Ok(mask)
}

/// Clearance test for a disc of `radius` at `p`, optionally restricted to a mask.
#[inline]
pub fn is_valid(p: Point, radius: f64, df: &DistanceField, mask: Option<&CellMask>) -> bool {
    let u = ((p.x - df.origin.x) / df.resolution).floor();
    let v = ((p.y - df.origin.y) / df.resolution).floor();
    if !(u >= 0.0 && v >= 0.0 && (u as usize) < df.width && (v as usize) < df.height) {
        return false;
    }
    if let Some(m) = mask {
        if !m.member[v as usize * m.width + u as usize] {
            return false;
        }
    }
    df.interpolate(p) >= radius
}

/// Like [`segment_valid`] but also reports how many point checks ran.
pub fn segment_valid_counted(
    a: Point,
    b: Point,
    radius: f64,
    df: &DistanceField,
    mask: Option<&CellMask>,
) -> (bool, usize) {
    // Fixed endpoint order makes the result independent of direction.
    let (a, b) = if (b.x, b.y) < (a.x, a.y) { (b, a) } else { (a, b) };
    let len = a.dist(b);
    let steps = (len / (df.resolution * 0.5)).ceil() as usize;
    if steps == 0 {
        return (is_valid(a, radius, df, mask), 1);
    }
    // Endpoints first: most rejections happen there.
    if !is_valid(b, radius, df, mask) {
        return (false, 1);
    }
    if !is_valid(a, radius, df, mask) {
        return (false, 2);
    }
    let inv = 1.0 / steps as f64;
    for k in 1..steps {
        if !is_valid(a.lerp(b, k as f64 * inv), radius, df, mask) {
            return (false, k + 2);
        }
    }
    (true, steps + 1)
}

/// True when samples spaced at most half a cell apart along `[a, b]`
/// (endpoints included) are all valid.
pub fn segment_valid(a: Point, b: Point, radius: f64, df: &DistanceField, mask: Option<&CellMask>) -> bool {
    segment_valid_counted(a, b, radius, df, mask).0
}

/// Uniform point in the mask: a uniformly chosen member cell, jittered
/// uniformly within the cell.
pub fn sample(mask: &CellMask, rng: &mut PortableRng) -> Result<Point, GridError> {
    if mask.is_empty() {
        return Err(GridError::EmptyMask);
    }
    Ok(sample_unchecked(mask, rng))
}

#[inline]
pub(crate) fn sample_unchecked(mask: &CellMask, rng: &mut PortableRng) -> Point {
    let k = mask.cells[rng.below(mask.cells.len())] as usize;
    let (i, j) = (k % mask.width, k / mask.width);
    let jx = rng.next_f64().min(1.0 - 1e-9);
    let jy = rng.next_f64().min(1.0 - 1e-9);
    Point::new(mask.origin.x + (i as f64 + jx) * mask.resolution, mask.origin.y + (j as f64 + jy) * mask.resolution)
}
