//! Bucket-grid spatial index for nearest-neighbour and radius queries.

use crate::geometry::Point2;

type Point = Point2<f64>;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct SpatialHash {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<(u32, Point)>>,
    items: Vec<(u32, Point)>,
    slot: Vec<u32>,
}

impl SpatialHash {
    pub fn new(lo: Point, hi: Point, cell: f64) -> Self {
        let nx = (((hi.x - lo.x) / cell).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / cell).ceil() as usize).max(1);
        Self { origin: lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny], items: Vec::new(), slot: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.slot.get(id as usize).map_or(false, |&s| s != NONE)
    }

    pub fn items(&self) -> &[(u32, Point)] {
        &self.items
    }

    fn bucket_coords(&self, p: Point) -> (usize, usize) {
        let i = ((p.x - self.origin.x) / self.cell).floor().max(0.0) as usize;
        let j = ((p.y - self.origin.y) / self.cell).floor().max(0.0) as usize;
        (i.min(self.nx - 1), j.min(self.ny - 1))
    }

    pub fn insert(&mut self, id: u32, p: Point) {
        let (i, j) = self.bucket_coords(p);
        self.buckets[j * self.nx + i].push((id, p));
        if self.slot.len() <= id as usize {
            self.slot.resize(id as usize + 1, NONE);
        }
        self.slot[id as usize] = self.items.len() as u32;
        self.items.push((id, p));
    }

    pub fn remove(&mut self, id: u32) {
        let s = self.slot[id as usize];
        if s == NONE {
            return;
        }
        let (_, p) = self.items.swap_remove(s as usize);
        if let Some(&(moved, _)) = self.items.get(s as usize) {
            self.slot[moved as usize] = s;
        }
        self.slot[id as usize] = NONE;
        let (i, j) = self.bucket_coords(p);
        let b = &mut self.buckets[j * self.nx + i];
        if let Some(k) = b.iter().position(|&(x, _)| x == id) {
            b.swap_remove(k);
        }
    }

    /// Ids within distance `r` of `p`, sorted by id. Returns the number of
    /// candidates examined.
    pub fn within(&self, p: Point, r: f64, out: &mut Vec<u32>) -> usize {
        out.clear();
        let r2 = r * r;
        let span_x = if r.is_finite() { (r / self.cell).ceil() as usize + 1 } else { usize::MAX };
        let span_y = span_x;
        let buckets = span_x.saturating_mul(2).saturating_mul(span_y.saturating_mul(2));
        let examined;
        if buckets >= self.items.len() {
            for &(id, q) in &self.items {
                if (q - p).dot(q - p) <= r2 {
                    out.push(id);
                }
            }
            examined = self.items.len();
        } else {
            let (ci, cj) = self.bucket_coords(p);
            let (i0, i1) = (ci.saturating_sub(span_x), (ci + span_x).min(self.nx - 1));
            let (j0, j1) = (cj.saturating_sub(span_y), (cj + span_y).min(self.ny - 1));
            let mut n = 0;
            for j in j0..=j1 {
                for b in &self.buckets[j * self.nx + i0..=j * self.nx + i1] {
                    n += b.len();
                    for &(id, q) in b {
                        if (q - p).dot(q - p) <= r2 {
                            out.push(id);
                        }
                    }
                }
            }
            examined = n;
        }
        out.sort_unstable();
        examined
    }

    /// Nearest item (ties by smallest id) and the number of candidates examined.
    pub fn nearest(&self, p: Point) -> Option<(u32, usize)> {
        if self.items.is_empty() {
            return None;
        }
        let better = |d: f64, id: u32, best: Option<(f64, u32)>| match best {
            None => true,
            Some((bd, bid)) => d < bd || (d == bd && id < bid),
        };
        if self.items.len() <= 32 {
            let mut best = None;
            for &(id, q) in &self.items {
                let d = (q - p).dot(q - p);
                if better(d, id, best) {
                    best = Some((d, id));
                }
            }
            return best.map(|(_, id)| (id, self.items.len()));
        }
        let (ci, cj) = self.bucket_coords(p);
        let mut best: Option<(f64, u32)> = None;
        let mut examined = 0;
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            if let Some((bd, _)) = best {
                // Every bucket in this ring is at least (ring - 1) cells away.
                let gap = (ring as f64 - 1.0) * self.cell;
                if gap > 0.0 && gap * gap > bd {
                    break;
                }
            }
            let (i0, i1) = (ci as isize - ring as isize, ci as isize + ring as isize);
            let (j0, j1) = (cj as isize - ring as isize, cj as isize + ring as isize);
            for j in j0..=j1 {
                if j < 0 || j >= self.ny as isize {
                    continue;
                }
                let edge_row = j == j0 || j == j1;
                let mut i = i0;
                while i <= i1 {
                    if i >= 0 && i < self.nx as isize {
                        let b = &self.buckets[j as usize * self.nx + i as usize];
                        examined += b.len();
                        for &(id, q) in b {
                            let d = (q - p).dot(q - p);
                            if better(d, id, best) {
                                best = Some((d, id));
                            }
                        }
                    }
                    i += if edge_row || i == i1 { 1 } else { i1 - i0 };
                }
            }
        }
        best.map(|(_, id)| (id, examined))
    }
}
