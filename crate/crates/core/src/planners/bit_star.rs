use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::nn::SpatialHash;
use super::{Anytime, Ctx, Key, PlannerConfig, Point};

const NO_PARENT: u32 = u32::MAX;
const START: u32 = 0;
const GOAL: u32 = 1;
/// Rejection-sampling attempts allowed per requested sample.
const MAX_ATTEMPTS: usize = 64;

type EdgeEntry = Reverse<(Key, Key, u32, u32)>;

/// Batch Informed Trees: batches of informed samples searched in order of
/// estimated solution cost, with lazily validated edges.
pub(crate) struct BitStar {
    pts: Vec<Point>,
    in_tree: Vec<bool>,
    g: Vec<f64>,
    parent: Vec<u32>,
    children: Vec<Vec<u32>>,
    old: Vec<bool>,
    expanded_g: Vec<f64>,
    samples: SpatialHash,
    verts: SpatialHash,
    qv: BinaryHeap<Reverse<(Key, u32)>>,
    qe: BinaryHeap<EdgeEntry>,
    c_best: f64,
    c_min: f64,
    pruned_at: f64,
    radius: f64,
    gamma: f64,
    batch_size: usize,
    exhausted: bool,
    near: Vec<u32>,
}

impl BitStar {
    pub fn new(cx: &mut Ctx, cfg: &PlannerConfig) -> Self {
        let (lo, hi) = cx.bounds();
        let mut s = Self {
            pts: Vec::new(),
            in_tree: Vec::new(),
            g: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
            old: Vec::new(),
            expanded_g: Vec::new(),
            samples: SpatialHash::new(lo, hi, 0.5),
            verts: SpatialHash::new(lo, hi, 0.5),
            qv: BinaryHeap::new(),
            qe: BinaryHeap::new(),
            c_best: f64::INFINITY,
            c_min: cx.start.dist(cx.goal),
            pruned_at: f64::INFINITY,
            radius: f64::INFINITY,
            gamma: cx.gamma(cfg.rewire_gamma),
            batch_size: cfg.batch_size.max(1),
            exhausted: false,
            near: Vec::new(),
        };
        let start = s.push_point(cx.start);
        s.in_tree[start as usize] = true;
        s.g[start as usize] = 0.0;
        s.verts.insert(start, cx.start);
        let goal = s.push_point(cx.goal);
        s.samples.insert(goal, cx.goal);
        // Batch zero: the goal is the only sample and the radius is unbounded,
        // so the first edge examined is the straight line.
        s.qv.push(Reverse((Key(s.h(START)), START)));
        s
    }

    fn push_point(&mut self, p: Point) -> u32 {
        let id = self.pts.len() as u32;
        self.pts.push(p);
        self.in_tree.push(false);
        self.g.push(f64::INFINITY);
        self.parent.push(NO_PARENT);
        self.children.push(Vec::new());
        self.old.push(false);
        self.expanded_g.push(f64::INFINITY);
        id
    }

    #[inline]
    fn h(&self, v: u32) -> f64 {
        self.pts[v as usize].dist(self.pts[GOAL as usize])
    }

    #[inline]
    fn g_hat(&self, v: u32) -> f64 {
        self.pts[v as usize].dist(self.pts[START as usize])
    }

    #[inline]
    fn c_hat(&self, a: u32, b: u32) -> f64 {
        self.pts[a as usize].dist(self.pts[b as usize])
    }

    fn vertex_key(&self) -> f64 {
        self.qv.peek().map_or(f64::INFINITY, |Reverse((k, _))| k.0)
    }

    fn edge_key(&self) -> f64 {
        self.qe.peek().map_or(f64::INFINITY, |Reverse((k, ..))| k.0)
    }

    fn push_edge(&mut self, v: u32, x: u32) {
        let gc = self.g[v as usize] + self.c_hat(v, x);
        self.qe.push(Reverse((Key(gc + self.h(x)), Key(gc), v, x)));
    }

    fn new_batch(&mut self, cx: &mut Ctx) {
        if self.c_best < self.pruned_at {
            self.pruned_at = self.c_best;
            let doomed: Vec<u32> = self
                .samples
                .items()
                .iter()
                .map(|&(id, _)| id)
                .filter(|&id| self.g_hat(id) + self.h(id) >= self.c_best)
                .collect();
            cx.charge_graph(self.samples.len());
            for id in doomed {
                self.samples.remove(id);
            }
        }
        let mut added = 0;
        let mut attempts = 0;
        while added < self.batch_size && attempts < self.batch_size * MAX_ATTEMPTS {
            attempts += 1;
            let Some(p) = self.informed_sample(cx) else { continue };
            if !cx.point_ok(p) {
                continue;
            }
            let id = self.push_point(p);
            self.samples.insert(id, p);
            added += 1;
        }
        if added == 0 {
            self.exhausted = true;
            return;
        }
        let q = (self.samples.len() + self.verts.len()) as f64;
        self.radius = self.gamma * (q.ln() / q).sqrt();
        self.qe.clear();
        self.qv.clear();
        let verts: Vec<u32> = self.verts.items().iter().map(|&(id, _)| id).collect();
        for v in verts {
            self.old[v as usize] = true;
            self.expanded_g[v as usize] = f64::INFINITY;
            self.qv.push(Reverse((Key(self.g[v as usize] + self.h(v)), v)));
        }
        cx.charge_graph(self.verts.len());
    }

    /// Uniform sample from the region, or from its intersection with the
    /// informed ellipse once a solution exists.
    fn informed_sample(&mut self, cx: &mut Ctx) -> Option<Point> {
        if !self.c_best.is_finite() {
            return Some(cx.sample());
        }
        let (s, g) = (cx.start, cx.goal);
        let a = self.c_best / 2.0;
        let c = self.c_min / 2.0;
        let b = (a * a - c * c).max(0.0).sqrt();
        if std::f64::consts::PI * a * b < cx.measure {
            // Uniform point in the unit disc by rejection from the square.
            let (mut u, mut v);
            loop {
                u = 2.0 * cx.rng.next_f64() - 1.0;
                v = 2.0 * cx.rng.next_f64() - 1.0;
                if u * u + v * v <= 1.0 {
                    break;
                }
            }
            cx.stats.samples += 1;
            cx.meter.charge(crate::clock::cost::SAMPLE);
            let center = (s + g) * 0.5;
            let axis = if self.c_min > 0.0 { (g - s) * (1.0 / self.c_min) } else { Point::new(1.0, 0.0) };
            let p = center + axis * (a * u) + axis.perp() * (b * v);
            cx.in_mask(p).then_some(p)
        } else {
            let p = cx.sample();
            (p.dist(s) + p.dist(g) <= self.c_best).then_some(p)
        }
    }

    fn expand_vertex(&mut self, cx: &mut Ctx) {
        let Reverse((_, v)) = self.qv.pop().expect("non-empty vertex queue");
        cx.charge_graph(1);
        let gv = self.g[v as usize];
        if gv >= self.expanded_g[v as usize] {
            return;
        }
        self.expanded_g[v as usize] = gv;
        let pv = self.pts[v as usize];

        let examined = self.samples.within(pv, self.radius, &mut self.near);
        cx.charge_nn(examined);
        let near = std::mem::take(&mut self.near);
        for &x in &near {
            if self.g_hat(v) + self.c_hat(v, x) + self.h(x) < self.c_best {
                self.push_edge(v, x);
                cx.charge_graph(1);
            }
        }
        self.near = near;

        if !self.old[v as usize] {
            let examined = self.verts.within(pv, self.radius, &mut self.near);
            cx.charge_nn(examined);
            let near = std::mem::take(&mut self.near);
            for &w in &near {
                if w == v || self.parent[v as usize] == w || self.parent[w as usize] == v {
                    continue;
                }
                let c = self.c_hat(v, w);
                if self.g_hat(v) + c + self.h(w) < self.c_best && gv + c < self.g[w as usize] {
                    self.push_edge(v, w);
                    cx.charge_graph(1);
                }
            }
            self.near = near;
        }
    }

    fn process_edge(&mut self, cx: &mut Ctx) {
        let Reverse((_, _, v, x)) = self.qe.pop().expect("non-empty edge queue");
        cx.charge_graph(1);
        let c_hat = self.c_hat(v, x);
        let gv = self.g[v as usize];
        if gv + c_hat + self.h(x) >= self.c_best {
            self.qe.clear();
            self.qv.clear();
            return;
        }
        if gv + c_hat >= self.g[x as usize] {
            return;
        }
        if !self.in_tree[x as usize] && !self.samples.contains(x) {
            return;
        }
        if self.g_hat(v) + c_hat + self.h(x) >= self.c_best {
            return;
        }
        if !cx.edge_ok(self.pts[v as usize], self.pts[x as usize]) {
            return;
        }
        let new_g = gv + c_hat;
        if self.in_tree[x as usize] {
            let old = self.parent[x as usize];
            if old != NO_PARENT {
                let sib = &mut self.children[old as usize];
                if let Some(k) = sib.iter().position(|&c| c == x) {
                    sib.swap_remove(k);
                }
            }
            let delta = new_g - self.g[x as usize];
            let mut stack = vec![x];
            while let Some(n) = stack.pop() {
                self.g[n as usize] += delta;
                stack.extend_from_slice(&self.children[n as usize]);
            }
        } else {
            self.samples.remove(x);
            self.verts.insert(x, self.pts[x as usize]);
            self.in_tree[x as usize] = true;
            self.g[x as usize] = new_g;
        }
        self.parent[x as usize] = v;
        self.children[v as usize].push(x);
        self.qv.push(Reverse((Key(self.g[x as usize] + self.h(x)), x)));
        cx.charge_graph(3);

        let g_goal = self.g[GOAL as usize];
        if g_goal < self.c_best {
            self.c_best = g_goal;
            cx.record(g_goal);
        }
    }
}

impl Anytime for BitStar {
    fn step(&mut self, cx: &mut Ctx) -> bool {
        if self.c_best <= self.c_min * (1.0 + 1e-9) || self.exhausted {
            return false;
        }
        if self.qv.is_empty() && self.qe.is_empty() {
            self.new_batch(cx);
        } else if self.vertex_key() <= self.edge_key() {
            self.expand_vertex(cx);
        } else {
            self.process_edge(cx);
        }
        !(self.c_best <= self.c_min * (1.0 + 1e-9) || self.exhausted)
    }

    fn best(&self) -> Option<Vec<Point>> {
        if !self.in_tree[GOAL as usize] {
            return None;
        }
        let mut out = vec![self.pts[GOAL as usize]];
        let mut n = GOAL;
        while self.parent[n as usize] != NO_PARENT {
            n = self.parent[n as usize];
            out.push(self.pts[n as usize]);
        }
        out.reverse();
        Some(out)
    }
}
