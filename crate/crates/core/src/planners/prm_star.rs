use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::nn::SpatialHash;
use super::{Anytime, Ctx, Key, PlannerConfig, Point};

/// Samples between two shortest-path extractions.
pub const EXTRACT_INTERVAL: usize = 256;
const NONE: u32 = u32::MAX;
const START: u32 = 0;
const GOAL: u32 = 1;

/// Incremental r-disc roadmap with single-source shortest paths from the
/// start maintained under edge insertions.
pub(crate) struct PrmStar {
    pts: Vec<Point>,
    adj: Vec<Vec<(u32, f64)>>,
    dist: Vec<f64>,
    pred: Vec<u32>,
    nn: SpatialHash,
    gamma: f64,
    since_extract: usize,
    extracted: f64,
    near: Vec<u32>,
    heap: BinaryHeap<Reverse<(Key, u32)>>,
}

impl PrmStar {
    pub fn new(cx: &mut Ctx, cfg: &PlannerConfig) -> Self {
        let (lo, hi) = cx.bounds();
        let mut s = Self {
            pts: Vec::new(),
            adj: Vec::new(),
            dist: Vec::new(),
            pred: Vec::new(),
            nn: SpatialHash::new(lo, hi, 0.5),
            gamma: cx.gamma(cfg.rewire_gamma),
            since_extract: 0,
            extracted: f64::INFINITY,
            near: Vec::new(),
            heap: BinaryHeap::new(),
        };
        s.insert(cx, cx.start);
        s.dist[START as usize] = 0.0;
        s.insert(cx, cx.goal);
        s.extract(cx);
        s
    }

    fn insert(&mut self, cx: &mut Ctx, x: Point) {
        let v = self.pts.len() as u32;
        let n = (self.pts.len() + 1) as f64;
        let r = if n < 3.0 { f64::INFINITY } else { self.gamma * (n.ln() / n).sqrt() };
        let examined = self.nn.within(x, r, &mut self.near);
        cx.charge_nn(examined);
        self.pts.push(x);
        self.adj.push(Vec::new());
        self.dist.push(f64::INFINITY);
        self.pred.push(NONE);
        self.nn.insert(v, x);
        let near = std::mem::take(&mut self.near);
        for &u in &near {
            let pu = self.pts[u as usize];
            if cx.edge_ok(pu, x) {
                let w = pu.dist(x);
                self.adj[u as usize].push((v, w));
                self.adj[v as usize].push((u, w));
                cx.charge_graph(1);
                let via = self.dist[u as usize] + w;
                if via < self.dist[v as usize] {
                    self.dist[v as usize] = via;
                    self.pred[v as usize] = u;
                }
            }
        }
        self.near = near;
        if self.dist[v as usize].is_finite() {
            self.propagate(cx, v);
        }
    }

    /// Dijkstra-style relaxation outward from a vertex whose distance dropped.
    fn propagate(&mut self, cx: &mut Ctx, from: u32) {
        self.heap.clear();
        self.heap.push(Reverse((Key(self.dist[from as usize]), from)));
        let mut ops = 0;
        while let Some(Reverse((Key(d), u))) = self.heap.pop() {
            ops += 1;
            if d > self.dist[u as usize] {
                continue;
            }
            for &(w, len) in &self.adj[u as usize] {
                let nd = d + len;
                ops += 1;
                if nd < self.dist[w as usize] {
                    self.dist[w as usize] = nd;
                    self.pred[w as usize] = u;
                    self.heap.push(Reverse((Key(nd), w)));
                }
            }
        }
        cx.charge_graph(ops);
    }

    fn extract(&mut self, cx: &mut Ctx) {
        let d = self.dist[GOAL as usize];
        if d < self.extracted {
            self.extracted = d;
            let hops = self.best().map_or(0, |p| p.len());
            cx.charge_graph(hops);
            cx.record(d);
        }
    }
}

impl Anytime for PrmStar {
    fn step(&mut self, cx: &mut Ctx) -> bool {
        let x = cx.sample();
        if cx.point_ok(x) {
            self.insert(cx, x);
        }
        self.since_extract += 1;
        if self.since_extract >= EXTRACT_INTERVAL {
            self.since_extract = 0;
            self.extract(cx);
        }
        true
    }

    fn best(&self) -> Option<Vec<Point>> {
        if !self.dist[GOAL as usize].is_finite() {
            return None;
        }
        let mut out = vec![self.pts[GOAL as usize]];
        let mut n = GOAL;
        while n != START {
            n = self.pred[n as usize];
            out.push(self.pts[n as usize]);
        }
        out.reverse();
        Some(out)
    }
}
