use super::nn::SpatialHash;
use super::{Anytime, Ctx, PlannerConfig, Point};

const NO_PARENT: u32 = u32::MAX;

pub(crate) struct RrtStar {
    pts: Vec<Point>,
    parent: Vec<u32>,
    cost: Vec<f64>,
    children: Vec<Vec<u32>>,
    nn: SpatialHash,
    goal_idx: Option<u32>,
    best: f64,
    steer: f64,
    gamma: f64,
    goal_bias: f64,
    near: Vec<u32>,
    ranked: Vec<(f64, u32)>,
    checked: Vec<(u32, bool)>,
}

impl RrtStar {
    pub fn new(cx: &mut Ctx, cfg: &PlannerConfig) -> Self {
        let (lo, hi) = cx.bounds();
        let mut nn = SpatialHash::new(lo, hi, cfg.steer_step.max(0.25) * 0.5);
        nn.insert(0, cx.start);
        Self {
            pts: vec![cx.start],
            parent: vec![NO_PARENT],
            cost: vec![0.0],
            children: vec![Vec::new()],
            nn,
            goal_idx: None,
            best: f64::INFINITY,
            steer: cfg.steer_step,
            gamma: cx.gamma(cfg.rewire_gamma),
            goal_bias: cfg.goal_bias,
            near: Vec::new(),
            ranked: Vec::new(),
            checked: Vec::new(),
        }
    }

    fn reparent(&mut self, node: u32, new_parent: u32, new_cost: f64) {
        let old = self.parent[node as usize];
        if old != NO_PARENT {
            let siblings = &mut self.children[old as usize];
            if let Some(k) = siblings.iter().position(|&c| c == node) {
                siblings.swap_remove(k);
            }
        }
        self.parent[node as usize] = new_parent;
        self.children[new_parent as usize].push(node);
        let delta = new_cost - self.cost[node as usize];
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            self.cost[n as usize] += delta;
            stack.extend_from_slice(&self.children[n as usize]);
        }
    }
}

impl Anytime for RrtStar {
    fn step(&mut self, cx: &mut Ctx) -> bool {
        let x_rand = if self.goal_idx.is_none() && cx.rng.chance(self.goal_bias) { cx.goal } else { cx.sample() };
        let (nearest, examined) = self.nn.nearest(x_rand).expect("tree holds the start");
        cx.charge_nn(examined);
        let x_near = self.pts[nearest as usize];
        let d = x_near.dist(x_rand);
        if d == 0.0 {
            return true;
        }
        let x_new = if d <= self.steer { x_rand } else { x_near + (x_rand - x_near) * (self.steer / d) };
        if !cx.point_ok(x_new) {
            return true;
        }

        let n = (self.pts.len() + 1) as f64;
        let r = self.steer.min(self.gamma * (n.ln() / n).sqrt());
        let examined = self.nn.within(x_new, r, &mut self.near);
        cx.charge_nn(examined);
        if !self.near.contains(&nearest) {
            self.near.push(nearest);
        }

        // Choose the cheapest collision-free parent.
        self.ranked.clear();
        for &i in &self.near {
            self.ranked.push((self.cost[i as usize] + self.pts[i as usize].dist(x_new), i));
        }
        self.ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        cx.charge_graph(self.ranked.len());
        self.checked.clear();
        let mut chosen = None;
        for &(c, i) in &self.ranked {
            let ok = cx.edge_ok(self.pts[i as usize], x_new);
            self.checked.push((i, ok));
            if ok {
                chosen = Some((c, i));
                break;
            }
        }
        let Some((c_new, parent)) = chosen else { return true };

        let id = self.pts.len() as u32;
        self.pts.push(x_new);
        self.parent.push(NO_PARENT);
        self.cost.push(c_new);
        self.children.push(Vec::new());
        self.parent[id as usize] = parent;
        self.children[parent as usize].push(id);
        self.nn.insert(id, x_new);
        cx.charge_graph(2);
        if x_new == cx.goal {
            self.goal_idx = Some(id);
        }

        // Rewire neighbours through the new node.
        for k in 0..self.near.len() {
            let i = self.near[k];
            if i == parent {
                continue;
            }
            let c = c_new + x_new.dist(self.pts[i as usize]);
            if c >= self.cost[i as usize] {
                continue;
            }
            let ok = match self.checked.iter().find(|(j, _)| *j == i) {
                Some(&(_, ok)) => ok,
                None => cx.edge_ok(x_new, self.pts[i as usize]),
            };
            if ok {
                self.reparent(i, id, c);
                cx.charge_graph(2);
            }
        }

        if let Some(g) = self.goal_idx {
            let c = self.cost[g as usize];
            if c < self.best {
                self.best = c;
                cx.record(c);
            }
        }
        true
    }

    fn best(&self) -> Option<Vec<Point>> {
        let g = self.goal_idx?;
        let mut out = vec![self.pts[g as usize]];
        let mut n = g;
        while self.parent[n as usize] != NO_PARENT {
            n = self.parent[n as usize];
            out.push(self.pts[n as usize]);
        }
        out.reverse();
        Some(out)
    }
}
