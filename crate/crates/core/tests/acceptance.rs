//! Acceptance gate. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line each and exits non-zero if any fails.
//!
//! `SPATH_ACCEPT_TRIALS` and `SPATH_ACCEPT_POINTS` override the sweep size
//! (defaults 30 and 12).

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use spath::bench::{
    efficiency, run_scenario, spearman, speedup, sweep, write_report, BenchConfig, EfficiencyInput, SuccessCurve,
    SweepParams, Ttp95,
};
use spath::decompose::merge_by;
use spath::envgen::{build_floor, generate, DoorSpec, EnvSource, FloorSpec, RectRoom, Scenario, ScenarioQuery};
use spath::geometry::ConvexPolygon;
use spath::gridmap::{distance_field, rasterize, CellMask, OccupancyGrid};
use spath::pipeline::{replan, run, setup, Endpoint, Environment, Mode, Query, SolutionCache};
use spath::planners::{plan, PlannerConfig, PlannerKind, Workspace};
use spath::rng::PortableRng;
use spath::scenegraph::{euclid3, EdgeWeight, NodeKind, SemanticGraph, SemanticNode};
use spath::semantic::{astar, SemanticError};
use spath::Point;

const RADIUS: f64 = 0.3;

fn env_usize(name: &str, default: usize) -> usize {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn ttp_value(t: Ttp95<f64>) -> f64 {
    t.finite().unwrap_or(f64::INFINITY)
}

fn ms(t: Ttp95<f64>) -> String {
    format!("{} ms", t.to_ms_string())
}

// ---------------------------------------------------------------------------
// Criteria 1 to 3: sweeps on a generated six-room corridor floor.

struct Floor {
    env: Environment,
    start: Endpoint,
    goal: Endpoint,
    params: SweepParams,
    curves: HashMap<(u64, PlannerKind, Mode), (SuccessCurve, f64)>,
}

impl Floor {
    fn new() -> Self {
        let (sg, grid) = generate(&FloorSpec::six_room_corridor(1)).expect("floor");
        let env = setup(sg, grid).expect("setup");
        // Top-left office to bottom-right office.
        let pick = |top: bool, left: bool| {
            let mut offices: Vec<_> = env.scene_graph.rooms.values().filter(|r| r.id.starts_with('R')).collect();
            offices.sort_by(|a, b| {
                let ka = (
                    if top { -a.centroid[1] } else { a.centroid[1] },
                    if left { a.centroid[0] } else { -a.centroid[0] },
                );
                let kb = (
                    if top { -b.centroid[1] } else { b.centroid[1] },
                    if left { b.centroid[0] } else { -b.centroid[0] },
                );
                ka.partial_cmp(&kb).unwrap()
            });
            Endpoint::Room(offices[0].id.clone())
        };
        let (start, goal) = (pick(true, true), pick(false, false));
        let params = SweepParams {
            trials: env_usize("SPATH_ACCEPT_TRIALS", 30),
            points: env_usize("SPATH_ACCEPT_POINTS", 12),
            ttp_min: 0.001,
            ttp_max: 6.0,
            seed: 1,
        };
        Self { env, start, goal, params, curves: HashMap::new() }
    }

    fn curve(&mut self, seed: u64, planner: PlannerKind, mode: Mode) -> &(SuccessCurve, f64) {
        if !self.curves.contains_key(&(seed, planner, mode)) {
            let t = Instant::now();
            let p = SweepParams { seed, ..self.params.clone() };
            let c = sweep(&self.env, &self.start, &self.goal, mode, &PlannerConfig::new(planner), &p).expect("sweep");
            self.curves.insert((seed, planner, mode), (c, t.elapsed().as_secs_f64()));
        }
        &self.curves[&(seed, planner, mode)]
    }
}

fn criterion_1(f: &mut Floor) -> Outcome {
    let mut details = Vec::new();
    let mut all_le = true;
    let mut best_ratio: f64 = 0.0;
    let mut seconds = 0.0;
    for planner in [PlannerKind::PrmStar, PlannerKind::BitStar] {
        let (c1, s1) = f.curve(1, planner, Mode::Baseline).clone();
        let (c2, s2) = f.curve(1, planner, Mode::Restricted).clone();
        seconds += s1 + s2;
        let (t1, t2) = (c1.ttp95(), c2.ttp95());
        let ratio = ttp_value(t1) / ttp_value(t2);
        all_le &= ttp_value(t2) <= ttp_value(t1);
        best_ratio = best_ratio.max(ratio);
        details.push(format!("{}: I {} / II {} = {:.2}", planner.name(), ms(t1), ms(t2), ratio));
    }
    let pass = all_le && best_ratio >= 1.5 && seconds <= 600.0;
    outcome(pass, format!("{}; sweeps took {:.0} s", details.join(", "), seconds))
}

fn eta_bars(f: &mut Floor, seed: u64, planner: PlannerKind) -> (Vec<Option<f64>>, Vec<Ttp95<f64>>) {
    let modes = [Mode::Baseline, Mode::Restricted, Mode::SpathSeq];
    let inputs: Vec<EfficiencyInput<f64>> = modes
        .iter()
        .map(|&m| {
            let c = &f.curve(seed, planner, m).0;
            EfficiencyInput { ablation: m.label().to_string(), ttp95: c.ttp95(), l95: c.l95(), l_conv: c.l_conv() }
        })
        .collect();
    let ttps = inputs.iter().map(|i| i.ttp95).collect();
    match efficiency(&inputs) {
        Ok(rows) => (rows.iter().map(|r| r.eta_bar).collect(), ttps),
        Err(_) => (vec![None; 3], ttps),
    }
}

fn criterion_2(f: &mut Floor) -> Outcome {
    let mut held = 0;
    let mut details = Vec::new();
    for seed in 1..=3 {
        let (eta, t) = eta_bars(f, seed, PlannerKind::PrmStar);
        let (e2, e3) = (eta[1].unwrap_or(f64::NAN), eta[2].unwrap_or(f64::NAN));
        let ok = ttp_value(t[2]) <= ttp_value(t[1]) && e3 > e2 && e2 > 1.0;
        held += ok as usize;
        details.push(format!(
            "seed {seed}: ttp95 II {} S-Path(s) {}, eta_bar II {e2:.2} S-Path(s) {e3:.2} [{}]",
            ms(t[1]),
            ms(t[2]),
            if ok { "holds" } else { "fails" }
        ));
    }
    outcome(held >= 2, format!("{held}/3 seeds; {}", details.join("; ")))
}

fn criterion_3(f: &mut Floor) -> Outcome {
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut ok = true;
    let mut details = Vec::new();
    let runs =
        [(1, PlannerKind::PrmStar), (2, PlannerKind::PrmStar), (3, PlannerKind::PrmStar), (1, PlannerKind::BitStar)];
    for (seed, planner) in runs {
        let l_conv = f.curve(seed, planner, Mode::Baseline).0.l_conv();
        let l95 = f.curve(seed, planner, Mode::SpathSeq).0.l95();
        match (l95, l_conv) {
            (Some(a), Some(b)) => {
                let d = a / b - 1.0;
                worst = worst.max(d);
                ok &= d <= 0.16;
                details.push(format!("{} seed {seed}: {:+.1}%", planner.name(), 100.0 * d));
            }
            _ => {
                ok = false;
                details.push(format!("{} seed {seed}: missing length", planner.name()));
            }
        }
    }
    outcome(ok, format!("worst {:+.1}% (limit +16%); {}", 100.0 * worst, details.join(", ")))
}

// ---------------------------------------------------------------------------
// Criterion 4: parallel speedup on a chain of identical empty rooms.

fn chain_floor(n: usize) -> Environment {
    let (w, h) = (5.0, 4.0);
    let rooms: Vec<RectRoom> = (0..n)
        .map(|i| {
            let x = i as f64 * (w + 0.2);
            RectRoom::new(format!("K{i}"), (x, 0.0), (x + w, h))
        })
        .collect();
    let doors: Vec<DoorSpec> = (0..n - 1)
        .map(|i| DoorSpec {
            id: format!("E{i}"),
            a: i,
            b: i + 1,
            center: Point::new(rooms[i].hi.x + 0.1, h / 2.0),
            width: 1.4,
        })
        .collect();
    let (sg, grid) = build_floor(&rooms, &doors, &[], 0.2, 0.05).expect("chain");
    setup(sg, grid).expect("setup")
}

/// Query spanning rooms `first..first + k` from near the left wall of the
/// first room to near the right wall of the last.
fn chain_query(env: &Environment, first: usize, k: usize, y: f64) -> (String, Endpoint, Endpoint) {
    let lo = env.contours.rooms[&format!("K{first}")].bbox().0;
    let hi = env.contours.rooms[&format!("K{}", first + k - 1)].bbox().1;
    (format!("K{first}+{k}"), Endpoint::Point(Point::new(lo.x + 0.5, y)), Endpoint::Point(Point::new(hi.x - 0.5, y)))
}

fn criterion_4() -> Outcome {
    let env = chain_floor(8);
    let workers = 8;
    let mut details = Vec::new();
    let mut ok = true;
    for (k, need) in [(2, 1.5), (4, 2.5), (8, 4.0)] {
        let q = chain_query(&env, 0, k, 2.0);
        let rows = speedup(&env, &[q], 1.0, PlannerKind::PrmStar, workers, 3).expect("speedup");
        let r = &rows[0];
        ok &= r.subproblems == k && r.speedup >= need;
        details.push(format!("{} legs: {:.2}x (need {need})", r.subproblems, r.speedup));
    }
    let mut rng = PortableRng::new(2024);
    let queries: Vec<_> = (0..20)
        .map(|_| {
            let k = 1 + rng.below(8);
            let first = rng.below(8 - k + 1);
            chain_query(&env, first, k, rng.range(1.0, 3.0))
        })
        .collect();
    let rows = speedup(&env, &queries, 1.0, PlannerKind::PrmStar, workers, 5).expect("speedup");
    let ks: Vec<f64> = rows.iter().map(|r| r.subproblems as f64).collect();
    let sp: Vec<f64> = rows.iter().map(|r| r.speedup).collect();
    let rho = spearman(&ks, &sp);
    ok &= rho > 0.8;
    for r in rows.iter().filter(|r| r.subproblems == 1) {
        ok &= r.speedup <= 1.2 && r.speedup >= 1.0 / 1.2;
    }
    outcome(ok, format!("{}; Spearman over 20 queries {rho:.3} (need > 0.8)", details.join(", ")))
}

// ---------------------------------------------------------------------------
// Criterion 5: replanning reuse on a large office floor.

fn criterion_5() -> Outcome {
    let (sg, grid) = generate(&FloorSpec::large_office(1)).expect("floor");
    let env = setup(sg, grid).expect("setup");
    let pairs = [("R3_0", "R0_6"), ("R0_0", "R3_11"), ("R1_2", "R2_9"), ("R3_1", "R0_10")];
    for (s, g) in pairs {
        let q =
            Query::new(Endpoint::Room(s.into()), Endpoint::Room(g.into()), 1.0, Mode::SpathSeq, PlannerKind::PrmStar)
                .with_seed(7);
        let probe = run(&env, &q, &SolutionCache::new()).expect("plan");
        let doors: Vec<String> = probe.semantic_path.as_ref().expect("semantic").doorways().map(String::from).collect();
        for d in doors {
            let cache = SolutionCache::new();
            let first = run(&env, &q, &cache).expect("plan");
            let Ok((env2, second)) = replan(&env, &d, &first, &cache) else { continue };
            if second.cache_hits == 0 || !first.success || !second.success {
                continue;
            }
            let cached_ok = second.legs.iter().all(|l| !l.cache_hit || l.stats == l.path.as_ref().unwrap().stats);
            let invocations_ok = second.planner_invocations == second.legs.iter().filter(|l| !l.cache_hit).count();
            let avoids = !second.semantic_path.as_ref().unwrap().nodes.contains(&d);
            let rerun = run(&env2, &second.query, &cache).expect("rerun");
            let pass = cached_ok
                && invocations_ok
                && avoids
                && second.cpu_time < first.cpu_time
                && rerun.cache_hits == rerun.legs.len()
                && rerun.planner_invocations == 0;
            return outcome(
                pass,
                format!(
                    "{s}->{g} blocking {d}: {} of {} legs cached, cpu {:.3} s vs initial {:.3} s, re-replan hits {}/{}",
                    second.cache_hits,
                    second.legs.len(),
                    second.cpu_time,
                    first.cpu_time,
                    rerun.cache_hits,
                    rerun.legs.len()
                ),
            );
        }
    }
    outcome(false, "no blocked doorway with an alternate route produced a cache hit")
}

// ---------------------------------------------------------------------------
// Criterion 6: oracle equivalences.

fn random_graph(rng: &mut PortableRng) -> SemanticGraph {
    let rooms = 2 + rng.below(24);
    let doors = 1 + rng.below(50 - rooms - 1);
    let mut nodes: Vec<SemanticNode> = (0..rooms)
        .map(|i| SemanticNode {
            id: format!("R{i:02}"),
            kind: NodeKind::Room,
            centroid: [rng.range(0.0, 40.0), rng.range(0.0, 40.0), 0.0],
        })
        .collect();
    let mut edges = Vec::new();
    for j in 0..doors {
        let a = rng.below(rooms);
        let b = (a + 1 + rng.below(rooms - 1)) % rooms;
        let c = [rng.range(0.0, 40.0), rng.range(0.0, 40.0), 0.0];
        let id = format!("D{j:02}");
        let closed = rng.chance(0.15);
        for r in [a, b] {
            let w = if closed { EdgeWeight::Infinite } else { EdgeWeight::Finite(euclid3(nodes[r].centroid, c)) };
            edges.push((nodes[r].id.clone(), id.clone(), w));
        }
        nodes.push(SemanticNode { id, kind: NodeKind::Doorway, centroid: c });
    }
    SemanticGraph::from_parts(nodes, edges)
}

fn dijkstra(g: &SemanticGraph, s: usize, t: usize) -> Option<f64> {
    let n = g.nodes().len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[s] = 0.0;
    while let Some(u) = (0..n).filter(|&i| !done[i] && dist[i].is_finite()).min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
    {
        done[u] = true;
        for &(v, e) in g.neighbors(u) {
            if let EdgeWeight::Finite(w) = g.edges()[e].weight {
                dist[v] = dist[v].min(dist[u] + w);
            }
        }
    }
    dist[t].is_finite().then_some(dist[t])
}

fn brute_force_df(g: &OccupancyGrid) -> Vec<f64> {
    let occ: Vec<(i64, i64)> = (0..g.height)
        .flat_map(|j| (0..g.width).map(move |i| (i, j)))
        .filter(|&(i, j)| g.is_occupied(i, j))
        .map(|(i, j)| (i as i64, j as i64))
        .collect();
    let mut out = Vec::with_capacity(g.width * g.height);
    for j in 0..g.height as i64 {
        for i in 0..g.width as i64 {
            let d2 = occ.iter().map(|&(a, b)| (a - i).pow(2) + (b - j).pow(2)).min();
            out.push(d2.map_or(f64::INFINITY, |d| (d as f64).sqrt() * g.resolution));
        }
    }
    out
}

fn merge_simulator(mut e: Vec<f64>, theta: f64) -> Vec<f64> {
    loop {
        if e.len() < 2 {
            return e;
        }
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        let mut i = usize::MAX;
        for k in 0..e.len() {
            if e[k] < theta * mean && (i == usize::MAX || e[k] < e[i]) {
                i = k;
            }
        }
        if i == usize::MAX {
            return e;
        }
        let j = if i == 0 {
            1
        } else if i == e.len() - 1 || e[i - 1] <= e[i + 1] {
            i - 1
        } else {
            i + 1
        };
        let (a, b) = (i.min(j), i.max(j));
        let merged = e[a] + e[b];
        e.remove(b);
        e[a] = merged;
    }
}

fn criterion_6() -> Outcome {
    let mut rng = PortableRng::new(6);
    let mut fails = Vec::new();

    let mut astar_ok = 0;
    for _ in 0..200 {
        let g = random_graph(&mut rng);
        let rooms: Vec<usize> = (0..g.nodes().len()).filter(|&i| g.node(i).kind == NodeKind::Room).collect();
        let (s, t) = (rooms[rng.below(rooms.len())], rooms[rng.below(rooms.len())]);
        let ok = match (astar(&g, &g.node(s).id, &g.node(t).id), dijkstra(&g, s, t)) {
            (Ok(p), Some(w)) => (p.total_weight - w).abs() <= 1e-9 * w.max(1.0),
            (Err(SemanticError::Unreachable(..)), None) => true,
            _ => false,
        };
        astar_ok += ok as usize;
    }
    if astar_ok != 200 {
        fails.push(format!("A* {astar_ok}/200"));
    }

    let mut df_ok = 0;
    for _ in 0..50 {
        let (w, h) = (1 + rng.below(64), 1 + rng.below(64));
        let mut g = OccupancyGrid::new(Point::new(0.0, 0.0), 0.05, w, h).unwrap();
        let density = rng.range(0.0, 0.3);
        for j in 0..h {
            for i in 0..w {
                if rng.chance(density) {
                    g.set_occupied(i, j, true);
                }
            }
        }
        df_ok += (distance_field(&g).values() == brute_force_df(&g).as_slice()) as usize;
    }
    if df_ok != 50 {
        fails.push(format!("distance field {df_ok}/50"));
    }

    let mut merge_ok = 0;
    for _ in 0..100 {
        let n = 1 + rng.below(15);
        let e: Vec<f64> = (0..n).map(|_| rng.range(0.0, 100.0)).collect();
        let theta = rng.range(0.0, 1.0);
        let got = merge_by(e.clone(), theta, |x| *x, |a, b| Ok::<_, ()>(a + b)).unwrap();
        merge_ok += (got == merge_simulator(e, theta)) as usize;
    }
    if merge_ok != 100 {
        fails.push(format!("merge {merge_ok}/100"));
    }

    let mut eff_ok = true;
    for _ in 0..100 {
        let n = 2 + rng.below(4);
        let rows: Vec<EfficiencyInput<f64>> = (0..n)
            .map(|i| EfficiencyInput {
                ablation: if i == 0 { "I".into() } else { format!("X{i}") },
                ttp95: Ttp95::At(rng.range(0.001, 6.0)),
                l95: Some(rng.range(10.0, 40.0)),
                l_conv: Some(rng.range(9.0, 10.0)),
            })
            .collect();
        let out = efficiency(&rows).unwrap();
        let t = |r: &EfficiencyInput<f64>| r.ttp95.finite().unwrap();
        let eta = |r: &EfficiencyInput<f64>| (t(&rows[0]) / t(r)) * (r.l_conv.unwrap() / r.l95.unwrap());
        for (r, o) in rows.iter().zip(&out) {
            let bar = eta(r) / eta(&rows[0]);
            eff_ok &= (o.eta_bar.unwrap() - bar).abs() <= 1e-9 && (o.eta.unwrap() - eta(r)).abs() <= 1e-9;
        }
        eff_ok &= out[0].eta_bar == Some(1.0);
    }
    if !eff_ok {
        fails.push("efficiency recomputation".into());
    }

    let t: f64 = spath::bench::ttp95(&[(0.010f64, 0.5f64), (0.100, 1.0)]).finite().unwrap() * 1e3;
    let ttp_ok = (t - 79.4).abs() <= 0.1;
    if !ttp_ok {
        fails.push(format!("ttp95 example {t:.2} ms"));
    }
    outcome(
        fails.is_empty(),
        format!(
            "A* {astar_ok}/200, distance field {df_ok}/50, merge {merge_ok}/100, efficiency {}, ttp95 example {t:.2} ms",
            if eff_ok { "exact" } else { "mismatch" }
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 7: planner soundness and near-optimality.

/// True distance from `p` to the nearest occupied cell centre, searched in a
/// window around `p`; capped at `cap`.
fn clearance(g: &OccupancyGrid, p: Point, cap: f64) -> f64 {
    let Some((ci, cj)) = g.cell_of(p) else { return 0.0 };
    let r = (cap / g.resolution).ceil() as i64 + 1;
    let mut best = cap;
    for dj in -r..=r {
        for di in -r..=r {
            let (i, j) = (ci as i64 + di, cj as i64 + dj);
            if i < 0 || j < 0 || i >= g.width as i64 || j >= g.height as i64 {
                continue;
            }
            if g.is_occupied(i as usize, j as usize) {
                best = best.min(g.cell_center(i as usize, j as usize).dist(p));
            }
        }
    }
    best
}

fn path_is_sound(g: &OccupancyGrid, mask: &CellMask, wps: &[Point]) -> bool {
    let step = g.resolution / 2.0;
    for w in wps.windows(2) {
        let n = (w[0].dist(w[1]) / step).ceil().max(1.0) as usize;
        for k in 0..=n {
            let p = w[0].lerp(w[1], k as f64 / n as f64);
            if !mask.contains(p) || clearance(g, p, RADIUS) < RADIUS - g.resolution {
                return false;
            }
        }
    }
    true
}

fn boxed_grid(size: f64, rects: &[(Point, Point)]) -> OccupancyGrid {
    let cells = (size / 0.05).round() as usize;
    let mut g = OccupancyGrid::new(Point::new(0.0, 0.0), 0.05, cells, cells).unwrap();
    g.fill_rect(Point::new(0.0, 0.0), Point::new(size, 0.1), true);
    g.fill_rect(Point::new(0.0, size - 0.1), Point::new(size, size), true);
    g.fill_rect(Point::new(0.0, 0.0), Point::new(0.1, size), true);
    g.fill_rect(Point::new(size - 0.1, 0.0), Point::new(size, size), true);
    for (lo, hi) in rects {
        g.fill_rect(*lo, *hi, true);
    }
    g
}

fn random_rect(rng: &mut PortableRng, lo: f64, hi: f64, max_side: f64) -> (Point, Point) {
    let (w, h) = (rng.range(0.3, max_side), rng.range(0.3, max_side));
    let x = rng.range(lo, hi - w);
    let y = rng.range(lo, hi - h);
    (Point::new(x, y), Point::new(x + w, y + h))
}

/// Rectangle grown by `r`, with each rounded corner replaced by a
/// circumscribed polygonal arc so the result contains the true grown shape.
fn inflate(lo: Point, hi: Point, r: f64) -> Vec<Point> {
    let m = 4;
    let step = std::f64::consts::FRAC_PI_2 / m as f64;
    let big = r / (step / 2.0).cos();
    (0..4 * m)
        .map(|k| {
            let a = (k as f64 + 0.5) * step;
            let corner = match k / m {
                0 => hi,
                1 => Point::new(lo.x, hi.y),
                2 => lo,
                _ => Point::new(hi.x, lo.y),
            };
            corner + Point::new(a.cos(), a.sin()) * big
        })
        .collect()
}

/// True when segment `a→b` passes through the open interior of `poly`.
fn crosses_interior(poly: &[Point], a: Point, b: Point) -> bool {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..poly.len() {
        let (p, q) = (poly[k], poly[(k + 1) % poly.len()]);
        let e = q - p;
        let n = Point::new(e.y, -e.x);
        let num = n.dot(a - p);
        let den = n.dot(d);
        if den.abs() < 1e-15 {
            if num >= 0.0 {
                return false;
            }
            continue;
        }
        let t = -num / den;
        if den < 0.0 {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
        if t1 - t0 <= 1e-9 {
            return false;
        }
    }
    t1 - t0 > 1e-9
}

fn strictly_inside(poly: &[Point], p: Point) -> bool {
    (0..poly.len()).all(|k| {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        (b - a).cross(p - a) > 1e-9
    })
}

fn visibility_shortest(s: Point, g: Point, polys: &[Vec<Point>]) -> Option<f64> {
    let mut nodes = vec![s, g];
    for p in polys {
        for &v in p {
            if !polys.iter().any(|q| strictly_inside(q, v)) {
                nodes.push(v);
            }
        }
    }
    let n = nodes.len();
    let visible = |a: Point, b: Point| !polys.iter().any(|p| crosses_interior(p, a, b));
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[0] = 0.0;
    while let Some(u) = (0..n).filter(|&i| !done[i] && dist[i].is_finite()).min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
    {
        if u == 1 {
            return Some(dist[1]);
        }
        done[u] = true;
        for v in 0..n {
            if !done[v] && visible(nodes[u], nodes[v]) {
                dist[v] = dist[v].min(dist[u] + nodes[u].dist(nodes[v]));
            }
        }
    }
    None
}

fn criterion_7() -> Outcome {
    let mut rng = PortableRng::new(77);
    let mut returned = 0;
    let mut unsound = 0;
    let mut instances = 0;
    while instances < 1000 {
        let rects: Vec<_> = (0..rng.below(5)).map(|_| random_rect(&mut rng, 0.5, 5.5, 1.5)).collect();
        let grid = boxed_grid(6.0, &rects);
        let df = distance_field(&grid);
        let mask = if rng.chance(0.5) {
            CellMask::full(&grid)
        } else {
            let polys: Vec<ConvexPolygon<f64>> = (0..1 + rng.below(2))
                .map(|_| {
                    let (lo, hi) = random_rect(&mut rng, 0.0, 6.0, 5.0);
                    ConvexPolygon::new(vec![lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)], 3.0).unwrap()
                })
                .collect();
            rasterize(&polys.iter().collect::<Vec<_>>(), &grid).unwrap()
        };
        let pick = |rng: &mut PortableRng| {
            (0..100)
                .map(|_| Point::new(rng.range(0.0, 6.0), rng.range(0.0, 6.0)))
                .find(|p| mask.contains(*p) && spath::gridmap::is_valid(*p, RADIUS, &df, Some(&mask)))
        };
        let (Some(s), Some(g)) = (pick(&mut rng), pick(&mut rng)) else { continue };
        instances += 1;
        let kind = PlannerKind::ALL[instances % 3];
        let cfg = PlannerConfig::new(kind).with_budget(rng.range(0.005, 0.05)).with_seed(instances as u64);
        let out = plan(s, g, Workspace { df: &df, mask: &mask }, &cfg).expect("valid endpoints");
        if let Some(p) = out.path {
            returned += 1;
            let ends = p.start() == s && p.goal() == g;
            if !ends || !path_is_sound(&grid, &mask, &p.waypoints) {
                unsound += 1;
            }
        }
    }

    let mut worst: HashMap<PlannerKind, f64> = HashMap::new();
    let mut solved = 0;
    let mut optimal_ok = true;
    let mut k = 0;
    while solved < 20 {
        k += 1;
        let rects: Vec<_> = (0..1 + rng.below(3)).map(|_| random_rect(&mut rng, 2.5, 7.5, 2.0)).collect();
        let grid = boxed_grid(10.0, &rects);
        let df = distance_field(&grid);
        let mask = CellMask::full(&grid);
        let polys: Vec<Vec<Point>> = rects.iter().map(|(lo, hi)| inflate(*lo, *hi, RADIUS)).collect();
        let s = Point::new(rng.range(1.0, 2.0), rng.range(1.0, 9.0));
        let g = Point::new(rng.range(8.0, 9.0), rng.range(1.0, 9.0));
        if polys.iter().any(|p| strictly_inside(p, s) || strictly_inside(p, g)) {
            continue;
        }
        let Some(best) = visibility_shortest(s, g, &polys) else { continue };
        solved += 1;
        for kind in PlannerKind::ALL {
            let cfg = PlannerConfig::new(kind).with_budget(1.0).with_seed(k);
            let out = plan(s, g, Workspace { df: &df, mask: &mask }, &cfg).expect("valid endpoints");
            let ratio = out.length().map_or(f64::INFINITY, |l| l / best);
            let limit = if kind == PlannerKind::RrtStar { 1.10 } else { 1.05 };
            optimal_ok &= ratio <= limit && ratio >= 1.0 / limit;
            let w = worst.entry(kind).or_insert(0.0);
            *w = w.max((ratio - 1.0).abs());
        }
    }
    let pass = unsound == 0 && optimal_ok;
    let mut w: Vec<_> = worst.into_iter().collect();
    w.sort_by_key(|(k, _)| *k);
    let w: Vec<String> = w.iter().map(|(k, v)| format!("{} {:.2}%", k.name(), 100.0 * v)).collect();
    outcome(
        pass,
        format!(
            "{unsound} unsound of {returned} returned paths over 1000 instances; worst deviation from visibility-graph optimum: {}",
            w.join(", ")
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 8: bench determinism.

fn criterion_8() -> Outcome {
    let scenario = Scenario {
        name: "determinism".into(),
        env: EnvSource::Generate(FloorSpec { rows: 2, cols: 2, seed: 4, ..FloorSpec::default() }),
        queries: vec![ScenarioQuery { name: "diag".into(), start: "R0_0".into(), goal: "R1_1".into() }],
        blockages: vec![],
    };
    let cfg = BenchConfig {
        sweep: SweepParams { ttp_min: 0.001, ttp_max: 0.2, points: 5, trials: 4, seed: 9 },
        ..BenchConfig::default()
    };
    let mut reports = Vec::new();
    let dirs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for d in &dirs {
        let (report, timing) = run_scenario(&scenario, d.path(), &cfg).expect("bench");
        write_report(d.path(), &report, &timing).expect("write");
        reports.push(std::fs::read(d.path().join("report.json")).unwrap());
    }
    let same = reports[0] == reports[1];
    let csv_same = std::fs::read(dirs[0].path().join("efficiency.csv")).unwrap()
        == std::fs::read(dirs[1].path().join("efficiency.csv")).unwrap();
    outcome(
        same && csv_same,
        format!("report.json {} bytes, identical: {same}; efficiency.csv identical: {csv_same}", reports[0].len()),
    )
}

fn main() {
    let mut out = std::io::stdout();
    let mut floor = Floor::new();
    let mut results = Vec::new();
    let mut record = |n: usize, name: &str, o: Outcome| {
        let line = format!("criterion {n} [{name}]: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        writeln!(out, "{line}").unwrap();
        out.flush().unwrap();
        results.push(o.pass);
    };
    record(1, "C-space restriction", criterion_1(&mut floor));
    record(2, "decomposition", criterion_2(&mut floor));
    record(3, "path-length envelope", criterion_3(&mut floor));
    record(4, "parallel speedup", criterion_4());
    record(5, "replanning reuse", criterion_5());
    record(6, "oracle equivalences", criterion_6());
    record(7, "planner soundness", criterion_7());
    record(8, "determinism", criterion_8());
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
