//! End-to-end query execution: environment setup, semantic planning,
//! decomposition, sequential or parallel solving, stitching and replanning
//! with a solution cache.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decompose::{allocate, decompose, merge_small, Subproblem, SubproblemInfo, DEFAULT_MERGE_THETA};
use crate::geometry::{ComposedContour, GeometryError, Point2};
use crate::gridmap::{distance_field, CellMask, DistanceField, OccupancyGrid, DEFAULT_ROBOT_RADIUS};
use crate::planners::{plan, GeometricPath, PlanError, PlanStats, PlannerConfig, PlannerKind, Workspace};
use crate::rng::derive_seed;
use crate::scenegraph::{build_semantic_graph, set_doorway_state, SceneGraph, SceneGraphError, SemanticGraph};
use crate::semantic::{astar, build_contours, coarse_path, locate, Contours, SemanticError, SemanticPath};

type Point = Point2<f64>;

/// Weight factor applied to semantic edges of the previous plan when
/// replanning.
pub const DEFAULT_REUSE_DISCOUNT: f64 = 0.5;

/// Junction tolerance for stitching, in meters.
pub const JUNCTION_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Semantic(#[from] SemanticError),
    #[error(transparent)]
    SceneGraph(#[from] SceneGraphError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("legs {index} and {next} do not meet (gap {gap} m)", next = index + 1)]
    Junction { index: usize, gap: f64 },
    #[error("nothing to stitch")]
    NoLegs,
    #[error("doorway `{0}` is not on the previous semantic path")]
    NotOnPath(String),
    #[error("previous result has no semantic path")]
    NoSemanticPath,
    #[error("invalid query: {0}")]
    Query(String),
}

/// Ablation variants, from plain global planning to the full method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// I: one global plan over the whole map.
    Baseline,
    /// II: one plan restricted to the composed region of the semantic path.
    Restricted,
    /// III: per-leg subproblems solved sequentially.
    Decomposed,
    /// S-Path(s): as III, with the solution cache.
    SpathSeq,
    /// S-Path: as S-Path(s), with legs dispatched to a worker pool.
    SpathPar,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Baseline, Mode::Restricted, Mode::Decomposed, Mode::SpathSeq, Mode::SpathPar];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Restricted => "restricted",
            Mode::Decomposed => "decomposed",
            Mode::SpathSeq => "spath-seq",
            Mode::SpathPar => "spath-par",
        }
    }

    /// Short ablation label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Mode::Baseline => "I",
            Mode::Restricted => "II",
            Mode::Decomposed => "III",
            Mode::SpathSeq => "S-Path(s)",
            Mode::SpathPar => "S-Path",
        }
    }

    pub fn is_decomposed(self) -> bool {
        matches!(self, Mode::Decomposed | Mode::SpathSeq | Mode::SpathPar)
    }

    pub fn uses_cache(self) -> bool {
        matches!(self, Mode::SpathSeq | Mode::SpathPar)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL.into_iter().find(|m| m.name() == s || m.label() == s).ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

/// Query endpoint: a point, a room (resolved to its centroid), or a point
/// with its room already decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Point(Point),
    Room(String),
    Located { point: Point, room: String },
}

impl FromStr for Endpoint {
    type Err = String;

    /// `x,y` or a room id.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some((a, b)) = s.split_once(',') {
            let x = a.trim().parse::<f64>().map_err(|e| format!("bad x in `{s}`: {e}"))?;
            let y = b.trim().parse::<f64>().map_err(|e| format!("bad y in `{s}`: {e}"))?;
            return Ok(Endpoint::Point(Point::new(x, y)));
        }
        if s.is_empty() {
            return Err("empty endpoint".into());
        }
        Ok(Endpoint::Room(s.to_string()))
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub start: Endpoint,
    pub goal: Endpoint,
    /// Total planning budget in seconds.
    pub ttp: f64,
    pub mode: Mode,
    pub planner: PlannerConfig,
    pub seed: u64,
    /// Worker pool size for [`Mode::SpathPar`].
    pub workers: usize,
}

impl Query {
    pub fn new(start: Endpoint, goal: Endpoint, ttp: f64, mode: Mode, planner: PlannerKind) -> Self {
        Self { start, goal, ttp, mode, planner: PlannerConfig::new(planner), seed: 0, workers: default_workers() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_ttp(mut self, ttp: f64) -> Self {
        self.ttp = ttp;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Seed of leg `index` of a query.
pub fn leg_seed(query_seed: u64, index: usize) -> u64 {
    derive_seed(query_seed, index as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub robot_radius: f64,
    /// Minimum depth of doorway quads, in meters.
    pub min_doorway_depth: f64,
    pub merge_theta: f64,
    pub reuse_discount: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            robot_radius: DEFAULT_ROBOT_RADIUS,
            min_doorway_depth: 0.1,
            merge_theta: DEFAULT_MERGE_THETA,
            reuse_discount: DEFAULT_REUSE_DISCOUNT,
        }
    }
}

/// Everything derived once per map. Closed doorways are occupied in the
/// planning grid so every mode sees the same free space.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub scene_graph: SceneGraph,
    pub semantic_graph: SemanticGraph,
    pub contours: Contours,
    /// Grid as loaded, before closed doorways are filled in.
    pub base_grid: OccupancyGrid,
    pub grid: OccupancyGrid,
    pub df: Arc<DistanceField>,
    pub full_mask: Arc<CellMask>,
    pub config: EnvConfig,
    /// Semantic edges discounted by the reuse factor.
    pub reused: Vec<(String, String)>,
}

pub fn setup(sg: SceneGraph, grid: OccupancyGrid) -> Result<Environment, PipelineError> {
    setup_with(sg, grid, EnvConfig::default())
}

pub fn setup_with(sg: SceneGraph, grid: OccupancyGrid, config: EnvConfig) -> Result<Environment, PipelineError> {
    build_env(sg, grid, config, Vec::new())
}

fn build_env(
    sg: SceneGraph,
    base_grid: OccupancyGrid,
    config: EnvConfig,
    reused: Vec<(String, String)>,
) -> Result<Environment, PipelineError> {
    let contours = build_contours(&sg, config.min_doorway_depth)?;
    let mut grid = base_grid.clone();
    for d in sg.doorways.values().filter(|d| !d.traversable) {
        grid.fill_polygon(&contours.doorways[&d.id], true);
    }
    let df = Arc::new(distance_field(&grid));
    let full_mask = Arc::new(CellMask::full(&grid));
    let semantic_graph = build_semantic_graph(&sg)
        .discounted(reused.iter().map(|(a, b)| (a.as_str(), b.as_str())), config.reuse_discount);
    Ok(Environment { scene_graph: sg, semantic_graph, contours, base_grid, grid, df, full_mask, config, reused })
}

impl Environment {
    /// Copy with one doorway opened or closed; everything derived is rebuilt.
    pub fn with_doorway_state(&self, id: &str, traversable: bool) -> Result<Self, PipelineError> {
        let sg = set_doorway_state(&self.scene_graph, id, traversable)?;
        build_env(sg, self.base_grid.clone(), self.config.clone(), self.reused.clone())
    }

    /// Copy whose semantic graph discounts the given edges.
    pub fn with_reuse(&self, edges: Vec<(String, String)>) -> Self {
        let semantic_graph = build_semantic_graph(&self.scene_graph)
            .discounted(edges.iter().map(|(a, b)| (a.as_str(), b.as_str())), self.config.reuse_discount);
        Self { semantic_graph, reused: edges, ..self.clone() }
    }

    fn whole_map(&self) -> ComposedContour {
        ComposedContour { members: Vec::new(), area: self.full_mask.area(), mask: self.full_mask.clone() }
    }

    fn resolve(&self, e: &Endpoint, locate_needed: bool) -> Result<(Point, Option<String>), PipelineError> {
        match e {
            Endpoint::Point(p) => {
                let room = if locate_needed { Some(locate(*p, &self.scene_graph, &self.contours)?) } else { None };
                Ok((*p, room))
            }
            Endpoint::Room(id) => {
                let room = self.scene_graph.rooms.get(id).ok_or_else(|| SemanticError::UnknownRoom(id.clone()))?;
                Ok((room.centroid_2d(), Some(id.clone())))
            }
            Endpoint::Located { point, room } => {
                if !self.scene_graph.rooms.contains_key(room) {
                    return Err(SemanticError::UnknownRoom(room.clone()).into());
                }
                Ok((*point, Some(room.clone())))
            }
        }
    }
}

/// A query broken into subproblems with their budgets allocated.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub start: Point,
    pub goal: Point,
    pub semantic_path: Option<SemanticPath>,
    /// Coarse waypoints (start, doorway centroids, goal); empty in mode I.
    pub waypoints: Vec<Point>,
    pub subproblems: Vec<Subproblem>,
}

/// Semantic search, region composition, decomposition, merging and budget
/// allocation for a query; no geometric planning.
pub fn prepare(env: &Environment, q: &Query) -> Result<Prepared, PipelineError> {
    if !(q.ttp > 0.0) {
        return Err(PipelineError::Query("ttp must be positive".into()));
    }
    let semantic = q.mode != Mode::Baseline;
    let (start, start_room) = env.resolve(&q.start, semantic)?;
    let (goal, goal_room) = env.resolve(&q.goal, semantic)?;
    let sg = &env.scene_graph;
    let mut prepared = Prepared { start, goal, semantic_path: None, waypoints: Vec::new(), subproblems: Vec::new() };
    if !semantic {
        prepared.subproblems.push(Subproblem::new(start, goal, env.whole_map(), sg));
    } else {
        let (sr, gr) = (start_room.expect("located"), goal_room.expect("located"));
        let sp = astar(&env.semantic_graph, &sr, &gr)?;
        let cp = coarse_path(&sp, start, goal, sg, &env.contours, &env.grid)?;
        prepared.subproblems = if q.mode.is_decomposed() {
            merge_small(decompose(&cp, sg), env.config.merge_theta, sg, &env.grid)?
        } else {
            vec![Subproblem::new(start, goal, cp.region.clone(), sg)]
        };
        prepared.waypoints = cp.waypoints;
        prepared.semantic_path = Some(sp);
    }
    allocate(&mut prepared.subproblems, q.ttp);
    Ok(prepared)
}

/// Thread-safe map from subproblem key to a solved path.
#[derive(Debug, Default)]
pub struct SolutionCache {
    map: Mutex<HashMap<u64, GeometricPath>>,
}

impl SolutionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: u64) -> Option<GeometricPath> {
        self.map.lock().expect("cache lock").get(&key).cloned()
    }

    pub fn insert(&self, key: u64, path: GeometricPath) {
        self.map.lock().expect("cache lock").insert(key, path);
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Seeds a cache with the solved legs of an earlier result.
    pub fn from_result(r: &PlanResult) -> Self {
        let c = Self::new();
        for leg in &r.legs {
            if let Some(p) = &leg.path {
                c.insert(leg.subproblem.cache_key, p.clone());
            }
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegResult {
    pub index: usize,
    pub subproblem: SubproblemInfo,
    pub seed: u64,
    pub path: Option<GeometricPath>,
    pub stats: PlanStats,
    pub cache_hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub query: Query,
    pub success: bool,
    pub start: Point,
    pub goal: Point,
    pub path: Option<GeometricPath>,
    pub semantic_path: Option<SemanticPath>,
    pub waypoints: Vec<Point>,
    pub legs: Vec<LegResult>,
    /// Sum of planner time over legs that were actually solved.
    pub cpu_time: f64,
    /// Wall time of the solving phase.
    pub wall_time: f64,
    pub planner_invocations: usize,
    pub cache_hits: usize,
    pub instructions: Vec<String>,
}

impl PlanResult {
    pub fn length(&self) -> Option<f64> {
        self.path.as_ref().map(|p| p.length)
    }
}

fn solve_leg(
    env: &Environment,
    q: &Query,
    index: usize,
    sub: &Subproblem,
    cache: Option<&SolutionCache>,
) -> Result<LegResult, PipelineError> {
    let seed = leg_seed(q.seed, index);
    let mut leg =
        LegResult { index, subproblem: sub.info(), seed, path: None, stats: PlanStats::default(), cache_hit: false };
    let radius = env.config.robot_radius;
    if let Some(hit) = cache.and_then(|c| c.get(sub.cache_key)) {
        let same_ends = hit.start() == sub.start && hit.goal() == sub.goal;
        if same_ends && hit.is_valid(radius, &env.df, Some(&sub.contour.mask)) {
            leg.stats = hit.stats.clone();
            leg.path = Some(hit);
            leg.cache_hit = true;
            return Ok(leg);
        }
    }
    let mut cfg = q.planner.clone().with_budget(sub.budget).with_seed(seed);
    cfg.robot_radius = radius;
    let ws = Workspace { df: &env.df, mask: &sub.contour.mask };
    let out = plan(sub.start, sub.goal, ws, &cfg)?;
    leg.stats = out.stats;
    leg.path = out.path;
    if let (Some(c), Some(p)) = (cache, &leg.path) {
        c.insert(sub.cache_key, p.clone());
    }
    Ok(leg)
}

fn solve_parallel(
    env: &Environment,
    q: &Query,
    subs: &[Subproblem],
    cache: Option<&SolutionCache>,
    workers: usize,
) -> Vec<Result<LegResult, PipelineError>> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<LegResult, PipelineError>>>> = subs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, subs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= subs.len() {
                    break;
                }
                let r = solve_leg(env, q, i, &subs[i], cache);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().expect("slot lock").expect("leg solved")).collect()
}

/// Executes a query. The cache is consulted and updated only in the
/// S-Path modes.
pub fn run(env: &Environment, q: &Query, cache: &SolutionCache) -> Result<PlanResult, PipelineError> {
    let prepared = prepare(env, q)?;
    let cache = q.mode.uses_cache().then_some(cache);
    let subs = &prepared.subproblems;
    let clock = Instant::now();
    let results = if q.mode == Mode::SpathPar {
        solve_parallel(env, q, subs, cache, q.workers)
    } else {
        subs.iter().enumerate().map(|(i, s)| solve_leg(env, q, i, s, cache)).collect()
    };
    let wall_time = clock.elapsed().as_secs_f64();
    let legs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let success = legs.iter().all(|l| l.path.is_some());
    let path = if success {
        let paths: Vec<GeometricPath> = legs.iter().map(|l| l.path.clone().expect("solved")).collect();
        Some(stitch(&paths)?)
    } else {
        None
    };
    let solved: Vec<&LegResult> = legs.iter().filter(|l| !l.cache_hit).collect();
    let instructions = prepared.semantic_path.as_ref().map(SemanticPath::render).unwrap_or_default();
    Ok(PlanResult {
        query: q.clone(),
        success,
        start: prepared.start,
        goal: prepared.goal,
        path,
        semantic_path: prepared.semantic_path,
        waypoints: prepared.waypoints,
        cpu_time: solved.iter().map(|l| l.stats.elapsed).sum(),
        wall_time,
        planner_invocations: solved.len(),
        cache_hits: legs.len() - solved.len(),
        legs,
        instructions,
    })
}

/// Concatenates leg paths, dropping the duplicated junction waypoints.
pub fn stitch(legs: &[GeometricPath]) -> Result<GeometricPath, PipelineError> {
    let first = legs.first().ok_or(PipelineError::NoLegs)?;
    let mut waypoints = first.waypoints.clone();
    let mut length = first.length;
    let mut stats = first.stats.clone();
    for (i, leg) in legs.iter().enumerate().skip(1) {
        let gap = waypoints.last().expect("non-empty").dist(leg.start());
        if !(gap <= JUNCTION_TOL) {
            return Err(PipelineError::Junction { index: i - 1, gap });
        }
        waypoints.extend_from_slice(&leg.waypoints[1..]);
        length += leg.length;
        stats.samples += leg.stats.samples;
        stats.validity_checks += leg.stats.validity_checks;
        stats.iterations += leg.stats.iterations;
        stats.elapsed += leg.stats.elapsed;
    }
    if legs.len() > 1 {
        stats.solved_at = None;
    }
    Ok(GeometricPath { waypoints, length, stats })
}

/// Replans after `blocked` is found closed. The doorway is closed in a copy
/// of the environment, edges of the previous semantic path are discounted,
/// and the query restarts from the doorway preceding the blockage (or the
/// previous start if there is none). Returns the updated environment with
/// the new result.
pub fn replan(
    env: &Environment,
    blocked: &str,
    prev: &PlanResult,
    cache: &SolutionCache,
) -> Result<(Environment, PlanResult), PipelineError> {
    let sp = prev.semantic_path.as_ref().ok_or(PipelineError::NoSemanticPath)?;
    let k = sp
        .nodes
        .iter()
        .enumerate()
        .position(|(i, n)| i % 2 == 1 && n == blocked)
        .ok_or_else(|| PipelineError::NotOnPath(blocked.to_string()))?;
    let reuse: Vec<(String, String)> = sp.edges().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let env2 = env.with_doorway_state(blocked, false)?.with_reuse(reuse);

    let before = &sp.nodes[k - 1];
    let start_point = if k >= 3 { env.scene_graph.doorways[&sp.nodes[k - 2]].centroid_2d() } else { prev.start };
    let mut q = prev.query.clone();
    q.start = Endpoint::Located { point: start_point, room: before.clone() };
    q.goal = Endpoint::Located { point: prev.goal, room: sp.goal_room().to_string() };
    let result = run(&env2, &q, cache)?;
    Ok((env2, result))
}
