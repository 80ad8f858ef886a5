//! Anytime sampling-based planners (RRT*, PRM*, BIT*) over a masked planar
//! configuration space with distance-field clearance checks.

mod bit_star;
pub mod nn;
mod prm_star;
mod rrt_star;

use std::cmp::Ordering;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{cost, ClockKind, Meter};
use crate::geometry::Point2;
use crate::gridmap::{is_valid, sample_unchecked, segment_valid, segment_valid_counted, CellMask, DistanceField};
use crate::rng::PortableRng;

type Point = Point2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    RrtStar,
    PrmStar,
    BitStar,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 3] = [PlannerKind::RrtStar, PlannerKind::PrmStar, PlannerKind::BitStar];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::RrtStar => "rrtstar",
            PlannerKind::PrmStar => "prmstar",
            PlannerKind::BitStar => "bitstar",
        }
    }
}

impl FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rrtstar" | "rrt*" => Ok(PlannerKind::RrtStar),
            "prmstar" | "prm*" => Ok(PlannerKind::PrmStar),
            "bitstar" | "bit*" => Ok(PlannerKind::BitStar),
            _ => Err(format!("unknown planner `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub kind: PlannerKind,
    /// Seconds.
    pub budget: f64,
    pub seed: u64,
    pub robot_radius: f64,
    pub steer_step: f64,
    /// Multiplier on the asymptotic-optimality bound of the connection radius.
    pub rewire_gamma: f64,
    pub batch_size: usize,
    pub goal_bias: f64,
    pub clock: ClockKind,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            kind: PlannerKind::PrmStar,
            budget: 1.0,
            seed: 0,
            robot_radius: crate::gridmap::DEFAULT_ROBOT_RADIUS,
            steer_step: 1.0,
            rewire_gamma: 1.1,
            batch_size: 100,
            goal_bias: 0.05,
            clock: ClockKind::Virtual,
        }
    }
}

impl PlannerConfig {
    pub fn new(kind: PlannerKind) -> Self {
        Self { kind, ..Self::default() }
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_clock(mut self, clock: ClockKind) -> Self {
        self.clock = clock;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub samples: u64,
    pub validity_checks: u64,
    pub iterations: u64,
    /// Budget time at which the first solution was available.
    pub solved_at: Option<f64>,
    /// Budget time consumed.
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricPath {
    pub waypoints: Vec<Point>,
    pub length: f64,
    pub stats: PlanStats,
}

impl GeometricPath {
    pub fn new(waypoints: Vec<Point>, stats: PlanStats) -> Self {
        let length = path_length(&waypoints);
        Self { waypoints, length, stats }
    }

    pub fn start(&self) -> Point {
        self.waypoints[0]
    }

    pub fn goal(&self) -> Point {
        *self.waypoints.last().expect("path has at least one waypoint")
    }

    /// Every segment clears the robot radius and every waypoint is in the mask.
    pub fn is_valid(&self, radius: f64, df: &DistanceField, mask: Option<&CellMask>) -> bool {
        self.waypoints.iter().all(|&p| is_valid(p, radius, df, mask))
            && self.waypoints.windows(2).all(|w| segment_valid(w[0], w[1], radius, df, mask))
    }
}

/// Sum of segment lengths; zero for a single waypoint.
pub fn path_length(waypoints: &[Point]) -> f64 {
    waypoints.windows(2).map(|w| w[0].dist(w[1])).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub path: Option<GeometricPath>,
    pub stats: PlanStats,
    /// `(budget time, best cost)` each time the solution improved.
    pub trace: Vec<(f64, f64)>,
}

impl PlanOutcome {
    pub fn solved(&self) -> bool {
        self.path.is_some()
    }

    pub fn length(&self) -> Option<f64> {
        self.path.as_ref().map(|p| p.length)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("start {0:?} is in collision or outside the planning region")]
    InvalidStart(Point),
    #[error("goal {0:?} is in collision or outside the planning region")]
    InvalidGoal(Point),
    #[error("invalid planner configuration: {0}")]
    Config(String),
}

/// Shared immutable planning data.
#[derive(Debug, Clone, Copy)]
pub struct Workspace<'a> {
    pub df: &'a DistanceField,
    pub mask: &'a CellMask,
}

/// Per-run mutable state shared by all planners.
pub(crate) struct Ctx<'a> {
    ws: Workspace<'a>,
    radius: f64,
    pub meter: Meter,
    pub rng: PortableRng,
    pub stats: PlanStats,
    pub trace: Vec<(f64, f64)>,
    pub start: Point,
    pub goal: Point,
    pub measure: f64,
}

impl<'a> Ctx<'a> {
    #[inline]
    pub fn point_ok(&mut self, p: Point) -> bool {
        self.stats.validity_checks += 1;
        self.meter.charge(cost::POINT_CHECK);
        is_valid(p, self.radius, self.ws.df, Some(self.ws.mask))
    }

    #[inline]
    pub fn edge_ok(&mut self, a: Point, b: Point) -> bool {
        let (ok, n) = segment_valid_counted(a, b, self.radius, self.ws.df, Some(self.ws.mask));
        self.stats.validity_checks += n as u64;
        self.meter.charge(n as u64 * cost::POINT_CHECK);
        ok
    }

    #[inline]
    pub fn sample(&mut self) -> Point {
        self.stats.samples += 1;
        self.meter.charge(cost::SAMPLE);
        sample_unchecked(self.ws.mask, &mut self.rng)
    }

    #[inline]
    pub fn in_mask(&self, p: Point) -> bool {
        self.ws.mask.contains(p)
    }

    pub fn charge_nn(&mut self, examined: usize) {
        self.meter.charge(cost::NN_QUERY + examined as u64 * cost::NN_CANDIDATE);
    }

    pub fn charge_graph(&mut self, ops: usize) {
        self.meter.charge(ops as u64 * cost::GRAPH_OP);
    }

    /// Records an improved solution cost.
    pub fn record(&mut self, cost: f64) {
        let t = self.meter.elapsed();
        self.stats.solved_at.get_or_insert(t);
        self.trace.push((t, cost));
    }

    /// Connection-radius constant `2 (1 + 1/d)^(1/d) (μ/ζ_d)^(1/d)` for d = 2,
    /// scaled by `rewire_gamma`, with μ the measure of the planning region.
    pub fn gamma(&self, rewire_gamma: f64) -> f64 {
        rewire_gamma * 2.0 * (1.5 * self.measure / std::f64::consts::PI).sqrt()
    }

    pub fn bounds(&self) -> (Point, Point) {
        let m = self.ws.mask;
        let lo = m.origin;
        let hi = Point::new(m.origin.x + m.width as f64 * m.resolution, m.origin.y + m.height as f64 * m.resolution);
        (lo, hi)
    }
}

/// Common interface of the anytime planners.
pub(crate) trait Anytime {
    /// One iteration; returns false once nothing more can be gained.
    fn step(&mut self, cx: &mut Ctx) -> bool;
    /// Current best solution, without charging the clock.
    fn best(&self) -> Option<Vec<Point>>;
}

/// Total order on costs for priority queues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Key(pub f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Runs the planner for `cfg.budget` seconds.
pub fn plan(start: Point, goal: Point, ws: Workspace<'_>, cfg: &PlannerConfig) -> Result<PlanOutcome, PlanError> {
    let mut out = plan_anytime(start, goal, ws, cfg, &[cfg.budget])?;
    Ok(out.pop().expect("one checkpoint"))
}

/// Runs the planner once and reports the state it would have returned for
/// each budget in `checkpoints` (ascending). Because planners behave the
/// same regardless of their budget until it runs out, each entry equals the
/// result of a separate run with that budget when the virtual clock is used.
pub fn plan_anytime(
    start: Point,
    goal: Point,
    ws: Workspace<'_>,
    cfg: &PlannerConfig,
    checkpoints: &[f64],
) -> Result<Vec<PlanOutcome>, PlanError> {
    if !(cfg.budget > 0.0) {
        return Err(PlanError::Config("budget must be positive".into()));
    }
    if !(0.0..=1.0).contains(&cfg.goal_bias) {
        return Err(PlanError::Config("goal bias must lie in [0, 1]".into()));
    }
    if checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return Err(PlanError::Config("checkpoints must be ascending".into()));
    }
    if !is_valid(start, cfg.robot_radius, ws.df, Some(ws.mask)) {
        return Err(PlanError::InvalidStart(start));
    }
    if !is_valid(goal, cfg.robot_radius, ws.df, Some(ws.mask)) {
        return Err(PlanError::InvalidGoal(goal));
    }
    let budget = cfg.budget;
    let mut cx = Ctx {
        ws,
        radius: cfg.robot_radius,
        meter: Meter::new(cfg.clock),
        rng: PortableRng::new(cfg.seed),
        stats: PlanStats::default(),
        trace: Vec::new(),
        start,
        goal,
        measure: ws.mask.area(),
    };
    if start == goal {
        let stats = PlanStats { solved_at: Some(0.0), ..PlanStats::default() };
        let path = GeometricPath::new(vec![start], stats.clone());
        let outcome = PlanOutcome { path: Some(path), stats, trace: vec![(0.0, 0.0)] };
        return Ok(vec![outcome; checkpoints.len()]);
    }
    let mut planner: Box<dyn Anytime> = match cfg.kind {
        PlannerKind::RrtStar => Box::new(rrt_star::RrtStar::new(&mut cx, cfg)),
        PlannerKind::PrmStar => Box::new(prm_star::PrmStar::new(&mut cx, cfg)),
        PlannerKind::BitStar => Box::new(bit_star::BitStar::new(&mut cx, cfg)),
    };
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut live = true;
    loop {
        let t = cx.meter.elapsed();
        while out.len() < checkpoints.len() && t >= checkpoints[out.len()] {
            out.push(snapshot(&mut cx, planner.as_ref()));
        }
        if out.len() == checkpoints.len() || t >= budget || !live {
            break;
        }
        cx.meter.tick();
        cx.stats.iterations += 1;
        live = planner.step(&mut cx);
    }
    while out.len() < checkpoints.len() {
        out.push(snapshot(&mut cx, planner.as_ref()));
    }
    Ok(out)
}

fn snapshot(cx: &mut Ctx, planner: &dyn Anytime) -> PlanOutcome {
    let mut stats = cx.stats.clone();
    stats.elapsed = cx.meter.elapsed_now();
    let path = planner.best().map(|w| {
        stats.solved_at.get_or_insert(stats.elapsed);
        GeometricPath::new(w, stats.clone())
    });
    let mut trace = cx.trace.clone();
    if let Some(p) = &path {
        if trace.last().map_or(true, |&(_, c)| p.length < c) {
            trace.push((stats.elapsed, p.length));
        }
    }
    PlanOutcome { path, stats, trace }
}

#[cfg(test)]
mod tests;
