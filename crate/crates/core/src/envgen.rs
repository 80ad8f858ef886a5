//! Synthetic multi-room floors (scene graph plus matching occupancy grid)
//! and small hand-made fixtures.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2;
use crate::gridmap::{distance_field, is_valid, GridError, GridMeta, OccupancyGrid, Rect};
use crate::rng::PortableRng;
use crate::scenegraph::{load_scene_graph, save_scene_graph, Doorway, Room, SceneGraph, SceneGraphError, WallPlane};

type Point = Point2<f64>;

#[derive(Debug, Error)]
pub enum EnvGenError {
    #[error("infeasible floor spec: {0}")]
    Infeasible(String),
    #[error(transparent)]
    SceneGraph(#[from] SceneGraphError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FloorSpec {
    pub rows: usize,
    pub cols: usize,
    /// Office interior side length range, meters.
    pub room_size: [f64; 2],
    pub wall_thickness: f64,
    /// Adds a corridor between the two central office rows.
    pub corridor: bool,
    pub corridor_width: f64,
    pub door_width: [f64; 2],
    /// Obstacles per office.
    pub obstacles: usize,
    pub obstacle_size: [f64; 2],
    /// Probability of an extra office-to-office doorway beyond those needed
    /// for connectivity.
    pub open_door_prob: f64,
    pub robot_radius: f64,
    pub resolution: f64,
    pub seed: u64,
}

impl Default for FloorSpec {
    fn default() -> Self {
        Self {
            rows: 2,
            cols: 3,
            room_size: [8.0, 9.0],
            wall_thickness: 0.2,
            corridor: true,
            corridor_width: 2.2,
            door_width: [1.2, 1.6],
            obstacles: 3,
            obstacle_size: [0.4, 1.2],
            open_door_prob: 0.1,
            robot_radius: crate::gridmap::DEFAULT_ROBOT_RADIUS,
            resolution: crate::gridmap::DEFAULT_RESOLUTION,
            seed: 1,
        }
    }
}

impl FloorSpec {
    /// Six offices along a corridor, roughly 500 m².
    pub fn six_room_corridor(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// Four rows of twelve offices around a central corridor: 60 rooms and
    /// about 60 doorways.
    pub fn large_office(seed: u64) -> Self {
        Self { rows: 4, cols: 12, room_size: [5.0, 6.5], obstacles: 2, open_door_prob: 0.05, seed, ..Self::default() }
    }
}

/// Axis-aligned room interior.
#[derive(Debug, Clone, PartialEq)]
pub struct RectRoom {
    pub id: String,
    pub lo: Point,
    pub hi: Point,
}

impl RectRoom {
    pub fn new(id: impl Into<String>, lo: (f64, f64), hi: (f64, f64)) -> Self {
        Self { id: id.into(), lo: Point::new(lo.0, lo.1), hi: Point::new(hi.0, hi.1) }
    }

    pub fn center(&self) -> Point {
        (self.lo + self.hi) * 0.5
    }

    fn to_room(&self, height: f64) -> Room {
        let c = self.center();
        Room {
            id: self.id.clone(),
            centroid: [c.x, c.y, 0.0],
            height,
            walls: vec![
                WallPlane { normal: [1.0, 0.0, 0.0], offset: 0.0 - self.lo.x },
                WallPlane { normal: [-1.0, 0.0, 0.0], offset: self.hi.x },
                WallPlane { normal: [0.0, 1.0, 0.0], offset: 0.0 - self.lo.y },
                WallPlane { normal: [0.0, -1.0, 0.0], offset: self.hi.y },
            ],
        }
    }
}

/// Doorway between two rectangular rooms, by room index.
#[derive(Debug, Clone, PartialEq)]
pub struct DoorSpec {
    pub id: String,
    pub a: usize,
    pub b: usize,
    pub center: Point,
    pub width: f64,
}

/// Opening rectangle cut through the wall between two rooms.
fn opening(a: &RectRoom, b: &RectRoom, center: Point, width: f64) -> (Point, Point) {
    let half = width / 2.0;
    if a.hi.x <= b.lo.x || b.hi.x <= a.lo.x {
        let (x0, x1) = if a.hi.x <= b.lo.x { (a.hi.x, b.lo.x) } else { (b.hi.x, a.lo.x) };
        (Point::new(x0, center.y - half), Point::new(x1, center.y + half))
    } else {
        let (y0, y1) = if a.hi.y <= b.lo.y { (a.hi.y, b.lo.y) } else { (b.hi.y, a.lo.y) };
        (Point::new(center.x - half, y0), Point::new(center.x + half, y1))
    }
}

pub const ROOM_HEIGHT: f64 = 3.0;

/// Builds a scene graph and grid from rectangular rooms. Everything outside
/// room interiors and doorway openings is occupied; obstacle rectangles are
/// then added.
pub fn build_floor(
    rooms: &[RectRoom],
    doors: &[DoorSpec],
    obstacles: &[Rect],
    wall: f64,
    resolution: f64,
) -> Result<(SceneGraph, OccupancyGrid), EnvGenError> {
    if rooms.is_empty() {
        return Err(EnvGenError::Infeasible("no rooms".into()));
    }
    let snap_down = |v: f64| (v / resolution).floor() * resolution;
    let snap_up = |v: f64| (v / resolution).ceil() * resolution;
    let lo_x = rooms.iter().map(|r| r.lo.x).fold(f64::INFINITY, f64::min) - wall;
    let lo_y = rooms.iter().map(|r| r.lo.y).fold(f64::INFINITY, f64::min) - wall;
    let hi_x = rooms.iter().map(|r| r.hi.x).fold(f64::NEG_INFINITY, f64::max) + wall;
    let hi_y = rooms.iter().map(|r| r.hi.y).fold(f64::NEG_INFINITY, f64::max) + wall;
    let origin = Point::new(snap_down(lo_x), snap_down(lo_y));
    let w = ((snap_up(hi_x) - origin.x) / resolution).round() as usize;
    let h = ((snap_up(hi_y) - origin.y) / resolution).round() as usize;
    let mut grid = OccupancyGrid::new(origin, resolution, w, h)?;
    grid.fill_rect(origin, Point::new(origin.x + w as f64 * resolution, origin.y + h as f64 * resolution), true);
    for r in rooms {
        grid.fill_rect(r.lo, r.hi, false);
    }
    for d in doors {
        let (lo, hi) = opening(&rooms[d.a], &rooms[d.b], d.center, d.width);
        grid.fill_rect(lo, hi, false);
    }
    for o in obstacles {
        grid.fill_rect(o.min.into(), o.max.into(), true);
    }
    let sg_rooms = rooms.iter().map(|r| r.to_room(ROOM_HEIGHT)).collect();
    let sg_doors = doors
        .iter()
        .map(|d| Doorway {
            id: d.id.clone(),
            centroid: [d.center.x, d.center.y, 0.0],
            width: d.width,
            traversable: true,
            connects: [rooms[d.a].id.clone(), rooms[d.b].id.clone()],
        })
        .collect();
    Ok((SceneGraph::new(sg_rooms, sg_doors)?, grid))
}

fn snap(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Generates a floor of `rows × cols` offices, optionally around a corridor
/// made of one segment per column joined by artificial doorways.
pub fn generate(spec: &FloorSpec) -> Result<(SceneGraph, OccupancyGrid), EnvGenError> {
    let bad = |m: &str| Err(EnvGenError::Infeasible(m.to_string()));
    if spec.rows == 0 || spec.cols == 0 {
        return bad("rows and cols must be positive");
    }
    if !(spec.resolution > 0.0) || !(spec.wall_thickness >= spec.resolution) {
        return bad("wall thickness must be at least one cell");
    }
    let r = spec.robot_radius;
    if spec.door_width[0] < 4.0 * r || spec.door_width[1] < spec.door_width[0] {
        return bad("doorway width range must start at two robot diameters");
    }
    if spec.room_size[0] < spec.door_width[1] + 4.0 * r || spec.room_size[1] < spec.room_size[0] {
        return bad("rooms too small for their doorways");
    }
    if spec.corridor && spec.corridor_width < 2.0 * r + 2.0 * spec.resolution {
        return bad("corridor narrower than the robot");
    }
    let step = 2.0 * spec.resolution;
    let t = snap(spec.wall_thickness, spec.resolution);
    let mut rng = PortableRng::new(spec.seed);

    let col_w: Vec<f64> = (0..spec.cols).map(|_| snap(rng.range(spec.room_size[0], spec.room_size[1]), step)).collect();
    let row_h: Vec<f64> = (0..spec.rows).map(|_| snap(rng.range(spec.room_size[0], spec.room_size[1]), step)).collect();
    let corridor_after = spec.corridor.then(|| (spec.rows / 2).max(1) - 1);
    let cw = snap(spec.corridor_width, step);

    let mut xs = Vec::with_capacity(spec.cols);
    let mut x = t;
    for &w in &col_w {
        xs.push(x);
        x += w + t;
    }
    let total_w = x;
    let mut ys = Vec::with_capacity(spec.rows);
    let mut y = t;
    let mut corridor_y = None;
    for (row, &h) in row_h.iter().enumerate() {
        ys.push(y);
        y += h + t;
        if corridor_after == Some(row) {
            corridor_y = Some(y);
            y += cw + t;
        }
    }

    let mut rooms = Vec::new();
    let office = |row: usize, col: usize| row * spec.cols + col;
    for row in 0..spec.rows {
        for col in 0..spec.cols {
            rooms.push(RectRoom::new(
                format!("R{row}_{col}"),
                (xs[col], ys[row]),
                (xs[col] + col_w[col], ys[row] + row_h[row]),
            ));
        }
    }
    let corridor_base = rooms.len();
    if let Some(cy) = corridor_y {
        for col in 0..spec.cols {
            let x0 = if col == 0 { t } else { xs[col] - t / 2.0 };
            let x1 = if col + 1 == spec.cols { total_w - t } else { xs[col] + col_w[col] + t / 2.0 };
            rooms.push(RectRoom::new(format!("C{col}"), (x0, cy), (x1, cy + cw)));
        }
    }

    let door_width = |rng: &mut PortableRng| snap(rng.range(spec.door_width[0], spec.door_width[1]), step);
    // Door centre along a wall span, keeping the opening away from corners.
    let along = |rng: &mut PortableRng, lo: f64, hi: f64, w: f64| {
        let margin = w / 2.0 + 2.0 * r;
        snap(rng.range(lo + margin, hi - margin), spec.resolution)
    };
    let mut doors: Vec<DoorSpec> = Vec::new();
    let mut uf = UnionFind((0..rooms.len()).collect());
    if let Some(cy) = corridor_y {
        for col in 0..spec.cols.saturating_sub(1) {
            let (a, b) = (corridor_base + col, corridor_base + col + 1);
            let c = Point::new(rooms[a].hi.x, cy + cw / 2.0);
            doors.push(DoorSpec { id: format!("J{col}_{}", col + 1), a, b, center: c, width: snap(0.8 * cw, step) });
            uf.union(a, b);
        }
        let below = corridor_after.expect("corridor row");
        for col in 0..spec.cols {
            for row in [below, below + 1] {
                if row >= spec.rows {
                    continue;
                }
                let (o, c) = (office(row, col), corridor_base + col);
                let w = door_width(&mut rng);
                let cx = along(&mut rng, rooms[o].lo.x, rooms[o].hi.x, w);
                let wy = if row == below { (rooms[o].hi.y + cy) / 2.0 } else { (cy + cw + rooms[o].lo.y) / 2.0 };
                doors.push(DoorSpec {
                    id: format!("D{row}_{col}_C"),
                    a: o,
                    b: c,
                    center: Point::new(cx, wy),
                    width: w,
                });
                uf.union(o, c);
            }
        }
    }

    let mut candidates = Vec::new();
    for row in 0..spec.rows {
        for col in 0..spec.cols {
            if col + 1 < spec.cols {
                candidates.push((office(row, col), office(row, col + 1)));
            }
            if row + 1 < spec.rows && corridor_after != Some(row) {
                candidates.push((office(row, col), office(row + 1, col)));
            }
        }
    }
    for i in (1..candidates.len()).rev() {
        let j = rng.below(i + 1);
        candidates.swap(i, j);
    }
    let mut chosen = Vec::new();
    for (a, b) in candidates {
        let extra = rng.chance(spec.open_door_prob);
        if uf.union(a, b) || extra {
            chosen.push((a.min(b), a.max(b)));
        }
    }
    chosen.sort();
    for (a, b) in chosen {
        let w = door_width(&mut rng);
        let (ra, rb) = (&rooms[a], &rooms[b]);
        let center = if ra.hi.x < rb.lo.x {
            Point::new((ra.hi.x + rb.lo.x) / 2.0, along(&mut rng, ra.lo.y, ra.hi.y, w))
        } else {
            Point::new(along(&mut rng, ra.lo.x, ra.hi.x, w), (ra.hi.y + rb.lo.y) / 2.0)
        };
        doors.push(DoorSpec {
            id: format!("D{}_{}", ra.id.trim_start_matches('R'), rb.id.trim_start_matches('R')),
            a,
            b,
            center,
            width: w,
        });
    }

    let obstacles = place_obstacles(spec, &rooms[..corridor_base], &doors, &mut rng);
    build_floor(&rooms, &doors, &obstacles, t, spec.resolution)
}

fn rect_point_distance(lo: Point, hi: Point, p: Point) -> f64 {
    let dx = (lo.x - p.x).max(0.0).max(p.x - hi.x);
    let dy = (lo.y - p.y).max(0.0).max(p.y - hi.y);
    dx.hypot(dy)
}

fn rect_rect_distance(a: &Rect, b: &Rect) -> f64 {
    let dx = (a.min[0] - b.max[0]).max(0.0).max(b.min[0] - a.max[0]);
    let dy = (a.min[1] - b.max[1]).max(0.0).max(b.min[1] - a.max[1]);
    dx.hypot(dy)
}

/// Rectangular obstacles inside offices, kept away from walls, doorways,
/// room centres and each other so that every room stays connected.
fn place_obstacles(spec: &FloorSpec, offices: &[RectRoom], doors: &[DoorSpec], rng: &mut PortableRng) -> Vec<Rect> {
    let r = spec.robot_radius;
    let res = spec.resolution;
    let passage = 2.0 * r + 4.0 * res;
    let mut out = Vec::new();
    for (k, room) in offices.iter().enumerate() {
        let door_pts: Vec<Point> = doors.iter().filter(|d| d.a == k || d.b == k).map(|d| d.center).collect();
        let mut placed: Vec<Rect> = Vec::new();
        let mut attempts = 0;
        while placed.len() < spec.obstacles && attempts < 200 {
            attempts += 1;
            let w = snap(rng.range(spec.obstacle_size[0], spec.obstacle_size[1]), res);
            let h = snap(rng.range(spec.obstacle_size[0], spec.obstacle_size[1]), res);
            let (x_lo, x_hi) = (room.lo.x + passage, room.hi.x - passage - w);
            let (y_lo, y_hi) = (room.lo.y + passage, room.hi.y - passage - h);
            if x_hi <= x_lo || y_hi <= y_lo {
                continue;
            }
            let x = snap(rng.range(x_lo, x_hi), res);
            let y = snap(rng.range(y_lo, y_hi), res);
            let rect = Rect { min: [x, y], max: [x + w, y + h] };
            let (lo, hi) = (Point::new(x, y), Point::new(x + w, y + h));
            if rect_point_distance(lo, hi, room.center()) < r + 4.0 * res {
                continue;
            }
            if door_pts.iter().any(|&d| rect_point_distance(lo, hi, d) < 2.0 * r + passage) {
                continue;
            }
            if placed.iter().any(|o| rect_rect_distance(o, &rect) < passage) {
                continue;
            }
            placed.push(rect);
        }
        out.extend(placed);
    }
    out
}

/// Pairs of rooms on which the semantic graph and the free space disagree.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub rooms: usize,
    /// `(room a, room b, reachable semantically, reachable in the grid)`.
    pub disagreements: Vec<(String, String, bool, bool)>,
}

impl ConnectivityReport {
    pub fn is_clean(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Compares room reachability through traversable doorways with
/// reachability through free space for a disc robot of `radius`.
pub fn connectivity_check(sg: &SceneGraph, grid: &OccupancyGrid, radius: f64) -> ConnectivityReport {
    let ids: Vec<&String> = sg.rooms.keys().collect();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();

    let mut semantic = UnionFind((0..ids.len()).collect());
    for d in sg.doorways.values().filter(|d| d.traversable) {
        semantic.union(index[d.connects[0].as_str()], index[d.connects[1].as_str()]);
    }

    let df = distance_field(grid);
    let n = grid.width * grid.height;
    let free: Vec<bool> =
        (0..n).map(|k| is_valid(grid.cell_center(k % grid.width, k / grid.width), radius, &df, None)).collect();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for s in 0..n {
        if !free[s] || label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        queue.push_back(s);
        while let Some(k) = queue.pop_front() {
            let (i, j) = (k % grid.width, k / grid.width);
            let mut visit = |nk: usize| {
                if free[nk] && label[nk] == usize::MAX {
                    label[nk] = next;
                    queue.push_back(nk);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < grid.width {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - grid.width);
            }
            if j + 1 < grid.height {
                visit(k + grid.width);
            }
        }
        next += 1;
    }

    // Free-space component of each room: the components of its free cells.
    let comps: Vec<BTreeSet<usize>> = ids
        .iter()
        .map(|id| {
            let poly = crate::geometry::room_contour::<f64>(&sg.rooms[*id]).expect("validated room");
            let (lo, hi) = poly.bbox();
            let mut set = BTreeSet::new();
            for j in 0..grid.height {
                for i in 0..grid.width {
                    let c = grid.cell_center(i, j);
                    if c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y && poly.contains(c) {
                        let l = label[j * grid.width + i];
                        if l != usize::MAX {
                            set.insert(l);
                        }
                    }
                }
            }
            set
        })
        .collect();

    let mut report = ConnectivityReport { rooms: ids.len(), disagreements: Vec::new() };
    for a in 0..ids.len() {
        for b in a + 1..ids.len() {
            let sem = semantic.find(a) == semantic.find(b);
            let geo = !comps[a].is_disjoint(&comps[b]);
            if sem != geo {
                report.disagreements.push((ids[a].clone(), ids[b].clone(), sem, geo));
            }
        }
    }
    report
}

/// File names inside an environment directory.
pub const SCENE_GRAPH_FILE: &str = "scene_graph.json";
pub const GRID_FILE: &str = "grid.pgm";
pub const GRID_META_FILE: &str = "grid.json";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EnvGenError + '_ {
    move |source| EnvGenError::Io { path: path.display().to_string(), source }
}

/// Writes the scene graph JSON and the PGM grid with its sidecar into `dir`.
pub fn write_env_dir(dir: &Path, sg: &SceneGraph, grid: &OccupancyGrid) -> Result<(), EnvGenError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let meta = serde_json::to_vec_pretty(&grid.meta()).expect("grid meta serializes");
    for (name, bytes) in [(SCENE_GRAPH_FILE, save_scene_graph(sg)), (GRID_FILE, grid.to_pgm()), (GRID_META_FILE, meta)]
    {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))?;
    }
    Ok(())
}

pub fn read_env_dir(dir: &Path) -> Result<(SceneGraph, OccupancyGrid), EnvGenError> {
    let read = |name: &str| {
        let path = dir.join(name);
        fs::read(&path).map_err(|source| EnvGenError::Io { path: path.display().to_string(), source })
    };
    let sg = load_scene_graph(&read(SCENE_GRAPH_FILE)?)?;
    let meta_path = dir.join(GRID_META_FILE);
    let meta: GridMeta = serde_json::from_slice(&read(GRID_META_FILE)?)
        .map_err(|source| EnvGenError::Json { path: meta_path.display().to_string(), source })?;
    let grid = OccupancyGrid::from_pgm(&read(GRID_FILE)?, &meta)?;
    Ok((sg, grid))
}

/// Where a scenario's environment comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvSource {
    /// Environment directory, relative to the scenario file.
    Dir(String),
    /// Floor generated on load.
    Generate(FloorSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioQuery {
    pub name: String,
    /// `x,y` or a room id.
    pub start: String,
    pub goal: String,
}

/// Doorway that turns out to be closed after `query` has been planned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blockage {
    pub query: String,
    pub doorway: String,
}

/// Benchmark input: an environment, queries and blockage events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub env: EnvSource,
    pub queries: Vec<ScenarioQuery>,
    #[serde(default)]
    pub blockages: Vec<Blockage>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, EnvGenError> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        serde_json::from_slice(&bytes).map_err(|source| EnvGenError::Json { path: path.display().to_string(), source })
    }

    /// Loads or generates the environment; directories resolve against `base`.
    pub fn environment(&self, base: &Path) -> Result<(SceneGraph, OccupancyGrid), EnvGenError> {
        match &self.env {
            EnvSource::Dir(d) => read_env_dir(&base.join(d)),
            EnvSource::Generate(spec) => generate(spec),
        }
    }
}

/// Hand-authored floors used by tests and examples.
pub mod fixtures {
    use super::*;

    const WALL: f64 = 0.2;
    const RES: f64 = 0.05;

    fn door(id: &str, a: usize, b: usize, c: (f64, f64), width: f64) -> DoorSpec {
        DoorSpec { id: id.into(), a, b, center: Point::new(c.0, c.1), width }
    }

    /// Two 4 m rooms `A`, `B` side by side, joined by doorway `D1`.
    pub fn two_room() -> (SceneGraph, OccupancyGrid) {
        let rooms = [RectRoom::new("A", (0.0, 0.0), (4.0, 4.0)), RectRoom::new("B", (4.2, 0.0), (8.2, 4.0))];
        build_floor(&rooms, &[door("D1", 0, 1, (4.1, 2.0), 1.2)], &[], WALL, RES).expect("valid fixture")
    }

    /// `R1 - D1 - R2 - D2 - R3` in a row.
    pub fn three_room_chain() -> (SceneGraph, OccupancyGrid) {
        let rooms = [
            RectRoom::new("R1", (0.0, 0.0), (5.0, 4.0)),
            RectRoom::new("R2", (5.2, 0.0), (10.2, 4.0)),
            RectRoom::new("R3", (10.4, 0.0), (15.4, 4.0)),
        ];
        let doors = [door("D1", 0, 1, (5.1, 1.0), 1.2), door("D2", 1, 2, (10.3, 3.0), 1.2)];
        build_floor(&rooms, &doors, &[], WALL, RES).expect("valid fixture")
    }

    /// Three rooms in a row whose walls are broken by pillars, used for
    /// restriction experiments.
    pub fn three_room_corridor() -> (SceneGraph, OccupancyGrid) {
        let rooms = [
            RectRoom::new("R1", (0.0, 0.0), (6.0, 6.0)),
            RectRoom::new("R2", (6.2, 0.0), (12.2, 6.0)),
            RectRoom::new("R3", (12.4, 0.0), (18.4, 6.0)),
            RectRoom::new("S1", (0.0, 6.2), (9.1, 12.0)),
            RectRoom::new("S2", (9.3, 6.2), (18.4, 12.0)),
        ];
        let doors = [
            door("D1", 0, 1, (6.1, 5.0), 1.2),
            door("D2", 1, 2, (12.3, 1.0), 1.2),
            door("D3", 0, 3, (1.0, 6.1), 1.2),
            door("D4", 3, 4, (9.2, 11.0), 1.2),
            door("D5", 2, 4, (17.4, 6.1), 1.2),
        ];
        let obstacles = [
            Rect { min: [2.5, 2.5], max: [3.5, 3.5] },
            Rect { min: [8.5, 2.0], max: [9.5, 4.0] },
            Rect { min: [14.5, 2.5], max: [15.5, 3.5] },
        ];
        build_floor(&rooms, &doors, &obstacles, WALL, RES).expect("valid fixture")
    }

    /// Four rooms on a 2×2 grid (`RA` bottom-left, `RB` bottom-right, `RC`
    /// top-left, `RD` top-right) with a doorway on every shared wall.
    pub fn square_of_rooms() -> (SceneGraph, OccupancyGrid) {
        let rooms = [
            RectRoom::new("RA", (0.0, 0.0), (5.0, 5.0)),
            RectRoom::new("RB", (5.2, 0.0), (10.2, 5.0)),
            RectRoom::new("RC", (0.0, 5.2), (5.0, 10.2)),
            RectRoom::new("RD", (5.2, 5.2), (10.2, 10.2)),
        ];
        let doors = [
            door("DAB", 0, 1, (5.1, 2.5), 1.2),
            door("DAC", 0, 2, (2.5, 5.1), 1.2),
            door("DBD", 1, 3, (7.7, 5.1), 1.2),
            door("DCD", 2, 3, (5.1, 7.7), 1.2),
        ];
        build_floor(&rooms, &doors, &[], WALL, RES).expect("valid fixture")
    }

    /// Two rows of rooms with `cols` columns: a doorway between every
    /// vertical pair, along the whole bottom row, and `top` doorways along
    /// the top row starting from the left.
    fn two_row_block(cols: usize, top: usize) -> (SceneGraph, OccupancyGrid) {
        let (w, h) = (4.0, 5.0);
        let mut rooms = Vec::new();
        for row in 0..2 {
            for col in 0..cols {
                let x0 = col as f64 * (w + WALL);
                let y0 = row as f64 * (h + WALL);
                rooms.push(RectRoom::new(format!("R{row}_{col:02}"), (x0, y0), (x0 + w, y0 + h)));
            }
        }
        let mut doors = Vec::new();
        for col in 0..cols {
            let x = col as f64 * (w + WALL) + w / 2.0;
            doors.push(door(&format!("V{col:02}"), col, cols + col, (x, h + WALL / 2.0), 1.2));
        }
        for (row, count) in [(0, cols - 1), (1, top)] {
            for col in 0..count {
                let x = (col + 1) as f64 * (w + WALL) - WALL / 2.0;
                let y = row as f64 * (h + WALL) + if row == 0 { 1.5 } else { 3.5 };
                let a = row * cols + col;
                doors.push(door(&format!("H{row}_{col:02}"), a, a + 1, (x, y), 1.2));
            }
        }
        build_floor(&rooms, &doors, &[], WALL, RES).expect("valid fixture")
    }

    /// 22 rooms, 23 doorways, 88 walls.
    pub fn block_22() -> (SceneGraph, OccupancyGrid) {
        two_row_block(11, 2)
    }

    /// 8 rooms, 8 doorways, 32 walls.
    pub fn block_8() -> (SceneGraph, OccupancyGrid) {
        two_row_block(4, 1)
    }
}
