//! Room-level search: locating endpoints, A* over the room/doorway graph,
//! and the coarse geometric path with its reduced sampling region.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    compose, doorway_contour, room_contour, ComposedContour, ContourMember, ConvexPolygon, GeometryError, Point2,
};
use crate::gridmap::OccupancyGrid;
use crate::scenegraph::{euclid3, NodeKind, SceneGraph, SemanticGraph};

type Point = Point2<f64>;

/// Relative tolerance under which two path weights count as tied.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemanticError {
    #[error("point {0:?} lies in no room or doorway contour")]
    Unlocated(Point),
    #[error("unknown room `{0}`")]
    UnknownRoom(String),
    #[error("no traversable route from `{0}` to `{1}`")]
    Unreachable(String, String),
    #[error("contour of `{id}`: {source}")]
    Contour { id: String, source: GeometryError },
}

fn contour_err(id: &str) -> impl FnOnce(GeometryError) -> SemanticError + '_ {
    move |source| SemanticError::Contour { id: id.to_string(), source }
}

/// Room and doorway polygons of a scene graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Contours {
    pub rooms: BTreeMap<String, ConvexPolygon<f64>>,
    pub doorways: BTreeMap<String, ConvexPolygon<f64>>,
}

impl Contours {
    pub fn len(&self) -> usize {
        self.rooms.len() + self.doorways.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn member(&self, id: &str) -> Option<ContourMember> {
        self.rooms
            .get(id)
            .or_else(|| self.doorways.get(id))
            .map(|p| ContourMember { id: id.to_string(), polygon: p.clone() })
    }
}

/// Builds every room polygon and doorway quad. Doorway quads are at least
/// `min_depth` deep.
pub fn build_contours(sg: &SceneGraph, min_depth: f64) -> Result<Contours, SemanticError> {
    let mut rooms = BTreeMap::new();
    for r in sg.rooms.values() {
        rooms.insert(r.id.clone(), room_contour::<f64>(r).map_err(contour_err(&r.id))?);
    }
    let mut doorways = BTreeMap::new();
    for d in sg.doorways.values() {
        let (a, b) = (&rooms[&d.connects[0]], &rooms[&d.connects[1]]);
        doorways.insert(d.id.clone(), doorway_contour(d, a, b, min_depth).map_err(contour_err(&d.id))?);
    }
    Ok(Contours { rooms, doorways })
}

/// Room containing `p`. A point that lies only in a doorway quad resolves to
/// the connected room whose centroid is nearer.
pub fn locate(p: Point, sg: &SceneGraph, contours: &Contours) -> Result<String, SemanticError> {
    if let Some((id, _)) = contours.rooms.iter().find(|(_, poly)| poly.contains(p)) {
        return Ok(id.clone());
    }
    for (id, poly) in &contours.doorways {
        if poly.contains(p) {
            let d = &sg.doorways[id];
            let [a, b] = &d.connects;
            let (da, db) = (sg.rooms[a].centroid_2d().dist(p), sg.rooms[b].centroid_2d().dist(p));
            let pick = if da < db || (da == db && a <= b) { a } else { b };
            return Ok(pick.clone());
        }
    }
    Err(SemanticError::Unlocated(p))
}

/// Alternating room/doorway sequence from the start room to the goal room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticPath {
    pub nodes: Vec<String>,
    pub total_weight: f64,
}

impl SemanticPath {
    pub fn rooms(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().step_by(2).map(String::as_str)
    }

    pub fn doorways(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().skip(1).step_by(2).map(String::as_str)
    }

    pub fn start_room(&self) -> &str {
        &self.nodes[0]
    }

    pub fn goal_room(&self) -> &str {
        self.nodes.last().expect("non-empty path")
    }

    /// Consecutive node pairs, i.e. the traversed edges.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.nodes.windows(2).map(|w| (w[0].as_str(), w[1].as_str()))
    }

    /// One instruction per doorway hop.
    pub fn render(&self) -> Vec<String> {
        self.nodes.windows(3).step_by(2).map(|w| format!("go from {} through {} to {}", w[0], w[1], w[2])).collect()
    }
}

#[derive(Debug, Clone)]
struct Label {
    g: f64,
    hops: usize,
    seq: Vec<usize>,
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Total order used for labels: weight (with tie tolerance), then hop
/// count, then node sequence (node indices follow id order).
fn label_cmp(a: &Label, b: &Label) -> Ordering {
    if !tied(a.g, b.g) {
        return a.g.total_cmp(&b.g);
    }
    a.hops.cmp(&b.hops).then_with(|| a.seq.cmp(&b.seq))
}

struct Open {
    f: f64,
    node: usize,
    label: Label,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap.
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.label.hops.cmp(&self.label.hops))
            .then_with(|| other.label.seq.cmp(&self.label.seq))
    }
}

/// Minimum-weight route between two rooms. The Euclidean heuristic is scaled
/// by the graph's heuristic scale so it stays admissible under discounted
/// weights. Ties go to fewer hops, then the lexicographically smallest id
/// sequence.
pub fn astar(g: &SemanticGraph, start: &str, goal: &str) -> Result<SemanticPath, SemanticError> {
    let room = |id: &str| {
        g.node_index(id)
            .filter(|&i| g.node(i).kind == NodeKind::Room)
            .ok_or_else(|| SemanticError::UnknownRoom(id.to_string()))
    };
    let (s, t) = (room(start)?, room(goal)?);
    let goal_c = g.node(t).centroid;
    let scale = g.heuristic_scale();
    let h = |i: usize| scale * euclid3(g.node(i).centroid, goal_c);

    let mut best: Vec<Option<Label>> = vec![None; g.nodes().len()];
    let init = Label { g: 0.0, hops: 0, seq: vec![s] };
    best[s] = Some(init.clone());
    let mut open = BinaryHeap::new();
    open.push(Open { f: h(s), node: s, label: init });
    while let Some(Open { f, node, label }) = open.pop() {
        if let Some(goal_label) = &best[t] {
            if f > goal_label.g && !tied(f, goal_label.g) {
                break;
            }
        }
        match &best[node] {
            Some(b) if label_cmp(b, &label) != Ordering::Equal => continue,
            _ => {}
        }
        if node == t {
            continue;
        }
        for &(nbr, e) in g.neighbors(node) {
            let Some(w) = g.edges()[e].weight.finite() else { continue };
            if label.seq.contains(&nbr) {
                continue;
            }
            let mut seq = label.seq.clone();
            seq.push(nbr);
            let cand = Label { g: label.g + w, hops: label.hops + 1, seq };
            let better = best[nbr].as_ref().map_or(true, |b| label_cmp(&cand, b) == Ordering::Less);
            if better {
                best[nbr] = Some(cand.clone());
                open.push(Open { f: cand.g + h(nbr), node: nbr, label: cand });
            }
        }
    }
    let label = best[t].take().ok_or_else(|| SemanticError::Unreachable(start.into(), goal.into()))?;
    Ok(SemanticPath { nodes: label.seq.iter().map(|&i| g.node(i).id.clone()).collect(), total_weight: label.g })
}

/// Coarse geometric path: waypoints through doorway centroids, per-leg
/// regions and their union.
#[derive(Debug, Clone)]
pub struct CoarsePath {
    pub waypoints: Vec<Point>,
    pub region: ComposedContour,
    pub legs: Vec<ComposedContour>,
}

/// Expands a semantic path into waypoints `p_s, δ…, p_g` and leg regions.
/// Leg `i` joins waypoint `i` to `i + 1` through the room between them and
/// the doorway quads at both ends, so consecutive legs overlap in the quad
/// of their shared doorway.
pub fn coarse_path(
    sp: &SemanticPath,
    p_s: Point,
    p_g: Point,
    sg: &SceneGraph,
    contours: &Contours,
    grid: &OccupancyGrid,
) -> Result<CoarsePath, SemanticError> {
    let member = |id: &str| contours.member(id).ok_or_else(|| SemanticError::UnknownRoom(id.to_string()));
    let rooms: Vec<&str> = sp.rooms().collect();
    let doors: Vec<&str> = sp.doorways().collect();
    let mut waypoints = vec![p_s];
    waypoints.extend(doors.iter().map(|d| sg.doorways[*d].centroid_2d()));
    waypoints.push(p_g);

    let mut leg_members: Vec<Vec<ContourMember>> = Vec::with_capacity(rooms.len());
    for (i, room) in rooms.iter().enumerate() {
        let mut m = Vec::with_capacity(3);
        if i > 0 {
            m.push(member(doors[i - 1])?);
        }
        m.push(member(room)?);
        if i < doors.len() {
            m.push(member(doors[i])?);
        }
        leg_members.push(m);
    }
    // Endpoints outside their leg's cells (a doorway-resolved point, or one
    // on a shared edge that rasterized to the neighbour) bring along the
    // doorway quads that contain them.
    for (leg, p) in [(0, p_s), (leg_members.len() - 1, p_g)] {
        let inside = leg_members[leg].iter().any(|m| m.polygon.contains(p))
            && compose(leg_members[leg].clone(), grid).map_err(contour_err("endpoint leg"))?.mask.contains(p);
        if inside {
            continue;
        }
        for (id, poly) in &contours.doorways {
            if poly.contains(p) && !leg_members[leg].iter().any(|m| &m.id == id) {
                leg_members[leg].push(ContourMember { id: id.clone(), polygon: poly.clone() });
            }
        }
    }

    let mut legs = Vec::with_capacity(leg_members.len());
    let mut all: Vec<ContourMember> = Vec::new();
    for m in leg_members {
        for x in &m {
            if !all.iter().any(|y| y.id == x.id) {
                all.push(x.clone());
            }
        }
        let label = m.iter().map(|x| x.id.as_str()).collect::<Vec<_>>().join("+");
        legs.push(compose(m, grid).map_err(contour_err(&label))?);
    }
    let region = compose(all, grid).map_err(contour_err("region"))?;
    Ok(CoarsePath { waypoints, region, legs })
}
