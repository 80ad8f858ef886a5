//! Indoor scene graph (walls, rooms, doorways), its JSON document format and
//! the weighted room/doorway graph used for semantic search.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{room_contour, ConvexPolygon, GeometryError, Point2};

pub const SCHEMA: &str = "spath-sg/1";
/// Default tolerance between a doorway centroid and the boundaries of the
/// rooms it connects.
pub const DEFAULT_DOOR_EPS: f64 = 0.5;

#[derive(Debug, Error)]
pub enum SceneGraphError {
    #[error("malformed scene graph document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema `{0}` (expected `{SCHEMA}`)")]
    Schema(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("room `{id}`: {reason}")]
    InvalidRoom { id: String, reason: String },
    #[error("doorway `{id}`: {reason}")]
    InvalidDoorway { id: String, reason: String },
    #[error("unknown doorway `{0}`")]
    UnknownDoorway(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Wall plane `normal·p + offset = 0` with the normal pointing into the room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallPlane {
    pub normal: [f64; 3],
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub id: String,
    pub centroid: [f64; 3],
    pub height: f64,
    pub walls: Vec<WallPlane>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Doorway {
    pub id: String,
    pub centroid: [f64; 3],
    pub width: f64,
    pub traversable: bool,
    pub connects: [String; 2],
}

impl Room {
    pub fn centroid_2d(&self) -> Point2<f64> {
        Point2::new(self.centroid[0], self.centroid[1])
    }
}

impl Doorway {
    pub fn centroid_2d(&self) -> Point2<f64> {
        Point2::new(self.centroid[0], self.centroid[1])
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SceneGraph {
    pub rooms: BTreeMap<String, Room>,
    pub doorways: BTreeMap<String, Doorway>,
}

#[derive(Serialize, Deserialize)]
struct Document {
    schema: String,
    rooms: Vec<Room>,
    doorways: Vec<Doorway>,
}

impl SceneGraph {
    /// Builds and validates a scene graph from parts.
    pub fn new(rooms: Vec<Room>, doorways: Vec<Doorway>) -> Result<Self, SceneGraphError> {
        Self::with_door_eps(rooms, doorways, DEFAULT_DOOR_EPS)
    }

    pub fn with_door_eps(rooms: Vec<Room>, doorways: Vec<Doorway>, door_eps: f64) -> Result<Self, SceneGraphError> {
        let mut sg = SceneGraph::default();
        let mut seen = BTreeSet::new();
        for r in rooms {
            if !seen.insert(r.id.clone()) {
                return Err(SceneGraphError::DuplicateId(r.id));
            }
            sg.rooms.insert(r.id.clone(), r);
        }
        for d in doorways {
            if !seen.insert(d.id.clone()) {
                return Err(SceneGraphError::DuplicateId(d.id));
            }
            sg.doorways.insert(d.id.clone(), d);
        }
        sg.validate(door_eps)?;
        Ok(sg)
    }

    pub fn validate(&self, door_eps: f64) -> Result<(), SceneGraphError> {
        let mut polys = BTreeMap::new();
        for r in self.rooms.values() {
            polys.insert(r.id.as_str(), validate_room(r)?);
        }
        for d in self.doorways.values() {
            let bad = |reason: String| SceneGraphError::InvalidDoorway { id: d.id.clone(), reason };
            if !(d.width > 0.0) {
                return Err(bad(format!("width {} must be positive", d.width)));
            }
            if d.connects[0] == d.connects[1] {
                return Err(bad("connects a room to itself".into()));
            }
            for rid in &d.connects {
                let poly = polys.get(rid.as_str()).ok_or_else(|| bad(format!("references unknown room `{rid}`")))?;
                let gap = poly.boundary_distance(d.centroid_2d());
                if gap > door_eps {
                    return Err(bad(format!("centroid is {gap:.3} m from room `{rid}` (limit {door_eps})")));
                }
            }
        }
        Ok(())
    }

    pub fn wall_count(&self) -> usize {
        self.rooms.values().map(|r| r.walls.len()).sum()
    }

    /// Doorways incident to a room, in id order.
    pub fn doorways_of<'a>(&'a self, room: &'a str) -> impl Iterator<Item = &'a Doorway> + 'a {
        self.doorways.values().filter(move |d| d.connects.iter().any(|c| c == room))
    }

    pub fn to_json(&self) -> String {
        let doc = Document {
            schema: SCHEMA.to_string(),
            rooms: self.rooms.values().cloned().collect(),
            doorways: self.doorways.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&doc).expect("scene graph serializes")
    }
}

fn validate_room(r: &Room) -> Result<ConvexPolygon<f64>, SceneGraphError> {
    let bad = |reason: String| SceneGraphError::InvalidRoom { id: r.id.clone(), reason };
    if r.walls.len() < 3 {
        return Err(bad(format!("has {} walls, at least 3 required", r.walls.len())));
    }
    if !(r.height > 0.0) {
        return Err(bad("height must be positive".into()));
    }
    for w in &r.walls {
        let n = w.normal;
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if (len - 1.0).abs() > 1e-9 {
            return Err(bad(format!("wall normal {n:?} is not unit length")));
        }
        if n[2] != 0.0 {
            return Err(bad(format!("wall normal {n:?} is not horizontal")));
        }
    }
    let poly = room_contour::<f64>(r).map_err(|e| bad(e.to_string()))?;
    let c = r.centroid_2d();
    for w in &r.walls {
        if w.normal[0] * c.x + w.normal[1] * c.y + w.offset < -1e-6 {
            return Err(bad("centroid lies outside the walls".into()));
        }
    }
    Ok(poly)
}

/// Parses and validates a scene graph document.
pub fn load_scene_graph(bytes: &[u8]) -> Result<SceneGraph, SceneGraphError> {
    let doc: Document = serde_json::from_slice(bytes)?;
    if doc.schema != SCHEMA {
        return Err(SceneGraphError::Schema(doc.schema));
    }
    SceneGraph::new(doc.rooms, doc.doorways)
}

pub fn save_scene_graph(sg: &SceneGraph) -> Vec<u8> {
    sg.to_json().into_bytes()
}

/// Returns a copy with one doorway's traversability changed.
pub fn set_doorway_state(sg: &SceneGraph, id: &str, traversable: bool) -> Result<SceneGraph, SceneGraphError> {
    let mut out = sg.clone();
    out.doorways.get_mut(id).ok_or_else(|| SceneGraphError::UnknownDoorway(id.to_string()))?.traversable = traversable;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Room,
    Doorway,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticNode {
    pub id: String,
    pub kind: NodeKind,
    pub centroid: [f64; 3],
}

/// Edge cost; blocked doorways get an explicit unreachable marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeWeight {
    Finite(f64),
    Infinite,
}

impl EdgeWeight {
    pub fn finite(self) -> Option<f64> {
        match self {
            EdgeWeight::Finite(w) => Some(w),
            EdgeWeight::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, EdgeWeight::Finite(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticEdge {
    pub a: usize,
    pub b: usize,
    pub weight: EdgeWeight,
}

/// Undirected weighted graph over rooms and doorways. Node indices follow
/// lexicographic id order.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticGraph {
    nodes: Vec<SemanticNode>,
    index: BTreeMap<String, usize>,
    edges: Vec<SemanticEdge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    heuristic_scale: f64,
}

pub fn euclid3(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

impl SemanticGraph {
    /// Builds a graph from raw parts. Edges reference node ids.
    pub fn from_parts(mut nodes: Vec<SemanticNode>, edges: Vec<(String, String, EdgeWeight)>) -> Self {
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        let index: BTreeMap<String, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
        let mut g = SemanticGraph {
            adjacency: vec![Vec::new(); nodes.len()],
            nodes,
            index,
            edges: Vec::new(),
            heuristic_scale: 1.0,
        };
        for (a, b, w) in edges {
            let (a, b) = (g.index[&a], g.index[&b]);
            let e = g.edges.len();
            g.edges.push(SemanticEdge { a, b, weight: w });
            g.adjacency[a].push((b, e));
            g.adjacency[b].push((a, e));
        }
        g
    }

    pub fn nodes(&self) -> &[SemanticNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[SemanticEdge] {
        &self.edges
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn node(&self, i: usize) -> &SemanticNode {
        &self.nodes[i]
    }

    /// `(neighbour, edge index)` pairs.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<EdgeWeight> {
        let (ia, ib) = (self.node_index(a)?, self.node_index(b)?);
        self.adjacency[ia].iter().find(|(n, _)| *n == ib).map(|&(_, e)| self.edges[e].weight)
    }

    /// Factor applied to the Euclidean A* heuristic so that it stays a lower
    /// bound after edge discounting.
    pub fn heuristic_scale(&self) -> f64 {
        self.heuristic_scale
    }

    /// Multiplies the weights of the given node-pair edges by `factor`.
    pub fn discounted<'a>(&self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>, factor: f64) -> Self {
        let mut g = self.clone();
        for (a, b) in pairs {
            let (Some(ia), Some(ib)) = (g.node_index(a), g.node_index(b)) else { continue };
            if let Some(&(_, e)) = g.adjacency[ia].iter().find(|(n, _)| *n == ib) {
                if let EdgeWeight::Finite(w) = g.edges[e].weight {
                    g.edges[e].weight = EdgeWeight::Finite(w * factor);
                }
            }
        }
        if factor < 1.0 {
            g.heuristic_scale = g.heuristic_scale.min(factor);
        }
        g
    }
}

/// One node per room and doorway; each doorway contributes two edges
/// weighted by centroid distance, or unreachable when it is closed.
pub fn build_semantic_graph(sg: &SceneGraph) -> SemanticGraph {
    let mut nodes = Vec::with_capacity(sg.rooms.len() + sg.doorways.len());
    for r in sg.rooms.values() {
        nodes.push(SemanticNode { id: r.id.clone(), kind: NodeKind::Room, centroid: r.centroid });
    }
    for d in sg.doorways.values() {
        nodes.push(SemanticNode { id: d.id.clone(), kind: NodeKind::Doorway, centroid: d.centroid });
    }
    let mut edges = Vec::with_capacity(2 * sg.doorways.len());
    for d in sg.doorways.values() {
        for rid in &d.connects {
            let w = if d.traversable {
                EdgeWeight::Finite(euclid3(sg.rooms[rid].centroid, d.centroid))
            } else {
                EdgeWeight::Infinite
            };
            edges.push((rid.clone(), d.id.clone(), w));
        }
    }
    SemanticGraph::from_parts(nodes, edges)
}
