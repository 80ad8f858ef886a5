//! Splitting a coarse path into independent point-to-point subproblems,
//! merging the small ones and sharing a time budget between them.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::{ComposedContour, GeometryError, Point2};
use crate::gridmap::OccupancyGrid;
use crate::scenegraph::SceneGraph;
use crate::semantic::CoarsePath;

type Point = Point2<f64>;

/// Default merge threshold as a fraction of the mean effort.
pub const DEFAULT_MERGE_THETA: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct Subproblem {
    pub start: Point,
    pub goal: Point,
    pub contour: ComposedContour,
    pub effort: f64,
    /// Time budget in seconds; zero until allocated.
    pub budget: f64,
    pub cache_key: u64,
}

/// Summary of a subproblem without its mask, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemInfo {
    pub start: Point,
    pub goal: Point,
    pub members: Vec<String>,
    pub effort: f64,
    pub budget: f64,
    pub cache_key: u64,
}

impl Subproblem {
    pub fn new(start: Point, goal: Point, contour: ComposedContour, sg: &SceneGraph) -> Self {
        let effort = effort(start, goal, contour.area);
        let cache_key = cache_key(start, goal, &contour, sg);
        Self { start, goal, contour, effort, budget: 0.0, cache_key }
    }

    pub fn info(&self) -> SubproblemInfo {
        SubproblemInfo {
            start: self.start,
            goal: self.goal,
            members: self.contour.member_ids().map(String::from).collect(),
            effort: self.effort,
            budget: self.budget,
            cache_key: self.cache_key,
        }
    }

    /// Joins `self` with the following subproblem.
    pub fn merge(&self, next: &Self, sg: &SceneGraph, grid: &OccupancyGrid) -> Result<Self, GeometryError> {
        let contour = self.contour.union(&next.contour, grid)?;
        Ok(Self::new(self.start, next.goal, contour, sg))
    }
}

/// Planning effort: straight-line distance plus the square root of the
/// region area.
pub fn effort(start: Point, goal: Point, area: f64) -> f64 {
    start.dist(goal) + area.max(0.0).sqrt()
}

/// Stable 64-bit key over endpoints, region members and the states of the
/// doorways among them.
pub fn cache_key(start: Point, goal: Point, contour: &ComposedContour, sg: &SceneGraph) -> u64 {
    let mut h = Sha256::new();
    for v in [start.x, start.y, goal.x, goal.y] {
        h.update(v.to_bits().to_le_bytes());
    }
    let mut ids: Vec<&str> = contour.member_ids().collect();
    ids.sort_unstable();
    ids.dedup();
    for id in &ids {
        h.update((id.len() as u64).to_le_bytes());
        h.update(id.as_bytes());
    }
    for id in &ids {
        if let Some(d) = sg.doorways.get(*id) {
            h.update([d.traversable as u8]);
        }
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// One subproblem per coarse-path leg.
pub fn decompose(cp: &CoarsePath, sg: &SceneGraph) -> Vec<Subproblem> {
    cp.legs
        .iter()
        .enumerate()
        .map(|(i, leg)| Subproblem::new(cp.waypoints[i], cp.waypoints[i + 1], leg.clone(), sg))
        .collect()
}

/// Index of the item to merge next and the neighbour to merge it with, or
/// `None` when every effort is at least `theta` times the mean.
///
/// The smallest item below the threshold is chosen (lowest index on ties)
/// and joined with whichever neighbour has the lower effort (the
/// predecessor on ties).
pub fn merge_choice(efforts: &[f64], theta: f64) -> Option<(usize, usize)> {
    if efforts.len() < 2 {
        return None;
    }
    let mean = efforts.iter().sum::<f64>() / efforts.len() as f64;
    let threshold = theta * mean;
    let mut pick: Option<usize> = None;
    for (i, &e) in efforts.iter().enumerate() {
        if e < threshold && pick.map_or(true, |p| e < efforts[p]) {
            pick = Some(i);
        }
    }
    let i = pick?;
    let j = match (i.checked_sub(1), (i + 1 < efforts.len()).then_some(i + 1)) {
        (Some(l), Some(r)) => {
            if efforts[r] < efforts[l] {
                r
            } else {
                l
            }
        }
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (None, None) => return None,
    };
    Some((i.min(j), i.max(j)))
}

/// Repeatedly merges adjacent items per [`merge_choice`], recomputing the
/// mean after every merge, until no item is below the threshold.
pub fn merge_by<T, E>(
    mut items: Vec<T>,
    theta: f64,
    effort: impl Fn(&T) -> f64,
    mut join: impl FnMut(&T, &T) -> Result<T, E>,
) -> Result<Vec<T>, E> {
    loop {
        let efforts: Vec<f64> = items.iter().map(&effort).collect();
        let Some((a, b)) = merge_choice(&efforts, theta) else { return Ok(items) };
        let merged = join(&items[a], &items[b])?;
        items.splice(a..=b, [merged]);
    }
}

pub fn merge_small(
    subs: Vec<Subproblem>,
    theta: f64,
    sg: &SceneGraph,
    grid: &OccupancyGrid,
) -> Result<Vec<Subproblem>, GeometryError> {
    merge_by(subs, theta, |s| s.effort, |a, b| a.merge(b, sg, grid))
}

/// Budget share of one subproblem. Shared with the benchmark so checkpoint
/// budgets match allocated ones bit-for-bit.
pub fn share(ttp: f64, effort: f64, total: f64, count: usize) -> f64 {
    if total > 0.0 {
        ttp * effort / total
    } else {
        ttp / count as f64
    }
}

/// Sets each budget proportional to effort so the budgets sum to `ttp`.
pub fn allocate(subs: &mut [Subproblem], ttp: f64) {
    let total: f64 = subs.iter().map(|s| s.effort).sum();
    let n = subs.len();
    for s in subs.iter_mut() {
        s.budget = share(ttp, s.effort, total, n);
    }
}
