//! Planning-time accounting.
//!
//! Budgets are measured either on the monotonic wall clock or on a virtual
//! clock that charges a fixed nominal cost per primitive operation. The
//! virtual clock makes budget-limited runs reproducible bit-for-bit, which
//! the benchmark relies on; wall-clock mode is used for timing studies.

use std::time::Instant;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockKind {
    Wall,
    #[default]
    Virtual,
}

/// Nominal operation costs of the virtual clock, in nanoseconds. They model
/// a reference machine about four times slower than a current desktop core.
pub mod cost {
    /// One clearance/mask test at a point.
    pub const POINT_CHECK: u64 = 240;
    /// Drawing one random sample.
    pub const SAMPLE: u64 = 160;
    /// Fixed part of a nearest-neighbour or radius query.
    pub const NN_QUERY: u64 = 1000;
    /// Per candidate examined by a neighbour query.
    pub const NN_CANDIDATE: u64 = 40;
    /// Graph bookkeeping: heap operation, edge insertion, relaxation.
    pub const GRAPH_OP: u64 = 160;
    /// Loop overhead of one planner iteration.
    pub const ITERATION: u64 = 600;
}

/// How often the wall clock is actually read, in iterations.
pub const WALL_CHECK_INTERVAL: u64 = 64;

#[derive(Debug, Clone)]
pub struct Meter {
    kind: ClockKind,
    started: Instant,
    virtual_ns: u64,
    ticks: u64,
    wall_cached: f64,
}

impl Meter {
    pub fn new(kind: ClockKind) -> Self {
        Self { kind, started: Instant::now(), virtual_ns: 0, ticks: 0, wall_cached: 0.0 }
    }

    pub fn kind(&self) -> ClockKind {
        self.kind
    }

    #[inline]
    pub fn charge(&mut self, ns: u64) {
        self.virtual_ns += ns;
    }

    /// Marks the start of a loop iteration.
    #[inline]
    pub fn tick(&mut self) {
        self.virtual_ns += cost::ITERATION;
        self.ticks += 1;
        if self.kind == ClockKind::Wall && self.ticks % WALL_CHECK_INTERVAL == 0 {
            self.wall_cached = self.started.elapsed().as_secs_f64();
        }
    }

    /// Elapsed budget time in seconds. In wall mode this is the value read at
    /// the last check point.
    #[inline]
    pub fn elapsed(&self) -> f64 {
        match self.kind {
            ClockKind::Virtual => self.virtual_ns as f64 * 1e-9,
            ClockKind::Wall => self.wall_cached,
        }
    }

    /// Precise elapsed time, reading the wall clock if needed.
    pub fn elapsed_now(&mut self) -> f64 {
        if self.kind == ClockKind::Wall {
            self.wall_cached = self.started.elapsed().as_secs_f64();
        }
        self.elapsed()
    }

    pub fn wall_elapsed(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }
}
