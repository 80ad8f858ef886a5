//! Metric-semantic path planning for indoor floors.
//!
//! A query between two points (or rooms) is first solved on the room/doorway
//! graph of a scene graph. The resulting room sequence restricts sampling to
//! the rooms and doorways on the route and splits the query into
//! doorway-to-doorway subproblems, which are solved by anytime sampling
//! planners (RRT*, PRM*, BIT*) in parallel and stitched back together.
//! Subproblem solutions are cached so that replanning after a doorway is
//! blocked only solves what changed.
//!
//! The geometric kernels and benchmark metrics are generic over the scalar
//! type ([`Scalar`], implemented for `f32` and `f64`); the grid, planners and
//! pipeline work in `f64`, exposed through the aliases below.

pub mod bench;
pub mod clock;
pub mod decompose;
pub mod envgen;
pub mod geometry;
pub mod gridmap;
pub mod pipeline;
pub mod planners;
pub mod rng;
pub mod scalar;
pub mod scenegraph;
pub mod semantic;

pub use scalar::Scalar;

pub type Point = geometry::Point2<f64>;
pub type Line = geometry::Line2D<f64>;
pub type Polygon = geometry::ConvexPolygon<f64>;
