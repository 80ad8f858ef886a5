use super::*;
use crate::geometry::ConvexPolygon;
use crate::gridmap::{distance_field, OccupancyGrid};

fn open_room(w: f64, h: f64) -> (OccupancyGrid, DistanceField, CellMask) {
    let g = OccupancyGrid::new(Point::new(0.0, 0.0), 0.05, (w / 0.05) as usize, (h / 0.05) as usize).unwrap();
    let df = distance_field(&g);
    let mask = CellMask::full(&g);
    (g, df, mask)
}

/// 10 × 10 m with a wall at x ∈ [4.9, 5.1] and a 1.4 m gap centred at y = 8.
fn wall_with_gap() -> (OccupancyGrid, DistanceField, CellMask) {
    let mut g = OccupancyGrid::new(Point::new(0.0, 0.0), 0.05, 200, 200).unwrap();
    g.fill_rect(Point::new(4.9, 0.0), Point::new(5.1, 7.3), true);
    g.fill_rect(Point::new(4.9, 8.7), Point::new(5.1, 10.0), true);
    let df = distance_field(&g);
    let mask = CellMask::full(&g);
    (g, df, mask)
}

#[test]
fn path_length_examples() {
    assert_eq!(path_length(&[Point::new(0.0, 0.0), Point::new(3.0, 4.0)]), 5.0);
    assert_eq!(path_length(&[Point::new(1.0, 1.0)]), 0.0);
    let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)].map(|(x, y)| Point::new(x, y));
    assert_eq!(path_length(&sq), 4.0);
}

#[test]
fn straight_line_in_open_space() {
    let (_, df, mask) = open_room(10.0, 10.0);
    let ws = Workspace { df: &df, mask: &mask };
    let (s, g) = (Point::new(1.0, 1.0), Point::new(9.0, 8.0));
    for kind in PlannerKind::ALL {
        let cfg = PlannerConfig::new(kind).with_budget(0.2).with_seed(3);
        let out = plan(s, g, ws, &cfg).unwrap();
        let len = out.length().unwrap();
        assert!(len <= s.dist(g) * 1.02, "{kind:?}: {len}");
    }
}

#[test]
fn start_equals_goal() {
    let (_, df, mask) = open_room(4.0, 4.0);
    let ws = Workspace { df: &df, mask: &mask };
    let p = Point::new(2.0, 2.0);
    for kind in PlannerKind::ALL {
        let out = plan(p, p, ws, &PlannerConfig::new(kind)).unwrap();
        let path = out.path.unwrap();
        assert_eq!(path.waypoints, vec![p]);
        assert_eq!(path.length, 0.0);
        assert_eq!(out.stats.samples, 0);
    }
}

#[test]
fn invalid_endpoints_are_errors() {
    let (_, df, mask) = wall_with_gap();
    let ws = Workspace { df: &df, mask: &mask };
    let cfg = PlannerConfig::new(PlannerKind::PrmStar);
    let inside_wall = Point::new(5.0, 3.0);
    assert!(matches!(plan(inside_wall, Point::new(1.0, 1.0), ws, &cfg), Err(PlanError::InvalidStart(_))));
    assert!(matches!(plan(Point::new(1.0, 1.0), inside_wall, ws, &cfg), Err(PlanError::InvalidGoal(_))));
    let bad = PlannerConfig { goal_bias: 2.0, ..cfg };
    assert!(matches!(plan(Point::new(1.0, 1.0), Point::new(2.0, 2.0), ws, &bad), Err(PlanError::Config(_))));
}

#[test]
fn unreachable_goal_is_a_failed_outcome() {
    let mut g = OccupancyGrid::new(Point::new(0.0, 0.0), 0.05, 100, 100).unwrap();
    g.fill_rect(Point::new(2.4, 0.0), Point::new(2.6, 5.0), true);
    let df = distance_field(&g);
    let mask = CellMask::full(&g);
    let ws = Workspace { df: &df, mask: &mask };
    for kind in PlannerKind::ALL {
        let cfg = PlannerConfig::new(kind).with_budget(0.05);
        let out = plan(Point::new(1.0, 2.5), Point::new(4.0, 2.5), ws, &cfg).unwrap();
        assert!(!out.solved(), "{kind:?}");
        assert!(out.stats.elapsed >= 0.05);
    }
}

#[test]
fn deterministic_given_seed() {
    let (_, df, mask) = wall_with_gap();
    let ws = Workspace { df: &df, mask: &mask };
    for kind in PlannerKind::ALL {
        let cfg = PlannerConfig::new(kind).with_budget(0.1).with_seed(42);
        let a = plan(Point::new(1.0, 1.0), Point::new(9.0, 1.0), ws, &cfg).unwrap();
        let b = plan(Point::new(1.0, 1.0), Point::new(9.0, 1.0), ws, &cfg).unwrap();
        assert_eq!(a, b, "{kind:?}");
    }
}

#[test]
fn anytime_trace_non_increasing_and_sound() {
    let (_, df, mask) = wall_with_gap();
    let ws = Workspace { df: &df, mask: &mask };
    for kind in PlannerKind::ALL {
        for seed in 0..3 {
            let cfg = PlannerConfig::new(kind).with_budget(0.3).with_seed(seed);
            let out = plan(Point::new(1.0, 1.0), Point::new(9.0, 1.0), ws, &cfg).unwrap();
            assert!(out.trace.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 >= w[0].0), "{kind:?}");
            let path = out.path.expect("solved");
            assert!(path.is_valid(0.3, &df, Some(&mask)));
            assert!((path.length - path_length(&path.waypoints)).abs() < 1e-9);
        }
    }
}

#[test]
fn checkpoints_match_separate_runs() {
    let (_, df, mask) = wall_with_gap();
    let ws = Workspace { df: &df, mask: &mask };
    let budgets = [0.001, 0.004, 0.02, 0.08];
    for kind in PlannerKind::ALL {
        let cfg = PlannerConfig::new(kind).with_budget(0.08).with_seed(9);
        let all = plan_anytime(Point::new(1.0, 1.0), Point::new(9.0, 1.0), ws, &cfg, &budgets).unwrap();
        for (b, snap) in budgets.iter().zip(&all) {
            let single = plan(Point::new(1.0, 1.0), Point::new(9.0, 1.0), ws, &cfg.clone().with_budget(*b)).unwrap();
            assert_eq!(&single, snap, "{kind:?} at {b}");
        }
    }
}

#[test]
fn bit_star_needs_no_samples_for_direct_edge() {
    let (_, df, mask) = open_room(10.0, 10.0);
    let ws = Workspace { df: &df, mask: &mask };
    let cfg = PlannerConfig::new(PlannerKind::BitStar).with_budget(1.0);
    let out = plan(Point::new(1.0, 1.0), Point::new(8.0, 9.0), ws, &cfg).unwrap();
    assert_eq!(out.stats.samples, 0);
    assert_eq!(out.path.unwrap().waypoints.len(), 2);
    assert!(out.stats.elapsed < 1e-3);
}

#[test]
fn region_mask_is_respected() {
    let (g, df, _) = open_room(10.0, 10.0);
    let left = ConvexPolygon::new(
        vec![Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(4.0, 10.0), Point::new(0.0, 10.0)],
        1.0,
    )
    .unwrap();
    let top = ConvexPolygon::new(
        vec![Point::new(0.0, 6.0), Point::new(10.0, 6.0), Point::new(10.0, 10.0), Point::new(0.0, 10.0)],
        1.0,
    )
    .unwrap();
    let mask = crate::gridmap::rasterize(&[&left, &top], &g).unwrap();
    let ws = Workspace { df: &df, mask: &mask };
    for kind in PlannerKind::ALL {
        let cfg = PlannerConfig::new(kind).with_budget(0.2).with_seed(1);
        let out = plan(Point::new(1.0, 1.0), Point::new(9.0, 9.0), ws, &cfg).unwrap();
        let path = out.path.expect("solved");
        assert!(path.is_valid(0.3, &df, Some(&mask)), "{kind:?}");
        assert!(path.length > Point::new(1.0, 1.0).dist(Point::new(9.0, 9.0)) + 0.2);
    }
}
