use alloc::vec::Vec;

use super::{FloorPlan, Point2, Point3, Segment};

/// Result of [`count_walls`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WallCount {
    /// Fewest interior walls penetrated by the direct path or any corridor detour.
    pub num_walls: usize,
    /// The direct segment crosses no wall.
    pub los: bool,
}

/// Counts the interior walls between `a` and `b`.
///
/// Candidate paths are the direct segment and every two-segment path through
/// a corridor waypoint; the result is the minimum crossing count over them.
/// Walls are floor-to-ceiling, so only the horizontal projection matters.
pub fn count_walls(plan: &FloorPlan, a: Point3, b: Point3) -> WallCount {
    let (a, b) = (a.xy(), b.xy());
    let mut scratch = Vec::with_capacity(16);
    let direct = crossings(plan.interior_walls(), a, b, &mut scratch);
    if direct == 0 {
        return WallCount { num_walls: 0, los: true };
    }
    let mut best = direct;
    for &w in plan.waypoints() {
        let first = crossings(plan.interior_walls(), a, w, &mut scratch);
        if first >= best {
            continue;
        }
        let total = first + crossings(plan.interior_walls(), w, b, &mut scratch);
        best = best.min(total);
        if best == 1 {
            break;
        }
    }
    WallCount { num_walls: best, los: false }
}

fn orient(p: Point2, q: Point2, r: Point2) -> f64 {
    (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
}

/// Number of distinct points at which segment `p -> q` meets a wall. Walls
/// meeting at a common point (junctions, shared endpoints) count once there;
/// sliding along a wall is not a crossing.
fn crossings(walls: &[Segment], p: Point2, q: Point2, hits: &mut Vec<f64>) -> usize {
    hits.clear();
    let (min_x, max_x) = (p.x.min(q.x), p.x.max(q.x));
    let (min_y, max_y) = (p.y.min(q.y), p.y.max(q.y));
    for w in walls {
        if w.a.x.max(w.b.x) < min_x || w.a.x.min(w.b.x) > max_x || w.a.y.max(w.b.y) < min_y || w.a.y.min(w.b.y) > max_y
        {
            continue;
        }
        let d1 = orient(w.a, w.b, p);
        let d2 = orient(w.a, w.b, q);
        if d1 == 0.0 && d2 == 0.0 {
            continue;
        }
        let d3 = orient(p, q, w.a);
        let d4 = orient(p, q, w.b);
        let straddles_wall = (d1 >= 0.0 && d2 <= 0.0) || (d1 <= 0.0 && d2 >= 0.0);
        let straddles_path = (d3 >= 0.0 && d4 <= 0.0) || (d3 <= 0.0 && d4 >= 0.0);
        if straddles_wall && straddles_path {
            // point on the path, symmetric in (p, q)
            let t = d1 / (d1 - d2);
            hits.push(t);
        }
    }
    if hits.len() < 2 {
        return hits.len();
    }
    hits.sort_by(|x, y| x.total_cmp(y));
    let mut distinct = 1;
    for pair in hits.windows(2) {
        if pair[1] - pair[0] > 1e-9 {
            distinct += 1;
        }
    }
    distinct
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_floor_plan, ScenarioConfig};

    fn plan() -> FloorPlan {
        build_floor_plan(&ScenarioConfig::default()).unwrap()
    }

    fn p(x: f64, y: f64) -> Point3 {
        Point3::new(x, y, 1.5)
    }

    #[test]
    fn same_room_is_los() {
        assert_eq!(count_walls(&plan(), p(42.0, 17.0), p(48.0, 23.0)), WallCount { num_walls: 0, los: true });
    }

    #[test]
    fn room_to_adjacent_corridor() {
        assert_eq!(count_walls(&plan(), p(45.0, 5.0), p(45.0, 12.5)), WallCount { num_walls: 1, los: false });
    }

    #[test]
    fn across_the_corridor() {
        // south room row 0 to room row 1 straight across corridor A
        let wc = count_walls(&plan(), p(45.0, 5.0), p(45.0, 20.0));
        assert_eq!(wc, WallCount { num_walls: 2, los: false });
    }

    #[test]
    fn corridor_detour_beats_direct_path() {
        // along the corridor wall of row 0: three room walls direct, two via the corridor
        let plan = plan();
        let a = p(2.0, 9.9);
        let b = p(38.0, 9.9);
        let direct = crossings(plan.interior_walls(), a.xy(), b.xy(), &mut Vec::new());
        assert_eq!(direct, 3);
        assert_eq!(count_walls(&plan, a, b), WallCount { num_walls: 2, los: false });
    }

    #[test]
    fn junction_counts_once() {
        // passes exactly through the corner shared by four rooms at (10, 25)
        let plan = plan();
        let hits = crossings(plan.interior_walls(), Point2::new(5.0, 20.0), Point2::new(15.0, 30.0), &mut Vec::new());
        assert_eq!(hits, 1);
    }

    #[test]
    fn symmetric_on_grid() {
        let plan = plan();
        let pts: Vec<Point3> = (0..12).flat_map(|i| (0..6).map(move |j| p(3.3 + 8.1 * i as f64, 2.7 + 8.3 * j as f64))).collect();
        for (i, &a) in pts.iter().enumerate().step_by(5) {
            for &b in &pts[i..] {
                let ab = count_walls(&plan, a, b);
                assert_eq!(ab, count_walls(&plan, b, a));
                let direct = crossings(plan.interior_walls(), a.xy(), b.xy(), &mut Vec::new());
                assert!(ab.num_walls <= direct);
            }
        }
    }
}
