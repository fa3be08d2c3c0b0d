use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent once std is in the graph
use num_traits::Float;

use super::{Point2, Rect, Segment};
use crate::error::{Error, Result};

const EPS: f64 = 1e-9;

/// A horizontal strip of the building, listed south to north.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Band {
    /// A row of equally sized rooms spanning the building width.
    Rooms { depth_m: f64 },
    /// A single corridor spanning the building width.
    Corridor { depth_m: f64 },
}

impl Band {
    pub fn depth(&self) -> f64 {
        match *self {
            Band::Rooms { depth_m } | Band::Corridor { depth_m } => depth_m,
        }
    }
}

/// Floor layout parameters. The default is a 100 m x 50 m office floor with
/// four rows of ten 10 m x 10 m rooms and two 5 m corridors:
/// rooms / corridor / rooms / rooms / corridor / rooms.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ScenarioConfig {
    pub width_m: f64,
    pub room_width_m: f64,
    pub bands: Vec<Band>,
    pub ceiling_height_m: f64,
    /// Spacing of the corridor-centerline waypoints used for detour paths.
    pub waypoint_spacing_m: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let rooms = Band::Rooms { depth_m: 10.0 };
        let corridor = Band::Corridor { depth_m: 5.0 };
        Self {
            width_m: 100.0,
            room_width_m: 10.0,
            bands: alloc::vec![rooms, corridor, rooms, rooms, corridor, rooms],
            ceiling_height_m: 3.0,
            waypoint_spacing_m: 1.0,
        }
    }
}

/// Building floor: rooms and corridors tiling the footprint
/// `[0, width] x [0, depth]`, and the interior walls separating them.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorPlan {
    width_m: f64,
    depth_m: f64,
    ceiling_height_m: f64,
    rooms: Vec<Rect>,
    corridors: Vec<Rect>,
    walls: Vec<Segment>,
    waypoints: Vec<Point2>,
}

impl FloorPlan {
    /// Validates an explicit tiling and derives its interior walls.
    pub fn from_tiles(
        width_m: f64,
        depth_m: f64,
        rooms: Vec<Rect>,
        corridors: Vec<Rect>,
        ceiling_height_m: f64,
        waypoint_spacing_m: f64,
    ) -> Result<Self> {
        if !(width_m > 0.0 && depth_m > 0.0 && ceiling_height_m > 0.0) {
            return Err(Error::Config(format!(
                "footprint {width_m} x {depth_m} m with ceiling {ceiling_height_m} m is not positive"
            )));
        }
        if !(waypoint_spacing_m > 0.0) {
            return Err(Error::Config("waypoint spacing must be positive".into()));
        }
        let footprint = Rect::new(0.0, 0.0, width_m, depth_m);
        let tiles: Vec<Rect> = rooms.iter().chain(corridors.iter()).copied().collect();
        if tiles.is_empty() {
            return Err(Error::Config("floor plan has no tiles".into()));
        }
        for t in &tiles {
            let inside = t.x0 >= -EPS && t.y0 >= -EPS && t.x1 <= width_m + EPS && t.y1 <= depth_m + EPS;
            if !(t.width() > 0.0 && t.height() > 0.0) || !inside {
                return Err(Error::Config(format!("tile {t:?} is empty or leaves the footprint")));
            }
        }
        for (i, a) in tiles.iter().enumerate() {
            for b in &tiles[i + 1..] {
                if a.overlap_area(b) > 1e-9 {
                    return Err(Error::Config(format!("tiles {a:?} and {b:?} overlap")));
                }
            }
        }
        let covered: f64 = tiles.iter().map(Rect::area).sum();
        if (covered - footprint.area()).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "tiles cover {covered} m^2 of a {} m^2 footprint",
                footprint.area()
            )));
        }

        let mut walls = Vec::new();
        for (i, a) in tiles.iter().enumerate() {
            for b in &tiles[i + 1..] {
                if let Some(w) = shared_edge(a, b) {
                    walls.push(w);
                }
            }
        }

        let mut waypoints = Vec::new();
        for c in &corridors {
            let center = c.center();
            if c.width() >= c.height() {
                let n = (c.width() / waypoint_spacing_m).floor().max(1.0) as usize;
                let offset = 0.5 * (c.width() - (n - 1) as f64 * waypoint_spacing_m);
                waypoints.extend((0..n).map(|j| Point2::new(c.x0 + offset + j as f64 * waypoint_spacing_m, center.y)));
            } else {
                let n = (c.height() / waypoint_spacing_m).floor().max(1.0) as usize;
                let offset = 0.5 * (c.height() - (n - 1) as f64 * waypoint_spacing_m);
                waypoints.extend((0..n).map(|j| Point2::new(center.x, c.y0 + offset + j as f64 * waypoint_spacing_m)));
            }
        }

        Ok(Self { width_m, depth_m, ceiling_height_m, rooms, corridors, walls, waypoints })
    }

    pub fn width(&self) -> f64 {
        self.width_m
    }

    pub fn depth(&self) -> f64 {
        self.depth_m
    }

    pub fn ceiling_height(&self) -> f64 {
        self.ceiling_height_m
    }

    pub fn footprint(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width_m, self.depth_m)
    }

    pub fn rooms(&self) -> &[Rect] {
        &self.rooms
    }

    pub fn corridors(&self) -> &[Rect] {
        &self.corridors
    }

    pub fn interior_walls(&self) -> &[Segment] {
        &self.walls
    }

    /// Corridor-centerline detour points.
    pub fn waypoints(&self) -> &[Point2] {
        &self.waypoints
    }

    /// Rooms first, then corridors.
    pub fn tiles(&self) -> impl Iterator<Item = &Rect> {
        self.rooms.iter().chain(self.corridors.iter())
    }

    /// Index into `rooms()` of the room containing `p`, if any.
    pub fn room_of(&self, p: Point2) -> Option<usize> {
        self.rooms.iter().position(|r| r.contains(p))
    }

    /// Closest point of the outer wall to `p`, for points inside the footprint.
    pub fn nearest_outer_wall_point(&self, p: Point2) -> Point2 {
        let candidates = [
            (p.x, Point2::new(0.0, p.y)),
            (self.width_m - p.x, Point2::new(self.width_m, p.y)),
            (p.y, Point2::new(p.x, 0.0)),
            (self.depth_m - p.y, Point2::new(p.x, self.depth_m)),
        ];
        candidates.iter().fold(candidates[0], |best, c| if c.0 < best.0 { *c } else { best }).1
    }
}

/// Common boundary of two interior-disjoint rectangles, if it has positive length.
fn shared_edge(a: &Rect, b: &Rect) -> Option<Segment> {
    let close = |u: f64, v: f64| (u - v).abs() < EPS;
    let y_lo = a.y0.max(b.y0);
    let y_hi = a.y1.min(b.y1);
    let x_lo = a.x0.max(b.x0);
    let x_hi = a.x1.min(b.x1);
    if (close(a.x1, b.x0) || close(a.x0, b.x1)) && y_hi - y_lo > EPS {
        let x = if close(a.x1, b.x0) { a.x1 } else { a.x0 };
        return Some(Segment::new(Point2::new(x, y_lo), Point2::new(x, y_hi)));
    }
    if (close(a.y1, b.y0) || close(a.y0, b.y1)) && x_hi - x_lo > EPS {
        let y = if close(a.y1, b.y0) { a.y1 } else { a.y0 };
        return Some(Segment::new(Point2::new(x_lo, y), Point2::new(x_hi, y)));
    }
    None
}

/// Lays out the bands of `config` and validates the resulting tiling.
pub fn build_floor_plan(config: &ScenarioConfig) -> Result<FloorPlan> {
    if !(config.width_m > 0.0 && config.room_width_m > 0.0) {
        return Err(Error::Config("building and room widths must be positive".into()));
    }
    let per_row = (config.width_m / config.room_width_m).round();
    if per_row < 1.0 || (per_row * config.room_width_m - config.width_m).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "room width {} m does not divide the building width {} m",
            config.room_width_m, config.width_m
        )));
    }
    let per_row = per_row as usize;
    let mut rooms = Vec::new();
    let mut corridors = Vec::new();
    let mut y = 0.0;
    for band in &config.bands {
        let d = band.depth();
        if !(d > 0.0) {
            return Err(Error::Config(format!("band {band:?} has non-positive depth")));
        }
        match band {
            Band::Rooms { .. } => {
                for j in 0..per_row {
                    let x0 = j as f64 * config.room_width_m;
                    rooms.push(Rect::new(x0, y, x0 + config.room_width_m, y + d));
                }
            }
            Band::Corridor { .. } => corridors.push(Rect::new(0.0, y, config.width_m, y + d)),
        }
        y += d;
    }
    FloorPlan::from_tiles(
        config.width_m,
        y,
        rooms,
        corridors,
        config.ceiling_height_m,
        config.waypoint_spacing_m,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn default_plan_has_forty_rooms_two_corridors() {
        let plan = build_floor_plan(&ScenarioConfig::default()).unwrap();
        assert_eq!(plan.rooms().len(), 40);
        assert_eq!(plan.corridors().len(), 2);
        assert_eq!((plan.width(), plan.depth()), (100.0, 50.0));
        assert_eq!(plan.ceiling_height(), 3.0);
        let area: f64 = plan.tiles().map(Rect::area).sum();
        assert!((area - 5000.0).abs() < 1e-6);
        assert_eq!(plan.waypoints().len(), 200);
    }

    #[test]
    fn every_wall_separates_two_tiles() {
        let plan = build_floor_plan(&ScenarioConfig::default()).unwrap();
        let tiles: Vec<Rect> = plan.tiles().copied().collect();
        for w in plan.interior_walls() {
            let mid = Point2::new(0.5 * (w.a.x + w.b.x), 0.5 * (w.a.y + w.b.y));
            let touching = tiles.iter().filter(|t| t.contains(mid)).count();
            assert_eq!(touching, 2, "wall {w:?}");
        }
        // 36 room-room walls per row x 4 rows = 36, + room/corridor and room/room edges
        let vertical = plan.interior_walls().iter().filter(|w| w.a.x == w.b.x).count();
        assert_eq!(vertical, 36);
    }

    #[test]
    fn single_room_plan() {
        let cfg = ScenarioConfig {
            width_m: 100.0,
            room_width_m: 100.0,
            bands: vec![Band::Rooms { depth_m: 50.0 }],
            ..ScenarioConfig::default()
        };
        let plan = build_floor_plan(&cfg).unwrap();
        assert_eq!(plan.rooms(), &[Rect::new(0.0, 0.0, 100.0, 50.0)]);
        assert!(plan.corridors().is_empty());
        assert!(plan.interior_walls().is_empty());
    }

    #[test]
    fn overlapping_rooms_rejected() {
        let rooms = vec![Rect::new(0.0, 0.0, 60.0, 50.0), Rect::new(40.0, 0.0, 100.0, 50.0)];
        let err = FloorPlan::from_tiles(100.0, 50.0, rooms, vec![], 3.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn gaps_rejected() {
        let rooms = vec![Rect::new(0.0, 0.0, 50.0, 50.0)];
        assert!(FloorPlan::from_tiles(100.0, 50.0, rooms, vec![], 3.0, 1.0).is_err());
    }

    #[test]
    fn room_width_must_divide_building() {
        let cfg = ScenarioConfig { room_width_m: 30.0, ..ScenarioConfig::default() };
        assert!(build_floor_plan(&cfg).is_err());
    }

    #[test]
    fn nearest_outer_wall() {
        let plan = build_floor_plan(&ScenarioConfig::default()).unwrap();
        assert_eq!(plan.nearest_outer_wall_point(Point2::new(3.0, 20.0)), Point2::new(0.0, 20.0));
        assert_eq!(plan.nearest_outer_wall_point(Point2::new(50.0, 46.0)), Point2::new(50.0, 50.0));
    }
}
