use alloc::vec::Vec;

use rand::Rng;
use rand_distr::Open01;

use super::{FloorPlan, Point2, Point3, Rect};
use crate::rng::{self, domain};

/// Receiver height above the floor.
pub const UE_HEIGHT_M: f64 = 1.5;

/// One random placement of all UEs.
#[derive(Debug, Clone, PartialEq)]
pub struct UeDrop {
    pub positions: Vec<Point3>,
    pub drop_index: u64,
    pub seed: u64,
}

/// Places `num_ues` UEs uniformly over the rooms and corridors of `plan`.
pub fn sample_ue_drop(plan: &FloorPlan, num_ues: usize, seed: u64, drop_index: u64) -> UeDrop {
    let tiles: Vec<Rect> = plan.tiles().copied().collect();
    let total: f64 = tiles.iter().map(Rect::area).sum();
    let mut rng = rng::stream(seed, &[domain::UE_DROP, drop_index]);
    let positions = (0..num_ues)
        .map(|_| {
            let mut pick = rng.random::<f64>() * total;
            let tile = tiles
                .iter()
                .find(|t| {
                    pick -= t.area();
                    pick < 0.0
                })
                .unwrap_or(&tiles[tiles.len() - 1]);
            let u: f64 = rng.sample(Open01);
            let v: f64 = rng.sample(Open01);
            let p = Point2::new(tile.x0 + u * tile.width(), tile.y0 + v * tile.height());
            Point3::new(p.x, p.y, UE_HEIGHT_M)
        })
        .collect();
    UeDrop { positions, drop_index, seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_floor_plan, ScenarioConfig};

    #[test]
    fn deterministic_and_inside() {
        let plan = build_floor_plan(&ScenarioConfig::default()).unwrap();
        let a = sample_ue_drop(&plan, 24, 99, 3);
        assert_eq!(a, sample_ue_drop(&plan, 24, 99, 3));
        assert_ne!(a.positions, sample_ue_drop(&plan, 24, 99, 4).positions);
        assert_eq!(a.positions.len(), 24);
        for p in &a.positions {
            assert!(plan.footprint().contains_strictly(p.xy()));
            assert_eq!(p.z, 1.5);
        }
    }

    #[test]
    fn uniform_mean_is_centroid() {
        let plan = build_floor_plan(&ScenarioConfig::default()).unwrap();
        let d = sample_ue_drop(&plan, 100_000, 5, 0);
        let n = d.positions.len() as f64;
        let mx = d.positions.iter().map(|p| p.x).sum::<f64>() / n;
        let my = d.positions.iter().map(|p| p.y).sum::<f64>() / n;
        assert!((mx - 50.0).abs() < 0.5, "{mx}");
        assert!((my - 25.0).abs() < 0.25, "{my}");
    }
}
