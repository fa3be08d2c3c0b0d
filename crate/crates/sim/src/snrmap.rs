//! Single-UE MRT SNR over a grid of positions.

use dmimo_core::channel::{generate_channel, link_profiles};
use dmimo_core::geometry::{DeploymentKind, FloorPlan, Point3, UeDrop, UE_HEIGHT_M};
use dmimo_core::precoding::mrt_snr;
use dmimo_core::rng::derive_seed;
use dmimo_core::units::linear_to_db;
use rayon::prelude::*;

use crate::error::{Result, SimError};
use crate::io::CsvOut;
use crate::sweep::Context;

const MAP_STREAM: u64 = 0x4d41_5053;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapPoint {
    pub x: f64,
    pub y: f64,
    pub snr_db: f64,
}

/// Cell centers of a `step`-spaced grid over the floor.
pub fn grid_positions(plan: &FloorPlan, step: f64) -> Vec<(f64, f64)> {
    let nx = (plan.width() / step).floor() as usize;
    let ny = (plan.depth() / step).floor() as usize;
    let mut v = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            v.push(((i as f64 + 0.5) * step, (j as f64 + 0.5) * step));
        }
    }
    v
}

/// Mean MRT SNR (linear average over subcarriers and realizations, then dB)
/// at every grid position. Each position is its own drop with its own
/// shadowing.
pub fn run_snr_map(ctx: &Context, kind: DeploymentKind, antennas: usize, step: f64, realizations: usize) -> Result<Vec<MapPoint>> {
    if !(step > 0.0) || realizations == 0 {
        return Err(SimError::Config("snr map needs a positive grid step and at least one realization".into()));
    }
    let cfg = &ctx.cfg;
    let d = ctx.deployment(kind, antennas)?;
    let budgets = ctx.budgets(&d);
    let noise = cfg.noise_w();
    let seed = derive_seed(cfg.seed, &[MAP_STREAM]);
    grid_positions(&ctx.plan, step)
        .par_iter()
        .enumerate()
        .map(|(idx, &(x, y))| {
            let drop = UeDrop { positions: vec![Point3::new(x, y, UE_HEIGHT_M)], drop_index: idx as u64, seed };
            let profiles = link_profiles(&ctx.plan, &d, &drop, &cfg.channel, cfg.carrier_hz, seed);
            let mut acc = 0.0;
            let mut n = 0usize;
            for r in 0..realizations as u64 {
                let h = generate_channel(&profiles, &d, &drop, &cfg.channel, &ctx.freqs, cfg.carrier_hz, derive_seed(seed, &[idx as u64, r]))?;
                for s in mrt_snr(&h, 0, &budgets, noise) {
                    acc += s;
                    n += 1;
                }
            }
            Ok(MapPoint { x, y, snr_db: linear_to_db(acc / n as f64) })
        })
        .collect()
}

/// Mean of the map values (dB) inside each room, indexed like `plan.rooms()`.
/// Rooms without a grid point get `None`.
pub fn room_averages(plan: &FloorPlan, map: &[MapPoint]) -> Vec<Option<f64>> {
    let mut acc = vec![(0.0, 0usize); plan.rooms().len()];
    for p in map {
        if let Some(r) = plan.room_of(dmimo_core::geometry::Point2::new(p.x, p.y)) {
            acc[r].0 += p.snr_db;
            acc[r].1 += 1;
        }
    }
    acc.into_iter().map(|(s, n)| (n > 0).then(|| s / n as f64)).collect()
}

pub fn write_map(path: &std::path::Path, map: &[MapPoint], comment: Option<&str>) -> Result<()> {
    let mut w = CsvOut::create(path, comment)?;
    w.row(["x", "y", "snr_db"])?;
    for p in map {
        w.row([p.x.to_string(), p.y.to_string(), p.snr_db.to_string()])?;
    }
    w.finish()
}
