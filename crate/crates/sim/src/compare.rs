//! Capacity bound versus network-MIMO sum SE with Gaussian signaling.

use dmimo_core::capacity::{sum_capacity_bound, DualMacProblem};
use dmimo_core::geometry::DeploymentKind;
use dmimo_core::metrics::{compute_sinr, spectral_efficiency, stats, Stats};
use dmimo_core::modulation::{GaussianInput, Modulation};
use dmimo_core::precoding::Scheme;
use rayon::prelude::*;

use crate::error::{Result, SimError};
use crate::io::CsvOut;
use crate::sweep::{build_precoder, Context};

pub const ROWS_HEADER: [&str; 7] =
    ["deployment", "M", "drop", "realization", "bound_se", "network_totalpower_se", "network_se"];
pub const SUMMARY_HEADER: [&str; 7] = [
    "deployment", "M", "bound_mean", "network_totalpower_mean", "network_mean", "gap_totalpower_mean", "gap_network_mean",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    pub antennas: usize,
    pub drop: u64,
    pub realization: u64,
    pub bound_se: f64,
    pub total_power_se: f64,
    pub per_bs_se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareSummary {
    pub antennas: usize,
    pub bound: Stats,
    pub total_power: Stats,
    pub per_bs: Stats,
}

/// One row per (M, drop, realization). The context must use Gaussian
/// modulation.
pub fn run_capacity_compare(ctx: &Context, kind: DeploymentKind, antennas: &[usize]) -> Result<Vec<CompareRow>> {
    let cfg = &ctx.cfg;
    if cfg.modulation != Modulation::Gaussian {
        return Err(SimError::Config("capacity comparison needs gaussian modulation".into()));
    }
    let noise = cfg.noise_w();
    let factor = cfg.se_factor();
    let units: Vec<(usize, u64)> =
        antennas.iter().flat_map(|&m| (0..cfg.drops as u64).map(move |d| (m, d))).collect();
    let rows: Vec<Vec<CompareRow>> = units
        .par_iter()
        .map(|&(m, drop)| {
            let d = ctx.deployment(kind, m)?;
            let budgets = ctx.budgets(&d);
            let mut rows = Vec::new();
            for h in ctx.channels(&d, drop)? {
                let bound = sum_capacity_bound(&DualMacProblem::new(&h, noise, budgets.iter().sum()))?;
                let se = |scheme| -> Result<f64> {
                    let p = build_precoder(scheme, &h, &d, &budgets, noise, &GaussianInput)?;
                    Ok(spectral_efficiency(&compute_sinr(&h, &p, noise)?, &GaussianInput, factor).1)
                };
                rows.push(CompareRow {
                    antennas: m,
                    drop,
                    realization: h.realization_index,
                    bound_se: bound.bits * factor,
                    total_power_se: se(Scheme::NetworkTotalPower)?,
                    per_bs_se: se(Scheme::Network)?,
                });
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn summarize(rows: &[CompareRow]) -> Vec<CompareSummary> {
    let mut ms: Vec<usize> = rows.iter().map(|r| r.antennas).collect();
    ms.dedup();
    ms.into_iter()
        .filter_map(|m| {
            let sel: Vec<&CompareRow> = rows.iter().filter(|r| r.antennas == m).collect();
            let col = |f: fn(&CompareRow) -> f64| stats(&sel.iter().map(|r| f(r)).collect::<Vec<_>>());
            Some(CompareSummary {
                antennas: m,
                bound: col(|r| r.bound_se)?,
                total_power: col(|r| r.total_power_se)?,
                per_bs: col(|r| r.per_bs_se)?,
            })
        })
        .collect()
}

pub fn write_compare(
    dir: &std::path::Path,
    runs: &[(DeploymentKind, Vec<CompareRow>)],
    comment: Option<&str>,
) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let path = dir.join("capacity.csv");
    let mut w = CsvOut::create(&path, comment)?;
    w.row(ROWS_HEADER)?;
    let spath = dir.join("capacity_summary.csv");
    let mut s = CsvOut::create(&spath, comment)?;
    s.row(SUMMARY_HEADER)?;
    for (kind, rows) in runs {
        for r in rows {
            w.row([
                kind.name().to_string(),
                r.antennas.to_string(),
                r.drop.to_string(),
                r.realization.to_string(),
                r.bound_se.to_string(),
                r.total_power_se.to_string(),
                r.per_bs_se.to_string(),
            ])?;
        }
        for c in summarize(rows) {
            s.row([
                kind.name().to_string(),
                c.antennas.to_string(),
                c.bound.mean.to_string(),
                c.total_power.mean.to_string(),
                c.per_bs.mean.to_string(),
                (c.bound.mean - c.total_power.mean).to_string(),
                (c.bound.mean - c.per_bs.mean).to_string(),
            ])?;
        }
    }
    w.finish()?;
    s.finish()?;
    Ok(vec![path, spath])
}
