//! CSV outputs and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{nmse_label, SimConfig};
use crate::error::{Result, SimError};
use crate::io::CsvOut;
use crate::sweep::SweepOutput;

pub const RECORDS_HEADER: [&str; 12] =
    ["deployment", "scheme", "modulation", "M", "K", "sigmaE2_db", "drop", "realization", "sum_se", "jain", "se_p5", "se_p95"];
pub const PER_UE_HEADER: [&str; 10] =
    ["deployment", "scheme", "modulation", "M", "K", "sigmaE2_db", "drop", "realization", "ue_index", "se"];
pub const SUMMARY_HEADER: [&str; 15] = [
    "deployment", "scheme", "modulation", "M", "K", "sigmaE2_db", "status", "reason", "records",
    "sum_se_mean", "sum_se_p5", "sum_se_p95", "jain_mean", "jain_p5", "jain_p95",
];

pub fn hash_comment(cfg: &SimConfig) -> String {
    format!("config_hash={}", cfg.hash())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `records.csv`, `per_ue.csv` and `summary.csv`; returns their paths.
pub fn write_sweep(dir: &Path, cfg: &SimConfig, out: &SweepOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let comment = hash_comment(cfg);
    let modulation = cfg.modulation.name();
    let k = cfg.num_ues.to_string();

    let rec_path = dir.join("records.csv");
    let ue_path = dir.join("per_ue.csv");
    let mut rec = CsvOut::create(&rec_path, Some(&comment))?;
    let mut ue = CsvOut::create(&ue_path, Some(&comment))?;
    rec.row(RECORDS_HEADER)?;
    ue.row(PER_UE_HEADER)?;
    for r in &out.records {
        let c = &out.cells[r.cell];
        let prefix = [
            c.deployment.name().to_string(),
            c.scheme.name().to_string(),
            modulation.to_string(),
            c.antennas.to_string(),
            k.clone(),
            nmse_label(c.nmse_db),
            r.drop.to_string(),
            r.realization.to_string(),
        ];
        let m = &r.metrics;
        rec.row(prefix.iter().cloned().chain([m.sum_se, m.jain, m.se_p5, m.se_p95].map(|v| v.to_string())))?;
        for (i, se) in m.per_ue_se.iter().enumerate() {
            ue.row(prefix.iter().cloned().chain([i.to_string(), se.to_string()]))?;
        }
    }
    rec.finish()?;
    ue.finish()?;

    let sum_path = dir.join("summary.csv");
    let mut sum = CsvOut::create(&sum_path, Some(&comment))?;
    sum.row(SUMMARY_HEADER)?;
    for s in &out.summary {
        let c = &s.cell;
        let (status, reason) = match &s.skipped {
            Some(r) => ("skipped", r.clone()),
            None => ("ok", String::new()),
        };
        sum.row([
            c.deployment.name().to_string(),
            c.scheme.name().to_string(),
            modulation.to_string(),
            c.antennas.to_string(),
            k.clone(),
            nmse_label(c.nmse_db),
            status.to_string(),
            reason,
            s.records.to_string(),
            opt(s.sum_se.map(|x| x.mean)),
            opt(s.sum_se.map(|x| x.p5)),
            opt(s.sum_se.map(|x| x.p95)),
            opt(s.jain.map(|x| x.mean)),
            opt(s.jain.map(|x| x.p5)),
            opt(s.jain.map(|x| x.p95)),
        ])?;
    }
    sum.finish()?;
    Ok(vec![rec_path, ue_path, sum_path])
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    pub command: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
    pub config: SimConfig,
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn write_manifest(dir: &Path, cfg: &SimConfig, command: &str, started: String, outputs: &[PathBuf]) -> Result<PathBuf> {
    let m = RunManifest {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        started,
        finished: now_rfc3339(),
        outputs: outputs
            .iter()
            .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
            .collect(),
        config: cfg.clone(),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| SimError::io(&path, e))?;
    Ok(path)
}
