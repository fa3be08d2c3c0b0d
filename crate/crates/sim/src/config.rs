//! Run configuration. Every field has a default, so `{}` describes the
//! full-scale setup.

use std::path::{Path, PathBuf};

use dmimo_core::channel::ChannelModelConfig;
use dmimo_core::geometry::{DeploymentKind, ScenarioConfig};
use dmimo_core::metrics::SeNormalization;
use dmimo_core::modulation::Modulation;
use dmimo_core::precoding::Scheme;
use dmimo_core::units::dbm_to_watts;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SimError};

pub const SCHEMA_VERSION: u32 = 1;
const SUBCARRIERS_PER_PRB: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub schema_version: u32,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub active_bandwidth_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub subcarriers: usize,
    pub prbs: usize,
    /// Resource blocks actually simulated (one subcarrier each). Defaults to
    /// `prbs`; smaller values give desk-scale runs where every simulated
    /// block stands for `prbs / simulated_prbs` physical ones.
    pub simulated_prbs: Option<usize>,
    pub symbols_per_slot: usize,
    pub slot_s: f64,
    pub sum_power_dbm: f64,
    /// Noise variance per subcarrier.
    pub noise_dbm: f64,
    pub num_ues: usize,
    pub drops: usize,
    pub realizations: usize,
    pub modulation: Modulation,
    pub deployments: Vec<DeploymentKind>,
    pub antennas: Vec<usize>,
    pub schemes: Vec<Scheme>,
    /// Whether cells with perfect channel knowledge are simulated.
    pub perfect_csi: bool,
    /// Estimation-error NMSE values in dB.
    pub nmse_db: Vec<f64>,
    pub seed: u64,
    pub quadrature_nodes: usize,
    pub table_cache: Option<PathBuf>,
    pub scenario: ScenarioConfig,
    pub channel: ChannelModelConfig,
    pub snr_map: SnrMapConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnrMapConfig {
    pub grid_step_m: f64,
    pub realizations: usize,
    pub antennas: usize,
}

impl Default for SnrMapConfig {
    fn default() -> Self {
        Self { grid_step_m: 1.0, realizations: 300, antennas: 48 }
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            carrier_hz: 2.1e9,
            bandwidth_hz: 20e6,
            active_bandwidth_hz: 18e6,
            subcarrier_spacing_hz: 15e3,
            subcarriers: 1200,
            prbs: 100,
            simulated_prbs: None,
            symbols_per_slot: 14,
            slot_s: 1e-3,
            sum_power_dbm: 26.0,
            noise_dbm: -125.1,
            num_ues: 24,
            drops: 300,
            realizations: 10,
            modulation: Modulation::Qam256,
            deployments: DeploymentKind::ALL.to_vec(),
            antennas: (1..=10).map(|i| 24 * i).collect(),
            schemes: Scheme::SWEEP.to_vec(),
            perfect_csi: true,
            nmse_db: Vec::new(),
            seed: 1,
            quadrature_nodes: dmimo_core::modulation::DEFAULT_QUADRATURE_NODES,
            table_cache: None,
            scenario: ScenarioConfig::default(),
            channel: ChannelModelConfig::default(),
            snr_map: SnrMapConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn nonzero(name: &str, v: usize) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(SimError::Config(format!("{name} must be at least 1")))
    }
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| SimError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            SimError::Config(m) => SimError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SimError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        for (name, v) in [
            ("carrier_hz", self.carrier_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("active_bandwidth_hz", self.active_bandwidth_hz),
            ("subcarrier_spacing_hz", self.subcarrier_spacing_hz),
            ("slot_s", self.slot_s),
            ("snr_map.grid_step_m", self.snr_map.grid_step_m),
        ] {
            positive(name, v)?;
        }
        for (name, v) in [
            ("subcarriers", self.subcarriers),
            ("prbs", self.prbs),
            ("symbols_per_slot", self.symbols_per_slot),
            ("num_ues", self.num_ues),
            ("drops", self.drops),
            ("realizations", self.realizations),
            ("quadrature_nodes", self.quadrature_nodes),
            ("snr_map.realizations", self.snr_map.realizations),
            ("snr_map.antennas", self.snr_map.antennas),
        ] {
            nonzero(name, v)?;
        }
        if self.prbs * SUBCARRIERS_PER_PRB != self.subcarriers {
            return Err(SimError::Config(format!(
                "{} PRBs of {SUBCARRIERS_PER_PRB} subcarriers do not make {} subcarriers",
                self.prbs, self.subcarriers
            )));
        }
        if let Some(f) = self.simulated_prbs {
            if f == 0 || f > self.prbs {
                return Err(SimError::Config(format!("simulated_prbs must be in 1..={}, got {f}", self.prbs)));
            }
        }
        if self.active_bandwidth_hz > self.bandwidth_hz {
            return Err(SimError::Config("active bandwidth exceeds the channel bandwidth".into()));
        }
        if !self.sum_power_dbm.is_finite() || !self.noise_dbm.is_finite() {
            return Err(SimError::Config("power and noise levels must be finite".into()));
        }
        if self.deployments.is_empty() || self.antennas.is_empty() || self.schemes.is_empty() {
            return Err(SimError::Config("deployment, antenna and scheme lists must not be empty".into()));
        }
        if self.antennas.contains(&0) {
            return Err(SimError::Config("antenna counts must be positive".into()));
        }
        if self.schemes.contains(&Scheme::MrtSingle) {
            return Err(SimError::Config("mrt-single is only available through the snrmap command".into()));
        }
        if !self.perfect_csi && self.nmse_db.is_empty() {
            return Err(SimError::Config("no CSI condition selected (perfect_csi is false and nmse_db is empty)".into()));
        }
        if self.nmse_db.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Config("nmse_db values must be finite; use perfect_csi for error-free CSI".into()));
        }
        if self.channel.num_taps == 0 {
            return Err(SimError::Config("channel.num_taps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn num_simulated_prbs(&self) -> usize {
        self.simulated_prbs.unwrap_or(self.prbs)
    }

    pub fn noise_w(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    pub fn se_normalization(&self) -> SeNormalization {
        SeNormalization {
            total_subcarriers: self.subcarriers,
            symbols_per_slot: self.symbols_per_slot,
            slot_s: self.slot_s,
            bandwidth_hz: self.bandwidth_hz,
        }
    }

    pub fn se_factor(&self) -> f64 {
        self.se_normalization().factor(self.num_simulated_prbs())
    }

    /// CSI conditions of the sweep as linear NMSE; `None` is perfect CSI.
    pub fn csi_conditions(&self) -> Vec<Option<f64>> {
        let mut v: Vec<Option<f64>> = Vec::new();
        if self.perfect_csi {
            v.push(None);
        }
        v.extend(self.nmse_db.iter().map(|db| Some(*db)));
        v
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Label of a CSI condition in the output files.
pub fn nmse_label(nmse_db: Option<f64>) -> String {
    match nmse_db {
        None => "-inf".to_string(),
        Some(v) => format!("{v}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_is_table_defaults() {
        let c = SimConfig::from_json("{}").unwrap();
        assert_eq!(c, SimConfig::default());
        assert_eq!(c.num_ues, 24);
        assert_eq!(c.drops, 300);
        assert_eq!(c.realizations, 10);
        assert_eq!(c.antennas, vec![24, 48, 72, 96, 120, 144, 168, 192, 216, 240]);
        assert!((c.se_factor() - 0.0084).abs() < 1e-15);
        assert!((c.noise_w() - 10f64.powf(-15.51)).abs() < 1e-25);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(SimConfig::from_json(r#"{"drops": 0}"#), Err(SimError::Config(_))));
        assert!(matches!(SimConfig::from_json(r#"{"prbs": 50}"#), Err(SimError::Config(_))));
        assert!(matches!(SimConfig::from_json(r#"{"schema_version": 9}"#), Err(SimError::Config(_))));
        assert!(matches!(SimConfig::from_json(r#"{"bogus": 1}"#), Err(SimError::Config(_))));
        assert!(matches!(SimConfig::from_json(r#"{"schemes": ["mrt-single"]}"#), Err(SimError::Config(_))));
        assert!(matches!(SimConfig::from_json(r#"{"simulated_prbs": 101}"#), Err(SimError::Config(_))));
        assert!(SimConfig::from_json(r#"{"simulated_prbs": 10, "modulation": "gaussian", "deployments": ["two-indoor"]}"#).is_ok());
    }

    #[test]
    fn hash_tracks_content() {
        let a = SimConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn csi_labels() {
        let c = SimConfig { nmse_db: vec![-40.0, -10.0], ..SimConfig::default() };
        let labels: Vec<String> = c.csi_conditions().into_iter().map(nmse_label).collect();
        assert_eq!(labels, vec!["-inf", "-40", "-10"]);
    }
}
