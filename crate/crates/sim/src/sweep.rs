//! Monte-Carlo sweep over deployments, antenna counts, schemes and CSI
//! conditions.

use dmimo_core::channel::{add_estimation_error, generate_channel, link_profiles, subcarrier_frequencies, ChannelTensor};
use dmimo_core::geometry::{build_floor_plan, place_deployment, sample_ue_drop, Deployment, DeploymentKind, FloorPlan};
use dmimo_core::metrics::{compute_sinr, spectral_efficiency, Aggregate, MetricsRecord, Stats};
use dmimo_core::modulation::Alphabet;
use dmimo_core::precoding::{
    associate_ues, effective_budgets, precode_local, precode_lsmimo, precode_network, PowerConstraint, Precoder, Scheme,
};
use dmimo_core::rng::{derive_seed, domain};
use dmimo_core::units::db_to_linear;
use rayon::prelude::*;

use crate::config::SimConfig;
use crate::error::{Result, SimError};

/// Shared, read-only inputs of a run.
pub struct Context {
    pub cfg: SimConfig,
    pub plan: FloorPlan,
    pub freqs: Vec<f64>,
    pub alphabet: Box<dyn Alphabet + Send>,
}

impl Context {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let plan = build_floor_plan(&cfg.scenario)?;
        let freqs = subcarrier_frequencies(cfg.carrier_hz, cfg.active_bandwidth_hz, cfg.num_simulated_prbs());
        let alphabet = crate::tables::alphabet(&cfg)?;
        Ok(Self { cfg, plan, freqs, alphabet })
    }

    pub fn deployment(&self, kind: DeploymentKind, antennas: usize) -> Result<Deployment> {
        Ok(place_deployment(&self.plan, kind, antennas, self.cfg.sum_power_dbm, self.cfg.carrier_hz)?)
    }

    pub fn budgets(&self, d: &Deployment) -> Vec<f64> {
        effective_budgets(d, self.freqs.len(), self.cfg.subcarriers)
    }

    /// All fast-fading realizations of one drop.
    pub fn channels(&self, d: &Deployment, drop: u64) -> Result<Vec<ChannelTensor>> {
        let cfg = &self.cfg;
        let ues = sample_ue_drop(&self.plan, cfg.num_ues, cfg.seed, drop);
        let profiles = link_profiles(&self.plan, d, &ues, &cfg.channel, cfg.carrier_hz, cfg.seed);
        (0..cfg.realizations as u64)
            .map(|r| {
                let mut h = generate_channel(&profiles, d, &ues, &cfg.channel, &self.freqs, cfg.carrier_hz, realization_seed(cfg.seed, drop, r))?;
                h.realization_index = r;
                Ok(h)
            })
            .collect()
    }
}

pub fn realization_seed(master: u64, drop: u64, realization: u64) -> u64 {
    derive_seed(master, &[drop, realization])
}

/// Why a grid cell produced no records.
pub fn infeasibility(scheme: Scheme, d: &Deployment, num_ues: usize) -> Option<String> {
    match scheme {
        Scheme::LsMimo => d
            .sites
            .iter()
            .any(|s| s.num_antennas < num_ues)
            .then(|| format!("lsmimo-infeasible: {} antennas per BS < K = {num_ues}", d.sites[0].num_antennas)),
        Scheme::Network | Scheme::NetworkTotalPower => {
            (d.total_antennas < num_ues).then(|| format!("network-infeasible: M = {} < K = {num_ues}", d.total_antennas))
        }
        Scheme::Local | Scheme::MrtSingle => None,
    }
}

/// Builds the precoder of `scheme` from the channel estimate `est`.
pub fn build_precoder(
    scheme: Scheme,
    est: &ChannelTensor,
    d: &Deployment,
    budgets: &[f64],
    noise: f64,
    alphabet: &dyn Alphabet,
) -> Result<Precoder> {
    let p = match scheme {
        Scheme::Local => precode_local(est, &associate_ues(est, d), d, budgets, noise, alphabet)?,
        Scheme::LsMimo => precode_lsmimo(est, &associate_ues(est, d), d, budgets, noise, alphabet)?,
        Scheme::Network => precode_network(est, d, budgets, noise, alphabet, PowerConstraint::PerBs)?,
        Scheme::NetworkTotalPower => precode_network(est, d, budgets, noise, alphabet, PowerConstraint::Total)?,
        Scheme::MrtSingle => return Err(SimError::Config("mrt-single is not a sweep scheme".into())),
    };
    let audit = p.audit();
    if !audit.is_satisfied() || !(p.scale_factor > 0.0 && p.scale_factor <= 1.0) {
        return Err(SimError::Numerical(format!(
            "{scheme} precoder violates its power constraint (relative excess {:.3e}, scale {})",
            audit.max_violation, p.scale_factor
        )));
    }
    Ok(p)
}

/// Sweep grid cell: the coordinates of one summary row.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub deployment: DeploymentKind,
    pub antennas: usize,
    pub scheme: Scheme,
    /// NMSE in dB; `None` is perfect CSI.
    pub nmse_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub cell: usize,
    pub drop: u64,
    pub realization: u64,
    pub metrics: MetricsRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub skipped: Option<String>,
    pub records: usize,
    pub sum_se: Option<Stats>,
    pub jain: Option<Stats>,
}

/// Power-audit statistics over every precoder built in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditStats {
    pub precoders: usize,
    pub max_violation: f64,
    pub min_scale: f64,
    pub max_scale: f64,
}

impl Default for AuditStats {
    fn default() -> Self {
        Self { precoders: 0, max_violation: f64::NEG_INFINITY, min_scale: f64::INFINITY, max_scale: f64::NEG_INFINITY }
    }
}

impl AuditStats {
    fn add(&mut self, p: &Precoder) {
        self.precoders += 1;
        self.max_violation = self.max_violation.max(p.audit().max_violation);
        if p.scheme == Scheme::Network {
            self.min_scale = self.min_scale.min(p.scale_factor);
            self.max_scale = self.max_scale.max(p.scale_factor);
        }
    }

    fn merge(&mut self, o: &AuditStats) {
        self.precoders += o.precoders;
        self.max_violation = self.max_violation.max(o.max_violation);
        self.min_scale = self.min_scale.min(o.min_scale);
        self.max_scale = self.max_scale.max(o.max_scale);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub cells: Vec<Cell>,
    /// Ordered by cell, then drop, then realization.
    pub records: Vec<Record>,
    pub summary: Vec<CellSummary>,
    pub audit: AuditStats,
}

impl SweepOutput {
    pub fn summary_of(&self, deployment: DeploymentKind, antennas: usize, scheme: Scheme, nmse_db: Option<f64>) -> Option<&CellSummary> {
        self.summary.iter().find(|s| {
            s.cell.deployment == deployment && s.cell.antennas == antennas && s.cell.scheme == scheme && s.cell.nmse_db == nmse_db
        })
    }
}

struct UnitOutput {
    records: Vec<Record>,
    audit: AuditStats,
}

fn run_unit(ctx: &Context, d: &Deployment, cells: &[(usize, &Cell)], drop: u64) -> Result<UnitOutput> {
    let cfg = &ctx.cfg;
    let noise = cfg.noise_w();
    let budgets = ctx.budgets(d);
    let factor = cfg.se_factor();
    let mut out = UnitOutput { records: Vec::new(), audit: AuditStats::default() };
    for h in ctx.channels(d, drop)? {
        let r = h.realization_index;
        let est_seed = derive_seed(realization_seed(cfg.seed, drop, r), &[domain::ESTIMATION]);
        let mut estimates: Vec<(Option<f64>, ChannelTensor)> = Vec::new();
        for &(idx, cell) in cells {
            let est = match estimates.iter().find(|(n, _)| *n == cell.nmse_db) {
                Some((_, e)) => e,
                None => {
                    let e = match cell.nmse_db {
                        None => h.clone(),
                        Some(db) => add_estimation_error(&h, db_to_linear(db), est_seed)?.estimate,
                    };
                    estimates.push((cell.nmse_db, e));
                    &estimates.last().expect("just pushed").1
                }
            };
            let p = build_precoder(cell.scheme, est, d, &budgets, noise, ctx.alphabet.as_ref())?;
            out.audit.add(&p);
            let sinr = compute_sinr(&h, &p, noise)?;
            let (per_ue, _) = spectral_efficiency(&sinr, ctx.alphabet.as_ref(), factor);
            out.records.push(Record { cell: idx, drop, realization: r, metrics: MetricsRecord::from_per_ue(per_ue) });
        }
    }
    Ok(out)
}

/// Runs every cell of the configured grid. Output order and values do not
/// depend on the number of worker threads.
pub fn run_sweep(ctx: &Context) -> Result<SweepOutput> {
    let cfg = &ctx.cfg;
    let mut cells = Vec::new();
    for &deployment in &cfg.deployments {
        for &antennas in &cfg.antennas {
            for &scheme in &cfg.schemes {
                for nmse_db in cfg.csi_conditions() {
                    cells.push(Cell { deployment, antennas, scheme, nmse_db });
                }
            }
        }
    }
    let mut skipped: Vec<Option<String>> = vec![None; cells.len()];
    // (deployment, antennas) groups with their runnable cells
    let mut groups: Vec<(Deployment, Vec<(usize, &Cell)>)> = Vec::new();
    for &deployment in &cfg.deployments {
        for &antennas in &cfg.antennas {
            let members: Vec<usize> =
                (0..cells.len()).filter(|&i| cells[i].deployment == deployment && cells[i].antennas == antennas).collect();
            match ctx.deployment(deployment, antennas) {
                Err(SimError::Config(reason)) => {
                    let reason = format!("invalid-antenna-split: {reason}");
                    members.iter().for_each(|&i| skipped[i] = Some(reason.clone()));
                }
                Err(e) => return Err(e),
                Ok(d) => {
                    let mut run = Vec::new();
                    for &i in &members {
                        match infeasibility(cells[i].scheme, &d, cfg.num_ues) {
                            Some(reason) => skipped[i] = Some(reason),
                            None => run.push((i, &cells[i])),
                        }
                    }
                    if !run.is_empty() {
                        groups.push((d, run));
                    }
                }
            }
        }
    }
    let units: Vec<(usize, u64)> =
        (0..groups.len()).flat_map(|g| (0..cfg.drops as u64).map(move |d| (g, d))).collect();
    let results: Vec<UnitOutput> = units
        .par_iter()
        .map(|&(g, drop)| run_unit(ctx, &groups[g].0, &groups[g].1, drop))
        .collect::<Result<_>>()?;

    let mut audit = AuditStats::default();
    let mut records: Vec<Record> = Vec::new();
    for u in results {
        audit.merge(&u.audit);
        records.extend(u.records);
    }
    records.sort_by_key(|r| (r.cell, r.drop, r.realization));

    let mut aggs = vec![Aggregate::default(); cells.len()];
    for r in &records {
        aggs[r.cell].push(&r.metrics);
    }
    let summary = cells
        .iter()
        .zip(aggs)
        .zip(skipped)
        .map(|((cell, agg), skipped)| CellSummary {
            cell: cell.clone(),
            skipped,
            records: agg.count(),
            sum_se: agg.sum_se(),
            jain: agg.jain(),
        })
        .collect();
    Ok(SweepOutput { cells, records, summary, audit })
}
