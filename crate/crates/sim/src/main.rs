use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dmimo_core::geometry::{site_count, DeploymentKind};
use dmimo_core::modulation::Modulation;
use dmimo_core::precoding::Scheme;
use dmimo_sim::compare::{run_capacity_compare, write_compare};
use dmimo_sim::config::SimConfig;
use dmimo_sim::io::write_walls;
use dmimo_sim::output::{hash_comment, now_rfc3339, write_manifest, write_sweep};
use dmimo_sim::snrmap::{run_snr_map, write_map};
use dmimo_sim::sweep::{infeasibility, run_sweep, Context};
use dmimo_sim::tables::{qam_table, write_table};
use dmimo_sim::{Result, SimError};

#[derive(Parser)]
#[command(name = "dmimo", version, about = "Distributed MIMO indoor coverage simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep over deployments, antennas, schemes and CSI errors.
    Simulate,
    /// Single-UE MRT SNR over a position grid.
    Snrmap {
        /// Grid spacing in meters.
        #[arg(long)]
        grid_step: Option<f64>,
    },
    /// Sum-capacity bound against network MIMO with Gaussian signaling.
    Capacity,
    /// Writes the 256-QAM mutual-information and MMSE table.
    Tables,
}

#[derive(Args)]
struct Opts {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_delimiter = ',')]
    deployment: Vec<DeploymentKind>,
    #[arg(long, global = true, value_delimiter = ',')]
    scheme: Vec<Scheme>,
    #[arg(long, global = true, value_delimiter = ',')]
    antennas: Vec<usize>,
    #[arg(long, global = true)]
    modulation: Option<Modulation>,
    /// CSI error levels in dB; `-inf` selects perfect CSI.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    nmse_db: Vec<f64>,
    #[arg(long, global = true)]
    drops: Option<usize>,
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Number of PRBs actually simulated (one subcarrier each).
    #[arg(long, global = true)]
    prbs: Option<usize>,
    #[arg(long, global = true, env = "DMIMO_THREADS")]
    threads: Option<usize>,
}

impl Opts {
    fn config(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(p) => SimConfig::load(p)?,
            None => SimConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if !self.deployment.is_empty() {
            cfg.deployments = self.deployment.clone();
        }
        if !self.scheme.is_empty() {
            cfg.schemes = self.scheme.clone();
        }
        if !self.antennas.is_empty() {
            cfg.antennas = self.antennas.clone();
        }
        if let Some(m) = self.modulation {
            cfg.modulation = m;
        }
        if !self.nmse_db.is_empty() {
            cfg.perfect_csi = self.nmse_db.iter().any(|v| *v == f64::NEG_INFINITY);
            cfg.nmse_db = self.nmse_db.iter().copied().filter(|v| v.is_finite()).collect();
            if self.nmse_db.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
                return Err(SimError::Config("nmse-db values must be finite or -inf".into()));
            }
        }
        if let Some(d) = self.drops {
            cfg.drops = d;
        }
        if let Some(r) = self.realizations {
            cfg.realizations = r;
        }
        if let Some(f) = self.prbs {
            cfg.simulated_prbs = Some(f);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn simulate(cfg: SimConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let ctx = Context::new(cfg)?;
    let res = run_sweep(&ctx)?;
    let skipped = res.summary.iter().filter(|s| s.skipped.is_some()).count();
    eprintln!(
        "{} records over {} cells ({skipped} skipped); max budget excess {:.2e}",
        res.records.len(),
        res.summary.len(),
        res.audit.max_violation
    );
    let mut files = write_sweep(out, &ctx.cfg, &res)?;
    let walls = out.join("walls.csv");
    write_walls(&walls, &ctx.plan, Some(&hash_comment(&ctx.cfg)))?;
    files.push(walls);
    Ok(files)
}

fn snrmap(cfg: SimConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let ctx = Context::new(cfg)?;
    let cfg = &ctx.cfg;
    std::fs::create_dir_all(out).map_err(|e| SimError::io(out, e))?;
    let comment = hash_comment(cfg);
    let mut files = Vec::new();
    for &kind in &cfg.deployments {
        // Largest even split not above the requested count (40 for forty-indoor at 48).
        let n = site_count(&ctx.plan, kind)?;
        let m = cfg.snr_map.antennas / n * n;
        if m == 0 {
            return Err(SimError::Config(format!("{} antennas cannot cover the {n} sites of {kind}", cfg.snr_map.antennas)));
        }
        let map = run_snr_map(&ctx, kind, m, cfg.snr_map.grid_step_m, cfg.snr_map.realizations)?;
        let path = out.join(format!("snrmap_{}.csv", kind.name()));
        write_map(&path, &map, Some(&comment))?;
        eprintln!("{kind}: {} positions, M = {m}", map.len());
        files.push(path);
    }
    let walls = out.join("walls.csv");
    write_walls(&walls, &ctx.plan, Some(&comment))?;
    files.push(walls);
    Ok(files)
}

fn capacity(cfg: SimConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let ctx = Context::new(cfg)?;
    let cfg = &ctx.cfg;
    let mut runs = Vec::new();
    for &kind in &cfg.deployments {
        let mut ms = Vec::new();
        for &m in &cfg.antennas {
            let reason = match ctx.deployment(kind, m) {
                Ok(d) => infeasibility(Scheme::Network, &d, cfg.num_ues),
                Err(e) => Some(format!("invalid-antenna-split: {e}")),
            };
            match reason {
                Some(r) => eprintln!("{kind} M = {m}: skipped ({r})"),
                None => ms.push(m),
            }
        }
        runs.push((kind, run_capacity_compare(&ctx, kind, &ms)?));
    }
    write_compare(out, &runs, Some(&hash_comment(cfg)))
}

fn tables(cfg: SimConfig, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| SimError::io(out, e))?;
    let t = qam_table(&cfg)?;
    let path = out.join(format!("table_qam{}.csv", t.order()));
    write_table(&path, &t)?;
    Ok(vec![path])
}

fn run(cli: Cli) -> Result<()> {
    let started = now_rfc3339();
    let mut cfg = cli.opts.config()?;
    match &cli.command {
        Command::Snrmap { grid_step } => {
            if let Some(s) = *grid_step {
                cfg.snr_map.grid_step_m = s;
            }
            if let Some(r) = cli.opts.realizations {
                cfg.snr_map.realizations = r;
            }
            if let Some(&m) = cli.opts.antennas.first() {
                cfg.snr_map.antennas = m;
            }
            cfg.validate()?;
        }
        Command::Capacity => cfg.modulation = Modulation::Gaussian,
        _ => {}
    }
    if let Some(n) = cli.opts.threads {
        if n == 0 {
            return Err(SimError::Config("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
    }
    let out = &cli.opts.out;
    let files = match &cli.command {
        Command::Simulate => simulate(cfg.clone(), out)?,
        Command::Snrmap { .. } => snrmap(cfg.clone(), out)?,
        Command::Capacity => capacity(cfg.clone(), out)?,
        Command::Tables => tables(cfg.clone(), out)?,
    };
    let manifest = write_manifest(out, &cfg, &command_line(), started, &files)?;
    for f in files.iter().chain([&manifest]) {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
