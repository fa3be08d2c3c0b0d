use std::path::Path;
use std::process::Command;

use dmimo_core::channel::{generate_channel, link_profiles};
use dmimo_core::geometry::{count_walls, DeploymentKind, Point3, UeDrop, UE_HEIGHT_M};
use dmimo_core::precoding::{mrt_snr, Scheme};
use dmimo_core::units::linear_to_db;
use dmimo_sim::io::read_csv;
use dmimo_sim::output::{write_sweep, PER_UE_HEADER, RECORDS_HEADER, SUMMARY_HEADER};
use dmimo_sim::snrmap::{room_averages, run_snr_map};
use dmimo_sim::sweep::{run_sweep, Context};
use dmimo_sim::SimConfig;

fn small() -> SimConfig {
    SimConfig {
        drops: 1,
        realizations: 1,
        simulated_prbs: Some(4),
        deployments: vec![DeploymentKind::TwoIndoor],
        antennas: vec![48],
        schemes: vec![Scheme::Network],
        ..SimConfig::default()
    }
}

fn dmimo(args: &[&str], threads: Option<&str>) -> std::process::Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dmimo"));
    c.args(args).env_remove("DMIMO_THREADS");
    if let Some(t) = threads {
        c.env("DMIMO_THREADS", t);
    }
    c.output().unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn one_cell_one_drop_gives_one_record_and_one_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    let out = run_sweep(&Context::new(cfg.clone()).unwrap()).unwrap();
    write_sweep(dir.path(), &cfg, &out).unwrap();
    let (h, rows) = read_csv(&dir.path().join("records.csv")).unwrap();
    assert_eq!(h, RECORDS_HEADER);
    assert_eq!(rows.len(), 1);
    let (h, rows) = read_csv(&dir.path().join("summary.csv")).unwrap();
    assert_eq!(h, SUMMARY_HEADER);
    assert_eq!(rows.len(), 1);
    let (h, rows) = read_csv(&dir.path().join("per_ue.csv")).unwrap();
    assert_eq!(h, PER_UE_HEADER);
    assert_eq!(rows.len(), cfg.num_ues);
}

#[test]
fn every_csv_carries_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = dmimo(&["simulate", "--out", d, "--drops", "1", "--realizations", "1", "--prbs", "2", "--deployment", "two-indoor", "--antennas", "48"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    let hash = manifest["config_hash"].as_str().unwrap();
    let files = manifest["outputs"].as_array().unwrap();
    assert_eq!(files.len(), 4);
    for f in files {
        let text = read(&dir.path().join(f.as_str().unwrap()));
        assert_eq!(text.lines().next().unwrap(), format!("# config_hash={hash}"));
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path| {
        vec![
            "simulate".to_string(),
            "--out".into(),
            d.to_str().unwrap().into(),
            "--drops".into(),
            "3".into(),
            "--realizations".into(),
            "2".into(),
            "--prbs".into(),
            "3".into(),
            "--deployment".into(),
            "two-indoor,four-indoor".into(),
            "--antennas".into(),
            "24,48".into(),
            "--nmse-db".into(),
            "-inf,-20".into(),
        ]
    };
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let argv = args(dir.path());
        let o = dmimo(&argv.iter().map(String::as_str).collect::<Vec<_>>(), Some(threads));
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["records.csv", "per_ue.csv", "summary.csv"] {
        assert_eq!(read(&a.path().join(f)), read(&b.path().join(f)), "{f}");
    }
}

#[test]
fn every_requested_cell_appears_once() {
    let cfg = SimConfig {
        drops: 1,
        realizations: 1,
        simulated_prbs: Some(2),
        deployments: vec![DeploymentKind::TwoIndoor, DeploymentKind::FortyIndoor],
        antennas: vec![24, 40],
        schemes: Scheme::SWEEP.to_vec(),
        perfect_csi: true,
        nmse_db: vec![-30.0],
        ..SimConfig::default()
    };
    let out = run_sweep(&Context::new(cfg).unwrap()).unwrap();
    assert_eq!(out.summary.len(), 2 * 2 * 4 * 2);
    let reasons: Vec<&str> = out.summary.iter().filter_map(|s| s.skipped.as_deref()).collect();
    // two-indoor, M=24: LS-MIMO; two-indoor, M=40: LS-MIMO; forty-indoor, M=24: bad split;
    // forty-indoor, M=40: LS-MIMO
    assert!(reasons.iter().any(|r| r.starts_with("lsmimo-infeasible")));
    assert!(reasons.iter().any(|r| r.starts_with("invalid-antenna-split")));
    for s in &out.summary {
        assert_eq!(s.skipped.is_some(), s.records == 0);
    }
    let mut keys: Vec<String> = out.summary.iter().map(|s| format!("{:?}", s.cell)).collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), out.summary.len());
}

#[test]
fn network_se_grows_with_antennas() {
    let cfg = SimConfig {
        drops: 3,
        realizations: 2,
        simulated_prbs: Some(5),
        antennas: (1..=10).map(|i| 24 * i).collect(),
        ..small()
    };
    let out = run_sweep(&Context::new(cfg.clone()).unwrap()).unwrap();
    let means: Vec<f64> = cfg
        .antennas
        .iter()
        .map(|&m| out.summary_of(DeploymentKind::TwoIndoor, m, Scheme::Network, None).unwrap().sum_se.unwrap().mean)
        .collect();
    for w in means.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "{means:?}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(dmimo(&["simulate", "--out", d, "--deployment", "nowhere"], None).status.code(), Some(2));
    assert_eq!(dmimo(&["simulate", "--out", d, "--prbs", "0"], None).status.code(), Some(2));
    assert_eq!(dmimo(&["simulate", "--out", d, "--scheme", "mrt-single"], None).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema_version": 7}"#).unwrap();
    assert_eq!(dmimo(&["simulate", "--out", d, "--config", bad.to_str().unwrap()], None).status.code(), Some(2));
    std::fs::write(&bad, r#"{"antenas": [24]}"#).unwrap();
    assert_eq!(dmimo(&["simulate", "--out", d, "--config", bad.to_str().unwrap()], None).status.code(), Some(2));
    let ok = dmimo(&["tables", "--out", d], None);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("table_qam256.csv").exists());
}

#[test]
fn snr_map_peaks_at_the_room_bs_without_shadowing() {
    let mut cfg = SimConfig::default();
    cfg.simulated_prbs = Some(4);
    for c in [&mut cfg.channel.indoor_los, &mut cfg.channel.indoor_nlos] {
        c.shadow_sigma_db = 0.0;
    }
    let ctx = Context::new(cfg).unwrap();
    let map = run_snr_map(&ctx, DeploymentKind::FortyIndoor, 40, 1.0, 20).unwrap();
    let d = ctx.deployment(DeploymentKind::FortyIndoor, 40).unwrap();
    for (room, site) in ctx.plan.rooms().iter().zip(&d.sites).take(6) {
        let inside: Vec<_> = map.iter().filter(|p| room.contains_strictly(dmimo_core::geometry::Point2::new(p.x, p.y))).collect();
        let best = inside.iter().max_by(|a, b| a.snr_db.total_cmp(&b.snr_db)).unwrap();
        let dist = |p: &&&dmimo_sim::snrmap::MapPoint| (p.x - site.position.x).hypot(p.y - site.position.y);
        let nearest = inside.iter().map(|p| dist(&p)).fold(f64::INFINITY, f64::min);
        assert!(dist(&best) <= nearest + 1e-9, "peak at ({}, {})", best.x, best.y);
    }
}

#[test]
fn single_central_room_snr_falls_with_wall_count() {
    let ctx = Context::new(SimConfig { simulated_prbs: Some(4), ..SimConfig::default() }).unwrap();
    let map = run_snr_map(&ctx, DeploymentKind::SingleCentral, 48, 2.5, 10).unwrap();
    let d = ctx.deployment(DeploymentKind::SingleCentral, 48).unwrap();
    let bs = d.sites[0].position;
    let mut by_walls: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
    for (room, avg) in ctx.plan.rooms().iter().zip(room_averages(&ctx.plan, &map)) {
        let c = room.center();
        let w = count_walls(&ctx.plan, bs, Point3::new(c.x, c.y, UE_HEIGHT_M)).num_walls;
        by_walls.entry(w).or_default().push(avg.unwrap());
    }
    let means: Vec<f64> = by_walls.values().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
    assert!(means.len() >= 3);
    for w in means.windows(2) {
        assert!(w[1] < w[0], "{by_walls:?}");
    }
}

#[test]
fn mirrored_positions_see_equal_mean_snr() {
    let cfg = SimConfig { simulated_prbs: Some(4), ..SimConfig::default() };
    let ctx = Context::new(cfg).unwrap();
    let d = ctx.deployment(DeploymentKind::TwoIndoor, 48).unwrap();
    let budgets = ctx.budgets(&d);
    let mean_db = |x: f64, y: f64| {
        let n = 300u64;
        let mut acc = 0.0;
        for i in 0..n {
            let drop = UeDrop { positions: vec![Point3::new(x, y, UE_HEIGHT_M)], drop_index: i, seed: 3 };
            let p = link_profiles(&ctx.plan, &d, &drop, &ctx.cfg.channel, ctx.cfg.carrier_hz, 3 + (y > 25.0) as u64);
            let h = generate_channel(&p, &d, &drop, &ctx.cfg.channel, &ctx.freqs, ctx.cfg.carrier_hz, 1000 + i + 100_000 * (y > 25.0) as u64).unwrap();
            let s = mrt_snr(&h, 0, &budgets, ctx.cfg.noise_w());
            acc += linear_to_db(s.iter().sum::<f64>() / s.len() as f64);
        }
        acc / n as f64
    };
    for (x, y) in [(20.5, 5.5), (73.0, 20.0), (48.0, 12.0)] {
        let (a, b) = (mean_db(x, y), mean_db(x, 50.0 - y));
        assert!((a - b).abs() < 0.5, "({x}, {y}): {a} vs {b}");
    }
}
