use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;
use ttls_dmd::dmd::io::{write_eigs_csv, write_ek_csv, write_mode_planes, write_modes};
use ttls_dmd::dmd::{Algorithm, AlgorithmSpec, PreparedSnapshots, TruncationLevel, TtlsConfig};
use ttls_dmd::stats::{
    monte_carlo, planted_references, write_ellipse_points_csv, write_stats_csv, MonteCarloConfig,
    MonteCarloReport,
};
use ttls_dmd::synth::{add_noise, gen_planted_field, GeneratorConfig};
use ttls_dmd::{load_snapshots, save_snapshots, DmdError, SnapshotFormat, SnapshotMatrix};

use crate::args::CommandKind;
use crate::config::RunConfig;
use crate::error::CliError;

pub const RESOLVED_CONFIG: &str = "resolved_config.txt";

/// Runs a resolved command and returns the files it wrote.
pub fn execute(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    create_dir(&cfg.out_dir)?;
    let mut written = match cfg.command {
        CommandKind::Gen => gen(cfg)?,
        CommandKind::Decompose => decompose(cfg)?,
        CommandKind::SweepK => sweep_k(cfg)?,
        CommandKind::Montecarlo => montecarlo(cfg)?,
    };
    let resolved = cfg.out_dir.join(RESOLVED_CONFIG);
    fs::write(&resolved, cfg.to_kv_string()).map_err(|e| DmdError::io(&resolved, e))?;
    written.push(resolved);
    Ok(written)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| DmdError::io(dir, e).into())
}

fn generator(cfg: &RunConfig) -> &GeneratorConfig {
    cfg.generator
        .as_ref()
        .expect("resolve sets a generator for gen and montecarlo")
}

fn gen(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let g = generator(cfg);
    let clean = gen_planted_field(&g.planted_field())?;
    let snapshots = add_noise(&clean, &g.noise())?;

    let out = cfg.gen_output();
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    save_snapshots(&snapshots, &out, SnapshotFormat::from_path(&out))?;

    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let modes: Vec<_> = g
        .modes
        .iter()
        .map(|md| json!({"st": md.st, "growth": md.growth, "amplitude": md.amplitude}))
        .collect();
    let provenance = json!({
        "tool": "ttls-dmd",
        "version": env!("CARGO_PKG_VERSION"),
        "generator": {
            "kind": "planted-field",
            "grid": [g.grid.0, g.grid.1],
            "m": g.m,
            "dt": g.dt,
            "x_range": [g.x_range.0, g.x_range.1],
            "y_range": [g.y_range.0, g.y_range.1],
            "modes": modes,
        },
        "sigma2": g.sigma2,
        "seed": g.seed,
        "output": out.display().to_string(),
        "created_unix": created,
    });
    let prov_path = cfg.out_dir.join("provenance.json");
    let text = serde_json::to_string_pretty(&provenance).expect("json value serializes");
    fs::write(&prov_path, text + "\n").map_err(|e| DmdError::io(&prov_path, e))?;
    Ok(vec![out, prov_path])
}

/// Loads `--input` and applies `--scale`, then `--subtract-mean`.
fn load_input(cfg: &RunConfig) -> Result<SnapshotMatrix, CliError> {
    let path = cfg.input.as_ref().expect("resolve requires input");
    let mut psi = load_snapshots(path, SnapshotFormat::from_path(path))?;
    if let Some(f) = cfg.scale {
        psi = psi.scaled(f)?;
    }
    if cfg.subtract_mean {
        psi = ttls_dmd::subtract_mean(&psi);
    }
    Ok(psi)
}

fn ttls_config(cfg: &RunConfig, r: usize, k: TruncationLevel) -> TtlsConfig {
    TtlsConfig {
        ek_norm: cfg.ek_norm,
        ..TtlsConfig::new(r, k)
    }
}

fn algorithm_spec(cfg: &RunConfig, alg: Algorithm) -> AlgorithmSpec {
    let r = cfg.r.expect("resolve requires r");
    match alg {
        Algorithm::Exact => AlgorithmSpec::Exact { r },
        Algorithm::Tls => AlgorithmSpec::Tls { r },
        Algorithm::Ttls => AlgorithmSpec::Ttls(ttls_config(
            cfg,
            r,
            cfg.k.unwrap_or(TruncationLevel::Auto),
        )),
        Algorithm::Subspace => AlgorithmSpec::Subspace { r },
    }
}

fn decompose(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let psi = load_input(cfg)?;
    let spec = algorithm_spec(cfg, cfg.algorithms[0]);
    let result = ttls_dmd::decompose(&psi, &spec)?;

    let eigs = cfg.out_dir.join("eigs.csv");
    let modes = cfg.out_dir.join("modes.bin");
    write_eigs_csv(&result, &eigs)?;
    write_modes(&result, &modes)?;
    let mut written = vec![eigs, modes];
    if let Some(e_of_k) = &result.e_of_k {
        let ek = cfg.out_dir.join("ek.csv");
        write_ek_csv(e_of_k, &ek)?;
        written.push(ek);
    }
    Ok(written)
}

fn sweep_k(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let psi = load_input(cfg)?;
    let r = cfg.r.expect("resolve requires r");
    let prepared = PreparedSnapshots::new(&psi)?;

    let auto = prepared.ttls(&ttls_config(cfg, r, TruncationLevel::Auto))?;
    let ek = cfg.out_dir.join("ek.csv");
    write_ek_csv(auto.e_of_k.as_deref().unwrap_or_default(), &ek)?;
    let mut written = vec![ek];

    let levels: Vec<usize> = match &cfg.k_list {
        Some(list) => list.clone(),
        None => (1..=r).collect(),
    };
    for k in levels {
        let red = if Some(k) == auto.k_used {
            auto.clone()
        } else {
            prepared.ttls(&ttls_config(cfg, r, TruncationLevel::Explicit(k)))?
        };
        let path = cfg.out_dir.join(format!("eigs_k{k}.csv"));
        write_eigs_csv(&prepared.lift(&red), &path)?;
        written.push(path);
    }
    Ok(written)
}

fn montecarlo(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let g = generator(cfg);
    let field = g.planted_field();
    let clean = gen_planted_field(&field)?;
    let references = planted_references(&field);
    let specs: Vec<AlgorithmSpec> = cfg
        .algorithms
        .iter()
        .map(|&a| algorithm_spec(cfg, a))
        .collect();
    let mc = MonteCarloConfig {
        parallel: cfg.parallel,
        subtract_mean: cfg.subtract_mean,
        match_radius: cfg.match_radius.expect("resolved for montecarlo"),
        ..MonteCarloConfig::new(cfg.trials.expect("resolve requires trials"), g.seed)
    };
    let report = monte_carlo(&clean, g.sigma2, &references, &specs, &mc)?;
    write_montecarlo(&report, &cfg.out_dir, g.dt, clean.grid())
}

fn write_montecarlo(
    report: &MonteCarloReport,
    dir: &Path,
    dt: f64,
    grid: Option<(usize, usize)>,
) -> Result<Vec<PathBuf>, CliError> {
    let stats = dir.join("stats.csv");
    let ellipses = dir.join("ellipse_points.csv");
    write_stats_csv(report, &stats)?;
    write_ellipse_points_csv(report, &ellipses)?;
    let mut written = vec![stats, ellipses];
    for alg in &report.algorithms {
        for (j, mode) in alg.modes.iter().enumerate() {
            let worst = mode.mode_errors.as_ref().and_then(|m| m.worst_mode.as_ref());
            if let Some(field) = worst {
                let path = dir.join(format!("worst_mode_{}_{j}.bin", alg.spec.algorithm()));
                write_mode_planes(field, dt, grid, &path)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
