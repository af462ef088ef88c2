//! Merging of the `key = value` configuration file with command-line flags
//! into one validated [`RunConfig`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ttls_dmd::dmd::{Algorithm, EkNorm, TruncationLevel};
use ttls_dmd::kv::{parse_kv, KvEntry};
use ttls_dmd::stats::DEFAULT_MATCH_RADIUS;
use ttls_dmd::synth::GeneratorConfig;

use crate::args::{CommandKind, RunArgs};
use crate::error::{config_err, CliError};

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub algorithms: Vec<Algorithm>,
    pub r: Option<usize>,
    pub k: Option<TruncationLevel>,
    pub k_list: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub ek_norm: EkNorm,
    pub subtract_mean: bool,
    pub scale: Option<f64>,
    pub match_radius: Option<f64>,
    pub parallel: bool,
    /// Planted-field description for `gen` and `montecarlo`.
    pub generator: Option<GeneratorConfig>,
}

/// Raw values before per-command validation; `None` means "not given".
#[derive(Debug, Default)]
struct Raw {
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    algorithm: Option<String>,
    r: Option<usize>,
    k: Option<String>,
    k_list: Option<String>,
    trials: Option<usize>,
    ek_norm: Option<String>,
    subtract_mean: Option<bool>,
    scale: Option<f64>,
    match_radius: Option<f64>,
    serial: Option<bool>,
    sigma2: Option<f64>,
    seed: Option<u64>,
    generator_entries: Vec<KvEntry>,
}

fn entry_value<T: FromStr>(e: &KvEntry) -> Result<T, CliError> {
    e.parse().map_err(config_err)
}

fn bool_value(e: &KvEntry) -> Result<bool, CliError> {
    match e.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_err(e.error(format!("expected a boolean, got `{}`", e.value)))),
    }
}

impl Raw {
    fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut raw = Raw::default();
        for e in parse_kv(&text).map_err(config_err)? {
            match e.key.as_str() {
                "input" => raw.input = Some(PathBuf::from(&e.value)),
                "output" => raw.output = Some(PathBuf::from(&e.value)),
                "out_dir" => raw.out_dir = Some(PathBuf::from(&e.value)),
                "algorithm" => raw.algorithm = Some(e.value.clone()),
                "r" => raw.r = Some(entry_value(&e)?),
                "k" => raw.k = Some(e.value.clone()),
                "k_list" => raw.k_list = Some(e.value.clone()),
                "trials" => raw.trials = Some(entry_value(&e)?),
                "ek_norm" => raw.ek_norm = Some(e.value.clone()),
                "subtract_mean" => raw.subtract_mean = Some(bool_value(&e)?),
                "scale" => raw.scale = Some(entry_value(&e)?),
                "match_radius" => raw.match_radius = Some(entry_value(&e)?),
                "serial" => raw.serial = Some(bool_value(&e)?),
                key if GeneratorConfig::KEYS.contains(&key) => raw.generator_entries.push(e),
                _ => return Err(config_err(e.unknown())),
            }
        }
        Ok(raw)
    }

    fn overlay(&mut self, a: RunArgs) {
        fn set<T>(slot: &mut Option<T>, v: Option<T>) {
            if v.is_some() {
                *slot = v;
            }
        }
        set(&mut self.input, a.input);
        set(&mut self.output, a.output);
        set(&mut self.out_dir, a.out_dir);
        set(&mut self.algorithm, a.algorithm);
        set(&mut self.r, a.r);
        set(&mut self.k, a.k);
        set(&mut self.k_list, a.k_list);
        set(&mut self.trials, a.trials);
        set(&mut self.ek_norm, a.ek_norm);
        set(&mut self.scale, a.scale);
        set(&mut self.match_radius, a.match_radius);
        set(&mut self.sigma2, a.sigma2);
        set(&mut self.seed, a.seed);
        if a.subtract_mean {
            self.subtract_mean = Some(true);
        }
        if a.serial {
            self.serial = Some(true);
        }
    }

    /// Names of the given settings among `names`.
    fn given(&self, names: &[&'static str]) -> Vec<&'static str> {
        names
            .iter()
            .copied()
            .filter(|&n| match n {
                "input" => self.input.is_some(),
                "output" => self.output.is_some(),
                "algorithm" => self.algorithm.is_some(),
                "r" => self.r.is_some(),
                "k" => self.k.is_some(),
                "k_list" => self.k_list.is_some(),
                "trials" => self.trials.is_some(),
                "ek_norm" => self.ek_norm.is_some(),
                "subtract_mean" => self.subtract_mean.is_some(),
                "scale" => self.scale.is_some(),
                "match_radius" => self.match_radius.is_some(),
                "serial" => self.serial.is_some(),
                "sigma2" => self.sigma2.is_some(),
                "seed" => self.seed.is_some(),
                _ => false,
            })
            .collect()
    }

    fn forbid(&self, cmd: CommandKind, names: &[&'static str]) -> Result<(), CliError> {
        let given = self.given(names);
        if let Some(first) = given.first() {
            return Err(CliError::Config(format!(
                "`{}` is not used by `{}`",
                first.replace('_', "-"),
                cmd.name()
            )));
        }
        Ok(())
    }

    fn require<T: Clone>(v: &Option<T>, name: &str, cmd: CommandKind) -> Result<T, CliError> {
        v.clone()
            .ok_or_else(|| CliError::Config(format!("`{}` requires `--{name}`", cmd.name())))
    }
}

fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>, CliError> {
    let mut algs = Vec::new();
    for part in s.split(',') {
        let a: Algorithm = part.trim().parse().map_err(config_err)?;
        if algs.contains(&a) {
            return Err(CliError::Config(format!("algorithm `{a}` listed twice")));
        }
        algs.push(a);
    }
    Ok(algs)
}

fn parse_k_list(s: &str) -> Result<Vec<usize>, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return Err(CliError::Config("k list is empty".into()));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| CliError::Config(format!("invalid k `{p}` in k list")))
        })
        .collect()
}

impl RunConfig {
    pub fn resolve(command: CommandKind, args: RunArgs) -> Result<Self, CliError> {
        let mut raw = match &args.config {
            Some(path) => Raw::from_file(path)?,
            None => Raw::default(),
        };
        raw.overlay(args);
        Self::from_raw(command, raw)
    }

    fn from_raw(cmd: CommandKind, raw: Raw) -> Result<Self, CliError> {
        use CommandKind::*;
        let uses_generator = matches!(cmd, Gen | Montecarlo);
        if !uses_generator {
            if let Some(e) = raw.generator_entries.first() {
                return Err(config_err(e.error(format!("not used by `{}`", cmd.name()))));
            }
            raw.forbid(cmd, &["sigma2", "seed"])?;
        }
        match cmd {
            Gen => raw.forbid(
                cmd,
                &[
                    "input",
                    "algorithm",
                    "r",
                    "k",
                    "k_list",
                    "trials",
                    "ek_norm",
                    "subtract_mean",
                    "scale",
                    "match_radius",
                    "serial",
                ],
            )?,
            Decompose => raw.forbid(cmd, &["output", "k_list", "trials", "match_radius", "serial"])?,
            SweepK => raw.forbid(cmd, &["output", "k", "trials", "match_radius", "serial"])?,
            Montecarlo => raw.forbid(cmd, &["input", "output", "k_list", "scale"])?,
        }

        let algorithms = match (cmd, &raw.algorithm) {
            (Gen, _) => Vec::new(),
            (Montecarlo, None) => Algorithm::ALL.to_vec(),
            (Montecarlo, Some(s)) => parse_algorithms(s)?,
            (SweepK, None) => vec![Algorithm::Ttls],
            (_, Some(s)) => {
                let algs = parse_algorithms(s)?;
                if algs.len() != 1 {
                    return Err(CliError::Config(format!(
                        "`{}` takes a single algorithm",
                        cmd.name()
                    )));
                }
                algs
            }
            (Decompose, None) => {
                return Err(CliError::Config("`decompose` requires `--algorithm`".into()))
            }
        };
        if cmd == SweepK && algorithms != [Algorithm::Ttls] {
            return Err(CliError::Config("`sweep-k` only runs ttls".into()));
        }
        let has_ttls = algorithms.contains(&Algorithm::Ttls);
        if !has_ttls {
            if raw.k.is_some() {
                return Err(CliError::Config("`k` is only used with ttls".into()));
            }
            if raw.ek_norm.is_some() {
                return Err(CliError::Config("`ek-norm` is only used with ttls".into()));
            }
        }

        let r = if cmd == Gen {
            None
        } else {
            let r = Raw::require(&raw.r, "r", cmd)?;
            if r == 0 {
                return Err(CliError::Config("`r` must be at least 1".into()));
            }
            Some(r)
        };
        let k = match (&raw.k, has_ttls && cmd != SweepK) {
            (Some(s), _) => Some(s.parse::<TruncationLevel>().map_err(config_err)?),
            (None, true) => Some(TruncationLevel::Auto),
            (None, false) => None,
        };
        if let (Some(TruncationLevel::Explicit(k)), Some(r)) = (k, r) {
            if k > r {
                return Err(CliError::Config(format!("k = {k} exceeds r = {r}")));
            }
        }
        let k_list = match &raw.k_list {
            Some(s) => {
                let list = parse_k_list(s)?;
                let r = r.expect("sweep-k requires r");
                if let Some(bad) = list.iter().find(|&&k| k == 0 || k > r) {
                    return Err(CliError::Config(format!("k = {bad} outside 1..={r}")));
                }
                Some(list)
            }
            None => None,
        };
        let ek_norm = match &raw.ek_norm {
            Some(s) => s.parse().map_err(config_err)?,
            None => EkNorm::default(),
        };

        let input = if matches!(cmd, Decompose | SweepK) {
            Some(Raw::require(&raw.input, "input", cmd)?)
        } else {
            None
        };
        let trials = if cmd == Montecarlo {
            let t = Raw::require(&raw.trials, "trials", cmd)?;
            if t < 2 {
                return Err(CliError::Config(format!("need at least 2 trials, got {t}")));
            }
            Some(t)
        } else {
            None
        };
        if let Some(s) = raw.scale {
            if !(s.is_finite() && s != 0.0) {
                return Err(CliError::Config(format!("scale must be finite and nonzero, got {s}")));
            }
        }
        if let Some(mr) = raw.match_radius {
            if !(mr > 0.0 && mr.is_finite()) {
                return Err(CliError::Config(format!("match radius must be positive, got {mr}")));
            }
        }

        let generator = if uses_generator {
            // without any generator key the cylinder-analog field is used
            let mut g = if raw.generator_entries.is_empty() {
                GeneratorConfig::cylinder_analog()
            } else {
                GeneratorConfig::from_entries(&raw.generator_entries).map_err(config_err)?
            };
            if let Some(s) = raw.sigma2 {
                g.sigma2 = s;
            }
            if let Some(s) = raw.seed {
                g.seed = s;
            }
            g.validate().map_err(config_err)?;
            Some(g)
        } else {
            None
        };

        Ok(RunConfig {
            command: cmd,
            input,
            output: raw.output,
            out_dir: raw.out_dir.unwrap_or_else(|| PathBuf::from(".")),
            algorithms,
            r,
            k,
            k_list,
            trials,
            ek_norm,
            subtract_mean: raw.subtract_mean.unwrap_or(false),
            scale: raw.scale,
            match_radius: match cmd {
                Montecarlo => Some(raw.match_radius.unwrap_or(DEFAULT_MATCH_RADIUS)),
                _ => None,
            },
            parallel: !raw.serial.unwrap_or(false),
            generator,
        })
    }

    /// Snapshot path written by `gen`.
    pub fn gen_output(&self) -> PathBuf {
        self.output
            .clone()
            .unwrap_or_else(|| self.out_dir.join("snapshots.bin"))
    }

    /// Text form of every resolved setting, readable back with `--config`.
    /// Parallelism is omitted because it does not affect results.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# ttls-dmd {}", self.command.name());
        if let Some(p) = &self.input {
            let _ = writeln!(s, "input = {}", p.display());
        }
        if self.command == CommandKind::Gen {
            let _ = writeln!(s, "output = {}", self.gen_output().display());
        }
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        if !self.algorithms.is_empty() {
            let names: Vec<&str> = self.algorithms.iter().map(|a| a.name()).collect();
            let _ = writeln!(s, "algorithm = {}", names.join(","));
        }
        if let Some(r) = self.r {
            let _ = writeln!(s, "r = {r}");
        }
        if let Some(k) = self.k {
            let _ = writeln!(s, "k = {k}");
        }
        if let Some(list) = &self.k_list {
            let v: Vec<String> = list.iter().map(|k| k.to_string()).collect();
            let _ = writeln!(s, "k_list = {}", v.join(","));
        }
        if let Some(t) = self.trials {
            let _ = writeln!(s, "trials = {t}");
        }
        if self.algorithms.contains(&Algorithm::Ttls) {
            let _ = writeln!(s, "ek_norm = {}", self.ek_norm);
        }
        if self.command != CommandKind::Gen {
            let _ = writeln!(s, "subtract_mean = {}", self.subtract_mean);
        }
        if let Some(x) = self.scale {
            let _ = writeln!(s, "scale = {x}");
        }
        if let Some(radius) = self.match_radius {
            let _ = writeln!(
                s,
                "# trial eigenvalues are matched to references by nearest neighbour"
            );
            let _ = writeln!(s, "match_radius = {radius}");
        }
        if let Some(g) = &self.generator {
            s.push_str(&g.to_kv_string());
        }
        s
    }
}
