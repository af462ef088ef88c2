use std::fmt::Write as _;
use std::path::Path;

use super::{wave_packet, NoiseSpec, PlantedField, PlantedMode};
use crate::error::{DmdError, Result};
use crate::kv::{parse_kv, KvEntry};

/// Frequency, growth rate and amplitude of one planted mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub st: f64,
    pub growth: f64,
    pub amplitude: f64,
}

/// Declarative description of a planted-field data set.
///
/// Text form, one `key = value` per line:
///
/// ```text
/// grid = 101x101        # ny x nx
/// m = 400
/// dt = 0.25
/// x_range = 0, 10
/// y_range = -5, 5
/// mode = 0.147, 0, 0.5  # st, growth, amplitude; repeat per mode
/// sigma2 = 0.1
/// seed = 1
/// ```
///
/// Omitted keys keep their defaults, except that the mode list is exactly
/// the `mode` lines given (none means an all-zero field).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub grid: (usize, usize),
    pub m: usize,
    pub dt: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub modes: Vec<ModeSpec>,
    pub sigma2: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            grid: (101, 101),
            m: 400,
            dt: 0.25,
            x_range: (0.0, 10.0),
            y_range: (-5.0, 5.0),
            modes: Vec::new(),
            sigma2: 0.0,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    /// Two neutral wake-like modes at St 0.147 and 0.296 on the default grid.
    pub fn cylinder_analog() -> Self {
        GeneratorConfig {
            modes: vec![
                ModeSpec {
                    st: 0.147,
                    growth: 0.0,
                    amplitude: 0.5,
                },
                ModeSpec {
                    st: 0.296,
                    growth: 0.0,
                    amplitude: 0.2,
                },
            ],
            ..Self::default()
        }
    }

    /// Keys understood by [`GeneratorConfig::from_entries`].
    pub const KEYS: [&'static str; 8] =
        ["grid", "m", "dt", "x_range", "y_range", "mode", "sigma2", "seed"];

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_entries(&parse_kv(text)?)
    }

    /// Builds a configuration from parsed entries; any key outside
    /// [`GeneratorConfig::KEYS`] is an error naming its line.
    pub fn from_entries(entries: &[KvEntry]) -> Result<Self> {
        let mut cfg = GeneratorConfig::default();
        for e in entries {
            match e.key.as_str() {
                "grid" => {
                    let (ny, nx) = e
                        .value
                        .split_once(['x', 'X'])
                        .ok_or_else(|| e.error("expected `NYxNX`".into()))?;
                    let dim = |s: &str| -> Result<usize> {
                        s.trim()
                            .parse()
                            .map_err(|_| e.error(format!("invalid grid size `{}`", s.trim())))
                    };
                    cfg.grid = (dim(ny)?, dim(nx)?);
                }
                "m" => cfg.m = e.parse()?,
                "dt" => cfg.dt = e.parse()?,
                "x_range" | "y_range" => {
                    let v: Vec<f64> = e.parse_list()?;
                    if v.len() != 2 || !(v[0] < v[1]) {
                        return Err(e.error("expected `lo, hi` with lo < hi".into()));
                    }
                    if e.key == "x_range" {
                        cfg.x_range = (v[0], v[1]);
                    } else {
                        cfg.y_range = (v[0], v[1]);
                    }
                }
                "mode" => {
                    let v: Vec<f64> = e.parse_list()?;
                    if v.len() != 3 {
                        return Err(e.error("expected `st, growth, amplitude`".into()));
                    }
                    cfg.modes.push(ModeSpec {
                        st: v[0],
                        growth: v[1],
                        amplitude: v[2],
                    });
                }
                "sigma2" => cfg.sigma2 = e.parse()?,
                "seed" => cfg.seed = e.parse()?,
                _ => return Err(e.unknown()),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| DmdError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(DmdError::InvalidParameter(msg));
        if self.grid.0 == 0 || self.grid.1 == 0 {
            return bad(format!("grid must be nonempty, got {}x{}", self.grid.0, self.grid.1));
        }
        if self.m < crate::snapshots::MIN_SNAPSHOTS {
            return bad(format!(
                "m must be at least {}, got {}",
                crate::snapshots::MIN_SNAPSHOTS,
                self.m
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return bad(format!("sigma2 must be nonnegative, got {}", self.sigma2));
        }
        for md in &self.modes {
            if !(md.st.is_finite() && md.growth.is_finite() && md.amplitude.is_finite()) {
                return bad("mode parameters must be finite".into());
            }
        }
        Ok(())
    }

    pub fn planted_field(&self) -> PlantedField {
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(j, md)| PlantedMode {
                shape: wave_packet(j, md.st, self.grid, self.x_range, self.y_range),
                st: md.st,
                growth: md.growth,
                amplitude: md.amplitude,
            })
            .collect();
        PlantedField {
            grid: self.grid,
            modes,
            dt: self.dt,
            m: self.m,
        }
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec {
            variance: self.sigma2,
            seed: self.seed,
        }
    }

    /// Fully resolved text form; parsing it gives back `self`.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "grid = {}x{}", self.grid.0, self.grid.1);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "dt = {}", self.dt);
        let _ = writeln!(s, "x_range = {}, {}", self.x_range.0, self.x_range.1);
        let _ = writeln!(s, "y_range = {}, {}", self.y_range.0, self.y_range.1);
        for md in &self.modes {
            let _ = writeln!(s, "mode = {}, {}, {}", md.st, md.growth, md.amplitude);
        }
        let _ = writeln!(s, "sigma2 = {}", self.sigma2);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}
