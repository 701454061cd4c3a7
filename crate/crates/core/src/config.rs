//! Run configuration and its flat `key = value` file format.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are an
//! error so that typos do not silently fall back to defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::agent::PlasticityMode;
use crate::env::{Cell, GridConfig};
use crate::error::{Error, Result};
use crate::trainer::StageSchedule;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_VAR: &str = "QARDNS_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Learner {
    #[default]
    Qardns,
    Baseline,
}

impl FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qardns" => Ok(Learner::Qardns),
            "baseline" => Ok(Learner::Baseline),
            other => Err(Error::config(format!(
                "unknown learner '{other}' (expected qardns or baseline)"
            ))),
        }
    }
}

impl std::fmt::Display for Learner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Learner::Qardns => "qardns",
            Learner::Baseline => "baseline",
        })
    }
}

impl FromStr for PlasticityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "broadcast" => Ok(PlasticityMode::Broadcast),
            "outcome-signed" | "outcome_signed" => Ok(PlasticityMode::OutcomeSigned),
            other => Err(Error::config(format!(
                "unknown plasticity mode '{other}' (expected broadcast or outcome-signed)"
            ))),
        }
    }
}

impl std::fmt::Display for PlasticityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlasticityMode::Broadcast => "broadcast",
            PlasticityMode::OutcomeSigned => "outcome-signed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub episodes: u64,
    pub seed: u64,
    pub grid: GridConfig,
    pub n_qubits: usize,
    /// Overrides the per-stage shot count when set.
    pub shots: Option<u32>,
    pub learner: Learner,
    /// Pins ε for the whole run; `Some(1.0)` gives the random-policy control.
    pub fixed_epsilon: Option<f64>,
    pub plasticity: PlasticityMode,
    pub meta_hidden: usize,
    pub output_dir: PathBuf,
    pub stage_schedule: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            episodes: 5000,
            seed: 0,
            grid: GridConfig::default(),
            n_qubits: 3,
            shots: None,
            learner: Learner::Qardns,
            fixed_epsilon: None,
            plasticity: PlasticityMode::default(),
            meta_hidden: crate::meta::DEFAULT_HIDDEN,
            output_dir: default_output_dir(),
            stage_schedule: None,
        }
    }
}

pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
        .join("latest")
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.grid.n_agents != 2 {
            return Err(Error::config(format!(
                "exactly two agents are supported, got {}",
                self.grid.n_agents
            )));
        }
        if !matches!(self.n_qubits, 2 | 3) {
            return Err(Error::config(format!("n_qubits must be 2 or 3, got {}", self.n_qubits)));
        }
        if self.shots == Some(0) {
            return Err(Error::config("shots must be at least 1"));
        }
        if let Some(e) = self.fixed_epsilon {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::config(format!("fixed epsilon must be in [0, 1], got {e}")));
            }
        }
        if self.meta_hidden == 0 {
            return Err(Error::config("meta_hidden must be positive"));
        }
        Ok(())
    }

    /// The stage schedule named by the config, or the default table.
    pub fn load_schedule(&self) -> Result<StageSchedule> {
        match &self.stage_schedule {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                StageSchedule::parse(&text)
                    .map_err(|e| Error::config(format!("{}: {e}", path.display())))
            }
            None => Ok(StageSchedule::default()),
        }
    }

    pub fn from_kv_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_kv(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::config(format!("invalid value '{v}' for {key}")))
        }
        fn opt<T: FromStr>(key: &str, v: &str) -> Result<Option<T>> {
            if v.is_empty() || v.eq_ignore_ascii_case("none") {
                Ok(None)
            } else {
                num(key, v).map(Some)
            }
        }
        match key {
            "episodes" => self.episodes = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "dims" => self.grid.dims = parse_triple(value)?,
            "goal" => {
                let (x, y, z) = parse_triple(value)?;
                self.grid.goal = Cell::new(x, y, z);
            }
            "obstacle_fraction" => self.grid.obstacle_fraction = num(key, value)?,
            "obstacle_refresh_every" => self.grid.obstacle_refresh_every = num(key, value)?,
            "max_steps" => self.grid.max_steps = num(key, value)?,
            "n_agents" => self.grid.n_agents = num(key, value)?,
            "n_qubits" => self.n_qubits = num(key, value)?,
            "shots" => self.shots = opt(key, value)?,
            "learner" => self.learner = value.parse()?,
            "fixed_epsilon" => self.fixed_epsilon = opt(key, value)?,
            "plasticity" => self.plasticity = value.parse()?,
            "meta_hidden" => self.meta_hidden = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "stage_schedule" => {
                self.stage_schedule = (!value.is_empty() && !value.eq_ignore_ascii_case("none"))
                    .then(|| PathBuf::from(value))
            }
            other => return Err(Error::config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Serializes back to the `key = value` format; `apply_kv` on the result
    /// reproduces the config.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let g = &self.grid;
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
        let _ = writeln!(s, "episodes = {}", self.episodes);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "dims = {},{},{}", g.dims.0, g.dims.1, g.dims.2);
        let _ = writeln!(s, "goal = {},{},{}", g.goal.x, g.goal.y, g.goal.z);
        let _ = writeln!(s, "obstacle_fraction = {}", g.obstacle_fraction);
        let _ = writeln!(s, "obstacle_refresh_every = {}", g.obstacle_refresh_every);
        let _ = writeln!(s, "max_steps = {}", g.max_steps);
        let _ = writeln!(s, "n_agents = {}", g.n_agents);
        let _ = writeln!(s, "n_qubits = {}", self.n_qubits);
        let _ = writeln!(s, "shots = {}", opt(self.shots.map(|v| v.to_string())));
        let _ = writeln!(s, "learner = {}", self.learner);
        let _ = writeln!(s, "fixed_epsilon = {}", opt(self.fixed_epsilon.map(|v| v.to_string())));
        let _ = writeln!(s, "plasticity = {}", self.plasticity);
        let _ = writeln!(s, "meta_hidden = {}", self.meta_hidden);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(
            s,
            "stage_schedule = {}",
            opt(self.stage_schedule.as_ref().map(|p| p.display().to_string()))
        );
        s
    }
}

fn parse_triple(v: &str) -> Result<(i32, i32, i32)> {
    let parts: Vec<&str> = v.split([',', 'x']).map(str::trim).collect();
    let bad = || Error::config(format!("expected three integers, got '{v}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let p = |s: &str| s.parse::<i32>().map_err(|_| bad());
    Ok((p(parts[0])?, p(parts[1])?, p(parts[2])?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_roundtrip() {
        let mut cfg = RunConfig {
            episodes: 12,
            seed: 7,
            shots: Some(32),
            fixed_epsilon: Some(1.0),
            learner: Learner::Baseline,
            plasticity: PlasticityMode::OutcomeSigned,
            output_dir: PathBuf::from("/tmp/x"),
            ..RunConfig::default()
        };
        cfg.grid.dims = (6, 5, 2);
        cfg.grid.goal = Cell::new(5, 4, 1);
        let mut back = RunConfig::default();
        back.apply_kv(&cfg.to_kv_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn kv_errors() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_kv("episodes = ten").is_err());
        assert!(cfg.apply_kv("colour = blue").is_err());
        assert!(cfg.apply_kv("just words").is_err());
        assert!(cfg.apply_kv("# comment\n\nseed = 3\n").is_ok());
        assert_eq!(cfg.seed, 3);
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        let mut c = RunConfig::default();
        c.n_qubits = 4;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.grid.n_agents = 3;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.shots = Some(0);
        assert!(c.validate().is_err());
    }
}
