//! Flat `key = value` run configuration. Lines starting with `#` are
//! comments. The file comes from `--config`, else from `$EXO_CONFIG`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

pub const ENV_VAR: &str = "EXO_CONFIG";

pub const KNOWN_KEYS: &[&str] = &[
    "seed",
    "q",
    "alpha",
    "controller.dt",
    "controller.safety_limit_n",
    "controller.voluntary_torque_nmm",
    "controller.hold_tolerance_mm",
    "pid.kp",
    "pid.ki",
    "pid.kd",
    "motor.no_load_rpm",
    "motor.spool_radius_mm",
    "motor.stall_force_n",
    "tendon.stiffness",
    "tendon.force_cap_n",
    "sh.rest_n",
    "sh.elevated_n",
    "sh.depressed_n",
    "subject.id",
    "subject.group",
    "subject.hand",
    "subject.mas",
    "subject.crosstalk",
    "subject.drift",
    "subject.break_probability",
    "durations.median_total_s",
    "durations.sigma",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub source: Option<PathBuf>,
    entries: BTreeMap<String, String>,
}

impl Config {
    /// Explicit path first, then the environment variable, else empty.
    pub fn load(explicit: Option<&Path>) -> Result<Self> {
        let path = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(ENV_VAR)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from),
        };
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let mut cfg = Config::parse(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("config {}: {m}", path.display())),
            other => other,
        })?;
        cfg.source = Some(path);
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("line {}: expected `key = value`", i + 1))
            })?;
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                return Err(CliError::Usage(format!(
                    "line {}: unknown key `{k}`",
                    i + 1
                )));
            }
            if entries
                .insert(k.to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(CliError::Usage(format!(
                    "line {}: duplicate key `{k}`",
                    i + 1
                )));
            }
        }
        Ok(Config {
            source: None,
            entries,
        })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    /// Overwrites `slot` when `key` is present.
    pub fn apply<T: FromStr>(&self, key: &str, slot: &mut T) -> Result<()> {
        if let Some(v) = self.get(key)? {
            *slot = v;
        }
        Ok(())
    }
}
