//! Resolved run settings: built-in defaults, then a config file, then flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Every recognised key with its default; an empty default means unset.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("io.input", ""),
    ("io.response", ""),
    ("io.out", "."),
    ("run.seed", ""),
    ("run.threads", ""),
    ("core.normalization", "unit-variance"),
    ("core.expand", ""),
    ("solver.lambda", ""),
    ("solver.alpha", "1"),
    ("solver.cv_folds", "10"),
    ("solver.grid_len", "100"),
    ("solver.grid_ratio", "0.001"),
    ("scoring.alpha", "0.4"),
    ("scoring.delta_steps", "100"),
    ("scoring.gamma_file", ""),
    ("search.kappa", "4,5,6"),
    ("search.starts", "3"),
    ("search.temps", "10:0.7:20"),
    ("search.iters", "100"),
    ("search.record", "all"),
    ("minclass.pool", ""),
    ("minclass.eta", ""),
    ("minclass.eta_factor", "0.25"),
    ("minclass.keep", "all"),
    ("minclass.threshold", "0.25"),
    ("simulation.p", "200"),
    ("simulation.snr", "2"),
    ("simulation.n", "100"),
    ("simulation.replicates", "200"),
    ("simulation.top", "5"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn defaults() -> Self {
        Settings {
            values: DEFAULTS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> CliResult<()> {
        match self.values.get_mut(key) {
            Some(v) => {
                *v = value.into();
                Ok(())
            }
            None => Err(CliError::Config(format!("unknown key {key:?}"))),
        }
    }

    /// Overlays `key=value` lines (`#` starts a comment) or a run manifest.
    pub fn load_file(&mut self, path: &Path, command: &str) -> CliResult<()> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        if text.trim_start().starts_with('{') {
            return self.load_manifest(&text, command);
        }
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{}:{}: expected key=value", path.display(), no + 1))
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    fn load_manifest(&mut self, text: &str, command: &str) -> CliResult<()> {
        let json: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("manifest: {e}")))?;
        match json.get("command").and_then(|c| c.as_str()) {
            Some(c) if c == command => {}
            Some(c) => {
                return Err(CliError::Config(format!(
                    "manifest was written by {c:?}, not {command:?}"
                )))
            }
            None => return Err(CliError::Config("manifest has no command".into())),
        }
        let config = json
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| CliError::Config("manifest has no config".into()))?;
        for (k, v) in config {
            let v = v
                .as_str()
                .ok_or_else(|| CliError::Config(format!("manifest value of {k:?} is not a string")))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn is_set(&self, key: &str) -> bool {
        !self.raw(key).is_empty()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key);
        v.parse()
            .map_err(|e| CliError::Config(format!("{key} = {v:?}: {e}")))
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if self.is_set(key) {
            self.get(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn require(&self, key: &str) -> CliResult<&str> {
        if self.is_set(key) {
            Ok(self.raw(key))
        } else {
            Err(CliError::Config(format!("{key} is required")))
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.values.iter()
    }
}

/// `4,5,6`, `1..10` or a mix such as `1..3,8`.
pub fn parse_sizes(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Config(format!("bad size list {s:?}"));
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = tok.split_once("..") {
            let (a, b): (usize, usize) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            );
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(tok.parse().map_err(|_| bad())?);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() || out[0] == 0 {
        return Err(bad());
    }
    Ok(out)
}

pub fn parse_floats(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad number {t:?} in {s:?}")))
        })
        .collect()
}

/// `scale:ratio:count`.
pub fn parse_geometric(s: &str) -> CliResult<(f64, f64, usize)> {
    let bad = || CliError::Config(format!("bad schedule {s:?}, expected scale:ratio:count"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((
        parts[0].trim().parse().map_err(|_| bad())?,
        parts[1].trim().parse().map_err(|_| bad())?,
        parts[2].trim().parse().map_err(|_| bad())?,
    ))
}

/// `all` or a count.
pub fn parse_keep(s: &str) -> CliResult<Option<usize>> {
    if s == "all" {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| CliError::Config(format!("bad keep {s:?}, expected a count or \"all\"")))
}
