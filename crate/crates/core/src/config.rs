//! Run settings read from a flat `key = value` file.
//!
//! ```text
//! # comments and blank lines are ignored
//! q_bound = 120
//! step = 0.005
//! ```

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geodesics::CORNER_TOLERANCE;
use crate::orbits::DEFAULT_Q_BOUND;

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    /// Largest modulus in the admissibility test.
    pub q_bound: u32,
    /// Arclength between geodesic samples.
    pub step: f64,
    /// Distance from `i`, `rho`, `rho + 1` treated as a corner hit.
    pub corner_tolerance: f64,
    /// Letters emitted by `cutseq`.
    pub letters: usize,
    /// Decimal digits printed by `surd`.
    pub digits: u32,
    /// Worker threads; `None` lets the pool decide.
    pub workers: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            q_bound: DEFAULT_Q_BOUND,
            step: 0.01,
            corner_tolerance: CORNER_TOLERANCE,
            letters: 40,
            digits: 30,
            workers: None,
        }
    }
}

pub const KEYS: [&str; 6] = ["q_bound", "step", "corner_tolerance", "letters", "digits", "workers"];

fn value<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse()
        .map_err(|e| Error::Config(format!("line {line}: {key} = {v:?}: {e}")))
}

fn positive_f64(key: &str, v: &str, line: usize) -> Result<f64> {
    let x: f64 = value(key, v, line)?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::Config(format!("line {line}: {key} must be positive")))
    }
}

impl Config {
    /// Applies the settings in `text` on top of `self`.
    pub fn merge_str(mut self, text: &str) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected key = value")))?;
            let (k, v) = (k.trim(), v.trim());
            if !seen.insert(k.to_string()) {
                return Err(Error::Config(format!("line {line}: duplicate key {k}")));
            }
            match k {
                "q_bound" => {
                    self.q_bound = value(k, v, line)?;
                    if self.q_bound == 0 {
                        return Err(Error::Config(format!("line {line}: q_bound must be at least 1")));
                    }
                }
                "step" => self.step = positive_f64(k, v, line)?,
                "corner_tolerance" => self.corner_tolerance = positive_f64(k, v, line)?,
                "letters" => self.letters = value(k, v, line)?,
                "digits" => self.digits = value(k, v, line)?,
                "workers" => self.workers = Some(value(k, v, line)?),
                _ => {
                    return Err(Error::Config(format!(
                        "line {line}: unknown key {k} (known: {})",
                        KEYS.join(", ")
                    )))
                }
            }
        }
        Ok(self)
    }
}

/// Defaults, overridden by the file at `path` when one is given.
pub fn config_load(path: Option<&Path>) -> Result<Config> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Config::default().merge_str(&text)
}
