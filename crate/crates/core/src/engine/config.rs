use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clone::DEFAULT_SIMILARITY_THRESHOLD;
use crate::error::Error;

/// Environment variable naming the engine config file.
pub const CONFIG_ENV: &str = "PASTEWATCH_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Wait between a paste and its analysis.
    pub delay_ms: u64,
    pub similarity_threshold: f64,
    pub decision_threshold: f64,
    pub model_path: Option<PathBuf>,
    /// Lifetime of an unanswered recommendation.
    pub expiry_ms: u64,
    /// Time advances only through `advance` messages.
    pub virtual_time: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            delay_ms: 10_000,
            similarity_threshold: DEFAULT_SIMILARITY_THRESHOLD,
            decision_threshold: 0.5,
            model_path: None,
            expiry_ms: 15_000,
            virtual_time: false,
        }
    }
}

fn threshold(key: &str, v: &str) -> Result<f64, Error> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::Config(format!("{key}: `{v}` is not a number")))?;
    if x > 0.0 && x <= 1.0 {
        Ok(x)
    } else {
        Err(Error::Config(format!("{key} must lie in (0, 1], got {x}")))
    }
}

impl EngineConfig {
    /// Sets one field from its textual `key = value` form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let ms = |v: &str| {
            v.parse::<u64>()
                .map_err(|_| Error::Config(format!("{key}: `{v}` is not a non-negative integer")))
        };
        match key {
            "delay_ms" => self.delay_ms = ms(value)?,
            "expiry_ms" => self.expiry_ms = ms(value)?,
            "similarity_threshold" => self.similarity_threshold = threshold(key, value)?,
            "decision_threshold" => self.decision_threshold = threshold(key, value)?,
            "model_path" => self.model_path = (!value.is_empty()).then(|| PathBuf::from(value)),
            "virtual_time" => {
                self.virtual_time = value
                    .parse()
                    .map_err(|_| Error::Config(format!("virtual_time: `{value}` is not true or false")))?
            }
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines over the current values. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<(), Error> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = Self::default();
        c.apply_text(&text)?;
        Ok(c)
    }

    /// Defaults, overlaid by the file given explicitly or else named by
    /// `PASTEWATCH_CONFIG`. Command-line flags are applied by the caller.
    pub fn load(explicit: Option<&Path>) -> Result<Self, Error> {
        match explicit {
            Some(p) => Self::from_file(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::from_file(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }
}
