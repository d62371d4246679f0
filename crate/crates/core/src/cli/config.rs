use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::math::{parse_rational, Rational};
use crate::model::{SystemParams, TaskParams};

/// Environment variable consulted for the seed when neither the command line
/// nor the config sets one.
pub const SEED_ENV: &str = "HYBRID_CDC_SEED";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "Q")]
    q: usize,
    #[serde(default = "one")]
    s: usize,
    #[serde(rename = "V", default = "default_v")]
    v: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "M")]
    m: usize,
    c_m: Value,
    c_s: Value,
    #[serde(default)]
    c_r: Option<Value>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    seed: Option<u64>,
    w: Option<u32>,
    #[serde(default)]
    require_simulatable: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    task: RawTask,
    system: RawSystem,
    #[serde(default)]
    options: RawOptions,
}

fn one() -> usize {
    1
}

fn default_v() -> usize {
    8
}

/// Parsed and validated configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub task: TaskParams,
    pub system: SystemParams,
    pub seed: Option<u64>,
    pub w: u32,
    pub require_simulatable: bool,
}

/// A JSON number or string holding `"p/q"`, an integer or a decimal.
pub fn rational_value(v: &Value, what: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("{what} must be a number or a \"p/q\" string, got {other}"))),
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        let task = TaskParams::new(raw.task.n, raw.task.q, raw.task.s, raw.task.v)?;
        let c_r = match &raw.system.c_r {
            Some(v) => rational_value(v, "c_r")?,
            None => Rational::from_integer(0.into()),
        };
        let system = SystemParams::new(
            raw.system.k,
            raw.system.m,
            rational_value(&raw.system.c_m, "c_m")?,
            rational_value(&raw.system.c_s, "c_s")?,
            c_r,
        )?;
        let w = raw.options.w.unwrap_or(16);
        if w != 8 && w != 16 {
            return Err(Error::Parse(format!("field width w must be 8 or 16, got {w}")));
        }
        Ok(Self { task, system, seed: raw.options.seed, w, require_simulatable: raw.options.require_simulatable })
    }

    /// Reads from a file, or from stdin when the path is `-`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = if path.as_os_str() == "-" {
            std::io::read_to_string(std::io::stdin())?
        } else {
            std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?
        };
        Self::from_json(&text)
    }

    /// Seed precedence: explicit flag, config, environment, then 0.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = flag.or(self.seed) {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => {
                v.trim().parse().map_err(|_| Error::Parse(format!("{SEED_ENV} must be an unsigned integer, got {v:?}")))
            }
            Err(_) => Ok(0),
        }
    }
}
