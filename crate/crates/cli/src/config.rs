// SPDX-License-Identifier: MIT OR Apache-2.0

//! Run settings from flags and an optional `key = value` file. Flags win.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use mmdseg::amoc::{AmocConfig, PValueRule};
use mmdseg::desc::DetectorParams;
use mmdseg::kernel::{Bandwidth, BandwidthChoice};

use crate::error::{CliError, Result};

const KEYS: &[&str] =
    &["delta", "permutations", "alpha", "seed", "bandwidth", "p_value", "k", "k_lower", "k_upper", "format", "threads"];

/// Raw values from a config file, keyed by setting name.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    /// `#` starts a comment; keys may use `-` or `_`; `R` means `permutations`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("config line {}: expected key = value", i + 1)))?;
            let key = match key.trim() {
                "R" => "permutations".to_string(),
                other => other.to_ascii_lowercase().replace('-', "_"),
            };
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::config(format!("config line {}: unknown key `{key}`", i + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// The file's value for `key`, parsed.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|raw| {
                raw.parse::<T>().map_err(|_| CliError::config(format!("config key `{key}`: cannot parse `{raw}`")))
            })
            .transpose()
    }
}

/// `auto` (median heuristic) or a positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthArg(pub BandwidthChoice);

impl FromStr for BandwidthArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") || s.eq_ignore_ascii_case("median") {
            return Ok(BandwidthArg(BandwidthChoice::MedianHeuristic));
        }
        let h: f64 = s.parse().map_err(|_| format!("expected `auto` or a number, got `{s}`"))?;
        Bandwidth::new(h).map(|h| BandwidthArg(BandwidthChoice::Fixed(h))).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValueArg(pub PValueRule);

impl FromStr for PValueArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "strict" => Ok(PValueArg(PValueRule::Strict)),
            "add-one" => Ok(PValueArg(PValueRule::AddOne)),
            _ => Err(format!("expected `strict` or `add-one`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("expected `json` or `csv`, got `{s}`")),
        }
    }
}

/// Settings that may come from flags or the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub delta: Option<f64>,
    pub permutations: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub bandwidth: Option<BandwidthArg>,
    pub p_value: Option<PValueArg>,
    pub k: Option<usize>,
    pub k_lower: Option<usize>,
    pub k_upper: Option<usize>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: DetectorParams,
    pub bandwidth: BandwidthChoice,
    pub format: Format,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn resolve(flags: &Overrides, file: &ConfigFile) -> Result<Self> {
        fn pick<T: FromStr + Copy>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>> {
            match flag {
                Some(v) => Ok(Some(v)),
                None => file.get(key),
            }
        }
        let defaults = AmocConfig::default();
        let amoc = AmocConfig {
            delta: pick(flags.delta, file, "delta")?.unwrap_or(defaults.delta),
            permutations: pick(flags.permutations, file, "permutations")?.unwrap_or(defaults.permutations),
            alpha: pick(flags.alpha, file, "alpha")?.unwrap_or(defaults.alpha),
            seed: pick(flags.seed, file, "seed")?.unwrap_or(defaults.seed),
            p_value_rule: pick(flags.p_value, file, "p_value")?.map_or(defaults.p_value_rule, |p| p.0),
        };
        amoc.validate()?;
        let params = DetectorParams {
            amoc,
            k: pick(flags.k, file, "k")?,
            k_lower: pick(flags.k_lower, file, "k_lower")?,
            k_upper: pick(flags.k_upper, file, "k_upper")?,
        };
        if let (Some(lo), Some(hi)) = (params.k_lower, params.k_upper) {
            if lo > hi {
                return Err(CliError::config(format!("k_lower = {lo} exceeds k_upper = {hi}")));
            }
        }
        let threads = pick(flags.threads, file, "threads")?;
        if threads == Some(0) {
            return Err(CliError::config("threads must be at least 1"));
        }
        Ok(RunConfig {
            params,
            bandwidth: pick(flags.bandwidth, file, "bandwidth")?.map_or(BandwidthChoice::MedianHeuristic, |b| b.0),
            format: pick(flags.format, file, "format")?.unwrap_or_default(),
            threads,
        })
    }
}
