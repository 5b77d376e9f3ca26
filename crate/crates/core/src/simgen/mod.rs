// SPDX-License-Identifier: MIT OR Apache-2.0

//! Simulated functional data with known changepoints.
//!
//! Curve `i` of a sample is drawn from the ChaCha8 stream `(seed, i)`, so a
//! sample is reproducible and can be generated in parallel.

mod catalog;
pub mod process;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::desc::Segmentation;
use crate::error::{Error, Result};
use crate::kernel::Dataset;
use crate::rng;

pub use process::{brownian_bridge, grid, kl_curve, Basis, MeanFn, Noise, Population, Sampler};

pub const DEFAULT_GRID_SIZE: usize = 128;

/// Benchmark models: the null models `N1`–`N4`, the numbered change models
/// `1`–`12`, and the parameterized models `M1`, `M2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ModelId {
    N1,
    N2,
    N3,
    N4,
    M1,
    M2,
    Model(u8),
}

impl ModelId {
    pub fn all() -> Vec<ModelId> {
        let mut all = vec![ModelId::N1, ModelId::N2, ModelId::N3, ModelId::N4];
        all.extend((1..=12).map(ModelId::Model));
        all.extend([ModelId::M1, ModelId::M2]);
        all
    }

    /// Number of populations, one more than the number of changepoints.
    pub fn populations(self) -> usize {
        match self {
            ModelId::N1 | ModelId::N2 | ModelId::N3 | ModelId::N4 => 1,
            ModelId::M1 | ModelId::M2 => 2,
            ModelId::Model(k) if k <= 7 => 2,
            ModelId::Model(_) => 3,
        }
    }

    fn takes_c(self) -> bool {
        matches!(self, ModelId::M1 | ModelId::M2)
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelId::Model(k) => write!(f, "{k}"),
            other => write!(f, "{other:?}"),
        }
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::Unknown { kind: "model", name: s.to_string() };
        let trimmed = s.trim();
        let upper = trimmed.to_ascii_uppercase();
        let upper = upper.strip_prefix("MODEL").map(str::trim_start).unwrap_or(&upper);
        Ok(match upper {
            "N1" => ModelId::N1,
            "N2" => ModelId::N2,
            "N3" => ModelId::N3,
            "N4" => ModelId::N4,
            "M1" => ModelId::M1,
            "M2" => ModelId::M2,
            number => match number.parse::<u8>() {
                Ok(k @ 1..=12) => ModelId::Model(k),
                _ => return Err(unknown()),
            },
        })
    }
}

impl From<ModelId> for String {
    fn from(id: ModelId) -> String {
        id.to_string()
    }
}

impl TryFrom<String> for ModelId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn default_grid_size() -> usize {
    DEFAULT_GRID_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: ModelId,
    /// Observations drawn from each population, in order.
    pub segment_lengths: Vec<usize>,
    /// Signal strength of M1 (mean `c · sin t`) and M2 (eigenvalues `c · j⁻²`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(model: ModelId, segment_lengths: Vec<usize>, seed: u64) -> Self {
        ModelSpec { model, segment_lengths, c: None, grid_size: DEFAULT_GRID_SIZE, seed }
    }

    /// Two segments split after `⌊nγ⌋` observations.
    pub fn with_breakfraction(model: ModelId, n: usize, gamma: f64, seed: u64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::config(format!("the breakfraction must lie in (0, 1), got {gamma}")));
        }
        let n1 = (n as f64 * gamma).floor() as usize;
        Ok(ModelSpec::new(model, vec![n1, n.saturating_sub(n1)], seed))
    }

    pub fn with_c(self, c: f64) -> Self {
        ModelSpec { c: Some(c), ..self }
    }

    pub fn with_grid_size(self, grid_size: usize) -> Self {
        ModelSpec { grid_size, ..self }
    }

    pub fn n(&self) -> usize {
        self.segment_lengths.iter().sum()
    }

    /// True changepoints: the cumulative segment lengths.
    pub fn truth(&self) -> Result<Segmentation> {
        let mut boundaries = Vec::new();
        let mut acc = 0;
        for len in &self.segment_lengths[..self.segment_lengths.len().saturating_sub(1)] {
            acc += len;
            boundaries.push(acc);
        }
        Segmentation::new(self.n(), boundaries)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.model.populations();
        if self.segment_lengths.len() != expected {
            return Err(Error::config(format!(
                "model {} has {expected} segment(s), got lengths {:?}",
                self.model, self.segment_lengths
            )));
        }
        if self.segment_lengths.contains(&0) {
            return Err(Error::config("segment lengths must be positive"));
        }
        if self.grid_size < 2 {
            return Err(Error::config(format!("the grid needs at least 2 points, got {}", self.grid_size)));
        }
        match (self.model.takes_c(), self.c) {
            (true, None) => Err(Error::config(format!("model {} needs the signal strength c", self.model))),
            (true, Some(c)) if !(c.is_finite() && c >= 0.0) => {
                Err(Error::config(format!("c must be finite and nonnegative, got {c}")))
            }
            (false, Some(_)) => Err(Error::config(format!("model {} takes no c", self.model))),
            _ => Ok(()),
        }
    }

    fn samplers(&self) -> Result<Vec<Sampler>> {
        catalog::populations(self.model, self.c.unwrap_or(0.0))
            .ok_or_else(|| Error::Unknown { kind: "model", name: self.model.to_string() })?
            .iter()
            .map(|population| population.sampler(self.grid_size))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSample {
    pub data: Dataset,
    pub truth: Segmentation,
    pub model: ModelSpec,
}

pub fn generate(spec: &ModelSpec) -> Result<GeneratedSample> {
    spec.validate()?;
    let samplers = spec.samplers()?;
    let labels: Vec<usize> =
        spec.segment_lengths.iter().enumerate().flat_map(|(l, &len)| std::iter::repeat_n(l, len)).collect();
    let rows: Vec<Vec<f64>> =
        labels.par_iter().enumerate().map(|(i, &l)| samplers[l].draw(&mut rng::stream(spec.seed, i as u64))).collect();
    Ok(GeneratedSample { data: Dataset::from_rows(rows)?, truth: spec.truth()?, model: spec.clone() })
}
