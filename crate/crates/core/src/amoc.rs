// SPDX-License-Identifier: MIT OR Apache-2.0

//! At-most-one-change test: the maximal split statistic, its maximizer, and
//! an exact permutation test.
//!
//! Permutation replicate `r` shuffles the tested block with the ChaCha8
//! stream `(seed, r)`, so replicates can be evaluated in any order (and in
//! parallel) with identical results.

use std::ops::Range;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::GramMatrix;
use crate::mmd::{rho_curve_in, rho_max_in, validate_delta, validate_order, RhoCurve, SplitRange};
use crate::rng;

/// Points kept on each side of any tested split.
pub const MIN_SIDE: usize = 2;

/// Smallest block the test will run on.
pub const MIN_TESTABLE_LEN: usize = 2 * MIN_SIDE;

/// How exceedances are turned into a p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueRule {
    /// `#{r : T⁽ʳ⁾ > T} / R`.
    #[default]
    Strict,
    /// `(1 + #{r : T⁽ʳ⁾ ≥ T}) / (R + 1)`, valid at every `R`.
    AddOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmocConfig {
    /// Boundary fraction: splits closer than `⌈mδ⌉` to either end are excluded.
    pub delta: f64,
    /// Number of permutation replicates `R`.
    pub permutations: usize,
    pub alpha: f64,
    pub seed: u64,
    #[serde(default)]
    pub p_value_rule: PValueRule,
}

impl Default for AmocConfig {
    fn default() -> Self {
        AmocConfig { delta: 0.05, permutations: 199, alpha: 0.05, seed: 0, p_value_rule: PValueRule::Strict }
    }
}

impl AmocConfig {
    pub fn validate(&self) -> Result<()> {
        validate_delta(self.delta)?;
        if self.permutations == 0 {
            return Err(Error::config("the permutation count must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        AmocConfig { seed, ..self }
    }
}

/// Splits admissible for the test on a block of `m` observations.
pub fn admissible_range(m: usize, delta: f64) -> Result<SplitRange> {
    SplitRange::with_min_side(m, delta, MIN_SIDE)
}

/// Whether a block of `m` observations can be tested under `delta`.
pub fn is_testable(m: usize, delta: f64) -> bool {
    m >= MIN_TESTABLE_LEN && admissible_range(m, delta).is_ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmocResult {
    /// Tested block `[start, end)` in sequence coordinates.
    pub start: usize,
    pub end: usize,
    /// `T`: the maximal split statistic.
    pub statistic: f64,
    /// Maximizing left-block size within the tested block.
    pub split: usize,
    /// `start + split`: the candidate changepoint in sequence coordinates.
    pub boundary: usize,
    /// `split / (end − start)`.
    pub breakfraction: f64,
    pub p_value: f64,
    pub reject: bool,
    pub permutation_stats: Vec<f64>,
}

/// `(T, τ̂)` of the block listed by `order`.
pub fn amoc_statistic(gram: &GramMatrix, delta: f64, order: &[usize]) -> Result<(f64, usize)> {
    validate_order(gram, order)?;
    let range = admissible_range(order.len(), delta)?;
    Ok(rho_max_in(gram, order, range))
}

/// The full split curve over the test's admissible range.
pub fn amoc_curve(gram: &GramMatrix, delta: f64, order: &[usize]) -> Result<RhoCurve> {
    validate_order(gram, order)?;
    let range = admissible_range(order.len(), delta)?;
    Ok(rho_curve_in(gram, order, range))
}

pub fn p_value(statistic: f64, permutation_stats: &[f64], rule: PValueRule) -> f64 {
    let r = permutation_stats.len() as f64;
    match rule {
        PValueRule::Strict => permutation_stats.iter().filter(|&&s| s > statistic).count() as f64 / r,
        PValueRule::AddOne => (1.0 + permutation_stats.iter().filter(|&&s| s >= statistic).count() as f64) / (r + 1.0),
    }
}

/// Permutation test over the whole sequence.
pub fn permutation_test(gram: &GramMatrix, config: &AmocConfig) -> Result<AmocResult> {
    permutation_test_block(gram, 0..gram.n(), config)
}

/// Permutation test on the contiguous block `block` of the sequence.
pub fn permutation_test_block(gram: &GramMatrix, block: Range<usize>, config: &AmocConfig) -> Result<AmocResult> {
    config.validate()?;
    if block.end > gram.n() || block.start >= block.end {
        return Err(Error::argument(format!("block {}..{} is not inside 0..{}", block.start, block.end, gram.n())));
    }
    let m = block.len();
    if m < MIN_TESTABLE_LEN {
        return Err(Error::config(format!("a block of {m} observations is too short to test")));
    }
    let range = admissible_range(m, config.delta)?;
    let order: Vec<usize> = block.clone().collect();
    let (statistic, split) = rho_max_in(gram, &order, range);

    let permutation_stats: Vec<f64> = (0..config.permutations as u64)
        .into_par_iter()
        .map_init(
            || order.clone(),
            |shuffled, r| {
                shuffled.copy_from_slice(&order);
                shuffled.shuffle(&mut rng::stream(config.seed, r));
                rho_max_in(gram, shuffled, range).0
            },
        )
        .collect();

    // With T = 0 every replicate ties at zero and the strict count would
    // reject on no evidence at all.
    let p = if statistic > 0.0 { p_value(statistic, &permutation_stats, config.p_value_rule) } else { 1.0 };
    Ok(AmocResult {
        start: block.start,
        end: block.end,
        statistic,
        split,
        boundary: block.start + split,
        breakfraction: split as f64 / m as f64,
        p_value: p,
        reject: p < config.alpha,
        permutation_stats,
    })
}

/// Outcome of testing one segment.
#[derive(Debug, Clone, PartialEq)]
pub enum AmocOutcome {
    /// The segment has no admissible split under the minimum side length.
    TooShort {
        start: usize,
        end: usize,
    },
    Tested(AmocResult),
}

impl AmocOutcome {
    /// The detected changepoint, in sequence coordinates, when the test rejects.
    pub fn changepoint(&self) -> Option<usize> {
        match self {
            AmocOutcome::Tested(r) if r.reject => Some(r.boundary),
            _ => None,
        }
    }
}

/// Tests `segment` and reports its changepoint when the test rejects.
/// Segments that are too short end as [`AmocOutcome::TooShort`], never an error.
pub fn amoc_detect(gram: &GramMatrix, segment: Range<usize>, config: &AmocConfig) -> Result<AmocOutcome> {
    config.validate()?;
    if !is_testable(segment.len(), config.delta) {
        return Ok(AmocOutcome::TooShort { start: segment.start, end: segment.end });
    }
    permutation_test_block(gram, segment, config).map(AmocOutcome::Tested)
}
