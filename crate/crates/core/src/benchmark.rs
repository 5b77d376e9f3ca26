// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo evaluation of detectors on simulated models.
//!
//! Replication `r` of cell `c` draws its data with seed
//! `derive_seed(seed, [c, r, 0])` and runs the detector with seed
//! `derive_seed(seed, [c, r, 1])`, so any cell or replication can be rerun
//! in isolation.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::desc::{DetectorParams, DetectorRegistry};
use crate::error::{Error, Result};
use crate::kernel::{gram_matrix, BandwidthChoice};
use crate::metrics::{exact_match, hausdorff, subset_match, superset_match};
use crate::rng::derive_seed;
use crate::simgen::{generate, ModelSpec};

/// One row of a benchmark: a model, a detector and its parameters. The
/// seeds inside `model` and `params` are replaced per replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCell {
    pub model: ModelSpec,
    pub algorithm: String,
    #[serde(default)]
    pub params: DetectorParams,
    #[serde(default)]
    pub bandwidth: BandwidthChoice,
}

/// A proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub rate: f64,
    pub se: f64,
}

impl Rate {
    fn of(hits: usize, total: usize) -> Self {
        let rate = hits as f64 / total as f64;
        Rate { rate, se: (rate * (1.0 - rate) / total as f64).sqrt() }
    }
}

/// Wall-clock seconds per replication. Not part of the reproducible output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuntimeStats {
    pub mean_secs: f64,
    pub min_secs: f64,
    pub max_secs: f64,
}

/// What one replication produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub boundaries: Vec<usize>,
    pub truth: Vec<usize>,
    pub n: usize,
}

impl Replication {
    /// `None` when either set of breakfractions is empty.
    pub fn hausdorff(&self) -> Option<f64> {
        let frac = |v: &[usize]| v.iter().map(|&b| b as f64 / self.n as f64).collect::<Vec<_>>();
        hausdorff(&frac(&self.boundaries), &frac(&self.truth)).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub model: String,
    pub n: usize,
    pub segment_lengths: Vec<usize>,
    pub algorithm: String,
    pub params: DetectorParams,
    pub replications: usize,
    pub k_true: usize,
    /// `K̂ ≥ 1`; the rejection rate on a model without changes.
    pub rate_detect: Rate,
    pub rate_k_correct: Rate,
    pub rate_match: Rate,
    pub rate_superset: Rate,
    pub rate_subset: Rate,
    /// Mean over replications where both sets are nonempty.
    pub mean_hausdorff: Option<f64>,
    pub runtime: RuntimeStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub seed: u64,
    pub replications: usize,
    pub cells: Vec<CellReport>,
}

impl BenchmarkReport {
    /// The report with all timing removed, for byte-stable output.
    pub fn without_timing(mut self) -> Self {
        for cell in &mut self.cells {
            cell.runtime = RuntimeStats { mean_secs: 0.0, min_secs: 0.0, max_secs: 0.0 };
        }
        self
    }
}

/// Runs one replication of `cell`.
pub fn replicate(
    cell: &BenchmarkCell,
    registry: &DetectorRegistry,
    data_seed: u64,
    detector_seed: u64,
) -> Result<Replication> {
    let spec = ModelSpec { seed: data_seed, ..cell.model.clone() };
    let sample = generate(&spec)?;
    let mut params = cell.params;
    params.amoc.seed = detector_seed;
    let detector = registry.build(&cell.algorithm, &params)?;
    let h = cell.bandwidth.resolve(&sample.data)?;
    let gram = gram_matrix(&sample.data, h)?;
    let detection = detector.detect(&gram)?;
    Ok(Replication {
        boundaries: detection.segmentation.boundaries().to_vec(),
        truth: sample.truth.boundaries().to_vec(),
        n: sample.data.len(),
    })
}

fn run_cell(index: usize, cell: &BenchmarkCell, replications: usize, seed: u64) -> Result<CellReport> {
    let registry = DetectorRegistry::default();
    // Surface configuration problems once instead of per replication.
    cell.model.validate()?;
    registry.build(&cell.algorithm, &cell.params)?;

    let runs = (0..replications)
        .into_par_iter()
        .map(|r| {
            let tags = [index as u64, r as u64];
            let started = Instant::now();
            let rep = replicate(
                cell,
                &registry,
                derive_seed(seed, &[tags[0], tags[1], 0]),
                derive_seed(seed, &[tags[0], tags[1], 1]),
            )?;
            Ok((rep, started.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<(Replication, f64)>>>()?;

    let count = |pred: &dyn Fn(&Replication) -> bool| runs.iter().filter(|(rep, _)| pred(rep)).count();
    let k_true = cell.model.segment_lengths.len() - 1;
    let distances: Vec<f64> = runs.iter().filter_map(|(rep, _)| rep.hausdorff()).collect();
    let secs: Vec<f64> = runs.iter().map(|(_, s)| *s).collect();
    Ok(CellReport {
        model: cell.model.model.to_string(),
        n: cell.model.n(),
        segment_lengths: cell.model.segment_lengths.clone(),
        algorithm: cell.algorithm.clone(),
        params: cell.params,
        replications,
        k_true,
        rate_detect: Rate::of(count(&|r| !r.boundaries.is_empty()), replications),
        rate_k_correct: Rate::of(count(&|r| r.boundaries.len() == k_true), replications),
        rate_match: Rate::of(count(&|r| exact_match(&r.boundaries, &r.truth)), replications),
        rate_superset: Rate::of(count(&|r| superset_match(&r.boundaries, &r.truth)), replications),
        rate_subset: Rate::of(count(&|r| subset_match(&r.boundaries, &r.truth)), replications),
        mean_hausdorff: (!distances.is_empty()).then(|| distances.iter().sum::<f64>() / distances.len() as f64),
        runtime: RuntimeStats {
            mean_secs: secs.iter().sum::<f64>() / secs.len() as f64,
            min_secs: secs.iter().copied().fold(f64::INFINITY, f64::min),
            max_secs: secs.iter().copied().fold(0.0, f64::max),
        },
    })
}

pub fn run_benchmark(cells: &[BenchmarkCell], replications: usize, seed: u64) -> Result<BenchmarkReport> {
    if replications == 0 {
        return Err(Error::config("at least one replication is required"));
    }
    let cells =
        cells.iter().enumerate().map(|(i, cell)| run_cell(i, cell, replications, seed)).collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkReport { seed, replications, cells })
}
