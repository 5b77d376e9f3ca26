// SPDX-License-Identifier: MIT OR Apache-2.0

use rayon::prelude::*;

use crate::amoc::{is_testable, permutation_test_block, AmocConfig};
use crate::error::{Error, Result};
use crate::kernel::GramMatrix;
use crate::rng::derive_seed;

use super::{desc_s, Detection, Segmentation, StopReason, TraceEvent};

/// Semi-supervised detection with between `k_lower` and `k_upper`
/// changepoints.
///
/// Starts from the supervised segmentation with `k_upper` changepoints and
/// merges adjacent segments backwards. In round `m` every adjacent pair is
/// tested for a single change; if every pair rejects at the Bonferroni level
/// `α / (k_upper − m + 1)` the loop stops, otherwise the pair with the
/// largest p-value (leftmost on ties) is merged. The loop also stops once
/// `k_lower` changepoints remain.
pub fn desc_ss(gram: &GramMatrix, k_lower: usize, k_upper: usize, config: &AmocConfig) -> Result<Detection> {
    config.validate()?;
    if k_lower > k_upper {
        return Err(Error::config(format!("k_lower = {k_lower} exceeds k_upper = {k_upper}")));
    }
    let start = desc_s(gram, k_upper, config.delta)?;
    let n = gram.n();
    let mut trace = start.trace;
    let mut boundaries = start.segmentation.boundaries().to_vec();
    let mut last_p: Vec<Option<f64>> = vec![None; boundaries.len()];

    for round in 1.. {
        if round == k_upper - k_lower + 1 {
            trace.push(TraceEvent::Stopped { round, reason: StopReason::LowerBound });
            break;
        }
        let threshold = config.alpha / (k_upper - round + 1) as f64;
        let edges: Vec<usize> = std::iter::once(0).chain(boundaries.iter().copied()).chain([n]).collect();
        let p_values = (0..boundaries.len())
            .into_par_iter()
            .map(|i| {
                let block = edges[i]..edges[i + 2];
                if !is_testable(block.len(), config.delta) {
                    return Ok(1.0);
                }
                let pair_config = config.with_seed(derive_seed(config.seed, &[round as u64, i as u64]));
                Ok(permutation_test_block(gram, block, &pair_config)?.p_value)
            })
            .collect::<Result<Vec<f64>>>()?;

        for (i, &p_value) in p_values.iter().enumerate() {
            trace.push(TraceEvent::PairTested {
                round,
                start: edges[i],
                end: edges[i + 2],
                boundary: boundaries[i],
                p_value,
                threshold,
            });
        }
        last_p = p_values.iter().map(|&p| Some(p)).collect();

        // Leftmost maximum.
        let (worst, &max_p) = p_values
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, &f64)>, (i, p)| match best {
                Some((_, q)) if q >= p => best,
                _ => Some((i, p)),
            })
            .expect("at least one pair before the lower bound is reached");
        if max_p < threshold {
            trace.push(TraceEvent::Stopped { round, reason: StopReason::AllPairsReject });
            break;
        }
        trace.push(TraceEvent::PairMerged { round, boundary: boundaries[worst], p_value: max_p });
        boundaries.remove(worst);
        last_p.remove(worst);
    }

    Ok(Detection { segmentation: Segmentation::new(n, boundaries)?, p_values: last_p, trace })
}
