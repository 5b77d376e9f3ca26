// SPDX-License-Identifier: MIT OR Apache-2.0

use std::ops::Range;

use crate::amoc::{amoc_detect, AmocConfig, AmocOutcome};
use crate::error::Result;
use crate::kernel::GramMatrix;
use crate::rng::derive_seed;

use super::{DescTrace, Detection, Segmentation, TraceEvent};

/// Boundaries, their p-values, and the trace of one recursion.
pub(super) type Found = (Vec<usize>, Vec<Option<f64>>, DescTrace);

/// Test a segment with a seed tied to its coordinates, so the outcome does
/// not depend on the order in which segments are visited.
fn segment_config(config: &AmocConfig, segment: &Range<usize>) -> AmocConfig {
    config.with_seed(derive_seed(config.seed, &[segment.start as u64, segment.end as u64]))
}

/// Binary segmentation of `segment`: test, split at the maximizer on
/// rejection, and recurse into both halves (left first in the trace).
pub(super) fn segment_recursively(gram: &GramMatrix, segment: Range<usize>, config: &AmocConfig) -> Result<Found> {
    let mut trace = DescTrace::default();
    let result = match amoc_detect(gram, segment.clone(), &segment_config(config, &segment))? {
        AmocOutcome::TooShort { start, end } => {
            trace.push(TraceEvent::TooShort { start, end });
            return Ok((Vec::new(), Vec::new(), trace));
        }
        AmocOutcome::Tested(result) => result,
    };
    trace.push(TraceEvent::Tested {
        start: result.start,
        end: result.end,
        statistic: result.statistic,
        boundary: result.boundary,
        p_value: result.p_value,
        alpha: config.alpha,
        reject: result.reject,
    });
    if !result.reject {
        return Ok((Vec::new(), Vec::new(), trace));
    }

    let b = result.boundary;
    let (left, right) = rayon::join(
        || segment_recursively(gram, segment.start..b, config),
        || segment_recursively(gram, b..segment.end, config),
    );
    let (mut boundaries, mut p_values, left_trace) = left?;
    let (right_bounds, right_p, right_trace) = right?;
    boundaries.push(b);
    p_values.push(Some(result.p_value));
    boundaries.extend(right_bounds);
    p_values.extend(right_p);
    trace.extend(left_trace);
    trace.extend(right_trace);
    Ok((boundaries, p_values, trace))
}

/// Unsupervised detection: recursive binary segmentation gated by the
/// permutation test at level `config.alpha`. The number of changepoints is
/// not needed in advance.
pub fn desc_u(gram: &GramMatrix, config: &AmocConfig) -> Result<Detection> {
    config.validate()?;
    let n = gram.n();
    let (boundaries, p_values, trace) = segment_recursively(gram, 0..n, config)?;
    Ok(Detection { segmentation: Segmentation::new(n, boundaries)?, p_values, trace })
}
