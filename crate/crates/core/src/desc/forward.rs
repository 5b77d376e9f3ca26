// SPDX-License-Identifier: MIT OR Apache-2.0

use rayon::prelude::*;

use crate::amoc::AmocConfig;
use crate::error::Result;
use crate::kernel::GramMatrix;

use super::unsupervised::{segment_recursively, Found};
use super::{desc_s, desc_u, Detection, Segmentation};

/// Detection with only a lower bound `k_lower`: place `k_lower` changepoints
/// with the supervised search, then run the unsupervised recursion inside
/// every resulting segment.
pub fn desc_forward(gram: &GramMatrix, k_lower: usize, config: &AmocConfig) -> Result<Detection> {
    config.validate()?;
    if k_lower == 0 {
        return desc_u(gram, config);
    }
    let supervised = desc_s(gram, k_lower, config.delta)?;
    let segments = supervised.segmentation.segments();
    let found = segments
        .into_par_iter()
        .map(|segment| segment_recursively(gram, segment, config))
        .collect::<Result<Vec<Found>>>()?;

    let mut trace = supervised.trace;
    let mut boundaries = Vec::new();
    let mut p_values = Vec::new();
    for (i, (inner, inner_p, inner_trace)) in found.into_iter().enumerate() {
        if i > 0 {
            boundaries.push(supervised.segmentation.boundaries()[i - 1]);
            p_values.push(None);
        }
        boundaries.extend(inner);
        p_values.extend(inner_p);
        trace.extend(inner_trace);
    }
    Ok(Detection { segmentation: Segmentation::new(gram.n(), boundaries)?, p_values, trace })
}
