// SPDX-License-Identifier: MIT OR Apache-2.0

use std::ops::Range;

use crate::error::{Error, Result};
use crate::kernel::GramMatrix;
use crate::mmd::{rho_curve_in, validate_delta, SplitRange};

use super::{DescTrace, Detection, Segmentation, TraceEvent};

/// A group with its best split, if it has one.
struct Group {
    range: Range<usize>,
    split: Option<(f64, usize)>,
}

impl Group {
    fn new(gram: &GramMatrix, range: Range<usize>, delta: f64) -> Self {
        let split = SplitRange::with_min_side(range.len(), delta, 1).ok().map(|admissible| {
            let order: Vec<usize> = range.clone().collect();
            let curve = rho_curve_in(gram, &order, admissible);
            (curve.max, range.start + curve.argmax)
        });
        Group { range, split }
    }

    fn rho(&self) -> f64 {
        self.split.map_or(f64::NEG_INFINITY, |(rho, _)| rho)
    }
}

/// Supervised detection with exactly `k` changepoints.
///
/// At stage `i` every one of the `i + 1` current groups is split at its
/// maximizer; the `i` splits with the smallest scaled discrepancy are merged
/// back and the largest is kept. A split is scored with the scaling local to
/// its group, and ties go to the leftmost group first.
pub fn desc_s(gram: &GramMatrix, k: usize, delta: f64) -> Result<Detection> {
    validate_delta(delta)?;
    let n = gram.n();
    if k == 0 {
        return Err(Error::config("the changepoint budget must be at least 1"));
    }
    if n < 2 * (k + 1) {
        return Err(Error::BudgetInfeasible(format!(
            "{k} changepoints need at least {} observations, got {n}",
            2 * (k + 1)
        )));
    }

    let mut trace = DescTrace::default();
    let mut groups = vec![Group::new(gram, 0..n, delta)];
    for stage in 0..k {
        for g in &groups {
            trace.push(match g.split {
                Some((rho, boundary)) => {
                    TraceEvent::Split { stage, start: g.range.start, end: g.range.end, boundary, rho }
                }
                None => TraceEvent::Unsplittable { stage, start: g.range.start, end: g.range.end },
            });
        }
        let mut ranking: Vec<usize> = (0..groups.len()).collect();
        ranking.sort_by(|&a, &b| groups[a].rho().total_cmp(&groups[b].rho()));
        let keep = *ranking.last().expect("at least one group");
        for &j in &ranking[..stage] {
            if let Some((rho, boundary)) = groups[j].split {
                trace.push(TraceEvent::Merged { stage, boundary, rho });
            }
        }
        let Some((rho, boundary)) = groups[keep].split else {
            return Err(Error::BudgetInfeasible(format!(
                "no group can be split at stage {stage} under delta = {delta}"
            )));
        };
        trace.push(TraceEvent::Kept { stage, boundary, rho });

        let range = groups[keep].range.clone();
        let left = Group::new(gram, range.start..boundary, delta);
        let right = Group::new(gram, boundary..range.end, delta);
        groups.splice(keep..=keep, [left, right]);
    }

    let boundaries: Vec<usize> = groups.iter().skip(1).map(|g| g.range.start).collect();
    let p_values = vec![None; boundaries.len()];
    Ok(Detection { segmentation: Segmentation::new(n, boundaries)?, p_values, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desc::tests::{constant_gram, piecewise_gram};
    use crate::mmd::rho_curve;
    use crate::mmd::tests::random_gram;

    #[test]
    fn single_budget_is_the_global_maximizer() {
        for seed in 0..5 {
            let gram = random_gram(30, seed);
            let order: Vec<usize> = (0..30).collect();
            let curve = rho_curve(&gram, 0.05, &order).unwrap();
            let detection = desc_s(&gram, 1, 0.05).unwrap();
            assert_eq!(detection.segmentation.boundaries(), &[curve.argmax]);
        }
    }

    #[test]
    fn returns_exactly_k() {
        let gram = piecewise_gram(&[20, 20, 20], &[0.0, 2.0, 4.0], 1);
        for k in 1..=8 {
            assert_eq!(desc_s(&gram, k, 0.05).unwrap().segmentation.k(), k);
        }
        let constant = constant_gram(20);
        assert_eq!(desc_s(&constant, 3, 0.05).unwrap().segmentation.k(), 3);
    }

    #[test]
    fn recovers_known_changes() {
        let gram = piecewise_gram(&[30, 40, 30], &[0.0, 2.5, 0.0], 7);
        let detection = desc_s(&gram, 2, 0.05).unwrap();
        assert_eq!(detection.segmentation.boundaries(), &[30, 70]);
    }

    #[test]
    fn budgets_are_nested() {
        for seed in 0..4 {
            let gram = piecewise_gram(&[25, 15, 30, 20], &[0.0, 1.0, -0.5, 0.8], seed);
            let mut previous: Vec<usize> = Vec::new();
            for k in 1..=6 {
                let current = desc_s(&gram, k, 0.05).unwrap().segmentation.boundaries().to_vec();
                assert!(previous.iter().all(|b| current.contains(b)), "k = {k}: {previous:?} vs {current:?}");
                previous = current;
            }
        }
    }

    #[test]
    fn infeasible_budgets() {
        let gram = random_gram(9, 1);
        assert!(matches!(desc_s(&gram, 4, 0.05), Err(Error::BudgetInfeasible(_))));
        assert!(desc_s(&gram, 0, 0.05).unwrap_err().is_config());
        assert!(desc_s(&gram, 3, 0.05).is_ok());
        // Six points and delta = 0.45: only the first split is admissible.
        let small = random_gram(6, 2);
        assert!(matches!(desc_s(&small, 2, 0.45), Err(Error::BudgetInfeasible(_))));
    }

    #[test]
    fn trace_records_every_stage() {
        let gram = piecewise_gram(&[20, 20, 20], &[0.0, 2.0, 4.0], 3);
        let detection = desc_s(&gram, 3, 0.05).unwrap();
        let kept: Vec<usize> = detection
            .trace
            .events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Kept { boundary, .. } => Some(*boundary),
                _ => None,
            })
            .collect();
        assert_eq!(kept.len(), 3);
        let mut sorted = kept.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, detection.segmentation.boundaries());
    }
}
