// SPDX-License-Identifier: MIT OR Apache-2.0

//! Accuracy of estimated changepoints against the truth.
//!
//! Two changepoints "agree" when they are at most one index apart.

use crate::error::{Error, Result};

/// Same count, and the `i`-th estimate within one of the `i`-th true point.
pub fn exact_match(estimate: &[usize], truth: &[usize]) -> bool {
    estimate.len() == truth.len() && estimate.iter().zip(truth).all(|(a, b)| a.abs_diff(*b) <= 1)
}

fn near_any(point: usize, set: &[usize]) -> bool {
    set.iter().any(|s| s.abs_diff(point) <= 1)
}

/// More estimates than true points, and every true point has an estimate
/// within one.
pub fn superset_match(estimate: &[usize], truth: &[usize]) -> bool {
    estimate.len() > truth.len() && truth.iter().all(|&t| near_any(t, estimate))
}

/// Fewer estimates than true points, and every estimate is within one of a
/// true point. An empty estimate qualifies whenever the truth is nonempty.
pub fn subset_match(estimate: &[usize], truth: &[usize]) -> bool {
    estimate.len() < truth.len() && estimate.iter().all(|&e| near_any(e, truth))
}

/// Hausdorff distance between two nonempty subsets of the real line.
pub fn hausdorff(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let directed = |from: &[f64], to: &[f64]| {
        from.iter().map(|x| to.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_matches() {
        assert!(exact_match(&[100, 200], &[100, 200]));
        assert!(exact_match(&[101, 199], &[100, 200]));
        assert!(!exact_match(&[102, 200], &[100, 200]));
        assert!(!exact_match(&[100], &[100, 200]));
        assert!(exact_match(&[], &[]));
    }

    #[test]
    fn superset_matches() {
        assert!(superset_match(&[50, 100, 200], &[100, 200]));
        assert!(!superset_match(&[100, 200], &[100, 200]));
        assert!(!superset_match(&[50, 150], &[100]));
        assert!(superset_match(&[3], &[]));
    }

    #[test]
    fn subset_matches() {
        assert!(subset_match(&[100], &[100, 200]));
        assert!(!subset_match(&[150], &[100, 200]));
        assert!(subset_match(&[], &[100]));
        assert!(!subset_match(&[], &[]));
    }

    #[test]
    fn hausdorff_values() {
        assert_eq!(hausdorff(&[0.2, 0.5], &[0.5, 0.2]).unwrap(), 0.0);
        assert_eq!(hausdorff(&[0.25], &[0.75]).unwrap(), 0.5);
        assert!((hausdorff(&[0.2, 0.8], &[0.25]).unwrap() - 0.55).abs() < 1e-15);
        assert!(matches!(hausdorff(&[], &[0.5]), Err(Error::EmptySet)));
        assert!(matches!(hausdorff(&[0.5], &[]), Err(Error::EmptySet)));
    }

    fn sorted_set() -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::btree_set(1usize..400, 0..6).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn match_outcomes_are_exclusive(est in sorted_set(), truth in sorted_set()) {
            let outcomes = [exact_match(&est, &truth), superset_match(&est, &truth), subset_match(&est, &truth)];
            prop_assert!(outcomes.iter().filter(|&&o| o).count() <= 1);
        }

        #[test]
        fn match_implies_small_hausdorff(truth in sorted_set(), shifts in proptest::collection::vec(-1i64..=1, 6)) {
            prop_assume!(!truth.is_empty());
            let n = 400.0;
            let est: Vec<usize> = truth.iter().zip(&shifts).map(|(&t, &s)| (t as i64 + s) as usize).collect();
            prop_assert!(exact_match(&est, &truth));
            let a: Vec<f64> = est.iter().map(|&x| x as f64 / n).collect();
            let b: Vec<f64> = truth.iter().map(|&x| x as f64 / n).collect();
            prop_assert!(hausdorff(&a, &b).unwrap() <= 1.0 / n + 1e-15);
        }
    }
}
