// SPDX-License-Identifier: MIT OR Apache-2.0

//! Empirical squared MMD between index blocks and the scaled split statistic.
//!
//! All statistics read kernel values from a shared [`GramMatrix`] through an
//! index list (`order`). The identity order gives the observed sequence, a
//! contiguous sub-range gives a segment, and a shuffled list gives a
//! permutation replicate. Kernel values are never recomputed.
//!
//! For a split of an ordered block of `m` points after its first `t` points,
//!
//! ```text
//! d   = WL / t² + WR / (m − t)² − 2 C / (t (m − t))
//! rho = t (m − t) / m² · d
//! ```
//!
//! where `WL`, `WR` are the within-block kernel sums (diagonal included) and
//! `C` is the cross sum. [`rho_curve`] evaluates every admissible `t` in
//! `O(m²)` total by moving one point at a time from the right block to the
//! left block.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::GramMatrix;

const NEGATIVE_WARN_THRESHOLD: f64 = -1e-9;

/// Inclusive range `lo..=hi` of admissible left-block sizes for a block of `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRange {
    pub lo: usize,
    pub hi: usize,
}

impl SplitRange {
    /// `⌈mδ⌉ ..= ⌊m(1−δ)⌋`, clipped to `1 ..= m−1`.
    pub fn from_delta(m: usize, delta: f64) -> Result<Self> {
        Self::with_min_side(m, delta, 1)
    }

    /// Like [`SplitRange::from_delta`] but keeps at least `min_side` points on
    /// each side of the split.
    pub fn with_min_side(m: usize, delta: f64, min_side: usize) -> Result<Self> {
        validate_delta(delta)?;
        let min_side = min_side.max(1);
        let mf = m as f64;
        // The epsilon absorbs representation error in products like 300 * 0.05.
        let lo = ((mf * delta - 1e-9).ceil().max(0.0) as usize).max(min_side);
        let hi = ((mf * (1.0 - delta) + 1e-9).floor() as usize).min(m.saturating_sub(min_side));
        if m < 2 || lo > hi {
            return Err(Error::config(format!(
                "no admissible split for a block of {m} observations with delta = {delta}"
            )));
        }
        Ok(SplitRange { lo, hi })
    }

    /// Every split `1 ..= m−1`.
    pub fn full(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::config(format!("a block of {m} observations has no split")));
        }
        Ok(SplitRange { lo: 1, hi: m - 1 })
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: usize) -> bool {
        (self.lo..=self.hi).contains(&t)
    }
}

pub(crate) fn validate_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 0.5 {
        Ok(())
    } else {
        Err(Error::config(format!("boundary fraction delta must lie in (0, 1/2), got {delta}")))
    }
}

/// Kernel sums of a two-block split of an ordered index list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSums {
    pub within_left: f64,
    pub within_right: f64,
    pub cross: f64,
    /// Size of the left block.
    pub split: usize,
    /// Total number of points.
    pub len: usize,
}

impl BlockSums {
    /// Direct `O(m²)` evaluation.
    pub fn direct(gram: &GramMatrix, order: &[usize], split: usize) -> Self {
        let (left, right) = order.split_at(split);
        BlockSums {
            within_left: block_sum(gram, left, left),
            within_right: block_sum(gram, right, right),
            cross: block_sum(gram, left, right),
            split,
            len: order.len(),
        }
    }

    pub fn total(&self) -> f64 {
        self.within_left + self.within_right + 2.0 * self.cross
    }

    /// The V-statistic estimate of the squared MMD between the two blocks.
    pub fn mmd_squared(&self) -> f64 {
        v_statistic(self.within_left, self.within_right, self.cross, self.split, self.len - self.split)
    }

    pub fn rho(&self) -> f64 {
        let t = self.split as f64;
        let m = self.len as f64;
        t * (m - t) / (m * m) * self.mmd_squared()
    }
}

fn block_sum(gram: &GramMatrix, a: &[usize], b: &[usize]) -> f64 {
    a.iter()
        .map(|&i| {
            let row = gram.row(i);
            b.iter().map(|&j| row[j]).sum::<f64>()
        })
        .sum()
}

fn v_statistic(within_a: f64, within_b: f64, cross: f64, na: usize, nb: usize) -> f64 {
    let na = na as f64;
    let nb = nb as f64;
    let d = within_a / (na * na) + within_b / (nb * nb) - 2.0 * cross / (na * nb);
    clamp_nonnegative(d)
}

fn clamp_nonnegative(d: f64) -> f64 {
    if d < NEGATIVE_WARN_THRESHOLD {
        log::warn!("squared MMD evaluated to {d:e}; clamping to zero");
    }
    d.max(0.0)
}

/// Squared MMD between the first `r` observations and the remaining `n − r`.
pub fn mmd_squared_split(gram: &GramMatrix, r: usize) -> Result<f64> {
    let n = gram.n();
    if r == 0 || r >= n {
        return Err(Error::OutOfRange { index: r, lo: 1, hi: n.saturating_sub(1) });
    }
    let order: Vec<usize> = (0..n).collect();
    Ok(BlockSums::direct(gram, &order, r).mmd_squared())
}

/// Squared MMD between two disjoint, non-empty index sets.
pub fn mmd_squared_groups(gram: &GramMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::argument("both index groups must be non-empty"));
    }
    let n = gram.n();
    let mut owner = vec![0u8; n];
    for (tag, group) in [(1u8, a), (2u8, b)] {
        for &i in group {
            if i >= n {
                return Err(Error::OutOfRange { index: i, lo: 0, hi: n - 1 });
            }
            if owner[i] != 0 {
                return Err(Error::argument(format!("index {i} appears twice across the groups")));
            }
            owner[i] = tag;
        }
    }
    Ok(v_statistic(block_sum(gram, a, a), block_sum(gram, b, b), block_sum(gram, a, b), a.len(), b.len()))
}

/// The split statistic over every admissible split of an ordered block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoCurve {
    pub t_min: usize,
    pub t_max: usize,
    /// `values[k]` is the statistic at `t = t_min + k`.
    pub values: Vec<f64>,
    /// Smallest maximizing `t`.
    pub argmax: usize,
    pub max: f64,
}

impl RhoCurve {
    pub fn value(&self, t: usize) -> Option<f64> {
        (self.t_min..=self.t_max).contains(&t).then(|| self.values[t - self.t_min])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(move |(k, &v)| (self.t_min + k, v))
    }
}

/// The split statistic of the observed sequence under `order` for every
/// `t` in `⌈nδ⌉ ..= ⌊n(1−δ)⌋`.
///
/// `order` lists distinct row indices of `gram`; the identity gives the
/// observed data and a permutation gives a permutation replicate.
pub fn rho_curve(gram: &GramMatrix, delta: f64, order: &[usize]) -> Result<RhoCurve> {
    validate_order(gram, order)?;
    let range = SplitRange::from_delta(order.len(), delta)?;
    Ok(rho_curve_in(gram, order, range))
}

pub(crate) fn validate_order(gram: &GramMatrix, order: &[usize]) -> Result<()> {
    let n = gram.n();
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n {
            return Err(Error::OutOfRange { index: i, lo: 0, hi: n - 1 });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::argument(format!("index {i} repeated in order")));
        }
    }
    Ok(())
}

/// Incremental sweep over `range`. `order` must hold distinct valid indices
/// and `range` must be admissible for `order.len()`.
pub fn rho_curve_in(gram: &GramMatrix, order: &[usize], range: SplitRange) -> RhoCurve {
    let mut values = Vec::with_capacity(range.len());
    let mut argmax = range.lo;
    let mut max = f64::NEG_INFINITY;
    sweep(gram, order, range.hi, |sums| {
        if sums.split >= range.lo {
            let v = sums.rho();
            if v > max {
                max = v;
                argmax = sums.split;
            }
            values.push(v);
        }
    });
    RhoCurve { t_min: range.lo, t_max: range.hi, values, argmax, max }
}

/// Maximum and smallest maximizer only; avoids allocating the curve.
pub(crate) fn rho_max_in(gram: &GramMatrix, order: &[usize], range: SplitRange) -> (f64, usize) {
    let mut argmax = range.lo;
    let mut max = f64::NEG_INFINITY;
    sweep(gram, order, range.hi, |sums| {
        if sums.split >= range.lo {
            let v = sums.rho();
            if v > max {
                max = v;
                argmax = sums.split;
            }
        }
    });
    (max, argmax)
}

/// Moves points left one at a time and reports the block sums after each of
/// the splits `1..=last`.
fn sweep(gram: &GramMatrix, order: &[usize], last: usize, mut visit: impl FnMut(&BlockSums)) {
    let m = order.len();
    let mut sums =
        BlockSums { within_left: 0.0, within_right: block_sum(gram, order, order), cross: 0.0, split: 0, len: m };
    #[cfg(debug_assertions)]
    let total = sums.within_right;

    for (t, &x) in order.iter().enumerate().take(last) {
        let row = gram.row(x);
        let to_left: f64 = order[..t].iter().map(|&a| row[a]).sum();
        let to_right: f64 = order[t + 1..].iter().map(|&b| row[b]).sum();
        let self_k = row[x];
        sums.within_left += 2.0 * to_left + self_k;
        sums.within_right -= 2.0 * to_right + self_k;
        sums.cross += to_right - to_left;
        sums.split = t + 1;

        #[cfg(debug_assertions)]
        debug_assert!((sums.total() - total).abs() <= 1e-8 * total.abs().max(1.0));

        visit(&sums);
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::kernel::{gram_matrix, median_heuristic, Dataset};
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    pub(crate) fn random_dataset(n: usize, p: usize, seed: u64) -> Dataset {
        let mut r = rng::stream(seed, 99);
        let rows = (0..n)
            .map(|i| {
                let shift = if i % 3 == 0 { 0.7 } else { 0.0 };
                (0..p).map(|_| r.sample::<f64, _>(StandardNormal) + shift).collect()
            })
            .collect();
        Dataset::from_rows(rows).unwrap()
    }

    pub(crate) fn random_gram(n: usize, seed: u64) -> GramMatrix {
        let data = random_dataset(n, 4, seed);
        gram_matrix(&data, median_heuristic(&data).unwrap()).unwrap()
    }

    /// Triple-loop evaluation straight from the estimator's double sums.
    fn naive_mmd(gram: &GramMatrix, a: &[usize], b: &[usize]) -> f64 {
        let mut xx = 0.0;
        for &i in a {
            for &j in a {
                xx += gram.get(i, j);
            }
        }
        let mut yy = 0.0;
        for &i in b {
            for &j in b {
                yy += gram.get(i, j);
            }
        }
        let mut xy = 0.0;
        for &i in a {
            for &j in b {
                xy += gram.get(i, j);
            }
        }
        let (m, n) = (a.len() as f64, b.len() as f64);
        xx / (m * m) + yy / (n * n) - 2.0 * xy / (m * n)
    }

    fn naive_rho(gram: &GramMatrix, order: &[usize], t: usize) -> f64 {
        let m = order.len() as f64;
        let tf = t as f64;
        tf * (m - tf) / (m * m) * naive_mmd(gram, &order[..t], &order[t..])
    }

    #[test]
    fn split_ranges() {
        assert_eq!(SplitRange::from_delta(300, 0.05).unwrap(), SplitRange { lo: 15, hi: 285 });
        assert_eq!(SplitRange::from_delta(10, 0.01).unwrap(), SplitRange { lo: 1, hi: 9 });
        assert_eq!(SplitRange::with_min_side(10, 0.01, 2).unwrap(), SplitRange { lo: 2, hi: 8 });
        assert_eq!(SplitRange::with_min_side(4, 0.05, 2).unwrap(), SplitRange { lo: 2, hi: 2 });
        assert!(SplitRange::with_min_side(3, 0.05, 2).is_err());
        assert!(SplitRange::from_delta(10, 0.5).is_err());
        assert!(SplitRange::from_delta(10, 0.0).is_err());
        assert!(SplitRange::from_delta(10, 0.45).is_ok());
        assert!(SplitRange::from_delta(3, 0.4).is_err());
    }

    #[test]
    fn identical_observations_have_zero_statistic() {
        let data = Dataset::from_rows(vec![vec![1.0, 2.0]; 8]).unwrap();
        let gram = gram_matrix(&data, crate::kernel::Bandwidth::new(1.0).unwrap()).unwrap();
        for r in 1..8 {
            assert_eq!(mmd_squared_split(&gram, r).unwrap(), 0.0);
        }
        let order: Vec<usize> = (0..8).collect();
        let curve = rho_curve(&gram, 0.1, &order).unwrap();
        assert!(curve.values.iter().all(|&v| v == 0.0));
        assert_eq!(curve.argmax, curve.t_min);
    }

    #[test]
    fn two_points() {
        let gram = random_gram(2, 3);
        let expected = 2.0 - 2.0 * gram.get(0, 1);
        assert!((mmd_squared_split(&gram, 1).unwrap() - expected).abs() < 1e-15);
        assert!(mmd_squared_split(&gram, 0).is_err());
        assert!(mmd_squared_split(&gram, 2).is_err());
    }

    #[test]
    fn split_matches_naive_sum() {
        let gram = random_gram(10, 11);
        let order: Vec<usize> = (0..10).collect();
        let naive = naive_mmd(&gram, &order[..4], &order[4..]);
        assert!((mmd_squared_split(&gram, 4).unwrap() - naive).abs() < 1e-10);
    }

    #[test]
    fn groups() {
        let gram = random_gram(12, 5);
        let s = mmd_squared_groups(&gram, &[3], &[7]).unwrap();
        assert!((s - (2.0 - 2.0 * gram.get(3, 7))).abs() < 1e-15);
        let a = [0, 2, 5, 9];
        let b = [1, 4, 11];
        assert!((mmd_squared_groups(&gram, &a, &b).unwrap() - naive_mmd(&gram, &a, &b)).abs() < 1e-10);
        assert!(mmd_squared_groups(&gram, &[], &b).is_err());
        assert!(mmd_squared_groups(&gram, &[1, 2], &[2, 3]).is_err());
        assert!(mmd_squared_groups(&gram, &[1, 20], &[3]).is_err());

        let same = Dataset::from_rows(vec![vec![0.5]; 6]).unwrap();
        let g = gram_matrix(&same, crate::kernel::Bandwidth::new(1.0).unwrap()).unwrap();
        assert_eq!(mmd_squared_groups(&g, &[0, 1, 2], &[3, 4, 5]).unwrap(), 0.0);
    }

    #[test]
    fn curve_matches_naive_split_statistic() {
        let gram = random_gram(30, 8);
        let order: Vec<usize> = (0..30).collect();
        let curve = rho_curve(&gram, 0.05, &order).unwrap();
        for (t, v) in curve.iter() {
            assert!((v - naive_rho(&gram, &order, t)).abs() < 1e-9, "t = {t}");
        }
        let (max, argmax) = rho_max_in(&gram, &order, SplitRange::from_delta(30, 0.05).unwrap());
        assert_eq!((max, argmax), (curve.max, curve.argmax));
    }

    #[test]
    fn rejects_bad_orders() {
        let gram = random_gram(6, 1);
        assert!(rho_curve(&gram, 0.1, &[0, 1, 1, 2]).is_err());
        assert!(rho_curve(&gram, 0.1, &[0, 1, 9]).is_err());
        assert!(rho_curve(&gram, 0.7, &[0, 1, 2, 3]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn incremental_sweep_equals_naive(n in 4usize..60, seed in any::<u64>()) {
            let gram = random_gram(n, seed);
            let mut order: Vec<usize> = (0..n).collect();
            use rand::seq::SliceRandom;
            order.shuffle(&mut rng::stream(seed, 1));
            let range = SplitRange::from_delta(n, 0.01).unwrap();
            let curve = rho_curve_in(&gram, &order, range);
            for (t, v) in curve.iter() {
                prop_assert!(v >= 0.0);
                prop_assert!((v - naive_rho(&gram, &order, t)).abs() < 1e-9);
            }
        }

        #[test]
        fn block_sums_are_conserved(n in 2usize..40, seed in any::<u64>()) {
            let gram = random_gram(n, seed);
            let order: Vec<usize> = (0..n).collect();
            let total = gram.total();
            sweep(&gram, &order, n - 1, |s| {
                assert!((s.total() - total).abs() <= 1e-8 * total);
                assert!(s.within_left >= 0.0 && s.within_right >= 0.0 && s.cross >= 0.0);
                assert!(s.mmd_squared() >= 0.0);
            });
        }

        #[test]
        fn reindexing_equals_physical_permutation(n in 4usize..40, seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let data = random_dataset(n, 3, seed);
            let h = median_heuristic(&data).unwrap();
            let gram = gram_matrix(&data, h).unwrap();
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng::stream(seed, 2));
            let permuted = gram_matrix(&data.permuted(&order), h).unwrap();
            let identity: Vec<usize> = (0..n).collect();
            let a = rho_curve(&gram, 0.1, &order).unwrap();
            let b = rho_curve(&permuted, 0.1, &identity).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
