// SPDX-License-Identifier: MIT OR Apache-2.0

//! Closed-form split curves for data whose population labels are known.
//!
//! With labels, the left and right blocks of a split are represented by the
//! label-proportion mixtures of the pooled empirical measures, and the scaled
//! MMD between those mixtures reduces to the pool distances `d(P̂ᵢ, P̂ⱼ)`
//! weighted by rational functions of the split `r`. These curves are the
//! ground truth the empirical [`rho_curve`](crate::mmd::rho_curve) is checked
//! against.

use crate::error::{Error, Result};
use crate::kernel::GramMatrix;
use crate::mmd::mmd_squared_groups;

fn check_split(r: usize, n: usize) -> Result<()> {
    if r == 0 || r >= n {
        return Err(Error::OutOfRange { index: r, lo: 1, hi: n.saturating_sub(1) });
    }
    Ok(())
}

fn pool(range: std::ops::Range<usize>) -> Vec<usize> {
    range.collect()
}

/// One change after the first `n1` observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleChangeOracle {
    pub n: usize,
    pub n1: usize,
    /// `d(P̂₁, P̂₂)`.
    pub d12: f64,
}

impl SingleChangeOracle {
    pub fn new(gram: &GramMatrix, n1: usize) -> Result<Self> {
        let n = gram.n();
        if n1 == 0 || n1 >= n {
            return Err(Error::OutOfRange { index: n1, lo: 1, hi: n.saturating_sub(1) });
        }
        let d12 = mmd_squared_groups(gram, &pool(0..n1), &pool(n1..n))?;
        Ok(SingleChangeOracle { n, n1, d12 })
    }

    pub fn rho(&self, r: usize) -> Result<f64> {
        check_split(r, self.n)?;
        let (n, n1, r) = (self.n as f64, self.n1 as f64, r as f64);
        let n2 = n - n1;
        Ok(if r <= n1 {
            r * n2 * n2 / (n * n * (n - r)) * self.d12
        } else {
            n1 * n1 * (n - r) / (r * n * n) * self.d12
        })
    }

    /// `(r, ρ*)` for `r = 1..n`.
    pub fn curve(&self) -> Vec<(usize, f64)> {
        (1..self.n).map(|r| (r, self.rho(r).expect("r in range"))).collect()
    }
}

/// ρ* at split `r` for a single change after `n1` observations.
pub fn oracle_rho_single(gram: &GramMatrix, n1: usize, r: usize) -> Result<f64> {
    SingleChangeOracle::new(gram, n1)?.rho(r)
}

/// Two changes, after `n1` and after `n1 + n2` observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoChangeOracle {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub d12: f64,
    pub d13: f64,
    pub d23: f64,
}

impl TwoChangeOracle {
    pub fn new(gram: &GramMatrix, n1: usize, n2: usize) -> Result<Self> {
        let n = gram.n();
        if n1 == 0 || n2 == 0 || n1 + n2 >= n {
            return Err(Error::argument(format!(
                "two-change oracle needs n1, n2 >= 1 and n1 + n2 < n; got n1 = {n1}, n2 = {n2}, n = {n}"
            )));
        }
        let p1 = pool(0..n1);
        let p2 = pool(n1..n1 + n2);
        let p3 = pool(n1 + n2..n);
        Ok(TwoChangeOracle {
            n,
            n1,
            n2,
            d12: mmd_squared_groups(gram, &p1, &p2)?,
            d13: mmd_squared_groups(gram, &p1, &p3)?,
            d23: mmd_squared_groups(gram, &p2, &p3)?,
        })
    }

    fn sizes(&self) -> (f64, f64, f64, f64) {
        let n = self.n as f64;
        let n1 = self.n1 as f64;
        let n2 = self.n2 as f64;
        (n, n1, n2, n - n1 - n2)
    }

    pub(crate) fn leading_branch(&self, r: f64) -> f64 {
        let (n, _, n2, n3) = self.sizes();
        r / (n * n * (n - r)) * (n2 * (n2 + n3) * self.d12 + n3 * (n2 + n3) * self.d13 - n2 * n3 * self.d23)
    }

    pub(crate) fn middle_branch(&self, r: f64) -> f64 {
        let (n, n1, _, n3) = self.sizes();
        (n * n1 - r * (n1 + n3)) / (n * n) * (n1 / r * self.d12 - n3 / (n - r) * self.d23)
            + n1 * n3 / (n * n) * self.d13
    }

    pub(crate) fn trailing_branch(&self, r: f64) -> f64 {
        let (n, n1, n2, _) = self.sizes();
        (n - r) / (r * n * n) * (n2 * (n1 + n2) * self.d23 + n1 * (n1 + n2) * self.d13 - n1 * n2 * self.d12)
    }

    pub fn rho(&self, r: usize) -> Result<f64> {
        check_split(r, self.n)?;
        let rf = r as f64;
        Ok(if r <= self.n1 {
            self.leading_branch(rf)
        } else if r <= self.n1 + self.n2 {
            self.middle_branch(rf)
        } else {
            self.trailing_branch(rf)
        })
    }

    pub fn curve(&self) -> Vec<(usize, f64)> {
        (1..self.n).map(|r| (r, self.rho(r).expect("r in range"))).collect()
    }
}

/// ρ* at split `r` for changes after `n1` and `n1 + n2` observations.
pub fn oracle_rho_two(gram: &GramMatrix, n1: usize, n2: usize, r: usize) -> Result<f64> {
    TwoChangeOracle::new(gram, n1, n2)?.rho(r)
}

/// Squared MMD between the mixtures `αF̂ + (1−α)Ĝ` and `βF̂ + (1−β)Ĝ` of two
/// empirical pools, evaluated as a quadratic form in the Gram matrix.
pub fn mixture_mmd(gram: &GramMatrix, pool_f: &[usize], pool_g: &[usize], alpha: f64, beta: f64) -> Result<f64> {
    for w in [alpha, beta] {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::argument(format!("mixture weight {w} outside [0, 1]")));
        }
    }
    // validates emptiness, overlap and bounds
    mmd_squared_groups(gram, pool_f, pool_g)?;

    let nf = pool_f.len() as f64;
    let ng = pool_g.len() as f64;
    let weighted: Vec<(usize, f64)> = pool_f
        .iter()
        .map(|&i| (i, (alpha - beta) / nf))
        .chain(pool_g.iter().map(|&j| (j, ((1.0 - alpha) - (1.0 - beta)) / ng)))
        .collect();
    let mut total = 0.0;
    for &(i, wi) in &weighted {
        let row = gram.row(i);
        total += wi * weighted.iter().map(|&(j, wj)| wj * row[j]).sum::<f64>();
    }
    Ok(total.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{gram_matrix, Bandwidth, Dataset};
    use crate::mmd::tests::random_gram;

    /// ρ* from first principles: build the representative mixture of each
    /// side from label proportions and evaluate the weighted kernel form.
    fn representative_rho(gram: &GramMatrix, bounds: &[usize], r: usize) -> f64 {
        let n = gram.n();
        let mut weights = vec![0.0; n];
        let mut start = 0;
        for &end in bounds.iter().chain(std::iter::once(&n)) {
            let size = (end - start) as f64;
            let in_left = r.clamp(start, end) - start;
            let in_right = (end - start) - in_left;
            let left_share = in_left as f64 / r as f64;
            let right_share = in_right as f64 / (n - r) as f64;
            for w in &mut weights[start..end] {
                *w = (left_share - right_share) / size;
            }
            start = end;
        }
        let mut d = 0.0;
        for i in 0..n {
            for j in 0..n {
                d += weights[i] * weights[j] * gram.get(i, j);
            }
        }
        let (rf, nf) = (r as f64, n as f64);
        rf * (nf - rf) / (nf * nf) * d
    }

    #[test]
    fn single_change_matches_representative_mixture() {
        let gram = random_gram(6, 21);
        let oracle = SingleChangeOracle::new(&gram, 3).unwrap();
        for r in 1..6 {
            let direct = representative_rho(&gram, &[3], r);
            assert!((oracle.rho(r).unwrap() - direct).abs() < 1e-12, "r = {r}");
        }
        let expected_peak = 3.0 * 3.0 / 36.0 * oracle.d12;
        assert!((oracle.rho(3).unwrap() - expected_peak).abs() < 1e-15);
        assert!(oracle.rho(0).is_err() && oracle.rho(6).is_err());
        assert!(SingleChangeOracle::new(&gram, 6).is_err());
    }

    #[test]
    fn two_change_matches_representative_mixture() {
        for seed in 0..5 {
            let gram = random_gram(17, seed);
            let oracle = TwoChangeOracle::new(&gram, 4, 6).unwrap();
            for r in 1..17 {
                let direct = representative_rho(&gram, &[4, 10], r);
                assert!((oracle.rho(r).unwrap() - direct).abs() < 1e-12, "seed {seed}, r = {r}");
            }
        }
    }

    #[test]
    fn two_change_branches_meet_at_the_first_change() {
        for seed in 0..10 {
            let gram = random_gram(20, seed);
            let oracle = TwoChangeOracle::new(&gram, 6, 8).unwrap();
            let at = 6.0;
            assert!((oracle.leading_branch(at) - oracle.middle_branch(at)).abs() < 1e-9);
            let at = 14.0;
            assert!((oracle.middle_branch(at) - oracle.trailing_branch(at)).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_pools_give_flat_zero_curves() {
        let data = Dataset::from_rows(vec![vec![0.25, -1.0]; 9]).unwrap();
        let gram = gram_matrix(&data, Bandwidth::new(1.0).unwrap()).unwrap();
        let single = SingleChangeOracle::new(&gram, 4).unwrap();
        assert!(single.curve().iter().all(|&(_, v)| v == 0.0));
        let two = TwoChangeOracle::new(&gram, 3, 3).unwrap();
        assert!(two.curve().iter().all(|&(_, v)| v == 0.0));
        assert!(TwoChangeOracle::new(&gram, 4, 5).is_err());
    }

    #[test]
    fn mixture_identity_edge_weights() {
        let gram = random_gram(10, 4);
        let f: Vec<usize> = (0..4).collect();
        let g: Vec<usize> = (4..10).collect();
        let d = mmd_squared_groups(&gram, &f, &g).unwrap();
        assert!(mixture_mmd(&gram, &f, &g, 0.3, 0.3).unwrap().abs() < 1e-15);
        assert!((mixture_mmd(&gram, &f, &g, 1.0, 0.0).unwrap() - d).abs() < 1e-12);
        assert!((mixture_mmd(&gram, &f, &g, 0.5, 0.0).unwrap() - d / 4.0).abs() < 1e-12);
        assert!(mixture_mmd(&gram, &f, &g, 1.5, 0.0).is_err());
    }
}
