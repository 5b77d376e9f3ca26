// SPDX-License-Identifier: MIT OR Apache-2.0

//! Curve geometry, the Gaussian kernel and Gram matrix construction.
//!
//! Observations are curves sampled on a common grid of `p` points in `[0, 1]`.
//! Distances are the Riemann approximation of the `L²[0,1]` norm,
//! `sqrt((1/p) Σ_j (a_j − b_j)²)`, so the norm is a scaled Euclidean norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observation: function values on the sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve(Vec<f64>);

impl Curve {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Data("a curve needs at least one grid value".into()));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite value at grid index {j}")));
        }
        Ok(Curve(values))
    }

    pub fn grid_size(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

/// Time-ordered observations stored row-major, all on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let p = rows.first().map(Vec::len).unwrap_or(0);
        if p == 0 {
            return Err(Error::Data("dataset is empty".into()));
        }
        let n = rows.len();
        let mut values = Vec::with_capacity(n * p);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != p {
                return Err(Error::Dimension { expected: p, found: row.len() });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!("non-finite value at observation {i}, grid index {j}")));
            }
            values.extend(row);
        }
        Ok(Dataset { n, p, values })
    }

    pub fn from_curves(curves: Vec<Curve>) -> Result<Self> {
        Self::from_rows(curves.into_iter().map(Curve::into_values).collect())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn grid_size(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.p)
    }

    /// A new dataset whose `i`-th row is row `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(order.len() * self.p);
        for &i in order {
            values.extend_from_slice(self.row(i));
        }
        Dataset { n: order.len(), p: self.p, values }
    }
}

/// Gaussian kernel bandwidth `h > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.0 {
            Ok(Bandwidth(h))
        } else {
            Err(Error::config(format!("bandwidth must be a positive finite number, got {h}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// How the bandwidth of a run is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthChoice {
    /// Median of all pairwise distances in the full dataset.
    #[default]
    MedianHeuristic,
    Fixed(Bandwidth),
}

impl BandwidthChoice {
    pub fn resolve(self, data: &Dataset) -> Result<Bandwidth> {
        match self {
            BandwidthChoice::MedianHeuristic => median_heuristic(data),
            BandwidthChoice::Fixed(h) => Ok(h),
        }
    }
}

fn squared_l2(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    sum / a.len() as f64
}

/// Discretized `L²[0,1]` distance between two curves on the same grid.
pub fn l2_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension { expected: a.len(), found: b.len() });
    }
    if a.is_empty() {
        return Err(Error::Data("curves must have at least one grid value".into()));
    }
    Ok(squared_l2(a, b).sqrt())
}

/// Median of the `n(n−1)/2` pairwise distances over unordered pairs.
///
/// For an even number of pairs the two central order statistics are averaged.
pub fn median_heuristic(data: &Dataset) -> Result<Bandwidth> {
    let n = data.len();
    if n < 2 {
        return Err(Error::argument("the median heuristic needs at least two observations"));
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(squared_l2(data.row(i), data.row(j)).sqrt());
        }
    }
    let median = median_in_place(&mut dists);
    if median > 0.0 {
        return Bandwidth::new(median);
    }
    // More than half of the pairs coincide: take the median over pairs of
    // distinct curves instead.
    let mut nonzero: Vec<f64> = dists.into_iter().filter(|&d| d > 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::DegenerateBandwidth);
    }
    Bandwidth::new(median_in_place(&mut nonzero))
}

fn median_in_place(xs: &mut [f64]) -> f64 {
    let m = xs.len();
    let upper_idx = m / 2;
    let (lower, upper, _) = xs.select_nth_unstable_by(upper_idx, f64::total_cmp);
    let upper = *upper;
    if m % 2 == 1 {
        upper
    } else {
        let lower_max = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower_max + upper)
    }
}

/// `exp(−‖a − b‖² / 2h²)`.
pub fn gaussian_kernel(a: &[f64], b: &[f64], h: Bandwidth) -> Result<f64> {
    let d = l2_distance(a, b)?;
    Ok(kernel_from_sq_distance(d * d, h))
}

#[inline]
fn kernel_from_sq_distance(sq: f64, h: Bandwidth) -> f64 {
    (-sq / (2.0 * h.0 * h.0)).exp()
}

/// Symmetric `n × n` matrix of kernel evaluations with unit diagonal.
///
/// Built once per run and shared read-only by every split, segment and
/// permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl GramMatrix {
    /// Wraps precomputed entries. Checks shape and symmetry only.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension { expected: n * n, found: entries.len() });
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::Data(format!("kernel matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(GramMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Sum of every entry.
    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }
}

/// Kernel matrix of `data` under the Gaussian kernel with bandwidth `h`.
pub fn gram_matrix(data: &Dataset, h: Bandwidth) -> Result<GramMatrix> {
    let n = data.len();
    if n < 2 {
        return Err(Error::argument("a Gram matrix needs at least two observations"));
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let k = kernel_from_sq_distance(squared_l2(data.row(i), data.row(j)), h);
            entries[i * n + j] = k;
            entries[j * n + i] = k;
        }
    }
    Ok(GramMatrix { n, entries })
}
