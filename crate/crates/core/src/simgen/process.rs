// SPDX-License-Identifier: MIT OR Apache-2.0

//! Random-function building blocks: the Brownian bridge and truncated
//! Karhunen-Loève expansions `μ(t) + Σₖ √θₖ Wₖ φₖ(t)`.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::error::{Error, Result};
use crate::kernel::Curve;

/// `t_j = j / p` for `j = 1..=p`; the grid ends at 1 so bridges pin on-grid.
pub fn grid(p: usize) -> Vec<f64> {
    (1..=p).map(|j| j as f64 / p as f64).collect()
}

/// Orthonormal systems on `[0, 1]`, each truncated at a number of terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// `√2 sin(jπt)`, `j = 1..=terms`.
    Sine(usize),
    /// `1`, then `√2 sin(2πlt − π)`, `√2 cos(2πlt − π)` for `l = 1, 2, …`.
    ShiftedFourier(usize),
    /// `1`, then `√2 sin(2πlt)`, `√2 cos(2πlt)` for `l = 1, 2, …`.
    Fourier(usize),
}

impl Basis {
    pub fn terms(self) -> usize {
        match self {
            Basis::Sine(k) | Basis::ShiftedFourier(k) | Basis::Fourier(k) => k,
        }
    }

    /// The `k`-th function of the system (zero-based position) at `t`.
    pub fn value(self, k: usize, t: f64) -> f64 {
        match self {
            Basis::Sine(_) => SQRT_2 * ((k + 1) as f64 * PI * t).sin(),
            Basis::ShiftedFourier(_) | Basis::Fourier(_) => {
                if k == 0 {
                    return 1.0;
                }
                let l = k.div_ceil(2) as f64;
                let shift = if matches!(self, Basis::ShiftedFourier(_)) { PI } else { 0.0 };
                let arg = 2.0 * PI * l * t - shift;
                if k % 2 == 1 {
                    SQRT_2 * arg.sin()
                } else {
                    SQRT_2 * arg.cos()
                }
            }
        }
    }
}

/// Law of the expansion coefficients `Wₖ`; both have unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    Gaussian,
    /// Student t with 3 degrees of freedom divided by `√3`.
    T3Scaled,
}

impl Noise {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Noise::Gaussian => rng.sample(StandardNormal),
            Noise::T3Scaled => {
                let t3 = StudentT::new(3.0).expect("3 degrees of freedom is valid");
                t3.sample(rng) / 3f64.sqrt()
            }
        }
    }
}

/// Mean functions used by the model catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanFn {
    Zero,
    /// `slope · t`.
    Linear(f64),
    /// `6t(1 − t)`.
    Parabola,
    /// `0.5 − 100(t − 0.1)(t − 0.3)(t − 0.5)(t − 0.9) + wave · sin(1 + 10πt)`.
    Quartic {
        wave: f64,
    },
    /// `1 + 3t² − 5t³ + wave · sin(1 + 10πt)`.
    Cubic {
        wave: f64,
    },
    /// `scale · sin(t)`.
    Sine(f64),
    /// `Σⱼ cⱼ √2 sin(jπt)` with coefficients `c₁, c₂, …`.
    SineSeries(Vec<f64>),
}

impl MeanFn {
    pub fn value(&self, t: f64) -> f64 {
        let wiggle = || (1.0 + 10.0 * PI * t).sin();
        match self {
            MeanFn::Zero => 0.0,
            MeanFn::Linear(slope) => slope * t,
            MeanFn::Parabola => 6.0 * t * (1.0 - t),
            MeanFn::Quartic { wave } => 0.5 - 100.0 * (t - 0.1) * (t - 0.3) * (t - 0.5) * (t - 0.9) + wave * wiggle(),
            MeanFn::Cubic { wave } => 1.0 + 3.0 * t * t - 5.0 * t * t * t + wave * wiggle(),
            MeanFn::Sine(scale) => scale * t.sin(),
            MeanFn::SineSeries(coefficients) => {
                coefficients.iter().enumerate().map(|(k, c)| c * Basis::Sine(coefficients.len()).value(k, t)).sum()
            }
        }
    }
}

/// One population of random curves.
#[derive(Debug, Clone, PartialEq)]
pub enum Population {
    /// Standard Brownian bridge plus a mean.
    Bridge(MeanFn),
    Expansion {
        basis: Basis,
        eigenvalues: Vec<f64>,
        noise: Noise,
        mean: MeanFn,
    },
}

/// A population evaluated on a fixed grid, ready for repeated draws.
#[derive(Debug, Clone)]
pub struct Sampler {
    p: usize,
    means: Vec<f64>,
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Bridge,
    /// Row `k` holds `√θₖ φₖ(t_j)` over the grid.
    Expansion {
        loadings: Vec<f64>,
        terms: usize,
        noise: Noise,
    },
}

impl Population {
    pub fn sampler(&self, grid_size: usize) -> Result<Sampler> {
        if grid_size < 2 {
            return Err(Error::config(format!("the grid needs at least 2 points, got {grid_size}")));
        }
        let ts = grid(grid_size);
        let mean = match self {
            Population::Bridge(mean) | Population::Expansion { mean, .. } => mean,
        };
        let means = ts.iter().map(|&t| mean.value(t)).collect();
        let kind = match self {
            Population::Bridge(_) => SamplerKind::Bridge,
            Population::Expansion { basis, eigenvalues, noise, .. } => {
                if eigenvalues.len() != basis.terms() {
                    return Err(Error::Dimension { expected: basis.terms(), found: eigenvalues.len() });
                }
                if let Some(bad) = eigenvalues.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                    return Err(Error::config(format!("eigenvalues must be finite and nonnegative, got {bad}")));
                }
                let mut loadings = Vec::with_capacity(eigenvalues.len() * grid_size);
                for (k, theta) in eigenvalues.iter().enumerate() {
                    let scale = theta.sqrt();
                    loadings.extend(ts.iter().map(|&t| scale * basis.value(k, t)));
                }
                SamplerKind::Expansion { loadings, terms: eigenvalues.len(), noise: *noise }
            }
        };
        Ok(Sampler { p: grid_size, means, kind })
    }
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut values = self.means.clone();
        match &self.kind {
            SamplerKind::Bridge => {
                let sd = (1.0 / self.p as f64).sqrt();
                let mut walk = Vec::with_capacity(self.p);
                let mut w = 0.0;
                for _ in 0..self.p {
                    w += sd * rng.sample::<f64, _>(StandardNormal);
                    walk.push(w);
                }
                let end = w;
                for (j, (v, w)) in values.iter_mut().zip(walk).enumerate() {
                    let t = (j + 1) as f64 / self.p as f64;
                    *v += w - t * end;
                }
            }
            SamplerKind::Expansion { loadings, terms, noise } => {
                for k in 0..*terms {
                    let coefficient = noise.sample(rng);
                    let row = &loadings[k * self.p..(k + 1) * self.p];
                    for (v, l) in values.iter_mut().zip(row) {
                        *v += coefficient * l;
                    }
                }
            }
        }
        values
    }
}

/// One standard Brownian bridge on the grid `j / p`.
pub fn brownian_bridge<R: Rng + ?Sized>(grid_size: usize, rng: &mut R) -> Result<Curve> {
    Curve::new(Population::Bridge(MeanFn::Zero).sampler(grid_size)?.draw(rng))
}

/// One curve `μ(t) + Σₖ √θₖ Wₖ φₖ(t)` on the grid `j / p`.
pub fn kl_curve<R: Rng + ?Sized>(
    basis: Basis,
    eigenvalues: &[f64],
    noise: Noise,
    mean: MeanFn,
    grid_size: usize,
    rng: &mut R,
) -> Result<Curve> {
    let population = Population::Expansion { basis, eigenvalues: eigenvalues.to_vec(), noise, mean };
    Curve::new(population.sampler(grid_size)?.draw(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn pointwise_variance(sampler: &Sampler, draws: usize, j: usize, seed: u64) -> f64 {
        let mut rng = stream(seed, 0);
        let xs: Vec<f64> = (0..draws).map(|_| sampler.draw(&mut rng)[j]).collect();
        let mean = xs.iter().sum::<f64>() / draws as f64;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64
    }

    #[test]
    fn bridge_is_pinned_at_one() {
        let mut rng = stream(3, 0);
        for _ in 0..100 {
            let curve = brownian_bridge(128, &mut rng).unwrap();
            assert_eq!(*curve.values().last().unwrap(), 0.0);
        }
        assert!(brownian_bridge(1, &mut rng).is_err());
    }

    #[test]
    fn bridge_variance_at_one_half() {
        let sampler = Population::Bridge(MeanFn::Zero).sampler(128).unwrap();
        let v = pointwise_variance(&sampler, 10_000, 63, 11);
        assert!((v - 0.25).abs() < 0.02, "variance {v}");
    }

    #[test]
    fn bridge_is_reproducible() {
        let a = brownian_bridge(128, &mut stream(5, 2)).unwrap();
        let b = brownian_bridge(128, &mut stream(5, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_eigenvalues_give_the_mean() {
        let mean = MeanFn::Cubic { wave: 0.6 };
        let curve = kl_curve(Basis::Sine(5), &[0.0; 5], Noise::Gaussian, mean.clone(), 16, &mut stream(1, 1)).unwrap();
        for (v, t) in curve.values().iter().zip(grid(16)) {
            assert_eq!(*v, mean.value(t));
        }
    }

    #[test]
    fn mismatched_eigenvalues() {
        let err = kl_curve(Basis::Sine(5), &[1.0; 4], Noise::Gaussian, MeanFn::Zero, 16, &mut stream(1, 1));
        assert!(matches!(err, Err(Error::Dimension { expected: 5, found: 4 })));
        let neg = kl_curve(Basis::Sine(1), &[-1.0], Noise::Gaussian, MeanFn::Zero, 16, &mut stream(1, 1));
        assert!(neg.is_err());
    }

    #[test]
    fn sine_expansion_variance_matches_the_series() {
        let eigenvalues: Vec<f64> = (1..=40).map(|j| (j as f64).powi(-2)).collect();
        let expected: f64 = (1..=40).map(|j| (j as f64).powi(-2) * 2.0 * (j as f64 * PI / 2.0).sin().powi(2)).sum();
        let population =
            Population::Expansion { basis: Basis::Sine(40), eigenvalues, noise: Noise::Gaussian, mean: MeanFn::Zero };
        let v = pointwise_variance(&population.sampler(128).unwrap(), 10_000, 63, 12);
        assert!((v / expected - 1.0).abs() < 0.05, "variance {v}, series {expected}");
    }

    #[test]
    fn scaled_t3_has_unit_variance() {
        let mut rng = stream(2024, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| Noise::T3Scaled.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn bases_are_orthonormal_on_a_fine_grid() {
        let p = 4096;
        let ts: Vec<f64> = (0..p).map(|j| (j as f64 + 0.5) / p as f64).collect();
        for basis in [Basis::Sine(6), Basis::ShiftedFourier(7), Basis::Fourier(7)] {
            for a in 0..basis.terms() {
                for b in 0..basis.terms() {
                    let inner: f64 = ts.iter().map(|&t| basis.value(a, t) * basis.value(b, t)).sum::<f64>() / p as f64;
                    let target = if a == b { 1.0 } else { 0.0 };
                    assert!((inner - target).abs() < 1e-6, "{basis:?} {a} {b}: {inner}");
                }
            }
        }
    }

    #[test]
    fn fourier_ordering() {
        let t = 0.1;
        assert_eq!(Basis::Fourier(3).value(0, t), 1.0);
        assert!((Basis::Fourier(3).value(1, t) - SQRT_2 * (2.0 * PI * t).sin()).abs() < 1e-15);
        assert!((Basis::Fourier(3).value(2, t) - SQRT_2 * (2.0 * PI * t).cos()).abs() < 1e-15);
        assert!((Basis::ShiftedFourier(3).value(1, t) - SQRT_2 * (2.0 * PI * t - PI).sin()).abs() < 1e-15);
        assert!((Basis::ShiftedFourier(5).value(4, t) - SQRT_2 * (4.0 * PI * t - PI).cos()).abs() < 1e-15);
    }
}
