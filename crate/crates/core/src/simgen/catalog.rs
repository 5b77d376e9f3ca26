// SPDX-License-Identifier: MIT OR Apache-2.0

//! Populations of every benchmark model, in segment order.

use super::process::{Basis, MeanFn, Noise, Population};
use super::ModelId;

fn sine_eigen(terms: usize, theta: impl Fn(f64) -> f64) -> Vec<f64> {
    (1..=terms).map(|j| theta(j as f64)).collect()
}

fn inverse_square(j: f64) -> f64 {
    j.powi(-2)
}

fn slow_exp(j: f64) -> f64 {
    (-j / 3.0).exp()
}

fn expansion(basis: Basis, eigenvalues: Vec<f64>, noise: Noise, mean: MeanFn) -> Population {
    Population::Expansion { basis, eigenvalues, noise, mean }
}

fn gaussian_sine(terms: usize, theta: impl Fn(f64) -> f64, mean: MeanFn) -> Population {
    expansion(Basis::Sine(terms), sine_eigen(terms, theta), Noise::Gaussian, mean)
}

/// 151 terms of the shifted Fourier system with `θⱼ = 0.7 · 2⁻ʲ`.
fn wiggly(mean: MeanFn) -> Population {
    let eigenvalues = (0..=150).map(|j| 0.7 * 2f64.powi(-j)).collect();
    expansion(Basis::ShiftedFourier(151), eigenvalues, Noise::Gaussian, mean)
}

/// Populations for `model`, or `None` for an unnumbered model; `c` is only
/// read by M1 and M2.
pub(super) fn populations(model: ModelId, c: f64) -> Option<Vec<Population>> {
    use ModelId::*;
    Some(match model {
        N1 => vec![wiggly(MeanFn::Quartic { wave: 0.8 })],
        N2 => vec![Population::Bridge(MeanFn::Zero)],
        N3 => vec![gaussian_sine(50, slow_exp, MeanFn::Linear(2.0))],
        N4 => vec![gaussian_sine(40, inverse_square, MeanFn::Zero)],
        M1 => vec![Population::Bridge(MeanFn::Zero), Population::Bridge(MeanFn::Sine(c))],
        M2 => vec![
            gaussian_sine(40, inverse_square, MeanFn::Zero),
            gaussian_sine(40, |j| c * inverse_square(j), MeanFn::Zero),
        ],
        Model(1) => {
            vec![gaussian_sine(50, slow_exp, MeanFn::Linear(2.0)), gaussian_sine(50, slow_exp, MeanFn::Parabola)]
        }
        Model(2) => {
            let t3 = |mean| expansion(Basis::Sine(40), sine_eigen(40, inverse_square), Noise::T3Scaled, mean);
            vec![t3(MeanFn::Zero), t3(MeanFn::SineSeries(vec![0.75, -0.75, 0.75]))]
        }
        Model(3) => vec![wiggly(MeanFn::Quartic { wave: 0.8 }), wiggly(MeanFn::Cubic { wave: 0.6 })],
        Model(4) => vec![Population::Bridge(MeanFn::Zero), Population::Bridge(MeanFn::Sine(1.0))],
        Model(5) => vec![
            gaussian_sine(40, inverse_square, MeanFn::Zero),
            gaussian_sine(40, |j| 3.0 * inverse_square(j), MeanFn::Zero),
        ],
        Model(6) => {
            vec![gaussian_sine(50, inverse_square, MeanFn::Zero), gaussian_sine(50, |j| (-j).exp(), MeanFn::Zero)]
        }
        Model(7) => {
            let eigenvalues = sine_eigen(40, inverse_square);
            vec![
                expansion(Basis::Sine(40), eigenvalues.clone(), Noise::Gaussian, MeanFn::Zero),
                expansion(Basis::Fourier(40), eigenvalues, Noise::Gaussian, MeanFn::Zero),
            ]
        }
        Model(8) => vec![
            wiggly(MeanFn::Quartic { wave: 0.0 }),
            wiggly(MeanFn::Cubic { wave: 1.5 }),
            wiggly(MeanFn::Cubic { wave: 0.0 }),
        ],
        Model(9) => vec![
            Population::Bridge(MeanFn::Zero),
            Population::Bridge(MeanFn::Linear(1.0)),
            Population::Bridge(MeanFn::Zero),
        ],
        Model(10) => vec![
            gaussian_sine(50, inverse_square, MeanFn::Zero),
            gaussian_sine(50, |j| j.powf(-1.05), MeanFn::Zero),
            gaussian_sine(50, |j| (-j).exp(), MeanFn::Zero),
        ],
        Model(11) => {
            let t3 = |scale: f64| {
                expansion(Basis::Sine(40), sine_eigen(40, |j| scale * inverse_square(j)), Noise::T3Scaled, MeanFn::Zero)
            };
            vec![t3(1.0), t3(3.0), t3(1.0)]
        }
        Model(12) => {
            let eigenvalues = sine_eigen(40, slow_exp);
            let sine = expansion(Basis::Sine(40), eigenvalues.clone(), Noise::Gaussian, MeanFn::Zero);
            vec![sine.clone(), expansion(Basis::Fourier(40), eigenvalues, Noise::Gaussian, MeanFn::Zero), sine]
        }
        Model(_) => return None,
    })
}
