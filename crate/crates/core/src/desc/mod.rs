// SPDX-License-Identifier: MIT OR Apache-2.0

//! Multiple-changepoint detection by divisive segmentation.
//!
//! All detectors work on one precomputed [`GramMatrix`] built with a global
//! bandwidth, and report boundaries in sequence coordinates: boundary `b`
//! means observations `..b` and `b..` belong to different segments.
//!
//! Detectors are also reachable by name through [`DetectorRegistry`], which
//! is how the command line selects them.

mod forward;
mod semi;
mod supervised;
mod unsupervised;

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::amoc::AmocConfig;
use crate::error::{Error, Result};
use crate::kernel::GramMatrix;

pub use forward::desc_forward;
pub use semi::desc_ss;
pub use supervised::desc_s;
pub use unsupervised::desc_u;

/// A partition of `0..n` into contiguous segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    n: usize,
    boundaries: Vec<usize>,
}

impl Segmentation {
    /// `boundaries` must be strictly increasing and inside `1..n`.
    pub fn new(n: usize, boundaries: Vec<usize>) -> Result<Self> {
        let mut prev = 0;
        for &b in &boundaries {
            if b <= prev || b >= n {
                return Err(Error::argument(format!(
                    "boundaries must be strictly increasing inside 1..{n}, got {boundaries:?}"
                )));
            }
            prev = b;
        }
        Ok(Segmentation { n, boundaries })
    }

    pub fn empty(n: usize) -> Self {
        Segmentation { n, boundaries: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of changepoints.
    pub fn k(&self) -> usize {
        self.boundaries.len()
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn segments(&self) -> Vec<Range<usize>> {
        let mut edges = Vec::with_capacity(self.boundaries.len() + 2);
        edges.push(0);
        edges.extend_from_slice(&self.boundaries);
        edges.push(self.n);
        edges.windows(2).map(|w| w[0]..w[1]).collect()
    }

    /// `b / n` for every boundary.
    pub fn breakfractions(&self) -> Vec<f64> {
        self.boundaries.iter().map(|&b| b as f64 / self.n as f64).collect()
    }
}

/// Why a DESC-SS merge loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Every adjacent pair rejected at the corrected level.
    AllPairsReject,
    /// The lower bound on the number of changepoints was reached.
    LowerBound,
}

/// One recorded decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    /// A segment was tested for a single change.
    Tested {
        start: usize,
        end: usize,
        statistic: f64,
        boundary: usize,
        p_value: f64,
        alpha: f64,
        reject: bool,
    },
    /// A segment had no admissible split and was left alone.
    TooShort {
        start: usize,
        end: usize,
    },
    /// Forced split of a group at stage `stage` of the supervised search.
    Split {
        stage: usize,
        start: usize,
        end: usize,
        boundary: usize,
        rho: f64,
    },
    /// A group at stage `stage` had no admissible split.
    Unsplittable {
        stage: usize,
        start: usize,
        end: usize,
    },
    /// The split survived the merge step of its stage.
    Kept {
        stage: usize,
        boundary: usize,
        rho: f64,
    },
    /// The split was merged back at its stage.
    Merged {
        stage: usize,
        boundary: usize,
        rho: f64,
    },
    /// Pair test in round `round` of the backward merge, on `start..end` around `boundary`.
    PairTested {
        round: usize,
        start: usize,
        end: usize,
        boundary: usize,
        p_value: f64,
        threshold: f64,
    },
    /// The boundary between a pair was removed in round `round`.
    PairMerged {
        round: usize,
        boundary: usize,
        p_value: f64,
    },
    Stopped {
        round: usize,
        reason: StopReason,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DescTrace {
    pub events: Vec<TraceEvent>,
}

impl DescTrace {
    fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    fn extend(&mut self, other: DescTrace) {
        self.events.extend(other.events);
    }
}

/// Output of a detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub segmentation: Segmentation,
    /// For each boundary, the p-value of the test that accepted it; `None`
    /// when it was placed by the supervised search.
    pub p_values: Vec<Option<f64>>,
    pub trace: DescTrace,
}

/// Parameters shared by every registered detector. Fields a detector does not
/// use are ignored; missing ones it needs are configuration errors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub amoc: AmocConfig,
    /// Exact budget for the supervised detector.
    pub k: Option<usize>,
    pub k_lower: Option<usize>,
    pub k_upper: Option<usize>,
}

pub trait Detector: Send + Sync {
    fn name(&self) -> &'static str;
    fn detect(&self, gram: &GramMatrix) -> Result<Detection>;
}

struct Unsupervised(AmocConfig);

impl Detector for Unsupervised {
    fn name(&self) -> &'static str {
        "u"
    }

    fn detect(&self, gram: &GramMatrix) -> Result<Detection> {
        desc_u(gram, &self.0)
    }
}

struct Supervised {
    k: usize,
    delta: f64,
}

impl Detector for Supervised {
    fn name(&self) -> &'static str {
        "s"
    }

    fn detect(&self, gram: &GramMatrix) -> Result<Detection> {
        desc_s(gram, self.k, self.delta)
    }
}

struct SemiSupervised {
    k_lower: usize,
    k_upper: usize,
    amoc: AmocConfig,
}

impl Detector for SemiSupervised {
    fn name(&self) -> &'static str {
        "ss"
    }

    fn detect(&self, gram: &GramMatrix) -> Result<Detection> {
        desc_ss(gram, self.k_lower, self.k_upper, &self.amoc)
    }
}

struct Forward {
    k_lower: usize,
    amoc: AmocConfig,
}

impl Detector for Forward {
    fn name(&self) -> &'static str {
        "forward"
    }

    fn detect(&self, gram: &GramMatrix) -> Result<Detection> {
        desc_forward(gram, self.k_lower, &self.amoc)
    }
}

fn required(value: Option<usize>, what: &str, detector: &str) -> Result<usize> {
    value.ok_or_else(|| Error::config(format!("detector `{detector}` needs {what}")))
}

pub type DetectorFactory = fn(&DetectorParams) -> Result<Box<dyn Detector>>;

/// Detectors selectable by name.
pub struct DetectorRegistry {
    factories: BTreeMap<&'static str, DetectorFactory>,
}

impl Default for DetectorRegistry {
    fn default() -> Self {
        let mut registry = DetectorRegistry { factories: BTreeMap::new() };
        registry.register("u", |p| Ok(Box::new(Unsupervised(p.amoc))));
        registry
            .register("s", |p| Ok(Box::new(Supervised { k: required(p.k, "a budget k", "s")?, delta: p.amoc.delta })));
        registry.register("ss", |p| {
            Ok(Box::new(SemiSupervised {
                k_lower: p.k_lower.unwrap_or(0),
                k_upper: required(p.k_upper, "an upper bound k_upper", "ss")?,
                amoc: p.amoc,
            }))
        });
        registry.register("forward", |p| {
            Ok(Box::new(Forward { k_lower: required(p.k_lower, "a lower bound k_lower", "forward")?, amoc: p.amoc }))
        });
        registry
    }
}

impl DetectorRegistry {
    pub fn register(&mut self, name: &'static str, factory: DetectorFactory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn build(&self, name: &str, params: &DetectorParams) -> Result<Box<dyn Detector>> {
        let factory =
            self.factories.get(name).ok_or_else(|| Error::Unknown { kind: "detector", name: name.to_string() })?;
        factory(params)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::kernel::{gram_matrix, median_heuristic, Dataset};
    use crate::mmd::tests::random_gram;
    use rand::Rng;
    use rand_distr::StandardNormal;

    /// Gaussian curves on 8 grid points whose mean shifts by `levels[k]` in
    /// the `k`-th segment.
    pub(crate) fn piecewise_gram(lengths: &[usize], levels: &[f64], seed: u64) -> GramMatrix {
        let mut rng = crate::rng::stream(seed, 0);
        let mut rows = Vec::new();
        for (&len, &level) in lengths.iter().zip(levels) {
            for _ in 0..len {
                rows.push((0..8).map(|_| level + rng.sample::<f64, _>(StandardNormal)).collect());
            }
        }
        let data = Dataset::from_rows(rows).unwrap();
        gram_matrix(&data, median_heuristic(&data).unwrap()).unwrap()
    }

    pub(crate) fn constant_gram(n: usize) -> GramMatrix {
        let data = Dataset::from_rows(vec![vec![1.0, 2.0, 3.0]; n]).unwrap();
        gram_matrix(&data, crate::kernel::Bandwidth::new(1.0).unwrap()).unwrap()
    }

    #[test]
    fn segmentation_accessors() {
        let s = Segmentation::new(10, vec![3, 7]).unwrap();
        assert_eq!(s.k(), 2);
        assert_eq!(s.segments(), vec![0..3, 3..7, 7..10]);
        assert_eq!(s.breakfractions(), vec![0.3, 0.7]);
        assert_eq!(Segmentation::empty(5).segments(), vec![0..5]);
        for bad in [vec![0], vec![10], vec![4, 4], vec![5, 2]] {
            assert!(Segmentation::new(10, bad).is_err());
        }
    }

    #[test]
    fn registry_builds_by_name() {
        let registry = DetectorRegistry::default();
        assert_eq!(registry.names().collect::<Vec<_>>(), vec!["forward", "s", "ss", "u"]);
        let params = DetectorParams { k: Some(2), k_upper: Some(3), k_lower: Some(1), ..Default::default() };
        for name in ["u", "s", "ss", "forward"] {
            assert_eq!(registry.build(name, &params).unwrap().name(), name);
        }
        assert!(matches!(registry.build("x", &params), Err(Error::Unknown { .. })));
        let err = registry.build("s", &DetectorParams::default()).err().unwrap();
        assert!(err.is_config());
    }

    #[test]
    fn registry_detectors_match_direct_calls() {
        let gram = random_gram(40, 3);
        let params = DetectorParams {
            amoc: AmocConfig { permutations: 29, seed: 8, ..Default::default() },
            k: Some(2),
            k_lower: Some(1),
            k_upper: Some(3),
        };
        let registry = DetectorRegistry::default();
        let via = |name: &str| registry.build(name, &params).unwrap().detect(&gram).unwrap();
        assert_eq!(via("u"), desc_u(&gram, &params.amoc).unwrap());
        assert_eq!(via("s"), desc_s(&gram, 2, params.amoc.delta).unwrap());
        assert_eq!(via("ss"), desc_ss(&gram, 1, 3, &params.amoc).unwrap());
        assert_eq!(via("forward"), desc_forward(&gram, 1, &params.amoc).unwrap());
    }
}
