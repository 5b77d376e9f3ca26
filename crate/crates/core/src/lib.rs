// SPDX-License-Identifier: MIT OR Apache-2.0

//! Offline changepoint detection for functional data with the maximum mean
//! discrepancy (MMD) and a Gaussian kernel.
//!
//! The pipeline is: curves on a common grid ([`kernel::Dataset`]) → one
//! Gram matrix with a global bandwidth ([`kernel::gram_matrix`]) → a
//! detector from [`desc`] (unsupervised, supervised, semi-supervised or
//! forward) → a [`desc::Segmentation`] plus a trace of every decision.
#![forbid(unsafe_code)]

pub mod amoc;
pub mod benchmark;
pub mod desc;
pub mod error;
pub mod kernel;
pub mod metrics;
pub mod mmd;
pub mod oracle;
pub mod rng;
pub mod simgen;

pub use error::{Error, Result};
