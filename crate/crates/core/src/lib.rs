//! Transfer leakage and the machinery around it.
//!
//! Transfer leakage measures how much class-discriminative information a
//! representation carries about a set of novel classes: it is the
//! pair-weighted sum of unbiased squared MMD between the class-conditional
//! distributions of the representation. This crate holds the numerical core
//! and needs only `alloc`:
//!
//! - [`kernels`]: kernel evaluation, Gram blocks, bandwidth resolution, κ.
//! - [`mmd`]: the diagonal-excluded (U-statistic) MMD² estimator and a
//!   literal brute-force oracle.
//! - [`leakage`]: transfer, self and pseudo leakage plus bootstrap stability.
//! - [`clustering`]: k-means++/Lloyd, Hungarian assignment, clustering
//!   accuracy and target mixing.
//! - [`splits`]: labeled/unlabeled split manifests from a class hierarchy.
//! - [`synth`]: seeded Gaussian mixtures for desk-scale validation.
//!
//! File formats, report documents and the CLI live in the `tleak` crate.
#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod clustering;
mod data;
mod error;
pub mod kernels;
pub mod leakage;
pub mod mmd;
pub mod rng;
pub mod splits;
mod sum;
pub mod synth;

pub use data::{EmbeddingSet, LabelKind, LabelVector};
pub use error::{Error, ErrorKind, Result};
pub use sum::CompensatedSum;
