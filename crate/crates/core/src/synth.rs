//! Seeded isotropic Gaussian mixtures.
//!
//! Class `c` has mean `separation · sigma · e_(c mod dim)` and covariance
//! `sigma² I`. Its `per_class` points come from the normal stream seeded
//! with `seed + c` (see [`crate::rng`]), drawn row by row, coordinate by
//! coordinate. Rows are emitted class by class.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::data::{EmbeddingSet, LabelKind, LabelVector};
use crate::error::{Error, Result};
use crate::rng::Normals;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub num_classes: usize,
    pub dim: usize,
    pub separation: f64,
    pub per_class: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes == 0 || self.dim == 0 {
            return Err(Error::Input("num_classes and dim must be positive".into()));
        }
        if self.per_class < 2 {
            return Err(Error::Input("per_class must be at least 2".into()));
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return Err(Error::Input("separation must be finite and nonnegative".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Input("sigma must be finite and positive".into()));
        }
        Ok(())
    }

    pub fn class_mean(&self, class: usize) -> Vec<f64> {
        let mut mean = alloc::vec![0.0; self.dim];
        mean[class % self.dim] = self.separation * self.sigma;
        mean
    }
}

pub fn gen_mixture(spec: &MixtureSpec) -> Result<(EmbeddingSet, LabelVector)> {
    spec.validate()?;
    let n = spec.num_classes * spec.per_class;
    let mut values = Vec::with_capacity(n * spec.dim);
    let mut labels = Vec::with_capacity(n);
    for c in 0..spec.num_classes {
        let mean = spec.class_mean(c);
        let mut normals = Normals::new(spec.seed.wrapping_add(c as u64));
        for _ in 0..spec.per_class {
            values.extend(mean.iter().map(|mu| mu + spec.sigma * normals.sample()));
            labels.push(c);
        }
    }
    let data = EmbeddingSet::new(n, spec.dim, values)?;
    let labels = LabelVector::new(labels, spec.num_classes, LabelKind::Truth)?;
    Ok((data, labels))
}
