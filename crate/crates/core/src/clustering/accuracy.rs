use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::hungarian::hungarian;
use crate::data::LabelVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyResult {
    pub accuracy: f64,
    /// `mapping[predicted] = true` class.
    pub mapping: Vec<usize>,
    /// `confusion[predicted][true]` counts, zero-padded to a square matrix.
    pub confusion: Vec<Vec<usize>>,
    pub correct: usize,
    pub total: usize,
}

/// Fraction of rows predicted correctly under the best one-to-one relabeling
/// of predicted clusters. Label spaces of different sizes are zero-padded to
/// `max(C_true, C_pred)`.
pub fn clustering_accuracy(y_true: &LabelVector, y_pred: &LabelVector) -> Result<AccuracyResult> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape {
            expected: y_true.len(),
            found: y_pred.len(),
            what: "true vs predicted labels",
        });
    }
    if y_true.is_empty() {
        return Err(Error::Input("accuracy of an empty labeling is undefined".into()));
    }
    let c = y_true.num_classes().max(y_pred.num_classes());
    let mut confusion = vec![vec![0usize; c]; c];
    for (&t, &p) in y_true.labels().iter().zip(y_pred.labels()) {
        confusion[p][t] += 1;
    }
    let cost: Vec<Vec<f64>> =
        confusion.iter().map(|row| row.iter().map(|&n| -(n as f64)).collect()).collect();
    let mapping = hungarian(&cost)?.permutation;
    let correct: usize = mapping.iter().enumerate().map(|(p, &t)| confusion[p][t]).sum();
    let total = y_true.len();
    Ok(AccuracyResult { accuracy: correct as f64 / total as f64, mapping, confusion, correct, total })
}
