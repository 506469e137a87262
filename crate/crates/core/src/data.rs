use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major `m × d` matrix of representations, one row per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSet {
    rows: usize,
    dim: usize,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sample_ids: Option<Vec<String>>,
}

impl EmbeddingSet {
    pub fn new(rows: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 {
            return Err(Error::Input("empty dataset".into()));
        }
        if dim == 0 {
            return Err(Error::Input("embedding dimension must be positive".into()));
        }
        let expected = rows
            .checked_mul(dim)
            .ok_or_else(|| Error::Input("matrix size overflows".into()))?;
        if values.len() != expected {
            return Err(Error::Shape { expected, found: values.len(), what: "embedding values" });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(alloc::format!(
                "non-finite value at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { rows, dim, values, sample_ids: None })
    }

    /// Builds a set from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::Shape { expected: dim, found: r.len(), what: "row length" });
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), dim, values)
    }

    pub fn with_sample_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.rows {
            return Err(Error::Shape { expected: self.rows, found: ids.len(), what: "sample ids" });
        }
        let mut sorted: Vec<&String> = ids.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Input(alloc::format!("duplicate sample id {:?}", w[0])));
        }
        self.sample_ids = Some(ids);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sample_ids(&self) -> Option<&[String]> {
        self.sample_ids.as_deref()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    /// New set made of the given rows, in the given order (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::Index { index: i, len: self.rows });
            }
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.dim, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Truth,
    Pseudo,
}

/// Class assignments for the rows of an [`EmbeddingSet`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector {
    labels: Vec<usize>,
    num_classes: usize,
    kind: LabelKind,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, num_classes: usize, kind: LabelKind) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::Input("number of classes must be positive".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::Input(alloc::format!(
                "label {bad} outside [0, {num_classes})"
            )));
        }
        Ok(Self { labels, num_classes, kind })
    }

    /// Infers the class count as `max + 1`.
    pub fn from_labels(labels: Vec<usize>, kind: LabelKind) -> Result<Self> {
        let c = labels.iter().copied().max().map_or(0, |m| m + 1);
        Self::new(labels, c, kind)
    }

    pub fn truth(labels: Vec<usize>) -> Result<Self> {
        Self::from_labels(labels, LabelKind::Truth)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn kind(&self) -> LabelKind {
        self.kind
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Row indices per class, ascending.
    pub fn index_sets(&self) -> Vec<Vec<usize>> {
        let mut sets = alloc::vec![Vec::new(); self.num_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            sets[l].push(i);
        }
        sets
    }

    pub fn check_aligned(&self, data: &EmbeddingSet) -> Result<()> {
        if self.labels.len() != data.rows() {
            return Err(Error::Shape {
                expected: data.rows(),
                found: self.labels.len(),
                what: "labels vs embedding rows",
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_non_finite() {
        assert!(EmbeddingSet::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(EmbeddingSet::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert_eq!(
            EmbeddingSet::new(0, 3, vec![]),
            Err(Error::Input("empty dataset".into()))
        );
        assert!(EmbeddingSet::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let d = EmbeddingSet::from_rows(&[[1.0], [2.0]]).unwrap();
        assert!(d.clone().with_sample_ids(vec!["a".into(), "a".into()]).is_err());
        assert!(d.with_sample_ids(vec!["a".into(), "b".into()]).is_ok());
    }

    #[test]
    fn labels_in_range() {
        assert!(LabelVector::new(vec![0, 3], 3, LabelKind::Truth).is_err());
        let l = LabelVector::truth(vec![2, 0, 2]).unwrap();
        assert_eq!(l.num_classes(), 3);
        assert_eq!(l.class_counts(), vec![1, 0, 2]);
        assert_eq!(l.index_sets(), vec![vec![1], vec![], vec![0, 2]]);
    }
}
