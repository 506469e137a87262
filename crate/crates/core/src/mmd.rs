//! Unbiased squared maximum mean discrepancy.
//!
//! For groups `A` and `B` the estimator is the U-statistic
//!
//! ```text
//! Σ_{i≠j∈A} K(a_i,a_j) / (|A|(|A|−1)) + Σ_{i≠j∈B} K(b_i,b_j) / (|B|(|B|−1))
//!     − 2 Σ_{i∈A, j∈B} K(a_i,b_j) / (|A||B|)
//! ```
//!
//! It can be negative and is returned as is. Sums are compensated and run in
//! ascending index order over each group, so the value does not depend on
//! the order indices were supplied in, and swapping the groups gives the
//! same bits.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::data::EmbeddingSet;
use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelSpec};
use crate::sum::CompensatedSum;

/// Largest group the brute-force oracle accepts.
pub const ORACLE_MAX_GROUP: usize = 200;

/// A set of rows of one embedding set.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGroup<'a> {
    source: &'a EmbeddingSet,
    indices: Vec<usize>,
    class: Option<usize>,
}

impl<'a> SampleGroup<'a> {
    pub fn new(source: &'a EmbeddingSet, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Input("sample group is empty".into()));
        }
        let mut sorted = indices;
        sorted.sort_unstable();
        if let Some(&bad) = sorted.iter().find(|&&i| i >= source.rows()) {
            return Err(Error::Index { index: bad, len: source.rows() });
        }
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Input(alloc::format!("duplicate index {} in sample group", w[0])));
        }
        Ok(Self { source, indices: sorted, class: None })
    }

    /// Tags the group with the class id reported in errors.
    pub fn with_class(mut self, class: usize) -> Self {
        self.class = Some(class);
        self
    }

    pub fn source(&self) -> &'a EmbeddingSet {
        self.source
    }

    /// Ascending row indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn row(&self, k: usize) -> &'a [f64] {
        self.source.row(self.indices[k])
    }

    fn require_pair(&self, fallback: usize) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::InsufficientSamples {
                class: self.class.unwrap_or(fallback),
                size: self.len(),
            });
        }
        Ok(())
    }
}

/// Mean of `K` over ordered pairs of distinct members.
pub(crate) fn within_mean(kernel: &Kernel, g: &SampleGroup<'_>) -> f64 {
    let n = g.len();
    let mut acc = CompensatedSum::new();
    for i in 0..n {
        let x = g.row(i);
        for j in i + 1..n {
            acc.add(kernel.eval(x, g.row(j)));
        }
    }
    2.0 * acc.value() / (n as f64 * (n as f64 - 1.0))
}

/// Mean of `K` over `A × B`. The outer loop runs over whichever group sorts
/// first by row content, which makes the result symmetric in its arguments.
pub(crate) fn cross_mean(kernel: &Kernel, a: &SampleGroup<'_>, b: &SampleGroup<'_>) -> f64 {
    let (outer, inner) = if content_order(a, b) == Ordering::Greater { (b, a) } else { (a, b) };
    let mut acc = CompensatedSum::new();
    for i in 0..outer.len() {
        let x = outer.row(i);
        for j in 0..inner.len() {
            acc.add(kernel.eval(x, inner.row(j)));
        }
    }
    acc.value() / (a.len() as f64 * b.len() as f64)
}

fn content_order(a: &SampleGroup<'_>, b: &SampleGroup<'_>) -> Ordering {
    for k in 0..a.len().min(b.len()) {
        for (p, q) in a.row(k).iter().zip(b.row(k)) {
            match p.total_cmp(q) {
                Ordering::Equal => {}
                o => return o,
            }
        }
    }
    a.len().cmp(&b.len())
}

fn check_pair(a: &SampleGroup<'_>, b: &SampleGroup<'_>) -> Result<()> {
    if a.source.dim() != b.source.dim() {
        return Err(Error::Shape {
            expected: a.source.dim(),
            found: b.source.dim(),
            what: "sample group dimensionality",
        });
    }
    a.require_pair(0)?;
    b.require_pair(1)
}

pub fn mmd2_unbiased(a: &SampleGroup<'_>, b: &SampleGroup<'_>, spec: &KernelSpec) -> Result<f64> {
    check_pair(a, b)?;
    let kernel = spec.evaluator()?;
    Ok(combine(within_mean(&kernel, a), within_mean(&kernel, b), cross_mean(&kernel, a, b)))
}

#[inline]
pub(crate) fn combine(within_a: f64, within_b: f64, cross: f64) -> f64 {
    (within_a + within_b) - 2.0 * cross
}

/// The same statistic by direct translation of the formula: plain nested
/// loops in caller order, no compensation, no pair reuse. Test-scale only.
pub fn mmd2_brute_oracle(
    a: &SampleGroup<'_>,
    b: &SampleGroup<'_>,
    spec: &KernelSpec,
) -> Result<f64> {
    check_pair(a, b)?;
    if a.len() > ORACLE_MAX_GROUP || b.len() > ORACLE_MAX_GROUP {
        return Err(Error::Input(alloc::format!(
            "oracle is limited to groups of at most {ORACLE_MAX_GROUP} rows"
        )));
    }
    let kernel = spec.evaluator()?;
    let (n, m) = (a.len() as f64, b.len() as f64);

    let mut saa = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            if i != j {
                saa += kernel.eval(a.row(i), a.row(j));
            }
        }
    }
    let mut sbb = 0.0;
    for i in 0..b.len() {
        for j in 0..b.len() {
            if i != j {
                sbb += kernel.eval(b.row(i), b.row(j));
            }
        }
    }
    let mut sab = 0.0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            sab += kernel.eval(a.row(i), b.row(j));
        }
    }
    Ok(saa / (n * (n - 1.0)) + sbb / (m * (m - 1.0)) - 2.0 * sab / (n * m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;
    use alloc::vec;

    fn pair_case(a: &[f64], b: &[f64]) -> (EmbeddingSet, Vec<usize>, Vec<usize>) {
        let rows: Vec<[f64; 1]> = a.iter().chain(b).map(|&v| [v]).collect();
        let d = EmbeddingSet::from_rows(&rows).unwrap();
        let ia = (0..a.len()).collect();
        let ib = (a.len()..a.len() + b.len()).collect();
        (d, ia, ib)
    }

    fn both(a: &[f64], b: &[f64], spec: &KernelSpec) -> (f64, f64) {
        let (d, ia, ib) = pair_case(a, b);
        let ga = SampleGroup::new(&d, ia).unwrap();
        let gb = SampleGroup::new(&d, ib).unwrap();
        (mmd2_unbiased(&ga, &gb, spec).unwrap(), mmd2_brute_oracle(&ga, &gb, spec).unwrap())
    }

    #[test]
    fn linear_examples() {
        let lin = KernelSpec::linear();
        assert_eq!(both(&[0.0, 0.0], &[1.0, 1.0], &lin), (1.0, 1.0));
        assert_eq!(both(&[0.0, 0.0], &[0.0, 0.0], &lin), (0.0, 0.0));
        assert_eq!(both(&[0.0, 2.0], &[1.0, 1.0], &lin), (-1.0, -1.0));
    }

    #[test]
    fn singleton_group_names_class() {
        let (d, _, _) = pair_case(&[0.0, 1.0], &[2.0]);
        let a = SampleGroup::new(&d, vec![0, 1]).unwrap();
        let b = SampleGroup::new(&d, vec![2]).unwrap().with_class(7);
        let err = mmd2_unbiased(&a, &b, &KernelSpec::linear()).unwrap_err();
        assert_eq!(err, Error::InsufficientSamples { class: 7, size: 1 });
    }

    #[test]
    fn group_validation() {
        let (d, _, _) = pair_case(&[0.0, 1.0], &[2.0]);
        assert!(SampleGroup::new(&d, vec![]).is_err());
        assert!(SampleGroup::new(&d, vec![0, 0]).is_err());
        assert!(matches!(SampleGroup::new(&d, vec![3]), Err(Error::Index { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let d1 = EmbeddingSet::from_rows(&[[0.0], [1.0]]).unwrap();
        let d2 = EmbeddingSet::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let a = SampleGroup::new(&d1, vec![0, 1]).unwrap();
        let b = SampleGroup::new(&d2, vec![0, 1]).unwrap();
        assert!(matches!(mmd2_unbiased(&a, &b, &KernelSpec::linear()), Err(Error::Shape { .. })));
    }

    #[test]
    fn swapped_and_shuffled_are_bit_identical() {
        let vals: Vec<[f64; 2]> =
            (0..12).map(|i| [libm::sin(i as f64 * 1.3), libm::cos(i as f64 * 0.7)]).collect();
        let d = EmbeddingSet::from_rows(&vals).unwrap();
        let g = KernelSpec::fixed(KernelFamily::Gaussian, 0.8).unwrap();
        let a = SampleGroup::new(&d, vec![0, 1, 2, 3, 4]).unwrap();
        let b = SampleGroup::new(&d, vec![5, 6, 7, 8, 9, 10, 11]).unwrap();
        let a2 = SampleGroup::new(&d, vec![3, 1, 4, 0, 2]).unwrap();
        let x = mmd2_unbiased(&a, &b, &g).unwrap();
        assert_eq!(x.to_bits(), mmd2_unbiased(&b, &a, &g).unwrap().to_bits());
        assert_eq!(x.to_bits(), mmd2_unbiased(&b, &a2, &g).unwrap().to_bits());
        assert!((x - mmd2_brute_oracle(&a, &b, &g).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn oracle_refuses_large_groups() {
        let rows: Vec<[f64; 1]> = (0..402).map(|i| [i as f64]).collect();
        let d = EmbeddingSet::from_rows(&rows).unwrap();
        let a = SampleGroup::new(&d, (0..201).collect()).unwrap();
        let b = SampleGroup::new(&d, (201..402).collect()).unwrap();
        assert!(mmd2_brute_oracle(&a, &b, &KernelSpec::linear()).is_err());
    }
}
