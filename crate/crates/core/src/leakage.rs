//! Transfer leakage and its variants.
//!
//! With `I_c` the rows labeled `c` and `m = Σ|I_c|`,
//!
//! ```text
//! T-Leak = Σ_{c ≠ c'} |I_c||I_c'| / (m(m−1)) · MMD²(I_c, I_c')
//! ```
//!
//! where MMD² is the unbiased estimator from [`crate::mmd`]. Self leakage is
//! the same statistic on raw features; pseudo leakage replaces the true
//! labels by k-means clusters. Terms are accumulated in ascending `(c, c')`
//! order with compensated summation.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans, AccuracyResult, KMeansConfig, KMeansResult};
use crate::data::{EmbeddingSet, LabelKind, LabelVector};
use crate::error::{Error, Result};
use crate::kernels::{ensure_resolved, Kernel, KernelSpec};
use crate::mmd::{combine, cross_mean, within_mean, SampleGroup};
use crate::rng;
use crate::sum::CompensatedSum;

/// Redraw attempts allowed per bootstrap replicate.
pub const REDRAWS_PER_REPLICATE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeakageKind {
    Transfer,
    #[serde(rename = "self")]
    SelfLeak,
    Pseudo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapStats {
    pub mean: f64,
    /// Population standard deviation (divides by the replicate count).
    pub std: f64,
    pub replicates: usize,
    pub seed: u64,
    pub stratified: bool,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoInfo {
    pub kmeans: KMeansConfig,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
    pub cluster_sizes: Vec<usize>,
    /// Clusters left out of the sum because they hold a single row.
    pub dropped_clusters: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub kind: LeakageKind,
    pub value: f64,
    /// MMD² per ordered class pair; zero diagonal and zero rows for classes
    /// that did not take part.
    pub pair_mmd: Vec<Vec<f64>>,
    /// `|I_c||I_c'| / (m(m−1))` off the diagonal, zero elsewhere.
    pub pair_weight: Vec<Vec<f64>>,
    pub class_counts: Vec<usize>,
    /// `m`: rows that entered the statistic.
    pub rows_used: usize,
    pub kernel: KernelSpec,
    pub negatives_present: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pseudo: Option<PseudoInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<AccuracyResult>,
}

impl LeakageReport {
    /// Re-derives the value from the pair matrices.
    pub fn recompute_value(&self) -> f64 {
        weighted_sum(&self.pair_weight, &self.pair_mmd)
    }

    /// Checks the report's internal invariants.
    pub fn check_consistency(&self, tol: f64) -> Result<()> {
        let c = self.class_counts.len();
        if self.pair_mmd.len() != c || self.pair_weight.len() != c
            || self.pair_mmd.iter().chain(&self.pair_weight).any(|r| r.len() != c)
        {
            return Err(Error::Shape { expected: c, found: self.pair_mmd.len(), what: "report pair matrices" });
        }
        let recomputed = self.recompute_value();
        if libm::fabs(recomputed - self.value) > tol || recomputed.is_nan() || self.value.is_nan() {
            return Err(Error::Input(alloc::format!(
                "report value {} differs from recomputed {recomputed}",
                self.value
            )));
        }
        for i in 0..c {
            for j in 0..c {
                if self.pair_mmd[i][j] != self.pair_mmd[j][i] {
                    return Err(Error::Input("pair_mmd is not symmetric".into()));
                }
            }
        }
        let total: f64 = self.pair_weight.iter().flatten().sum();
        if total > 1.0 + tol {
            return Err(Error::Input(alloc::format!("pair weights sum to {total} > 1")));
        }
        Ok(())
    }
}

fn weighted_sum(weight: &[Vec<f64>], mmd: &[Vec<f64>]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (c, (wr, mr)) in weight.iter().zip(mmd).enumerate() {
        for (c2, (w, v)) in wr.iter().zip(mr).enumerate() {
            if c != c2 && *w != 0.0 {
                acc.add(w * v);
            }
        }
    }
    acc.value()
}

struct PairTerms {
    value: f64,
    pair_mmd: Vec<Vec<f64>>,
    pair_weight: Vec<Vec<f64>>,
    negatives: bool,
}

/// Leakage over explicit per-class row sets. Empty sets take no part; sets
/// of size one are an error.
fn pair_terms(data: &EmbeddingSet, sets: &[Vec<usize>], kernel: &Kernel) -> Result<PairTerms> {
    let c = sets.len();
    if let Some((class, s)) = sets.iter().enumerate().find(|(_, s)| s.len() == 1) {
        return Err(Error::InsufficientSamples { class, size: s.len() });
    }
    let mut pair_mmd = vec![vec![0f64; c]; c];
    let mut pair_weight = vec![vec![0f64; c]; c];
    let present: Vec<usize> = (0..c).filter(|&k| !sets[k].is_empty()).collect();
    if present.len() < 2 {
        return Ok(PairTerms { value: 0.0, pair_mmd, pair_weight, negatives: false });
    }

    let groups: Vec<Option<SampleGroup<'_>>> = sets
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if s.is_empty() {
                Ok(None)
            } else {
                SampleGroup::new(data, s.clone()).map(|g| Some(g.with_class(k)))
            }
        })
        .collect::<Result<_>>()?;
    let within: Vec<f64> = groups
        .iter()
        .map(|g| g.as_ref().map_or(0.0, |g| within_mean(kernel, g)))
        .collect();

    let m: usize = sets.iter().map(Vec::len).sum();
    let denom = m as f64 * (m as f64 - 1.0);
    let mut negatives = false;
    for (a, &i) in present.iter().enumerate() {
        for &j in &present[a + 1..] {
            let (gi, gj) = (groups[i].as_ref().unwrap(), groups[j].as_ref().unwrap());
            let v = combine(within[i], within[j], cross_mean(kernel, gi, gj));
            let w = (gi.len() as f64 * gj.len() as f64) / denom;
            negatives |= v < 0.0;
            pair_mmd[i][j] = v;
            pair_mmd[j][i] = v;
            pair_weight[i][j] = w;
            pair_weight[j][i] = w;
        }
    }
    let value = weighted_sum(&pair_weight, &pair_mmd);
    Ok(PairTerms { value, pair_mmd, pair_weight, negatives })
}

fn report(kind: LeakageKind, terms: PairTerms, counts: Vec<usize>, kernel: KernelSpec) -> LeakageReport {
    LeakageReport {
        kind,
        value: terms.value,
        pair_mmd: terms.pair_mmd,
        pair_weight: terms.pair_weight,
        rows_used: counts.iter().sum(),
        class_counts: counts,
        kernel,
        negatives_present: terms.negatives,
        bootstrap: None,
        pseudo: None,
        accuracy: None,
    }
}

fn labeled_leakage(
    kind: LeakageKind,
    data: &EmbeddingSet,
    labels: &LabelVector,
    spec: &KernelSpec,
) -> Result<LeakageReport> {
    labels.check_aligned(data)?;
    if labels.kind() != LabelKind::Truth {
        return Err(Error::Input("transfer leakage expects ground-truth labels".into()));
    }
    let spec = ensure_resolved(spec, data)?;
    let kernel = spec.evaluator()?;
    let terms = pair_terms(data, &labels.index_sets(), &kernel)?;
    Ok(report(kind, terms, labels.class_counts(), spec))
}

/// Transfer leakage of the representation `data` with respect to the true
/// classes `labels`. An unresolved median bandwidth is resolved on `data`.
pub fn transfer_leakage(data: &EmbeddingSet, labels: &LabelVector, spec: &KernelSpec) -> Result<LeakageReport> {
    labeled_leakage(LeakageKind::Transfer, data, labels, spec)
}

/// Leakage of the raw features themselves (identity representation).
pub fn self_leakage(features: &EmbeddingSet, labels: &LabelVector, spec: &KernelSpec) -> Result<LeakageReport> {
    labeled_leakage(LeakageKind::SelfLeak, features, labels, spec)
}

/// Leakage with k-means clusters standing in for the true labels.
pub fn pseudo_transfer_leakage(
    data: &EmbeddingSet,
    k: usize,
    spec: &KernelSpec,
    km_cfg: &KMeansConfig,
) -> Result<LeakageReport> {
    if k == 0 {
        return Err(Error::Input("k must be positive".into()));
    }
    if k > data.rows() {
        return Err(Error::Input(alloc::format!("k = {k} exceeds the number of rows ({})", data.rows())));
    }
    let cfg = KMeansConfig { k, ..*km_cfg };
    let clusters = kmeans(data, &cfg)?;
    pseudo_leakage_from(data, &clusters, &cfg, spec)
}

/// Pseudo leakage from an already computed clustering.
pub fn pseudo_leakage_from(
    data: &EmbeddingSet,
    clusters: &KMeansResult,
    cfg: &KMeansConfig,
    spec: &KernelSpec,
) -> Result<LeakageReport> {
    clusters.assignment.check_aligned(data)?;
    let spec = ensure_resolved(spec, data)?;
    let kernel = spec.evaluator()?;
    let mut sets = clusters.assignment.index_sets();
    let cluster_sizes: Vec<usize> = sets.iter().map(Vec::len).collect();
    let dropped_clusters: Vec<usize> = (0..sets.len()).filter(|&c| sets[c].len() == 1).collect();
    for &c in &dropped_clusters {
        sets[c].clear();
    }
    if sets.iter().all(Vec::is_empty) {
        return Err(Error::Degenerate("every k-means cluster has fewer than 2 rows".into()));
    }
    let counts = sets.iter().map(Vec::len).collect();
    let terms = pair_terms(data, &sets, &kernel)?;
    let mut r = report(LeakageKind::Pseudo, terms, counts, spec);
    r.pseudo = Some(PseudoInfo {
        kmeans: *cfg,
        inertia: clusters.inertia,
        iterations: clusters.iterations,
        converged: clusters.converged,
        cluster_sizes,
        dropped_clusters,
    });
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    /// Resample within each class instead of over all rows.
    pub stratified: bool,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self { replicates, seed, stratified: false }
    }
}

/// Point estimate plus `cfg.replicates` bootstrap replicates.
pub fn bootstrap_leakage(
    data: &EmbeddingSet,
    labels: &LabelVector,
    spec: &KernelSpec,
    cfg: &BootstrapConfig,
) -> Result<LeakageReport> {
    let point = bootstrap_point(data, labels, spec, cfg)?;
    let values = (0..cfg.replicates)
        .map(|r| bootstrap_replicate(data, labels, &point.kernel, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(with_bootstrap(point, cfg, values))
}

/// The non-bootstrap estimate, after checking the bootstrap config. Its
/// `kernel` is resolved and should be reused for every replicate.
pub fn bootstrap_point(
    data: &EmbeddingSet,
    labels: &LabelVector,
    spec: &KernelSpec,
    cfg: &BootstrapConfig,
) -> Result<LeakageReport> {
    if cfg.replicates < 2 {
        return Err(Error::Input("bootstrap needs at least 2 replicates".into()));
    }
    transfer_leakage(data, labels, spec)
}

/// Replicate `r` draws from stream `seed + r`. A resample that leaves an
/// originally present class with a single row is redrawn, at most
/// [`REDRAWS_PER_REPLICATE`] times.
pub fn bootstrap_replicate(
    data: &EmbeddingSet,
    labels: &LabelVector,
    resolved: &KernelSpec,
    cfg: &BootstrapConfig,
    r: usize,
) -> Result<f64> {
    labels.check_aligned(data)?;
    let kernel = resolved.evaluator()?;
    let m = data.rows();
    let original = labels.index_sets();
    let mut stream = rng::stream(cfg.seed.wrapping_add(r as u64));
    let mut draw = Vec::with_capacity(m);

    for _ in 0..REDRAWS_PER_REPLICATE {
        draw.clear();
        if cfg.stratified {
            for set in &original {
                for _ in 0..set.len() {
                    draw.push(set[rng::index_below(&mut stream, set.len())]);
                }
            }
        } else {
            draw.extend((0..m).map(|_| rng::index_below(&mut stream, m)));
        }
        let mut counts = vec![0usize; labels.num_classes()];
        for &i in &draw {
            counts[labels.labels()[i]] += 1;
        }
        let ok = original.iter().zip(&counts).all(|(s, &n)| s.is_empty() || n >= 2);
        if !ok {
            continue;
        }
        let sample = data.select(&draw)?;
        let mut sets = vec![Vec::new(); labels.num_classes()];
        for (row, &i) in draw.iter().enumerate() {
            sets[labels.labels()[i]].push(row);
        }
        return Ok(pair_terms(&sample, &sets, &kernel)?.value);
    }
    Err(Error::Degenerate(alloc::format!(
        "bootstrap replicate {r} exhausted {REDRAWS_PER_REPLICATE} redraws without a valid resample"
    )))
}

/// Attaches replicate statistics to a point-estimate report.
pub fn with_bootstrap(mut point: LeakageReport, cfg: &BootstrapConfig, values: Vec<f64>) -> LeakageReport {
    let (mean, std) = mean_std(&values);
    point.bootstrap = Some(BootstrapStats {
        mean,
        std,
        replicates: values.len(),
        seed: cfg.seed,
        stratified: cfg.stratified,
        values,
    });
    point
}

/// Welford mean and population standard deviation; identical inputs give
/// exactly zero spread.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (n, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (n + 1) as f64;
        m2 += delta * (x - mean);
    }
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    (mean, libm::sqrt(m2 / values.len() as f64))
}
