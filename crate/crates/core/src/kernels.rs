//! Kernel functions over embedding rows.
//!
//! Gaussian is `exp(-‖x−y‖² / (2σ²))`, Laplacian is `exp(-‖x−y‖₁ / σ)` and
//! linear is the dot product. The Gaussian and Laplacian bandwidth σ is
//! either fixed or resolved against the data with the median heuristic:
//! the median of the nonzero pairwise distances (Euclidean for Gaussian,
//! L1 for Laplacian) over at most [`MEDIAN_SAMPLE_ROWS`] rows drawn with a
//! seeded stream.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::data::{EmbeddingSet, LabelVector};
use crate::error::{Error, Result};
use crate::rng;

/// Row cap for the median heuristic; larger sets are subsampled.
pub const MEDIAN_SAMPLE_ROWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Gaussian,
    Laplacian,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum BandwidthPolicy {
    Fixed { value: f64 },
    Median {
        #[serde(default)]
        seed: u64,
    },
}

impl Default for BandwidthPolicy {
    fn default() -> Self {
        BandwidthPolicy::Median { seed: 0 }
    }
}

/// Kernel family plus bandwidth policy. Serializes as
/// `{"family":"gaussian","bandwidth":{"policy":"median","seed":0}}`, with
/// `resolved_bandwidth` added once resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    #[serde(default)]
    pub bandwidth: BandwidthPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_bandwidth: Option<f64>,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::gaussian_median(0)
    }
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: BandwidthPolicy) -> Self {
        Self { family, bandwidth, resolved_bandwidth: None }
    }

    pub fn gaussian_median(seed: u64) -> Self {
        Self::new(KernelFamily::Gaussian, BandwidthPolicy::Median { seed })
    }

    pub fn linear() -> Self {
        Self::new(KernelFamily::Linear, BandwidthPolicy::default())
    }

    /// A spec with a fixed bandwidth, already resolved.
    pub fn fixed(family: KernelFamily, sigma: f64) -> Result<Self> {
        let spec = Self::new(family, BandwidthPolicy::Fixed { value: sigma });
        spec.validate()?;
        Ok(Self { resolved_bandwidth: Some(sigma), ..spec })
    }

    pub fn validate(&self) -> Result<()> {
        if let BandwidthPolicy::Fixed { value } = self.bandwidth {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(alloc::format!(
                    "fixed bandwidth must be positive and finite, got {value}"
                )));
            }
        }
        if let Some(s) = self.resolved_bandwidth {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Config(alloc::format!(
                    "resolved bandwidth must be positive and finite, got {s}"
                )));
            }
        }
        Ok(())
    }

    pub fn needs_bandwidth(&self) -> bool {
        self.family != KernelFamily::Linear
    }

    pub fn is_resolved(&self) -> bool {
        !self.needs_bandwidth() || self.resolved_bandwidth.is_some()
    }

    /// Evaluator for hot loops. Fails if the bandwidth is still unresolved.
    pub fn evaluator(&self) -> Result<Kernel> {
        self.validate()?;
        let kernel = match self.family {
            KernelFamily::Linear => Kernel::Linear,
            family => {
                let sigma = self.resolved_bandwidth.ok_or_else(|| {
                    Error::Config("kernel bandwidth used before resolution".into())
                })?;
                match family {
                    KernelFamily::Gaussian => Kernel::Gaussian { two_sigma_sq: 2.0 * sigma * sigma },
                    _ => Kernel::Laplacian { sigma },
                }
            }
        };
        Ok(kernel)
    }
}

/// A resolved kernel. Every kernel value in the crate goes through
/// [`Kernel::eval`], so Gram entries, MMD sums and oracles agree bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Gaussian { two_sigma_sq: f64 },
    Laplacian { sigma: f64 },
    Linear,
}

impl Kernel {
    /// Caller guarantees `x.len() == y.len()`.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match *self {
            Kernel::Gaussian { two_sigma_sq } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                libm::exp(-d2 / two_sigma_sq)
            }
            Kernel::Laplacian { sigma } => {
                let d1: f64 = x.iter().zip(y).map(|(a, b)| libm::fabs(a - b)).sum();
                libm::exp(-d1 / sigma)
            }
            Kernel::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape { expected: x.len(), found: y.len(), what: "kernel arguments" });
    }
    Ok(spec.evaluator()?.eval(x, y))
}

/// Returns a copy of `spec` with `resolved_bandwidth` set. Linear specs are
/// returned unchanged.
pub fn resolve_bandwidth(spec: &KernelSpec, data: &EmbeddingSet) -> Result<KernelSpec> {
    spec.validate()?;
    if !spec.needs_bandwidth() {
        return Ok(*spec);
    }
    let sigma = match spec.bandwidth {
        BandwidthPolicy::Fixed { value } => value,
        BandwidthPolicy::Median { seed } => median_distance(spec.family, data, seed)?,
    };
    Ok(KernelSpec { resolved_bandwidth: Some(sigma), ..*spec })
}

/// Resolves only when the spec is not resolved yet.
pub fn ensure_resolved(spec: &KernelSpec, data: &EmbeddingSet) -> Result<KernelSpec> {
    if spec.is_resolved() {
        spec.validate()?;
        Ok(*spec)
    } else {
        resolve_bandwidth(spec, data)
    }
}

fn median_distance(family: KernelFamily, data: &EmbeddingSet, seed: u64) -> Result<f64> {
    let m = data.rows();
    if m < 2 {
        return Err(Error::Input("median heuristic needs at least 2 rows".into()));
    }
    let rows = sample_rows(m, MEDIAN_SAMPLE_ROWS, seed);
    let mut dists = Vec::with_capacity(rows.len() * (rows.len() - 1) / 2);
    for (a, &i) in rows.iter().enumerate() {
        let x = data.row(i);
        for &j in &rows[a + 1..] {
            let y = data.row(j);
            let d = match family {
                KernelFamily::Laplacian => x.iter().zip(y).map(|(p, q)| libm::fabs(p - q)).sum(),
                _ => libm::sqrt(x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum()),
            };
            if d > 0.0 {
                dists.push(d);
            }
        }
    }
    if dists.is_empty() {
        return Err(Error::Degenerate("all pairwise distances are zero".into()));
    }
    dists.sort_unstable_by(f64::total_cmp);
    let n = dists.len();
    Ok(if n % 2 == 1 { dists[n / 2] } else { 0.5 * (dists[n / 2 - 1] + dists[n / 2]) })
}

/// All rows when `m <= cap`, else `cap` rows from a partial Fisher–Yates
/// shuffle. Returned ascending.
fn sample_rows(m: usize, cap: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..m).collect();
    if m > cap {
        let mut stream = rng::stream(seed);
        for i in 0..cap {
            let j = i + rng::index_below(&mut stream, m - i);
            idx.swap(i, j);
        }
        idx.truncate(cap);
        idx.sort_unstable();
    }
    idx
}

/// Max over nonempty classes of the class mean of `√K(x, x)`.
pub fn kappa(spec: &KernelSpec, data: &EmbeddingSet, labels: &LabelVector) -> Result<f64> {
    labels.check_aligned(data)?;
    let kernel = spec.evaluator()?;
    let mut best: Option<f64> = None;
    for set in labels.index_sets().iter().filter(|s| !s.is_empty()) {
        let mean = match kernel {
            Kernel::Gaussian { .. } | Kernel::Laplacian { .. } => 1.0,
            Kernel::Linear => {
                let total: f64 = set
                    .iter()
                    .map(|&i| libm::sqrt(kernel.eval(data.row(i), data.row(i))))
                    .sum();
                total / set.len() as f64
            }
        };
        best = Some(best.map_or(mean, |b: f64| b.max(mean)));
    }
    best.ok_or_else(|| Error::Input("kappa needs at least one nonempty class".into()))
}

/// Dense kernel values over `rows × cols`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramBlock {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

impl GramBlock {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols.len() + c]
    }
}

pub fn gram_block(
    spec: &KernelSpec,
    data: &EmbeddingSet,
    rows: &[usize],
    cols: &[usize],
) -> Result<GramBlock> {
    let kernel = spec.evaluator()?;
    let m = data.rows();
    if let Some(&bad) = rows.iter().chain(cols).find(|&&i| i >= m) {
        return Err(Error::Index { index: bad, len: m });
    }
    let mut values = Vec::with_capacity(rows.len() * cols.len());
    for &i in rows {
        let x = data.row(i);
        values.extend(cols.iter().map(|&j| kernel.eval(x, data.row(j))));
    }
    Ok(GramBlock { rows: rows.to_vec(), cols: cols.to_vec(), values })
}
