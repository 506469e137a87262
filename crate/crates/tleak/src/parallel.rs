//! Multi-threaded drivers that reproduce the sequential core results bit for
//! bit: work items are independent and results are collected in index order.

use rayon::prelude::*;
use tleak_core::clustering::{best_of, kmeans_restart, KMeansConfig, KMeansResult};
use tleak_core::kernels::KernelSpec;
use tleak_core::leakage::{
    bootstrap_point, bootstrap_replicate, pseudo_leakage_from, with_bootstrap, BootstrapConfig, LeakageReport,
};
use tleak_core::{EmbeddingSet, Error, LabelVector, Result};

use crate::error::CliError;

pub const THREADS_ENV: &str = "TLEAK_THREADS";

/// Pool sized by `TLEAK_THREADS`, or rayon's default when unset.
pub fn pool_from_env() -> crate::error::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

pub fn kmeans(data: &EmbeddingSet, cfg: &KMeansConfig) -> Result<KMeansResult> {
    let runs = (0..cfg.n_init)
        .into_par_iter()
        .map(|r| kmeans_restart(data, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    best_of(runs).ok_or_else(|| Error::Input("n_init must be positive".into()))
}

pub fn pseudo_transfer_leakage(
    data: &EmbeddingSet,
    k: usize,
    spec: &KernelSpec,
    km_cfg: &KMeansConfig,
) -> Result<LeakageReport> {
    if k == 0 || k > data.rows() {
        return Err(Error::Input(format!("k = {k} must lie in [1, {}]", data.rows())));
    }
    let cfg = KMeansConfig { k, ..*km_cfg };
    let clusters = kmeans(data, &cfg)?;
    pseudo_leakage_from(data, &clusters, &cfg, spec)
}

pub fn bootstrap_leakage(
    data: &EmbeddingSet,
    labels: &LabelVector,
    spec: &KernelSpec,
    cfg: &BootstrapConfig,
) -> Result<LeakageReport> {
    let point = bootstrap_point(data, labels, spec, cfg)?;
    let values = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| bootstrap_replicate(data, labels, &point.kernel, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(with_bootstrap(point, cfg, values))
}
