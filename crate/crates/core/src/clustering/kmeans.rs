use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use serde::{Deserialize, Serialize};

use crate::data::{EmbeddingSet, LabelKind, LabelVector};
use crate::error::{Error, Result};
use crate::rng;
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Stop once `(previous − current) ≤ tol · previous` for the inertia.
    pub tol: f64,
    pub seed: u64,
    /// Restarts; restart `r` seeds its stream with `seed + r`.
    pub n_init: usize,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        Self { k, max_iters: 300, tol: 1e-4, seed: 0, n_init: 10 }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Input("k must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Input("max_iters must be positive".into()));
        }
        if self.n_init == 0 {
            return Err(Error::Input("n_init must be positive".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::Input(alloc::format!("tol must be a finite value >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignment: LabelVector,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Restart that produced this result.
    pub restart: usize,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
}

/// Best of `cfg.n_init` k-means++/Lloyd restarts.
pub fn kmeans(data: &EmbeddingSet, cfg: &KMeansConfig) -> Result<KMeansResult> {
    check_feasible(data, cfg)?;
    let runs = (0..cfg.n_init)
        .map(|r| run(data, cfg, r))
        .collect::<Vec<_>>();
    Ok(best_of(runs).expect("n_init >= 1"))
}

/// One restart, for callers that spread restarts over workers. Combine with
/// [`best_of`] to reproduce [`kmeans`].
pub fn kmeans_restart(data: &EmbeddingSet, cfg: &KMeansConfig, restart: usize) -> Result<KMeansResult> {
    check_feasible(data, cfg)?;
    Ok(run(data, cfg, restart))
}

/// Lowest inertia; ties go to the lowest restart index.
pub fn best_of(runs: Vec<KMeansResult>) -> Option<KMeansResult> {
    runs.into_iter().min_by(|a, b| {
        a.inertia.total_cmp(&b.inertia).then(a.restart.cmp(&b.restart))
    })
}

fn check_feasible(data: &EmbeddingSet, cfg: &KMeansConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.k > data.rows() {
        return Err(Error::Input(alloc::format!(
            "k = {} exceeds the number of rows ({})",
            cfg.k,
            data.rows()
        )));
    }
    let distinct = distinct_rows(data);
    if distinct < cfg.k {
        return Err(Error::Degenerate(alloc::format!(
            "only {distinct} distinct point(s) for k = {}",
            cfg.k
        )));
    }
    Ok(())
}

fn distinct_rows(data: &EmbeddingSet) -> usize {
    let mut rows: Vec<&[f64]> = data.iter_rows().collect();
    let cmp = |a: &&[f64], b: &&[f64]| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    };
    rows.sort_unstable_by(cmp);
    rows.dedup_by(|a, b| cmp(&&**a, &&**b) == Ordering::Equal);
    rows.len()
}

#[inline]
fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn run(data: &EmbeddingSet, cfg: &KMeansConfig, restart: usize) -> KMeansResult {
    let (m, d, k) = (data.rows(), data.dim(), cfg.k);
    let mut stream = rng::stream(cfg.seed.wrapping_add(restart as u64));
    let mut centroids = plus_plus_init(data, k, &mut stream);

    let mut labels = vec![0usize; m];
    let mut dists = vec![0f64; m];
    let mut history = Vec::new();
    let mut converged = false;
    let mut prev = f64::INFINITY;
    let mut iterations = 0;

    loop {
        iterations += 1;
        let inertia = assign(data, &centroids, k, &mut labels, &mut dists);
        history.push(inertia);
        if inertia == 0.0 || (prev.is_finite() && prev - inertia <= cfg.tol * prev) {
            converged = true;
            break;
        }
        if iterations == cfg.max_iters {
            break;
        }
        prev = inertia;
        update(data, &labels, &mut dists, &mut centroids, k);
    }

    let inertia = *history.last().expect("at least one iteration");
    KMeansResult {
        centroids: centroids.chunks_exact(d).map(|c| c.to_vec()).collect(),
        assignment: LabelVector::new(labels, k, LabelKind::Pseudo).expect("labels < k"),
        inertia,
        iterations,
        converged,
        restart,
        inertia_history: history,
    }
}

/// k-means++ seeding: first centre uniform, then proportional to D².
fn plus_plus_init(data: &EmbeddingSet, k: usize, stream: &mut rng::Stream) -> Vec<f64> {
    let m = data.rows();
    let mut centroids = Vec::with_capacity(k * data.dim());
    let first = rng::index_below(stream, m);
    centroids.extend_from_slice(data.row(first));
    let mut d2: Vec<f64> = data.iter_rows().map(|x| sq_dist(x, data.row(first))).collect();

    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let target = rng::uniform(stream) * total;
        let mut cum = 0.0;
        let mut pick = None;
        for (i, &w) in d2.iter().enumerate() {
            if w > 0.0 {
                cum += w;
                pick = Some(i);
                if cum > target {
                    break;
                }
            }
        }
        let pick = pick.expect("distinct points remain");
        let c = data.row(pick);
        centroids.extend_from_slice(c);
        for (i, x) in data.iter_rows().enumerate() {
            let nd = sq_dist(x, c);
            if nd < d2[i] {
                d2[i] = nd;
            }
        }
    }
    centroids
}

/// Nearest centroid per row (ties to the lowest index); returns inertia.
fn assign(
    data: &EmbeddingSet,
    centroids: &[f64],
    k: usize,
    labels: &mut [usize],
    dists: &mut [f64],
) -> f64 {
    let d = data.dim();
    let mut inertia = CompensatedSum::new();
    for (i, x) in data.iter_rows().enumerate() {
        let mut best = (0usize, f64::INFINITY);
        for c in 0..k {
            let dist = sq_dist(x, &centroids[c * d..(c + 1) * d]);
            if dist < best.1 {
                best = (c, dist);
            }
        }
        labels[i] = best.0;
        dists[i] = best.1;
        inertia.add(best.1);
    }
    inertia.value()
}

fn update(data: &EmbeddingSet, labels: &[usize], dists: &mut [f64], centroids: &mut [f64], k: usize) {
    let d = data.dim();
    let mut sums = vec![0f64; k * d];
    let mut counts = vec![0usize; k];
    for (x, &l) in data.iter_rows().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l * d..(l + 1) * d].iter_mut().zip(x) {
            *s += v;
        }
    }
    for c in 0..k {
        let target = &mut centroids[c * d..(c + 1) * d];
        if counts[c] > 0 {
            for (t, s) in target.iter_mut().zip(&sums[c * d..(c + 1) * d]) {
                *t = s / counts[c] as f64;
            }
        } else {
            // Re-seed at the point farthest from its centroid (lowest index on ties).
            let mut far = 0;
            for i in 1..dists.len() {
                if dists[i] > dists[far] {
                    far = i;
                }
            }
            target.copy_from_slice(data.row(far));
            dists[far] = 0.0;
        }
    }
}
