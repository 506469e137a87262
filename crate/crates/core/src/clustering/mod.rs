//! k-means pseudo labels, Hungarian assignment and clustering accuracy.

mod accuracy;
mod hungarian;
mod kmeans;
mod mix;

pub use accuracy::{clustering_accuracy, AccuracyResult};
pub use hungarian::{hungarian, Assignment};
pub use kmeans::{best_of, kmeans, kmeans_restart, KMeansConfig, KMeansResult};
pub use mix::mix_targets;
