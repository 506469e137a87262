use alloc::vec::Vec;

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;

/// `alpha · y_gt + (1 − alpha) · y_pl` for two probability vectors.
pub fn mix_targets(y_gt: &[f64], y_pl: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Input(alloc::format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if y_gt.len() != y_pl.len() {
        return Err(Error::Shape { expected: y_gt.len(), found: y_pl.len(), what: "target vectors" });
    }
    check_distribution(y_gt, "ground-truth target")?;
    check_distribution(y_pl, "pseudo-label target")?;
    // Boundaries return the selected input untouched.
    if alpha == 1.0 {
        return Ok(y_gt.to_vec());
    }
    if alpha == 0.0 {
        return Ok(y_pl.to_vec());
    }
    Ok(y_gt.iter().zip(y_pl).map(|(g, p)| alpha * g + (1.0 - alpha) * p).collect())
}

fn check_distribution(y: &[f64], what: &str) -> Result<()> {
    if y.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Input(alloc::format!("{what} has negative or non-finite entries")));
    }
    let total: f64 = y.iter().sum();
    if libm::fabs(total - 1.0) > NORM_TOL {
        return Err(Error::Input(alloc::format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}
