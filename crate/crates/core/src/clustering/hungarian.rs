use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// `permutation[row]` is the column assigned to `row`.
    pub permutation: Vec<usize>,
    /// `Σ cost[row][permutation[row]]`, summed in row order.
    pub total_cost: f64,
}

/// Minimum-cost perfect assignment on a square matrix.
///
/// Among optimal permutations the lexicographically smallest is returned.
/// The shortest-augmenting-path Hungarian method yields optimal dual
/// potentials; every optimal permutation lives on the zero-reduced-cost
/// edges, so the smallest one is then picked row by row with
/// alternating-path exchanges.
pub fn hungarian(cost: &[Vec<f64>]) -> Result<Assignment> {
    let n = cost.len();
    if let Some(row) = cost.iter().find(|r| r.len() != n) {
        return Err(Error::Input(alloc::format!(
            "cost matrix must be square: {n} rows but a row of length {}",
            row.len()
        )));
    }
    if cost.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Input("cost matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(Assignment { permutation: Vec::new(), total_cost: 0.0 });
    }

    let (u, v, mut row_to_col) = solve(cost);
    let scale = cost.iter().flatten().fold(0f64, |a, c| a.max(libm::fabs(*c)));
    let tol = 1e-10 * (1.0 + scale);
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| libm::fabs(cost[i][j] - u[i] - v[j]) <= tol).collect())
        .collect();
    lexicographic_min(&tight, &mut row_to_col);

    let total_cost = row_to_col.iter().enumerate().map(|(i, &j)| cost[i][j]).fold(0.0, |a, c| a + c);
    Ok(Assignment { permutation: row_to_col, total_cost })
}

/// Returns row potentials, column potentials and an optimal row → column map.
fn solve(cost: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let n = cost.len();
    // 1-based with a virtual column 0, as in the classic formulation.
    let mut u = vec![0f64; n + 1];
    let mut v = vec![0f64; n + 1];
    let mut col_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[col_row[j] - 1] = j - 1;
    }
    (u[1..].to_vec(), v[1..].to_vec(), row_to_col)
}

/// Rewrites a perfect matching on `tight` into the lexicographically
/// smallest one.
fn lexicographic_min(tight: &[Vec<bool>], row_to_col: &mut [usize]) {
    let n = tight.len();
    let mut col_to_row = vec![0usize; n];
    for (i, &j) in row_to_col.iter().enumerate() {
        col_to_row[j] = i;
    }
    let mut fixed_col = vec![false; n];

    for i in 0..n {
        for j in 0..n {
            if fixed_col[j] || !tight[i][j] {
                continue;
            }
            if row_to_col[i] == j {
                break;
            }
            // Free column `target` once row i takes j, then look for an
            // alternating path from j's current row back to it.
            let target = row_to_col[i];
            let start = col_to_row[j];
            let mut visited = vec![false; n];
            visited[j] = true;
            let mut path = Vec::new();
            if augment(tight, start, target, &fixed_col, &mut visited, &col_to_row, &mut path) {
                // path holds (row, new column) pairs.
                for &(r, c) in &path {
                    row_to_col[r] = c;
                    col_to_row[c] = r;
                }
                row_to_col[i] = j;
                col_to_row[j] = i;
                break;
            }
        }
        fixed_col[row_to_col[i]] = true;
    }
}

fn augment(
    tight: &[Vec<bool>],
    row: usize,
    target: usize,
    fixed_col: &[bool],
    visited: &mut [bool],
    col_to_row: &[usize],
    path: &mut Vec<(usize, usize)>,
) -> bool {
    for c in 0..tight.len() {
        if fixed_col[c] || visited[c] || !tight[row][c] {
            continue;
        }
        visited[c] = true;
        if c == target {
            path.push((row, c));
            return true;
        }
        let next = col_to_row[c];
        if augment(tight, next, target, fixed_col, visited, col_to_row, path) {
            path.push((row, c));
            return true;
        }
    }
    false
}
