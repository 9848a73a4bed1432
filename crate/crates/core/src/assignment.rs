//! Minimum-cost perfect matching on a square cost matrix (Hungarian method
//! with potentials, O(n³)).

use crate::error::{invalid, Result};

/// Returns `assign` with `assign[row] = column` minimizing the total cost,
/// and that cost. `cost` is row-major `n × n` and must be finite.
pub fn solve(cost: &[f64], n: usize) -> Result<(Vec<usize>, f64)> {
    if cost.len() != n * n {
        return Err(invalid(format!("cost matrix needs {} entries, got {}", n * n, cost.len())));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(invalid("cost matrix must be finite"));
    }
    let inf = f64::INFINITY;
    // 1-based arrays; p[j] is the row matched to column j, 0 = free
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
    }
    let total = assign.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    Ok((assign, total))
}
