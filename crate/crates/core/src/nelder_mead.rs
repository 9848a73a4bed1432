//! Nelder–Mead simplex maximization.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimplexSettings {
    pub max_iters: usize,
    /// Converged once the largest vertex distance from the best vertex ...
    pub x_tol: f64,
    /// ... and the objective spread across vertices are both below these.
    pub f_tol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        Self {
            max_iters: 200,
            x_tol: 1e-3,
            f_tol: 1e-3,
            initial_step: 0.3,
        }
    }
}

impl SimplexSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be positive"));
        }
        for (name, v) in [("x_tol", self.x_tol), ("f_tol", self.f_tol), ("initial_step", self.initial_step)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best vertex after the start and after each iteration that improved it.
    pub trace: Vec<(Vec<f64>, f64)>,
}

/// Maximizes `f` from `x0`. `-inf` values are allowed and rank lowest.
pub fn maximize(f: impl Fn(&[f64]) -> f64, x0: &[f64], settings: &SimplexSettings) -> Result<SimplexResult> {
    settings.validate()?;
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += settings.initial_step;
        let v = f(&x);
        simplex.push((x, v));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| b.1.total_cmp(&a.1));
    order(&mut simplex);
    let mut trace = vec![simplex[0].clone()];
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(c, w)| c + t * (w - c)).collect() };

    let mut converged = false;
    let mut iterations = 0;
    while iterations < settings.max_iters {
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let spread = if best.is_finite() && worst.is_finite() {
            best - worst
        } else {
            f64::INFINITY
        };
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= settings.f_tol && size <= settings.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }
        let worst_x = simplex[dim].0.clone();
        let xr = point(&centroid, &worst_x, -1.0);
        let fr = f(&xr);
        if fr > simplex[0].1 {
            let xe = point(&centroid, &worst_x, -2.0);
            let fe = f(&xe);
            simplex[dim] = if fe > fr { (xe, fe) } else { (xr, fr) };
        } else if fr > simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let outside = fr > worst;
            let xc = point(&centroid, &worst_x, if outside { -0.5 } else { 0.5 });
            let fc = f(&xc);
            if (outside && fc >= fr) || (!outside && fc > worst) {
                simplex[dim] = (xc, fc);
            } else {
                let best_x = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    let x = point(&best_x, &s.0, 0.5);
                    let v = f(&x);
                    *s = (x, v);
                }
            }
        }
        order(&mut simplex);
        if simplex[0].1 > trace.last().map_or(f64::NEG_INFINITY, |t| t.1) {
            trace.push(simplex[0].clone());
        }
    }
    let (x, value) = simplex.swap_remove(0);
    Ok(SimplexResult {
        x,
        value,
        iterations,
        converged,
        trace,
    })
}
