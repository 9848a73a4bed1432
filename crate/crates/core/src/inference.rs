//! Likelihood surfaces, maximum-likelihood fitting and classification over
//! whole datasets, plus the Procrustes/Hungarian baseline.
//!
//! Every dataset-level quantity is built from per-shape [`ShapeDraws`] that
//! are drawn once and then re-weighted for each class model, so surfaces and
//! optimizer objectives are deterministic, smooth functions of `(k, θ)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{invalid, Error, Result};
use crate::nelder_mead::{maximize, SimplexSettings};
use crate::nuisance::{ClassModel, GammaParams, LogLikEstimate, McConfig, ShapeDraws};
use crate::shape::{DataShape, RectangleShape, Regulators, Sampling};
use crate::special::log_sum_exp;
use crate::stats::{covariance_of, mean, variance_of};

/// Data shapes with one class label each.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledDataset {
    shapes: Vec<DataShape>,
    labels: Vec<String>,
}

impl LabelledDataset {
    pub fn new(shapes: Vec<DataShape>, labels: Vec<String>) -> Result<Self> {
        if shapes.is_empty() {
            return Err(invalid("dataset is empty"));
        }
        if shapes.len() != labels.len() {
            return Err(Error::LengthMismatch {
                expected: shapes.len(),
                found: labels.len(),
            });
        }
        Ok(Self { shapes, labels })
    }

    /// All shapes under one label.
    pub fn single_class(shapes: Vec<DataShape>, label: &str) -> Result<Self> {
        let labels = vec![label.to_string(); shapes.len()];
        Self::new(shapes, labels)
    }

    pub fn shapes(&self) -> &[DataShape] {
        &self.shapes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    /// Shapes carrying `label`, in their original order.
    pub fn restricted(&self, label: &str) -> Result<Self> {
        let (shapes, labels): (Vec<_>, Vec<_>) = self
            .shapes
            .iter()
            .zip(&self.labels)
            .filter(|(_, l)| *l == label)
            .map(|(s, l)| (s.clone(), l.clone()))
            .unzip();
        if shapes.is_empty() {
            return Err(invalid(format!("no shapes with label {label:?}")));
        }
        Self::new(shapes, labels)
    }

    /// Fails on the first label that is not in `known`.
    pub fn check_labels(&self, known: &[&str]) -> Result<()> {
        match self.labels.iter().find(|l| !known.contains(&l.as_str())) {
            Some(l) => Err(invalid(format!("unknown class label {l:?}"))),
            None => Ok(()),
        }
    }

    fn sole_label(&self) -> Result<&str> {
        let first = &self.labels[0];
        if let Some(other) = self.labels.iter().find(|l| *l != first) {
            return Err(invalid(format!(
                "expected a single-class dataset, found labels {first:?} and {other:?}"
            )));
        }
        Ok(first)
    }
}

/// Monte Carlo draws for every shape of a dataset.
#[derive(Debug, Clone)]
pub struct DatasetDraws {
    per_shape: Vec<ShapeDraws>,
    seed: u64,
    m_samples: usize,
}

impl DatasetDraws {
    pub fn new(data: &LabelledDataset, regs: &Regulators, cfg: &McConfig) -> Result<Self> {
        let per_shape = data
            .shapes()
            .iter()
            .enumerate()
            .map(|(i, y)| ShapeDraws::new(y, regs, cfg, cfg.shape_seed(i, y)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            per_shape,
            seed: cfg.seed,
            m_samples: cfg.m_samples,
        })
    }

    /// Sum of per-shape estimates; standard errors combine in quadrature.
    pub fn estimate(&self, model: &ClassModel) -> Result<LogLikEstimate> {
        let mut loglik = 0.0;
        let mut var = 0.0;
        for d in &self.per_shape {
            let e = d.estimate(model)?;
            loglik += e.loglik;
            var += e.std_err * e.std_err;
        }
        Ok(LogLikEstimate {
            loglik,
            std_err: var.sqrt(),
            m_samples: self.m_samples,
            seed: self.seed,
        })
    }

    /// [`Self::estimate`], with a shape whose draws all have zero weight
    /// scoring `-inf` instead of failing.
    pub fn objective(&self, model: &ClassModel) -> Result<LogLikEstimate> {
        match self.estimate(model) {
            Err(Error::AllDrawsImpossible) => Ok(LogLikEstimate {
                loglik: f64::NEG_INFINITY,
                std_err: f64::INFINITY,
                m_samples: self.m_samples,
                seed: self.seed,
            }),
            other => other,
        }
    }
}

/// Log-likelihood of a single-class dataset under `model`.
pub fn dataset_loglik(
    data: &LabelledDataset,
    model: &ClassModel,
    regs: &Regulators,
    cfg: &McConfig,
) -> Result<LogLikEstimate> {
    model.validate()?;
    if let Some(l) = data.labels().iter().find(|l| **l != model.label) {
        return Err(invalid(format!(
            "dataset contains label {l:?} but the model is {:?}",
            model.label
        )));
    }
    DatasetDraws::new(data, regs, cfg)?.estimate(model)
}

/// Log-likelihood over a `(k, θ)` grid; `loglik[i][j]` is at
/// `(k_values[i], theta_values[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub k_values: Vec<f64>,
    pub theta_values: Vec<f64>,
    pub loglik: Vec<Vec<f64>>,
    pub std_err: Vec<Vec<f64>>,
}

impl SurfaceGrid {
    /// Indices of the largest entry (first in row-major order on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, row) in self.loglik.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > self.loglik[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        best
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(invalid(format!("{name} axis is empty")));
    }
    if axis.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid(format!("{name} axis values must be finite and > 0")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(format!("{name} axis must be strictly increasing")));
    }
    Ok(())
}

/// Likelihood surface of a single-class dataset. All nodes share the same
/// draws.
pub fn likelihood_surface(
    data: &LabelledDataset,
    k_axis: &[f64],
    theta_axis: &[f64],
    regs: &Regulators,
    cfg: &McConfig,
) -> Result<SurfaceGrid> {
    check_axis("k", k_axis)?;
    check_axis("theta", theta_axis)?;
    let label = data.sole_label()?;
    let draws = DatasetDraws::new(data, regs, cfg)?;
    surface_from_draws(&draws, label, k_axis, theta_axis)
}

pub fn surface_from_draws(
    draws: &DatasetDraws,
    label: &str,
    k_axis: &[f64],
    theta_axis: &[f64],
) -> Result<SurfaceGrid> {
    check_axis("k", k_axis)?;
    check_axis("theta", theta_axis)?;
    let nodes: Vec<(f64, f64)> = k_axis
        .iter()
        .flat_map(|&k| theta_axis.iter().map(move |&t| (k, t)))
        .collect();
    let values = nodes
        .par_iter()
        .map(|&(k, t)| draws.objective(&ClassModel::rectangle(label, k, t)?))
        .collect::<Result<Vec<_>>>()?;
    let cols = theta_axis.len();
    Ok(SurfaceGrid {
        k_values: k_axis.to_vec(),
        theta_values: theta_axis.to_vec(),
        loglik: values.chunks(cols).map(|r| r.iter().map(|e| e.loglik).collect()).collect(),
        std_err: values.chunks(cols).map(|r| r.iter().map(|e| e.std_err).collect()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ClassModel,
    pub final_loglik: f64,
    pub final_std_err: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Incumbent parameters and objective after the start and after every
    /// improving simplex step.
    pub trace: Vec<(GammaParams, f64)>,
}

/// Maximum-likelihood `(k, θ)` by Nelder–Mead in `(ln k, ln θ)` on the
/// common-random-number objective.
pub fn fit_mle(
    data: &LabelledDataset,
    init: &ClassModel,
    regs: &Regulators,
    cfg: &McConfig,
    opt: &SimplexSettings,
) -> Result<FitResult> {
    init.validate()?;
    opt.validate()?;
    let draws = DatasetDraws::new(data, regs, cfg)?;
    fit_from_draws(&draws, init, opt)
}

pub fn fit_from_draws(draws: &DatasetDraws, init: &ClassModel, opt: &SimplexSettings) -> Result<FitResult> {
    let label = init.label.clone();
    let model_at = |x: &[f64]| ClassModel::rectangle(label.clone(), x[0].exp(), x[1].exp());
    let objective = |x: &[f64]| -> f64 {
        model_at(x)
            .and_then(|m| draws.objective(&m))
            .map_or(f64::NEG_INFINITY, |e| e.loglik)
    };
    let g = init.aspect();
    let x0 = [g.k.ln(), g.theta.ln()];
    if objective(&x0) == f64::NEG_INFINITY {
        return Err(invalid(
            "the objective is -inf at the initial parameters; try a different start",
        ));
    }
    let r = maximize(objective, &x0, opt)?;
    let model = model_at(&r.x)?;
    let final_est = draws.objective(&model)?;
    Ok(FitResult {
        trace: r
            .trace
            .iter()
            .map(|(x, v)| (GammaParams { k: x[0].exp(), theta: x[1].exp() }, *v))
            .collect(),
        model,
        final_loglik: final_est.loglik,
        final_std_err: final_est.std_err,
        iterations: r.iterations,
        converged: r.converged,
    })
}

/// Log posterior class probabilities of `y`, in the order of `models`. All
/// classes are scored with the same draws.
pub fn classify(
    y: &DataShape,
    models: &[ClassModel],
    class_priors: &[f64],
    regs: &Regulators,
    cfg: &McConfig,
) -> Result<Vec<(String, f64)>> {
    if models.is_empty() {
        return Err(invalid("no class models"));
    }
    if models.len() != class_priors.len() {
        return Err(Error::LengthMismatch {
            expected: models.len(),
            found: class_priors.len(),
        });
    }
    if class_priors.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(invalid("class priors must be finite and >= 0"));
    }
    let total: f64 = class_priors.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("class priors must sum to 1, got {total}")));
    }
    let draws = ShapeDraws::new(y, regs, cfg, cfg.seed)?;
    let joint = models
        .iter()
        .zip(class_priors)
        .map(|(m, &p)| {
            if p == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            match draws.estimate(m) {
                Ok(e) => Ok(e.loglik + p.ln()),
                Err(Error::AllDrawsImpossible) => Ok(f64::NEG_INFINITY),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let norm = log_sum_exp(&joint);
    if norm == f64::NEG_INFINITY {
        return Err(invalid("every class has zero posterior weight"));
    }
    Ok(models.iter().zip(joint).map(|(m, j)| (m.label.clone(), j - norm)).collect())
}

/// Optimal baseline alignment found by alternating assignment and
/// Procrustes steps.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineFit {
    /// Gaussian log density of the data at the optimum with the supplied σ.
    pub loglik: f64,
    /// Sum of squared residuals at the optimum.
    pub residual: f64,
    /// Data point `i` is matched to boundary point `assignment[i]`.
    pub assignment: Vec<usize>,
    pub z: Complex64,
    pub t: Complex64,
    /// Penalized objective after every step of the winning start.
    pub history: Vec<f64>,
}

const BASELINE_STARTS: usize = 8;
const BASELINE_MAX_ITERS: usize = 200;

fn regularized_procrustes(y: &[Complex64], beta: &[Complex64], regs: &Regulators) -> (Complex64, Complex64) {
    let d = regs.d_inv2;
    let n_tilde = y.len() as f64 + d;
    let q = n_tilde * variance_of(beta, d) + regs.b_inv2;
    let z = if q > 0.0 {
        covariance_of(beta, y, d) * (n_tilde / q)
    } else {
        Complex64::new(0.0, 0.0)
    };
    let t = y.iter().zip(beta).map(|(&p, &b)| p - z * b).sum::<Complex64>() / n_tilde;
    (z, t)
}

fn penalized(y: &[Complex64], beta: &[Complex64], z: Complex64, t: Complex64, regs: &Regulators) -> (f64, f64) {
    let r: f64 = y.iter().zip(beta).map(|(&p, &b)| (p - z * b - t).norm_sqr()).sum();
    (r + regs.d_inv2 * t.norm_sqr() + regs.b_inv2 * z.norm_sqr(), r)
}

fn principal_axis(p: &[Complex64]) -> f64 {
    let m = mean(p);
    let s: Complex64 = p.iter().map(|&v| (v - m) * (v - m)).sum();
    0.5 * s.arg()
}

/// Alternates optimal assignment and regularized Procrustes alignment from
/// several starts; each run stops once the objective decreases by less than
/// a relative `1e-12`.
pub fn procrustes_hungarian_fit(
    y: &DataShape,
    sampling: &Sampling,
    shape: &RectangleShape,
    sigma: f64,
    regs: &Regulators,
) -> Result<BaselineFit> {
    regs.validate()?;
    let n = y.len();
    if sampling.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: sampling.len(),
        });
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(invalid(format!("sigma must be finite and > 0, got {sigma}")));
    }
    let yp = y.points();
    let x = shape.sample_points(sampling);
    let run = |start: Option<(Complex64, Complex64)>| -> Result<BaselineFit> {
        let mut assign: Vec<usize> = (0..n).collect();
        let (mut z, mut t) = match start {
            Some(s) => s,
            None => regularized_procrustes(yp, &x, regs),
        };
        let mut history = Vec::new();
        let mut prev = f64::INFINITY;
        for _ in 0..BASELINE_MAX_ITERS {
            let cost: Vec<f64> = yp
                .iter()
                .flat_map(|&p| x.iter().map(move |&b| (p - z * b - t).norm_sqr()))
                .collect();
            assign = assignment::solve(&cost, n)?.0;
            let beta: Vec<Complex64> = assign.iter().map(|&j| x[j]).collect();
            (z, t) = regularized_procrustes(yp, &beta, regs);
            let (obj, _) = penalized(yp, &beta, z, t, regs);
            history.push(obj);
            if prev - obj <= 1e-12 * (1.0 + obj.abs()) {
                break;
            }
            prev = obj;
        }
        let beta: Vec<Complex64> = assign.iter().map(|&j| x[j]).collect();
        let (_, residual) = penalized(yp, &beta, z, t, regs);
        Ok(BaselineFit {
            loglik: -(n as f64) * (std::f64::consts::TAU * sigma * sigma).ln() - residual / (2.0 * sigma * sigma),
            residual,
            assignment: assign,
            z,
            t,
            history,
        })
    };
    let (my, mx) = (mean(yp), mean(&x));
    let spread = |p: &[Complex64], m: Complex64| p.iter().map(|&v| (v - m).norm_sqr()).sum::<f64>();
    let scale = (spread(yp, my) / spread(&x, mx).max(f64::MIN_POSITIVE)).sqrt();
    let base = principal_axis(yp) - principal_axis(&x);
    let mut best = run(None)?;
    for j in 0..BASELINE_STARTS {
        let z = Complex64::from_polar(scale, base + std::f64::consts::TAU * j as f64 / BASELINE_STARTS as f64);
        let fit = run(Some((z, my - z * mx)))?;
        if fit.history.last() < best.history.last() {
            best = fit;
        }
    }
    Ok(best)
}

/// Zeroth-order Laplace baseline: Gaussian log density of `y` at the best
/// assignment and similarity alignment of the sampled boundary points.
pub fn procrustes_hungarian_loglik(
    y: &DataShape,
    sampling: &Sampling,
    shape: &RectangleShape,
    sigma: f64,
    regs: &Regulators,
) -> Result<f64> {
    Ok(procrustes_hungarian_fit(y, sampling, shape, sigma, regs)?.loglik)
}
