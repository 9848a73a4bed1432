//! Analytic marginals over the similarity group and the noise variance.
//!
//! Model: `y_i = z β_i + t + ε_i` with complex `z` (rotation and scale),
//! complex `t` (translation) and `ε_i` circular Gaussian with variance `σ²`
//! per axis. The priors are Gaussian kernels whose width scales with `σ`:
//!
//! ```text
//! translation:     exp(-|t|² / (2σ²D²)) / (2πσ²)  d²t
//! rotation+scale:  exp(-|z|² / (2σ²B²)) / (2πσ²)  d²z   (uniform angle, Rayleigh modulus)
//! noise variance:  v^-(α+1) exp(-c / v)            dv,  v = σ²
//! ```
//!
//! These are the proper priors multiplied by `D²`, `B²` and `Γ(α)/c^α`
//! respectively, so every unregularized limit stays finite. Completing the
//! square in `t` and then `z` gives
//!
//! ```text
//! log P(y | σ, b, s, β) = -log Z - 2n log σ - A / (2σ²)
//! log Z                 = n log 2π + log ñ + log(ñVar~(β) + 1/B²)
//! A                     = ñVar~(y) - ñ²|Cov~(β, y)|² / (ñVar~(β) + 1/B²)
//! ```
//!
//! and integrating `v` against the inverse-gamma kernel
//!
//! ```text
//! log P(y | b, s, β) = -log Z + log Γ(n + α) - (n + α) log(A/2 + c).
//! ```
//!
//! The Jeffreys joint prior on `(g, σ)` is proportional to `Var(β(s)) / σ⁵`;
//! it yields a non-normalizable likelihood and is not provided.

use std::f64::consts::TAU;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::shape::{DataShape, Regulators};
use crate::stats::{covariance_of, mean, variance_of};

/// Inputs to the group marginal at fixed noise level.
#[derive(Debug, Clone)]
pub struct GroupMarginalInputs {
    pub y: DataShape,
    /// Boundary points already put in correspondence with `y`.
    pub beta_pts: DataShape,
    pub sigma: f64,
    pub regs: Regulators,
}

impl GroupMarginalInputs {
    pub fn new(y: DataShape, beta_pts: DataShape, sigma: f64, regs: Regulators) -> Result<Self> {
        if y.len() != beta_pts.len() {
            return Err(Error::LengthMismatch {
                expected: y.len(),
                found: beta_pts.len(),
            });
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(invalid(format!("sigma must be finite and > 0, got {sigma}")));
        }
        regs.validate()?;
        Ok(Self {
            y,
            beta_pts,
            sigma,
            regs,
        })
    }
}

/// The residual left after the similarity transform is integrated out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStat {
    pub a: f64,
    pub n_tilde: f64,
    pub var_y: f64,
    pub var_beta: f64,
    pub cov: Complex64,
}

impl ResidualStat {
    /// `ñVar~(β) + 1/B²`, the curvature of the exponent in `z`.
    pub fn scale_precision(&self, regs: &Regulators) -> f64 {
        self.n_tilde * self.var_beta + regs.b_inv2
    }
}

#[allow(non_snake_case)]
pub fn residual_A(y: &DataShape, beta_pts: &DataShape, regs: &Regulators) -> Result<ResidualStat> {
    if y.len() != beta_pts.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            found: beta_pts.len(),
        });
    }
    Ok(residual_of(y.points(), beta_pts.points(), regs))
}

/// Evaluates `A` as the minimum of
/// `sum |y_i - z β_i - t|² + |t|²/D² + |z|²/B²`, i.e. by plugging in the
/// minimizing `(z, t)`. Every term is nonnegative, so no cancellation occurs
/// when the fit is close.
pub(crate) fn residual_of(y: &[Complex64], beta: &[Complex64], regs: &Regulators) -> ResidualStat {
    let n = y.len() as f64;
    let d = regs.d_inv2;
    let n_tilde = n + d;
    let var_y = variance_of(y, d);
    let var_beta = variance_of(beta, d);
    let cov = covariance_of(beta, y, d);
    let q = n_tilde * var_beta + regs.b_inv2;
    if q <= 0.0 {
        // β carries no scale information; the optimal z is 0 and Cov~ vanishes.
        return ResidualStat {
            a: n_tilde * var_y,
            n_tilde,
            var_y,
            var_beta,
            cov,
        };
    }
    let z = cov * (n_tilde / q);
    let (my, mb) = (mean(y), mean(beta));
    let inner: f64 = y
        .iter()
        .zip(beta)
        .map(|(&p, &b)| ((p - my) - z * (b - mb)).norm_sqr())
        .sum();
    let a = inner + n * d / n_tilde * (my - z * mb).norm_sqr() + regs.b_inv2 * z.norm_sqr();
    ResidualStat {
        a,
        n_tilde,
        var_y,
        var_beta,
        cov,
    }
}

/// `log Z` for a given residual statistic.
pub fn log_normalizer(n: usize, stat: &ResidualStat, regs: &Regulators) -> f64 {
    n as f64 * TAU.ln() + stat.n_tilde.ln() + stat.scale_precision(regs).ln()
}

/// Log likelihood with the similarity transform integrated out, at fixed `σ`.
pub fn g_marginal_loglik(inputs: &GroupMarginalInputs) -> Result<f64> {
    let GroupMarginalInputs {
        y,
        beta_pts,
        sigma,
        regs,
    } = inputs;
    if !sigma.is_finite() || *sigma <= 0.0 {
        return Err(invalid(format!("sigma must be finite and > 0, got {sigma}")));
    }
    let stat = residual_A(y, beta_pts, regs)?;
    if stat.scale_precision(regs) <= 0.0 {
        return Err(Error::Degenerate(
            "all boundary points coincide and 1/B^2 = 0: the scale integral diverges".into(),
        ));
    }
    let n = y.len();
    Ok(-log_normalizer(n, &stat, regs) - 2.0 * n as f64 * sigma.ln() - stat.a / (2.0 * sigma * sigma))
}

/// Log likelihood with the similarity transform and the noise variance
/// integrated out.
pub fn sigma_marginal_loglik(y: &DataShape, beta_pts: &DataShape, regs: &Regulators) -> Result<f64> {
    regs.validate()?;
    let stat = residual_A(y, beta_pts, regs)?;
    sigma_marginal_from_stat(y.len(), &stat, regs)
}

pub fn sigma_marginal_from_stat(n: usize, stat: &ResidualStat, regs: &Regulators) -> Result<f64> {
    if stat.scale_precision(regs) <= 0.0 {
        return Err(Error::Degenerate(
            "all boundary points coincide and 1/B^2 = 0: the scale integral diverges".into(),
        ));
    }
    let bracket = 0.5 * stat.a + regs.c_reg;
    if bracket <= 0.0 {
        return Err(Error::NonNormalizable(
            "A = 0 with c_reg = 0: the noise-variance integral diverges".into(),
        ));
    }
    let m = n as f64 + regs.alpha;
    Ok(-log_normalizer(n, stat, regs) + ln_gamma(m) - m * bracket.ln())
}

/// Hot-path variant for Monte Carlo: degenerate draws score `-inf`.
pub(crate) fn sigma_marginal_slice(y: &[Complex64], beta: &[Complex64], regs: &Regulators) -> f64 {
    let stat = residual_of(y, beta, regs);
    sigma_marginal_from_stat(y.len(), &stat, regs).unwrap_or(f64::NEG_INFINITY)
}
