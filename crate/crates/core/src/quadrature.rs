//! Numerical-integration oracles for the closed-form marginals.
//!
//! These integrate the raw model (Gaussian noise kernel times the prior
//! kernels documented in [`crate::closed_form`]) directly and do not call
//! the residual statistics, so agreement checks the algebra of the closed
//! forms. The σ oracle integrates the fixed-σ group marginal against the
//! variance prior; it validates the σ integral only.
//!
//! Substitutions:
//!
//! * translation `t = σ sqrt(2/D⁻²) (x₁ + i x₂)`, composite Gauss–Legendre
//!   on `x₁, x₂ ∈ [-9, 9]` against the weight `e^{-x²}`
//! * rotation angle `θ ∈ [0, 2π)`, trapezoid rule (periodic integrand)
//! * scale `|z| = σ sqrt(2/B⁻²) ρ`, composite Gauss–Legendre on `ρ ∈ [0, 9]`
//!   (the prior factor `ρ e^{-ρ²}` is below `e^{-80}` beyond)
//! * variance `x = ln σ²`, adaptive Gauss–Kronrod on the range where the
//!   integrand is within `e^{-60}` of its maximum.
//!
//! All sums accumulate in log space in a fixed order.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::closed_form::{g_marginal_loglik, GroupMarginalInputs};
use crate::error::{invalid, Error, Result};
use crate::rng::unit;
use crate::shape::{DataShape, Regulators};

const RHO_MAX: f64 = 9.0;
const X_MAX: f64 = 9.0;
const PANEL_NODES: usize = 8;

/// Node counts and tolerance for the oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per translation axis (rounded up to panels of 8).
    pub translation_nodes: usize,
    /// Trapezoid nodes on `[0, 2π)`.
    pub angle_nodes: usize,
    /// Gauss–Legendre nodes on `ρ ∈ [0, 9]` (rounded up to panels of 8).
    pub scale_nodes: usize,
    /// Largest accepted change of the log integral when node counts double.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            translation_nodes: 256,
            angle_nodes: 48,
            scale_nodes: 96,
            tolerance: 1e-6,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [self.translation_nodes, self.angle_nodes, self.scale_nodes];
        if counts.iter().any(|&c| c < 8) {
            return Err(invalid(format!("node counts must be >= 8, got {counts:?}")));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(invalid(format!("tolerance must be in (0, 1), got {}", self.tolerance)));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        Self {
            translation_nodes: 2 * self.translation_nodes,
            angle_nodes: 2 * self.angle_nodes,
            scale_nodes: 2 * self.scale_nodes,
            tolerance: self.tolerance,
        }
    }
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let (xm, xl) = (0.5 * (b + a), 0.5 * (b - a));
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = xm - xl * z;
        x[n - 1 - i] = xm + xl * z;
        w[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn composite_legendre(nodes: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let panels = nodes.div_ceil(PANEL_NODES);
    let mut xs = Vec::with_capacity(panels * PANEL_NODES);
    let mut ws = Vec::with_capacity(panels * PANEL_NODES);
    for p in 0..panels {
        let lo = a + (b - a) * p as f64 / panels as f64;
        let hi = a + (b - a) * (p + 1) as f64 / panels as f64;
        let (x, w) = gauss_legendre(PANEL_NODES, lo, hi);
        xs.extend(x);
        ws.extend(w);
    }
    (xs, ws)
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
struct LogAcc {
    max: f64,
    sum: f64,
}

impl LogAcc {
    fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    fn add(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.sum += (v - self.max).exp();
        }
    }

    fn merge(&mut self, other: LogAcc) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            self.sum = self.sum * (self.max - other.max).exp() + other.sum;
            self.max = other.max;
        } else {
            self.sum += other.sum * (other.max - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        self.max + self.sum.ln()
    }
}

fn group_integral(y: &[Complex64], beta: &[Complex64], sigma: f64, regs: &Regulators, spec: &QuadratureSpec) -> f64 {
    let n = y.len() as f64;
    let s2 = sigma * sigma;
    let (hx, hw) = composite_legendre(spec.translation_nodes, -X_MAX, X_MAX);
    let (rho, rho_w) = composite_legendre(spec.scale_nodes, 0.0, RHO_MAX);
    let t_scale = sigma * (2.0 / regs.d_inv2).sqrt();
    let z_scale = sigma * (2.0 / regs.b_inv2).sqrt();
    let log_hw: Vec<f64> = hx.iter().zip(&hw).map(|(x, w)| w.ln() - x * x).collect();
    // prefactors of the substitutions and of the normalized noise density
    let constant = -n * (TAU * s2).ln() - (PI * regs.d_inv2).ln() - (PI * regs.b_inv2).ln();
    let d_theta = TAU / spec.angle_nodes as f64;

    let acc = (0..spec.angle_nodes)
        .into_par_iter()
        .map(|j| {
            let theta = j as f64 * d_theta;
            let mut acc = LogAcc::new();
            for (&r, &rw) in rho.iter().zip(&rho_w) {
                let z = Complex64::from_polar(z_scale * r, theta);
                let scale_term = rw.ln() + r.ln() - r * r + d_theta.ln();
                let mut sum = Complex64::new(0.0, 0.0);
                let mut sq = 0.0;
                for (&p, &b) in y.iter().zip(beta) {
                    let e = p - z * b;
                    sum += e;
                    sq += e.norm_sqr();
                }
                // Σ|e - t|² splits into independent sums over the two axes
                let axis = |s: f64| {
                    let mut a = LogAcc::new();
                    for (&x, &lw) in hx.iter().zip(&log_hw) {
                        let t = t_scale * x;
                        a.add(lw - (n * t * t - 2.0 * t * s) / (2.0 * s2));
                    }
                    a.value()
                };
                acc.add(scale_term - sq / (2.0 * s2) + axis(sum.re) + axis(sum.im));
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(LogAcc::new(), |mut a, b| {
            a.merge(b);
            a
        });
    constant + acc.value()
}

/// Log of the fixed-σ likelihood integrated over translation, rotation and
/// scale by tensor-product quadrature. Requires strictly positive
/// regulators so every prior kernel has finite mass.
pub fn quad_g_marginal(
    y: &DataShape,
    beta_pts: &DataShape,
    sigma: f64,
    regs: &Regulators,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    regs.validate()?;
    if y.len() != beta_pts.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            found: beta_pts.len(),
        });
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(invalid(format!("sigma must be finite and > 0, got {sigma}")));
    }
    if regs.d_inv2 <= 0.0 || regs.b_inv2 <= 0.0 {
        return Err(invalid("the quadrature oracle needs d_inv2 > 0 and b_inv2 > 0"));
    }
    let coarse = group_integral(y.points(), beta_pts.points(), sigma, regs, spec);
    let refined = group_integral(y.points(), beta_pts.points(), sigma, regs, &spec.doubled());
    if !((coarse - refined).abs() <= spec.tolerance) {
        return Err(Error::NonConvergence { coarse, refined });
    }
    Ok(refined)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut kronrod = fc * GK_WEIGHTS[7];
    let mut gauss = fc * G_WEIGHTS[3];
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` on `[a, b]` to absolute
/// error `tol`. Returns the integral and the summed error estimate.
pub fn adaptive_gauss_kronrod(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let mut stack = vec![(a, b, tol, 0u32)];
    let (mut total, mut err) = (0.0, 0.0);
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (v, e) = gauss_kronrod(&f, lo, hi);
        if e <= t || depth >= 40 {
            if depth >= 40 && e > t {
                return Err(Error::NonConvergence {
                    coarse: v,
                    refined: v + e,
                });
            }
            total += v;
            err += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * t, depth + 1));
            stack.push((lo, mid, 0.5 * t, depth + 1));
        }
    }
    Ok((total, err))
}

/// Log of `∫ exp(log_f(x)) dx` over the real line, for a unimodal log
/// integrand that decays on both sides.
pub fn integrate_log_density(log_f: impl Fn(f64) -> f64, rel_tol: f64) -> Result<f64> {
    const SPAN: f64 = 200.0;
    const STEP: f64 = 0.25;
    let steps = (2.0 * SPAN / STEP) as usize;
    let xs: Vec<f64> = (0..=steps).map(|i| -SPAN + i as f64 * STEP).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| log_f(x)).collect();
    let (imax, &peak) = vals
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| invalid("integrand is NaN everywhere"))?;
    if !peak.is_finite() {
        return Err(Error::NonNormalizable("integrand is not finite".into()));
    }
    let cutoff = peak - 60.0;
    let lo = (0..imax).rev().find(|&i| vals[i] < cutoff);
    let hi = (imax..vals.len()).find(|&i| vals[i] < cutoff);
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(Error::NonNormalizable(
            "integrand does not decay within the search range".into(),
        ));
    };
    let (a, b) = (xs[lo], xs[hi]);
    let scaled = |x: f64| (log_f(x) - peak).exp();
    // the integral is at least the peak times a fraction of one grid step
    let (coarse, _) = gauss_kronrod(&scaled, a, b);
    let (value, _) = adaptive_gauss_kronrod(scaled, a, b, rel_tol * coarse.abs().max(STEP * 1e-3))?;
    Ok(peak + value.ln())
}

/// Log of the fixed-σ group marginal integrated against the variance prior
/// `v^-(α+1) e^{-c/v} dv`, `v = σ²`, by adaptive quadrature in `ln v`.
pub fn quad_sigma_marginal(
    y: &DataShape,
    beta_pts: &DataShape,
    regs: &Regulators,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    regs.validate()?;
    let inputs = GroupMarginalInputs::new(y.clone(), beta_pts.clone(), 1.0, *regs)?;
    g_marginal_loglik(&inputs)?;
    let log_f = |x: f64| {
        let sigma = (0.5 * x).exp();
        let at = GroupMarginalInputs { sigma, ..inputs.clone() };
        let g = g_marginal_loglik(&at).unwrap_or(f64::NEG_INFINITY);
        // v^-(α+1) e^{-c/v} times the Jacobian dv = v dx
        g - regs.alpha * x - regs.c_reg * (-x).exp()
    };
    integrate_log_density(log_f, 1e-12)
}

/// A randomized oracle comparison case.
#[derive(Debug, Clone)]
pub struct OracleInstance {
    pub y: DataShape,
    pub beta_pts: DataShape,
    pub sigma: f64,
    pub regs: Regulators,
}

/// Three-point instance with coordinates uniform in `[-1, 1]`, σ in
/// `[0.5, 1.5]` and strictly positive regulators.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R) -> OracleInstance {
    let mut draw = |lo: f64, hi: f64| lo + (hi - lo) * unit(rng);
    let shape = |draw: &mut dyn FnMut(f64, f64) -> f64| {
        let pts: Vec<Complex64> = (0..3).map(|_| Complex64::new(draw(-1.0, 1.0), draw(-1.0, 1.0))).collect();
        DataShape::new(pts).expect("finite points")
    };
    let y = shape(&mut draw);
    let beta_pts = shape(&mut draw);
    let sigma = draw(0.5, 1.5);
    let regs = Regulators {
        d_inv2: draw(0.5, 2.0),
        b_inv2: draw(0.5, 2.0),
        alpha: draw(0.5, 3.0),
        c_reg: draw(0.05, 1.0),
    };
    OracleInstance {
        y,
        beta_pts,
        sigma,
        regs,
    }
}
