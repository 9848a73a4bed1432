//! Data-guided importance proposals for the boundary positions and the
//! aspect ratio.
//!
//! Under the priors, the boundary position matched to data point `i`,
//! `u'_i = s(b⁻¹(i))`, is i.i.d. uniform on `[0, 1)`. Instead of drawing it
//! blindly, these proposals concentrate draws near alignments of the data
//! to the rectangle found by iterated closest-point Procrustes fits. A small
//! uniform component keeps the proposal density positive everywhere, so the
//! importance weights `prior / proposal` give an unbiased estimator.
//!
//! All alignments start from angles measured relative to the data's
//! principal axis, which makes the proposals rotation and translation
//! equivariant.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal, StudentT};
use statrs::function::gamma::ln_gamma;
use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};

use crate::closed_form::sigma_marginal_slice;
use crate::rng::{open_unit, unit};
use crate::shape::{Regulators, RectangleShape, ShapeFamily};
use crate::special::log_sum_exp;
use crate::stats::mean;

const ICP_STARTS: usize = 8;
const ICP_MAX_ITERS: usize = 60;
/// Per-coordinate weight of the uniform component.
const DEFENSIVE: f64 = 0.01;
/// Share of the alignment mixture spread evenly over all alignments.
const EVEN_SHARE: f64 = 0.25;
/// Widening applied to the fitted alignment uncertainty.
const ALIGNMENT_INFLATION: f64 = 1.0;
/// Positional kernel scale relative to the fitted noise.
const KERNEL_SCALE: f64 = 0.7;
/// Degrees of freedom of the positional kernel.
const KERNEL_DOF: f64 = 4.0;

/// Result of one closest-point Procrustes run.
#[derive(Debug, Clone)]
pub struct Alignment {
    /// Boundary position matched to each data point.
    pub u: Vec<f64>,
    /// Rotation and scale.
    pub z: Complex64,
    pub t: Complex64,
    /// Sum of squared distances between data and aligned boundary points.
    pub residual: f64,
}

/// Angle of the data's principal axis.
fn principal_angle(y: &[Complex64]) -> f64 {
    let m = mean(y);
    let second: Complex64 = y.iter().map(|&p| (p - m) * (p - m)).sum();
    if second.norm() == 0.0 {
        0.0
    } else {
        0.5 * second.arg()
    }
}

/// Mean squared radius of a point uniform in arc length on the rectangle.
fn boundary_second_moment(rect: &RectangleShape) -> f64 {
    let (w, h) = (rect.width(), rect.height());
    let horizontal = 2.0 * w * (w * w / 12.0 + h * h / 4.0);
    let vertical = 2.0 * h * (h * h / 12.0 + w * w / 4.0);
    (horizontal + vertical) / (2.0 * (w + h))
}

fn least_squares_similarity(y: &[Complex64], beta: &[Complex64]) -> Option<(Complex64, Complex64)> {
    let (my, mb) = (mean(y), mean(beta));
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (&p, &b) in y.iter().zip(beta) {
        num += (b - mb).conj() * (p - my);
        den += (b - mb).norm_sqr();
    }
    if den <= 0.0 {
        return None;
    }
    let z = num / den;
    Some((z, my - z * mb))
}

/// Closest-point Procrustes iteration started at rotation angle `angle`.
pub fn icp(y: &[Complex64], rect: &RectangleShape, angle: f64) -> Alignment {
    let m = mean(y);
    let spread = y.iter().map(|&p| (p - m).norm_sqr()).sum::<f64>() / y.len() as f64;
    let scale = (spread / boundary_second_moment(rect)).sqrt().max(f64::MIN_POSITIVE);
    let mut z = Complex64::from_polar(scale, angle);
    let mut t = m;
    let mut u: Vec<f64> = Vec::new();
    let mut beta = vec![Complex64::new(0.0, 0.0); y.len()];
    for _ in 0..ICP_MAX_ITERS {
        let next: Vec<f64> = y.iter().map(|&p| rect.project((p - t) / z)).collect();
        if next == u {
            break;
        }
        u = next;
        for (b, &ui) in beta.iter_mut().zip(&u) {
            *b = rect.boundary_unchecked(ui);
        }
        match least_squares_similarity(y, &beta) {
            Some((nz, nt)) => {
                z = nz;
                t = nt;
            }
            None => break,
        }
    }
    let residual = y
        .iter()
        .zip(&beta)
        .map(|(&p, &b)| (p - z * b - t).norm_sqr())
        .sum();
    Alignment { u, z, t, residual }
}

/// Alignments from evenly spaced starting angles around the principal axis.
pub fn alignments(y: &[Complex64], rect: &RectangleShape) -> Vec<Alignment> {
    let base = principal_angle(y);
    (0..ICP_STARTS)
        .map(|j| icp(y, rect, base + TAU * j as f64 / ICP_STARTS as f64))
        .collect()
}

fn unit_t() -> StudentsT {
    StudentsT::new(0.0, 1.0, KERNEL_DOF).expect("valid Student-t parameters")
}

/// Student-t kernel of scale `tau` centered at `mu`, truncated to the
/// offsets `[-1/2, 1/2)` and placed on the circle `[0, 1)`.
#[derive(Debug, Clone)]
struct Kernel {
    tau: f64,
    /// Log of the mass the untruncated kernel puts on `[-1/2, 1/2)`.
    log_mass: f64,
}

impl Kernel {
    fn new(tau: f64) -> Self {
        let log_mass = (2.0 * unit_t().cdf(0.5 / tau) - 1.0).ln();
        Self { tau, log_mass }
    }

    fn log_pdf(&self, u: f64, mu: f64) -> f64 {
        let d = (u - mu + 0.5).rem_euclid(1.0) - 0.5;
        unit_t().ln_pdf(d / self.tau) - self.tau.ln() - self.log_mass
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, mu: f64) -> f64 {
        let t = StudentT::new(KERNEL_DOF).expect("valid Student-t parameters");
        loop {
            let d = self.tau * t.sample(rng);
            if d.abs() < 0.5 {
                let v = (mu + d).rem_euclid(1.0);
                return if v >= 1.0 { 0.0 } else { v };
            }
        }
    }
}

/// Cholesky factor of a symmetric positive definite 4x4 matrix.
fn cholesky4(a: &[[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut l = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

#[derive(Debug, Clone)]
struct Component {
    log_weight: f64,
    /// Matched positions, used to order the components.
    centers: Vec<f64>,
    z: Complex64,
    t: Complex64,
    /// Cholesky factor of the alignment precision in the frame of `z`, with
    /// coordinates `(Δz / frame, Δt / frame)` split into real and imaginary
    /// parts.
    precision_chol: [[f64; 4]; 4],
    noise: f64,
}

impl Component {
    fn frame(&self) -> Complex64 {
        self.z / self.z.norm()
    }

    /// `ln det` of the scale matrix of the multivariate t, halved.
    fn half_log_det(&self) -> f64 {
        4.0 * ALIGNMENT_INFLATION.ln() - (0..4).map(|i| self.precision_chol[i][i].ln()).sum::<f64>()
    }

    fn offsets(&self, z: Complex64, t: Complex64) -> [f64; 4] {
        let back = self.frame().conj();
        let (dz, dt) = ((z - self.z) * back, (t - self.t) * back);
        [dz.re, dz.im, dt.re, dt.im]
    }

    fn log_alignment_density(&self, z: Complex64, t: Complex64) -> f64 {
        let d = self.offsets(z, t);
        let l = &self.precision_chol;
        // |L^T d|^2 / inflation^2
        let quad: f64 = (0..4)
            .map(|j| (j..4).map(|i| l[i][j] * d[i]).sum::<f64>().powi(2))
            .sum::<f64>()
            / ALIGNMENT_INFLATION.powi(2);
        let nu = KERNEL_DOF;
        ln_gamma(0.5 * (nu + 4.0)) - ln_gamma(0.5 * nu) - 2.0 * (nu * std::f64::consts::PI).ln()
            - self.half_log_det()
            - 0.5 * (nu + 4.0) * (quad / nu).ln_1p()
    }

    fn sample_alignment<R: Rng + ?Sized>(&self, rng: &mut R) -> (Complex64, Complex64) {
        let g: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let chi = ChiSquared::new(KERNEL_DOF).expect("valid chi-squared parameters").sample(rng);
        let shrink = ALIGNMENT_INFLATION / (chi / KERNEL_DOF).sqrt();
        // solve L^T x = g
        let l = &self.precision_chol;
        let mut x = [0.0; 4];
        for i in (0..4).rev() {
            let s: f64 = ((i + 1)..4).map(|k| l[k][i] * x[k]).sum();
            x[i] = (g[i] - s) / l[i][i];
        }
        let frame = self.frame();
        (
            self.z + frame * shrink * Complex64::new(x[0], x[1]),
            self.t + frame * shrink * Complex64::new(x[2], x[3]),
        )
    }

    fn kernel(&self, z: Complex64, per: f64) -> Kernel {
        Kernel::new((KERNEL_SCALE * self.noise / (z.norm() * per)).clamp(1e-4, 0.1))
    }
}

/// One draw of boundary positions with the log density of the proposal
/// relative to the auxiliary alignment density (see [`PositionProposal`]).
#[derive(Debug, Clone)]
pub struct PositionDraw {
    pub u: Vec<f64>,
    pub log_q: f64,
}

/// Proposal over the data-indexed boundary positions at a fixed aspect
/// ratio.
///
/// A draw picks one of the closest-point alignments, perturbs its rotation,
/// scale and translation, and places each position near the projection of
/// its data point under the perturbed alignment. The alignment is an
/// auxiliary variable: the target is extended by a normalized density for
/// the alignment given the positions, centered on their least-squares fit,
/// so `exp(ell(u) - log_q)` remains an unbiased weight for the positions.
#[derive(Debug, Clone)]
pub struct PositionProposal {
    components: Vec<Component>,
    y: Vec<Complex64>,
    rect: RectangleShape,
    regs: Regulators,
}

impl PositionProposal {
    pub fn new(y: &[Complex64], rect: &RectangleShape, regs: &Regulators) -> Self {
        let n = y.len() as f64;
        let per = rect.perimeter();
        let m = mean(y);
        let data_scale = (y.iter().map(|&p| (p - m).norm_sqr()).sum::<f64>() / n).sqrt();
        let found = alignments(y, rect);
        let mut scored: Vec<(f64, Component)> = found
            .into_iter()
            .map(|a| {
                let beta: Vec<Complex64> = a.u.iter().map(|&u| rect.boundary_unchecked(u)).collect();
                // the closest-point residual has one free axis per point
                let noise = ((a.residual + 2.0 * regs.c_reg) / (n - 4.0 + regs.alpha).max(1.0))
                    .sqrt()
                    .max(1e-9 * data_scale)
                    .max(f64::MIN_POSITIVE);
                // Gauss-Newton information of the point-to-side distances,
                // floored so no direction is wider than the fit itself
                let mut info = [[0.0; 4]; 4];
                for (&u, &b) in a.u.iter().zip(&beta) {
                    let nu = rect.normal_unchecked(u).conj();
                    let j = [(nu * b).re, (nu * b * Complex64::i()).re, nu.re, (nu * Complex64::i()).re];
                    for r in 0..4 {
                        for c in 0..4 {
                            info[r][c] += j[r] * j[c] / (noise * noise);
                        }
                    }
                }
                let floor = [a.z.norm_sqr(), a.z.norm_sqr(), data_scale * data_scale, data_scale * data_scale];
                for (i, f) in floor.iter().enumerate() {
                    info[i][i] += 1.0 / f.max(f64::MIN_POSITIVE);
                }
                let precision_chol = cholesky4(&info).unwrap_or_else(|| {
                    let mut l = [[0.0; 4]; 4];
                    for (i, f) in floor.iter().enumerate() {
                        l[i][i] = 1.0 / f.max(f64::MIN_POSITIVE).sqrt();
                    }
                    l
                });
                let tau = (KERNEL_SCALE * noise / (a.z.norm() * per)).clamp(1e-4, 0.1);
                let c = Component {
                    log_weight: 0.0,
                    centers: a.u,
                    z: a.z,
                    t: a.t,
                    precision_chol,
                    noise,
                };
                // peak score plus the log volume of the component
                let score = sigma_marginal_slice(y, &beta, regs) + n * tau.ln() + c.half_log_det();
                (score, c)
            })
            .collect();
        let scores: Vec<f64> = scored.iter().map(|(s, _)| *s).collect();
        let total = log_sum_exp(&scores);
        let even = 1.0 / scored.len() as f64;
        for (s, c) in &mut scored {
            c.log_weight = if total.is_finite() {
                ((1.0 - EVEN_SHARE) * (*s - total).exp() + EVEN_SHARE * even).ln()
            } else {
                even.ln()
            };
        }
        let mut components: Vec<Component> = scored.into_iter().map(|(_, c)| c).collect();
        // the start angles depend on the branch of the principal axis; order
        // by the matched positions instead so sampling is rotation invariant
        components.sort_by(|a, b| {
            a.centers
                .iter()
                .zip(&b.centers)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Self {
            components,
            y: y.to_vec(),
            rect: *rect,
            regs: *regs,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PositionDraw {
        let pick = open_unit(rng);
        let mut acc = 0.0;
        let mut chosen = &self.components[self.components.len() - 1];
        for c in &self.components {
            acc += c.log_weight.exp();
            if pick < acc {
                chosen = c;
                break;
            }
        }
        let (z, t) = chosen.sample_alignment(rng);
        if !(z.norm() > 0.0 && z.is_finite() && t.is_finite()) {
            return PositionDraw {
                u: vec![0.0; self.y.len()],
                log_q: f64::INFINITY,
            };
        }
        let kernel = chosen.kernel(z, self.rect.perimeter());
        let u: Vec<f64> = self
            .y
            .iter()
            .map(|&p| {
                if unit(rng) < DEFENSIVE {
                    unit(rng)
                } else {
                    kernel.sample(rng, self.rect.project((p - t) / z))
                }
            })
            .collect();
        let log_q = self.log_joint_density(&u, z, t) - self.log_auxiliary_density(&u, z, t);
        PositionDraw { u, log_q }
    }

    /// Proposal density of the positions together with the alignment.
    fn log_joint_density(&self, u: &[f64], z: Complex64, t: Complex64) -> f64 {
        let centers: Vec<f64> = self.y.iter().map(|&p| self.rect.project((p - t) / z)).collect();
        let per = self.rect.perimeter();
        let terms: Vec<f64> = self
            .components
            .iter()
            .map(|c| {
                let kernel = c.kernel(z, per);
                c.log_weight
                    + c.log_alignment_density(z, t)
                    + u.iter()
                        .zip(&centers)
                        .map(|(&x, &mu)| ((1.0 - DEFENSIVE) * kernel.log_pdf(x, mu).exp() + DEFENSIVE).ln())
                        .sum::<f64>()
            })
            .collect();
        log_sum_exp(&terms)
    }

    /// Auxiliary Gaussian density of the alignment given the positions.
    fn log_auxiliary_density(&self, u: &[f64], z: Complex64, t: Complex64) -> f64 {
        let beta: Vec<Complex64> = u.iter().map(|&v| self.rect.boundary_unchecked(v)).collect();
        let (ym, bm) = (mean(&self.y), mean(&beta));
        let spread: f64 = beta.iter().map(|&b| (b - bm).norm_sqr()).sum();
        if !(spread > 0.0) {
            return f64::NEG_INFINITY;
        }
        let cross: Complex64 = self.y.iter().zip(&beta).map(|(&p, &b)| (b - bm).conj() * (p - ym)).sum();
        let z_fit = cross / spread;
        let rss: f64 = self
            .y
            .iter()
            .zip(&beta)
            .map(|(&p, &b)| (p - ym - z_fit * (b - bm)).norm_sqr())
            .sum();
        let n = self.y.len() as f64;
        let var = ((rss + 2.0 * self.regs.c_reg) / (2.0 * n - 4.0 + 2.0 * self.regs.alpha).max(1.0))
            .max(f64::MIN_POSITIVE);
        let (var_z, var_m) = (var / spread, var / n);
        let dz = z - z_fit;
        let dm = t + z * bm - ym;
        -0.5 * dz.norm_sqr() / var_z - (TAU * var_z).ln() - 0.5 * dm.norm_sqr() / var_m - (TAU * var_m).ln()
    }
}

/// Log-normal mixture proposal over the aspect ratio.
#[derive(Debug, Clone)]
pub struct AspectProposal {
    /// (log weight, mean of log r, sd of log r)
    components: Vec<(f64, f64, f64)>,
}

const BROAD_SD: f64 = 1.5;
const BROAD_WEIGHT: f64 = 0.2;

impl AspectProposal {
    /// Centers the proposal on the elongation that best explains `y` (found
    /// on a log grid of `r >= 1`) and on its reciprocal.
    pub fn new(y: &[Complex64], regs: &Regulators) -> Self {
        let grid: Vec<f64> = (0..=48).map(|i| (i as f64 / 48.0) * 30f64.ln()).collect();
        let profile: Vec<f64> = grid.iter().map(|&lr| profile_loglik(y, lr.exp(), regs)).collect();
        let (best_i, best) = profile
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if !best.is_finite() {
            return Self {
                components: vec![(0.0, 0.0, BROAD_SD)],
            };
        }
        // golden-section refinement on the bracketing grid cells
        let lo = grid[best_i.saturating_sub(1)];
        let hi = grid[(best_i + 1).min(grid.len() - 1)];
        let center = golden_max(|lr| profile_loglik(y, lr.exp(), regs), lo, hi, 14);
        let peak = profile_loglik(y, center.exp(), regs).max(best);
        // half-width where the profile drops by 2 nats
        let step = grid[1] - grid[0];
        let mut left = center;
        while left > center - 2.0 && profile_loglik(y, left.exp(), regs) > peak - 2.0 {
            left -= 0.25 * step;
        }
        let mut right = center;
        while right < center + 2.0 && profile_loglik(y, right.exp(), regs) > peak - 2.0 {
            right += 0.25 * step;
        }
        let sd = (0.5 * (right - left)).clamp(0.02, 0.5);
        let narrow = ((1.0 - BROAD_WEIGHT) / 2.0).ln();
        Self {
            components: vec![
                (BROAD_WEIGHT.ln(), 0.0, BROAD_SD),
                (narrow, center, sd),
                (narrow, -center, sd),
            ],
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let pick = open_unit(rng);
        let mut acc = 0.0;
        let mut chosen = self.components[self.components.len() - 1];
        for &c in &self.components {
            acc += c.0.exp();
            if pick < acc {
                chosen = c;
                break;
            }
        }
        let g: f64 = StandardNormal.sample(rng);
        (chosen.1 + chosen.2 * g).exp()
    }

    /// Density with respect to `r` (not `log r`).
    pub fn log_density(&self, r: f64) -> f64 {
        let lr = r.ln();
        let terms: Vec<f64> = self
            .components
            .iter()
            .map(|&(lw, mu, sd)| lw - 0.5 * ((lr - mu) / sd).powi(2) - (sd * (TAU).sqrt()).ln())
            .collect();
        log_sum_exp(&terms) - lr
    }
}

/// Best alignment score at aspect ratio `r`, less `n` times the log of the
/// aligned perimeter: boundary positions within a fixed distance of the data
/// occupy a share of `[0, 1)` inversely proportional to that perimeter.
fn profile_loglik(y: &[Complex64], r: f64, regs: &Regulators) -> f64 {
    let Ok(rect) = RectangleShape::new(r) else {
        return f64::NEG_INFINITY;
    };
    let n = y.len() as f64;
    alignments(y, &rect)
        .iter()
        .map(|a| {
            let beta: Vec<Complex64> = a.u.iter().map(|&u| rect.boundary_unchecked(u)).collect();
            sigma_marginal_slice(y, &beta, regs) - n * (a.z.norm() * rect.perimeter()).ln()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn simulated(r: f64, n: usize, noise: f64, seed: u64) -> (Vec<Complex64>, Vec<f64>) {
        let mut rng = substream(seed, 0);
        let rect = RectangleShape::new(r).unwrap();
        let u: Vec<f64> = (0..n).map(|_| unit(&mut rng)).collect();
        let g = Complex64::from_polar(3.0, 0.7);
        let y = u
            .iter()
            .map(|&ui| {
                let e1: f64 = StandardNormal.sample(&mut rng);
                let e2: f64 = StandardNormal.sample(&mut rng);
                g * rect.boundary_unchecked(ui) + Complex64::new(1.0, -2.0) + noise * Complex64::new(e1, e2)
            })
            .collect();
        (y, u)
    }

    #[test]
    fn icp_recovers_noiseless_alignment() {
        let (y, _) = simulated(2.0, 12, 0.0, 3);
        let rect = RectangleShape::new(2.0).unwrap();
        let best = alignments(&y, &rect)
            .into_iter()
            .min_by(|a, b| a.residual.total_cmp(&b.residual))
            .unwrap();
        assert!(best.residual < 1e-6, "residual {}", best.residual);
        assert!((best.z.norm() - 3.0).abs() < 1e-3);
    }

    #[test]
    fn coordinate_density_is_normalized() {
        for tau in [1e-4, 1e-2, 0.1] {
            for mu in [0.0, 0.3, 0.9999] {
                let m = 2_000_000;
                let total: f64 = (0..m)
                    .map(|i| {
                        let x = (i as f64 + 0.5) / m as f64;
                        (1.0 - DEFENSIVE) * Kernel::new(tau).log_pdf(x, mu).exp() + DEFENSIVE
                    })
                    .sum::<f64>()
                    / m as f64;
                assert!((total - 1.0).abs() < 1e-6, "tau {tau} mu {mu} total {total}");
            }
        }
    }

    fn mean_and_se(w: &[f64]) -> (f64, f64) {
        let m = w.len() as f64;
        let mean = w.iter().sum::<f64>() / m;
        let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (mean, (var / m).sqrt())
    }

    #[test]
    fn position_weights_are_unbiased() {
        let (y, _) = simulated(1.5, 3, 0.3, 8);
        let rect = RectangleShape::new(1.5).unwrap();
        let regs = Regulators::new(0.01, 0.01, 2.0, 0.1).unwrap();
        let ell = |u: &[f64]| {
            let beta: Vec<Complex64> = u.iter().map(|&v| rect.boundary_unchecked(v)).collect();
            sigma_marginal_slice(&y, &beta, &regs)
        };
        // midpoint rule over [0, 1)^3
        let g = 240;
        let nodes: Vec<f64> = (0..g).map(|i| (i as f64 + 0.5) / g as f64).collect();
        let mut reference = 0.0;
        for &a in &nodes {
            for &b in &nodes {
                for &c in &nodes {
                    reference += ell(&[a, b, c]).exp();
                }
            }
        }
        reference /= (g * g * g) as f64;

        let prop = PositionProposal::new(&y, &rect, &regs);
        let mut rng = substream(4, 0);
        let w: Vec<f64> = (0..2_000_000)
            .map(|_| {
                let d = prop.sample(&mut rng);
                (ell(&d.u) - d.log_q).exp()
            })
            .collect();
        let (mean, se) = mean_and_se(&w);
        assert!((mean - reference).abs() < 4.0 * se, "guided {mean} ± {se}, reference {reference}");
        assert!(se < 0.05 * reference, "guided {mean} ± {se}");
    }

    #[test]
    fn aspect_proposal_density_is_normalized_and_centered() {
        let (y, _) = simulated(2.5, 12, 0.02, 11);
        let prop = AspectProposal::new(&y, &Regulators::default());
        let center = prop.components[1].1.exp();
        assert!((center - 2.5).abs() < 0.25, "center {center}");
        // integrate over log r
        let (a, b, m) = (-12.0f64, 12.0f64, 20_000);
        let h = (b - a) / m as f64;
        let total: f64 = (0..m)
            .map(|i| {
                let lr = a + (i as f64 + 0.5) * h;
                (prop.log_density(lr.exp()) + lr).exp() * h
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-9, "total {total}");
    }

    #[test]
    fn proposals_are_rotation_equivariant() {
        let (y, _) = simulated(1.7, 10, 0.03, 5);
        let rot = Complex64::from_polar(1.0, 1.234);
        let yr: Vec<Complex64> = y.iter().map(|&p| p * rot).collect();
        let regs = Regulators::default();
        let rect = RectangleShape::new(1.7).unwrap();
        let (a, b) = (PositionProposal::new(&y, &rect, &regs), PositionProposal::new(&yr, &rect, &regs));
        for m in 0..20 {
            let (da, db) = (a.sample(&mut substream(9, m)), b.sample(&mut substream(9, m)));
            let gap = da.u.iter().zip(&db.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(gap < 1e-9 && (da.log_q - db.log_q).abs() < 1e-8, "{gap} {} {}", da.log_q, db.log_q);
        }
        let (pa, pb) = (AspectProposal::new(&y, &regs), AspectProposal::new(&yr, &regs));
        assert!((pa.log_density(1.3) - pb.log_density(1.3)).abs() < 1e-8);
    }
}
