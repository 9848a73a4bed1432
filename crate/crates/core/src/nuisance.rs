//! Monte Carlo marginalization over samplings, correspondences and shape
//! draws, the forward simulator, and exact correspondence enumeration.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::closed_form::sigma_marginal_slice;
use crate::error::{invalid, Error, Result};
use crate::guided::{AspectProposal, PositionProposal};
use crate::rng::{derive_seed, open_unit, substream, unit};
use crate::shape::{apply_correspondence, Bijection, DataShape, RectangleShape, Regulators, Sampling};
use crate::special::{gamma_logpdf_unchecked, gamma_quantile, log_mean_exp};

/// Largest `n` for which all `n!` correspondences may be enumerated.
pub const MAX_EXACT_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    /// Shape.
    pub k: f64,
    /// Scale.
    pub theta: f64,
}

impl GammaParams {
    pub fn new(k: f64, theta: f64) -> Result<Self> {
        let p = Self { k, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0 && self.theta.is_finite() && self.theta > 0.0) {
            return Err(invalid(format!(
                "gamma parameters must be finite and > 0, got k={}, theta={}",
                self.k, self.theta
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.k * self.theta
    }
}

/// A shape class: a label and one Gamma distribution per intrinsic shape
/// coordinate. For rectangles that is a single pair for the aspect ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassModel {
    pub label: String,
    pub gamma_params: Vec<GammaParams>,
}

impl ClassModel {
    pub fn rectangle(label: impl Into<String>, k: f64, theta: f64) -> Result<Self> {
        let m = Self {
            label: label.into(),
            gamma_params: vec![GammaParams::new(k, theta)?],
        };
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma_params.len() != 1 {
            return Err(invalid(format!(
                "class '{}': the rectangle family takes exactly one (k, theta) pair, got {}",
                self.label,
                self.gamma_params.len()
            )));
        }
        self.gamma_params.iter().try_for_each(GammaParams::validate)
    }

    pub fn aspect(&self) -> GammaParams {
        self.gamma_params[0]
    }
}

/// One joint draw of the nuisance variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuisanceDraw {
    pub sampling: Sampling,
    pub bijection: Bijection,
    pub shape: RectangleShape,
}

impl NuisanceDraw {
    /// Boundary points in data order: point `i` is `β(s(b⁻¹(i)))`.
    pub fn corresponded_points(&self) -> Vec<Complex64> {
        let pts = self.shape.sample_points(&self.sampling);
        apply_correspondence(&pts, &self.bijection).expect("draw components have equal length")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLikEstimate {
    pub loglik: f64,
    /// Delta-method standard error of `loglik`.
    pub std_err: f64,
    pub m_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BijectionMode {
    #[default]
    MonteCarlo,
    ExactEnumeration,
}

/// How the sampling and correspondence are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Proposal {
    /// Draw every nuisance from its prior.
    Prior,
    /// Importance sampling around alignments of the data (see `guided`).
    #[default]
    Guided,
}

/// How per-shape seeds are derived from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShapeSeeding {
    /// Keyed by the shape's position in the dataset.
    #[default]
    Index,
    /// Keyed by a hash of the shape's coordinates; dataset order does not matter.
    ContentHash,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub m_samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub bijection_mode: BijectionMode,
    #[serde(default)]
    pub proposal: Proposal,
    #[serde(default)]
    pub shape_seeding: ShapeSeeding,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            m_samples: 4096,
            seed: 0,
            bijection_mode: BijectionMode::MonteCarlo,
            proposal: Proposal::Guided,
            shape_seeding: ShapeSeeding::Index,
        }
    }
}

impl McConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.m_samples == 0 {
            return Err(invalid("m_samples must be positive"));
        }
        if self.bijection_mode == BijectionMode::ExactEnumeration {
            if n > MAX_EXACT_N {
                return Err(invalid(format!(
                    "exact enumeration needs n <= {MAX_EXACT_N}, got n = {n}"
                )));
            }
            if self.proposal == Proposal::Guided {
                return Err(invalid(
                    "exact enumeration applies to the prior proposal only",
                ));
            }
        }
        Ok(())
    }

    /// Seed for shape `index` of a dataset.
    pub fn shape_seed(&self, index: usize, shape: &DataShape) -> u64 {
        match self.shape_seeding {
            ShapeSeeding::Index => derive_seed(self.seed, index as u64),
            ShapeSeeding::ContentHash => derive_seed(self.seed, content_hash(shape)),
        }
    }
}

fn content_hash(shape: &DataShape) -> u64 {
    let mut h = Sha256::new();
    for p in shape.points() {
        h.update(p.re.to_bits().to_le_bytes());
        h.update(p.im.to_bits().to_le_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// The underlying uniforms of one prior draw. The aspect ratio is obtained
/// from `shape_uniform` by the Gamma inverse CDF, so the same draw can be
/// re-used under any class parameters.
#[derive(Debug, Clone)]
struct PriorDraw {
    u: Vec<f64>,
    perm: Vec<usize>,
    shape_uniform: f64,
}

fn draw_uniforms<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PriorDraw {
    let u: Vec<f64> = (0..n).map(|_| unit(rng)).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let shape_uniform = open_unit(rng);
    PriorDraw {
        u,
        perm,
        shape_uniform,
    }
}

/// Draws `(s, b, β)` from their priors.
pub fn sample_nuisance<R: Rng + ?Sized>(rng: &mut R, n: usize, model: &ClassModel) -> Result<NuisanceDraw> {
    model.validate()?;
    let raw = draw_uniforms(rng, n);
    let g = model.aspect();
    let r = gamma_quantile(raw.shape_uniform, g.k, g.theta)?;
    Ok(NuisanceDraw {
        sampling: Sampling::new(raw.u)?,
        bijection: Bijection::new(raw.perm)?,
        shape: RectangleShape::new(r)?,
    })
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm).
pub(crate) fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn exact_average(y: &[Complex64], pts: &[Complex64], regs: &Regulators) -> f64 {
    let mut terms = Vec::new();
    let mut beta = vec![Complex64::new(0.0, 0.0); y.len()];
    for_each_permutation(y.len(), |perm| {
        for (b, &j) in beta.iter_mut().zip(perm) {
            *b = pts[j];
        }
        terms.push(sigma_marginal_slice(y, &beta, regs));
    });
    log_mean_exp(&terms).map(|(v, _)| v).unwrap_or(f64::NEG_INFINITY)
}

/// Log of the uniform average over all `n!` correspondences of the
/// σ-marginal likelihood, for a fixed sampling and shape.
pub fn exact_bijection_loglik(
    y: &DataShape,
    sampling: &Sampling,
    shape: &RectangleShape,
    regs: &Regulators,
) -> Result<f64> {
    regs.validate()?;
    if y.len() > MAX_EXACT_N {
        return Err(invalid(format!(
            "exact enumeration needs n <= {MAX_EXACT_N}, got n = {}",
            y.len()
        )));
    }
    if sampling.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            found: sampling.len(),
        });
    }
    let v = exact_average(y.points(), &shape.sample_points(sampling), regs);
    if v == f64::NEG_INFINITY {
        return Err(Error::AllDrawsImpossible);
    }
    Ok(v)
}

#[derive(Debug, Clone)]
enum Draws {
    Prior(Vec<PriorDraw>),
    /// Aspect ratio and log importance weight excluding the class density.
    Guided { aspect: Vec<f64>, log_weight: Vec<f64> },
}

/// Monte Carlo draws for one data shape, fixed once and re-weighted for any
/// class parameters (common random numbers).
#[derive(Debug, Clone)]
pub struct ShapeDraws {
    y: DataShape,
    regs: Regulators,
    mode: BijectionMode,
    seed: u64,
    draws: Draws,
}

impl ShapeDraws {
    pub fn new(y: &DataShape, regs: &Regulators, cfg: &McConfig, seed: u64) -> Result<Self> {
        regs.validate()?;
        cfg.validate(y.len())?;
        let n = y.len();
        let draws = match cfg.proposal {
            Proposal::Prior => Draws::Prior(
                (0..cfg.m_samples)
                    .into_par_iter()
                    .map(|m| draw_uniforms(&mut substream(seed, m as u64), n))
                    .collect(),
            ),
            Proposal::Guided => {
                let pts = y.points();
                let aspect_prop = AspectProposal::new(pts, regs);
                let pairs: Vec<(f64, f64)> = (0..cfg.m_samples)
                    .into_par_iter()
                    .map(|m| {
                        let mut rng = substream(seed, m as u64);
                        let r = aspect_prop.sample(&mut rng);
                        let Ok(rect) = RectangleShape::new(r) else {
                            return (1.0, f64::NEG_INFINITY);
                        };
                        let pos = PositionProposal::new(pts, &rect, regs);
                        let draw = pos.sample(&mut rng);
                        let beta: Vec<Complex64> = draw.u.iter().map(|&v| rect.boundary_unchecked(v)).collect();
                        let ell = sigma_marginal_slice(pts, &beta, regs);
                        (r, ell - draw.log_q - aspect_prop.log_density(r))
                    })
                    .collect();
                let (aspect, log_weight) = pairs.into_iter().unzip();
                Draws::Guided { aspect, log_weight }
            }
        };
        Ok(Self {
            y: y.clone(),
            regs: *regs,
            mode: cfg.bijection_mode,
            seed,
            draws,
        })
    }

    pub fn len(&self) -> usize {
        match &self.draws {
            Draws::Prior(d) => d.len(),
            Draws::Guided { aspect, .. } => aspect.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-draw log weights under `model`.
    pub fn log_terms(&self, model: &ClassModel) -> Result<Vec<f64>> {
        model.validate()?;
        let g = model.aspect();
        let y = self.y.points();
        Ok(match &self.draws {
            Draws::Prior(draws) => draws
                .par_iter()
                .map(|d| {
                    let Ok(r) = gamma_quantile(d.shape_uniform, g.k, g.theta) else {
                        return f64::NEG_INFINITY;
                    };
                    let Ok(rect) = RectangleShape::new(r) else {
                        return f64::NEG_INFINITY;
                    };
                    let pts: Vec<Complex64> = d.u.iter().map(|&u| rect.boundary_unchecked(u)).collect();
                    match self.mode {
                        BijectionMode::MonteCarlo => {
                            let beta: Vec<Complex64> = d.perm.iter().map(|&j| pts[j]).collect();
                            sigma_marginal_slice(y, &beta, &self.regs)
                        }
                        BijectionMode::ExactEnumeration => exact_average(y, &pts, &self.regs),
                    }
                })
                .collect(),
            Draws::Guided { aspect, log_weight } => aspect
                .iter()
                .zip(log_weight)
                .map(|(&r, &w)| w + gamma_logpdf_unchecked(r, g.k, g.theta))
                .collect(),
        })
    }

    pub fn estimate(&self, model: &ClassModel) -> Result<LogLikEstimate> {
        let terms = self.log_terms(model)?;
        let (loglik, std_err) = log_mean_exp(&terms)?;
        Ok(LogLikEstimate {
            loglik,
            std_err,
            m_samples: terms.len(),
            seed: self.seed,
        })
    }
}

/// Monte Carlo estimate of the log integrated likelihood of one data shape
/// under a class model, seeded with `cfg.seed`.
pub fn mc_marginal_loglik(
    y: &DataShape,
    model: &ClassModel,
    regs: &Regulators,
    cfg: &McConfig,
) -> Result<LogLikEstimate> {
    model.validate()?;
    ShapeDraws::new(y, regs, cfg, cfg.seed)?.estimate(model)
}

/// Rotation angle, scale and translation applied to simulated shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTransform {
    pub angle: f64,
    pub scale: f64,
    pub translation: (f64, f64),
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        Self {
            angle: 0.0,
            scale: 1.0,
            translation: (0.0, 0.0),
        }
    }

    pub fn factor(&self) -> Complex64 {
        Complex64::from_polar(self.scale, self.angle)
    }

    pub fn offset(&self) -> Complex64 {
        Complex64::new(self.translation.0, self.translation.1)
    }
}

/// Draws a data shape from the generative model and returns it with the
/// nuisance values that produced it. `sigma = 0` gives noiseless points.
pub fn simulate_shape<R: Rng + ?Sized>(
    rng: &mut R,
    model: &ClassModel,
    n: usize,
    sigma: f64,
    transform: &SimilarityTransform,
) -> Result<(DataShape, NuisanceDraw)> {
    if n < 2 {
        return Err(invalid(format!("a data shape needs at least 2 points, got {n}")));
    }
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(invalid(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    if !(transform.scale.is_finite() && transform.scale > 0.0) {
        return Err(invalid(format!("scale must be > 0, got {}", transform.scale)));
    }
    let truth = sample_nuisance(rng, n, model)?;
    let noise = Normal::new(0.0, sigma).map_err(|e| invalid(e.to_string()))?;
    let (g, t) = (transform.factor(), transform.offset());
    let pts: Vec<Complex64> = truth
        .corresponded_points()
        .into_iter()
        .map(|b| {
            let e = Complex64::new(noise.sample(rng), noise.sample(rng));
            g * b + t + e
        })
        .collect();
    Ok((DataShape::new(pts)?, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn model(k: f64, theta: f64) -> ClassModel {
        ClassModel::rectangle("a", k, theta).unwrap()
    }

    #[test]
    fn heap_enumerates_all_permutations() {
        for n in 1..=6 {
            let mut seen = std::collections::BTreeSet::new();
            for_each_permutation(n, |p| {
                seen.insert(p.to_vec());
            });
            assert_eq!(seen.len(), (1..=n).product::<usize>());
        }
        // a singleton admits only the identity
        let mut only = Vec::new();
        for_each_permutation(1, |p| only.push(p.to_vec()));
        assert_eq!(only, vec![vec![0]]);
    }

    #[test]
    fn sampling_and_shape_means() {
        let m = model(2.0, 3.0);
        let mut rng = substream(42, 0);
        let (mut su, mut cu) = (0.0, 0usize);
        let mut shapes = Vec::new();
        for _ in 0..100_000 {
            let d = sample_nuisance(&mut rng, 2, &m).unwrap();
            su += d.sampling.u.iter().sum::<f64>();
            cu += d.sampling.len();
            shapes.push(d.shape.aspect_ratio());
        }
        assert!((su / cu as f64 - 0.5).abs() < 0.005);
        let mean = shapes.iter().sum::<f64>() / shapes.len() as f64;
        let sd_of_mean = (2.0f64 * 9.0).sqrt() / (shapes.len() as f64).sqrt();
        assert!((mean - 6.0).abs() < 3.0 * sd_of_mean, "mean {mean}");
    }

    #[test]
    fn permutation_sampler_is_uniform() {
        // chi-square over the 24 permutations of 4 elements
        let mut counts = std::collections::HashMap::new();
        let mut rng = substream(2024, 0);
        let draws = 100_000;
        for _ in 0..draws {
            let d = draw_uniforms(&mut rng, 4);
            *counts.entry(d.perm).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 24);
        let expected = draws as f64 / 24.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // upper 1e-3 quantile of chi-square with 23 degrees of freedom
        assert!(chi2 < 49.73, "chi2 = {chi2}");
    }

    #[test]
    fn two_point_enumeration() {
        let y = DataShape::from_xy(&[(1.0, 0.2), (-0.4, 0.7)]).unwrap();
        let s = Sampling::new(vec![0.1, 0.6]).unwrap();
        let rect = RectangleShape::new(1.3).unwrap();
        let regs = Regulators::new(0.1, 0.1, 1.0, 0.1).unwrap();
        let pts = rect.sample_points(&s);
        let l = |b: Vec<Complex64>| {
            crate::closed_form::sigma_marginal_loglik(&y, &DataShape::new(b).unwrap(), &regs).unwrap()
        };
        let (a, b) = (l(vec![pts[0], pts[1]]), l(vec![pts[1], pts[0]]));
        let direct = crate::special::log_sum_exp(&[a, b]) - 2f64.ln();
        assert_abs_diff_eq!(exact_bijection_loglik(&y, &s, &rect, &regs).unwrap(), direct, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_data_gives_equal_terms() {
        // swapping the two points of y equals rotating y by pi about its centroid
        let y = DataShape::from_xy(&[(1.0, 0.0), (-1.0, 0.0)]).unwrap();
        let s = Sampling::new(vec![0.05, 0.4]).unwrap();
        let rect = RectangleShape::new(2.0).unwrap();
        let regs = Regulators::new(0.0, 0.3, 1.0, 0.2).unwrap();
        let pts = rect.sample_points(&s);
        let one = crate::closed_form::sigma_marginal_loglik(&y, &DataShape::new(pts.clone()).unwrap(), &regs).unwrap();
        assert_abs_diff_eq!(exact_bijection_loglik(&y, &s, &rect, &regs).unwrap(), one, epsilon = 1e-12);
    }

    #[test]
    fn exact_rejects_large_n() {
        let y = DataShape::new((0..9).map(|i| Complex64::new(i as f64, 0.0)).collect()).unwrap();
        let s = Sampling::new(vec![0.5; 9]).unwrap();
        let rect = RectangleShape::new(1.0).unwrap();
        assert!(exact_bijection_loglik(&y, &s, &rect, &Regulators::default()).is_err());
        let cfg = McConfig {
            bijection_mode: BijectionMode::ExactEnumeration,
            proposal: Proposal::Prior,
            ..McConfig::default()
        };
        assert!(cfg.validate(9).is_err());
        assert!(cfg.validate(8).is_ok());
    }

    #[test]
    fn single_sample_collapses() {
        let y = DataShape::from_xy(&[(1.0, 0.2), (-0.4, 0.7), (0.3, -0.9)]).unwrap();
        let regs = Regulators::new(0.1, 0.1, 1.0, 0.1).unwrap();
        let m = model(3.0, 0.5);
        let cfg = McConfig {
            m_samples: 1,
            seed: 99,
            proposal: Proposal::Prior,
            ..McConfig::default()
        };
        let est = mc_marginal_loglik(&y, &m, &regs, &cfg).unwrap();
        let draw = sample_nuisance(&mut substream(99, 0), 3, &m).unwrap();
        let beta = DataShape::new(draw.corresponded_points()).unwrap();
        let single = crate::closed_form::sigma_marginal_loglik(&y, &beta, &regs).unwrap();
        assert_abs_diff_eq!(est.loglik, single, epsilon = 1e-12);
        assert_eq!(est.std_err, 0.0);
        assert_eq!((est.m_samples, est.seed), (1, 99));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let y = DataShape::from_xy(&[(1.0, 0.2), (-0.4, 0.7), (0.3, -0.9), (0.8, 0.8)]).unwrap();
        let regs = Regulators::default();
        let m = model(3.0, 0.5);
        for proposal in [Proposal::Prior, Proposal::Guided] {
            let cfg = McConfig {
                m_samples: 256,
                seed: 5,
                proposal,
                ..McConfig::default()
            };
            let run = |threads| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .unwrap()
                    .install(|| mc_marginal_loglik(&y, &m, &regs, &cfg).unwrap())
            };
            let (a, b) = (run(1), run(8));
            assert_eq!(a.loglik.to_bits(), b.loglik.to_bits());
            assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
        }
    }

    #[test]
    fn simulation_cases() {
        let m = model(4.0, 0.5);
        let mut rng = substream(1, 0);
        let (y, truth) = simulate_shape(&mut rng, &m, 10, 0.0, &SimilarityTransform::identity()).unwrap();
        assert_eq!(y.points(), truth.corresponded_points().as_slice());
        let rect = truth.shape;
        for p in y.points() {
            let back = rect.boundary_unchecked(rect_project(&rect, *p));
            assert!((back - p).norm() < 1e-12);
        }

        let t = SimilarityTransform {
            angle: 0.4,
            scale: 2.0,
            translation: (3.0, -1.0),
        };
        let mut rng = substream(1, 0);
        let (y2, truth2) = simulate_shape(&mut rng, &m, 10, 0.0, &t).unwrap();
        for (p, b) in y2.points().iter().zip(truth2.corresponded_points()) {
            assert_abs_diff_eq!((p - t.offset()).norm(), 2.0 * b.norm(), epsilon = 1e-12);
        }

        let sigma = 0.1;
        let mut rng = substream(2, 0);
        let mut resid = Vec::new();
        while resid.len() < 10_000 {
            let (y, truth) = simulate_shape(&mut rng, &m, 10, sigma, &SimilarityTransform::identity()).unwrap();
            for (p, b) in y.points().iter().zip(truth.corresponded_points()) {
                resid.push((p - b).re);
            }
        }
        let sd = (resid.iter().map(|e| e * e).sum::<f64>() / resid.len() as f64).sqrt();
        assert!((sd - 0.1).abs() < 0.003, "sd {sd}");
    }

    fn rect_project(rect: &RectangleShape, p: Complex64) -> f64 {
        use crate::shape::ShapeFamily;
        rect.project(p)
    }

    #[test]
    fn content_hash_seeding_ignores_order() {
        let a = DataShape::from_xy(&[(1.0, 0.2), (-0.4, 0.7)]).unwrap();
        let b = DataShape::from_xy(&[(0.3, 0.2), (-0.1, 0.5)]).unwrap();
        let cfg = McConfig {
            shape_seeding: ShapeSeeding::ContentHash,
            ..McConfig::default()
        };
        assert_eq!(cfg.shape_seed(0, &a), cfg.shape_seed(1, &a));
        assert_ne!(cfg.shape_seed(0, &a), cfg.shape_seed(0, &b));
        let by_index = McConfig::default();
        assert_ne!(by_index.shape_seed(0, &a), by_index.shape_seed(1, &a));
    }
}
