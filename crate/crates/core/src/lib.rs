//! Integrated likelihood of planar data shapes under parametric shape classes.
//!
//! The similarity transform and the noise variance are integrated out in
//! closed form ([`closed_form`]); boundary samplings, correspondences and
//! intrinsic shape parameters are integrated by Monte Carlo ([`nuisance`]).
//! [`inference`] builds likelihood surfaces, maximum-likelihood fits and
//! classifiers on top, and [`quadrature`] holds independent numerical
//! oracles for the closed forms.

pub mod assignment;
pub mod closed_form;
pub mod error;
pub mod guided;
pub mod inference;
pub mod io;
pub mod nelder_mead;
pub mod nuisance;
pub mod quadrature;
pub mod rng;
pub mod shape;
pub mod special;
pub mod stats;

pub use closed_form::{
    g_marginal_loglik, residual_A, sigma_marginal_loglik, GroupMarginalInputs, ResidualStat,
};
pub use error::{Error, Result};
pub use inference::{
    classify, dataset_loglik, fit_mle, likelihood_surface, procrustes_hungarian_fit,
    procrustes_hungarian_loglik, BaselineFit, DatasetDraws, FitResult, LabelledDataset, SurfaceGrid,
};
pub use nelder_mead::SimplexSettings;
pub use nuisance::{
    exact_bijection_loglik, mc_marginal_loglik, sample_nuisance, simulate_shape, BijectionMode,
    ClassModel, GammaParams, LogLikEstimate, McConfig, NuisanceDraw, Proposal, ShapeDraws,
    ShapeSeeding, SimilarityTransform,
};
pub use shape::{
    apply_correspondence, Bijection, DataShape, PlanarPoint, RectangleShape, Regulators, Sampling,
    ShapeFamily,
};
pub use quadrature::{quad_g_marginal, quad_sigma_marginal, QuadratureSpec};
pub use special::{gamma_logpdf, gamma_quantile};
pub use stats::{regularized_count, regularized_covariance, regularized_variance};
