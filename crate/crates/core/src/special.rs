//! Gamma distribution helpers and stable log-space averaging.

use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{invalid, Error, Result};

fn check_gamma_params(k: f64, theta: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0 && theta.is_finite() && theta > 0.0) {
        return Err(invalid(format!(
            "gamma parameters must be finite and > 0, got k={k}, theta={theta}"
        )));
    }
    Ok(())
}

/// Log density of Gamma(shape `k`, scale `theta`) at `x`.
///
/// Returns `-inf` for `x < 0`. At `x = 0` the density is `+inf` for `k < 1`,
/// `1/theta` for `k = 1` and `0` for `k > 1`.
pub fn gamma_logpdf(x: f64, k: f64, theta: f64) -> Result<f64> {
    check_gamma_params(k, theta)?;
    if x.is_nan() {
        return Err(invalid("gamma_logpdf at NaN"));
    }
    Ok(gamma_logpdf_unchecked(x, k, theta))
}

pub(crate) fn gamma_logpdf_unchecked(x: f64, k: f64, theta: f64) -> f64 {
    if x < 0.0 || x == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if x == 0.0 {
        return match k.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => -theta.ln(),
            _ => f64::NEG_INFINITY,
        };
    }
    (k - 1.0) * x.ln() - x / theta - ln_gamma(k) - k * theta.ln()
}

/// Quantile function of Gamma(shape `k`, scale `theta`) for `p` in `(0, 1)`.
///
/// Newton iteration on the regularized incomplete gamma function, safeguarded
/// by bisection on a maintained bracket.
pub fn gamma_quantile(p: f64, k: f64, theta: f64) -> Result<f64> {
    check_gamma_params(k, theta)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("gamma quantile needs p in (0, 1), got {p}")));
    }
    Ok(theta * standard_gamma_quantile(p, k))
}

fn standard_gamma_quantile(p: f64, k: f64) -> f64 {
    // Wilson-Hilferty starting point
    let z = normal_quantile(p);
    let c = 1.0 / (9.0 * k);
    let mut x = k * (1.0 - c + z * c.sqrt()).powi(3);
    if !(x.is_finite() && x > 0.0) {
        // small-x regime: P(k, x) ~ x^k / Γ(k + 1)
        x = ((p.ln() + ln_gamma(k + 1.0)) / k).exp();
    }

    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let lg = ln_gamma(k);
    let upper = p > 0.5;
    for _ in 0..200 {
        // Work with whichever tail is small to keep relative precision.
        let f = if upper {
            (1.0 - p) - gamma_ur(k, x)
        } else {
            gamma_lr(k, x) - p
        };
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let dens = ((k - 1.0) * x.ln() - x - lg).exp();
        let mut next = x - f / dens;
        if !(next.is_finite() && next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(lo) + 1.0 };
        }
        if (next - x).abs() <= 1e-15 * x.abs() {
            return next;
        }
        x = next;
    }
    x
}

/// Acklam's rational approximation to the standard normal quantile; only
/// used as a starting point.
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < 0.02425 {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - 0.02425 {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `log(sum exp(values))`, `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Log of the sample mean of `exp(values)` and the delta-method standard
/// error of that log.
///
/// The standard error is `sd(w) / (sqrt(M) mean(w))` with `w = exp(values)`,
/// evaluated after subtracting the maximum. A single value has standard
/// error 0. The approximation is rough for small `M` or very uneven weights.
pub fn log_mean_exp(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(invalid("log_mean_exp of an empty sample"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(invalid("NaN log weight"));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::AllDrawsImpossible);
    }
    let m = values.len() as f64;
    let weights: Vec<f64> = values.iter().map(|&v| (v - max).exp()).collect();
    let mean = weights.iter().sum::<f64>() / m;
    let loglik = max + mean.ln();
    if values.len() == 1 {
        return Ok((loglik, 0.0));
    }
    let var = weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok((loglik, (var / m).sqrt() / mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent log Γ: shift the argument above 15 by the recurrence, then
    /// apply the Stirling series.
    fn ln_gamma_stirling(mut x: f64) -> f64 {
        let mut shift = 0.0;
        while x < 15.0 {
            shift -= x.ln();
            x += 1.0;
        }
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        let series = inv
            * (1.0 / 12.0
                - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
        shift + (x - 0.5) * x.ln() - x + 0.5 * (std::f64::consts::TAU).ln() + series
    }

    #[test]
    fn logpdf_examples() {
        assert_abs_diff_eq!(gamma_logpdf(1e-300, 1.0, 1.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(gamma_logpdf(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(gamma_logpdf(1.0, 1.0, 1.0).unwrap(), -1.0, epsilon = 1e-15);
        let oracle = 2.0 * 2f64.ln() - 4.0 - ln_gamma_stirling(3.0) - 3.0 * 0.5f64.ln();
        assert_abs_diff_eq!(gamma_logpdf(2.0, 3.0, 0.5).unwrap(), oracle, epsilon = 1e-12);
        assert_eq!(gamma_logpdf(-1.0, 2.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(gamma_logpdf(0.0, 2.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(gamma_logpdf(0.0, 0.5, 1.0).unwrap(), f64::INFINITY);
        assert!(gamma_logpdf(1.0, 0.0, 1.0).is_err());
        assert!(gamma_logpdf(1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &(k, theta) in &[(0.3, 1.0), (1.0, 2.0), (4.0, 0.5), (50.0, 0.01), (200.0, 3.0)] {
            for &p in &[1e-10, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.99, 1.0 - 1e-9] {
                let x = gamma_quantile(p, k, theta).unwrap();
                let back = gamma_lr(k, x / theta);
                assert!((back - p).abs() <= 1e-10 * p.min(1.0 - p).max(1e-3), "k={k} p={p} x={x} back={back}");
            }
        }
        // exponential: closed form
        let x = gamma_quantile(0.75, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(x, -2.0 * 0.25f64.ln(), epsilon = 1e-12);
        assert!(gamma_quantile(0.0, 1.0, 1.0).is_err());
        assert!(gamma_quantile(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn log_mean_exp_cases() {
        let (v, se) = log_mean_exp(&[-3.0]).unwrap();
        assert_eq!((v, se), (-3.0, 0.0));
        let (v, _) = log_mean_exp(&[0.0, 2f64.ln()]).unwrap();
        assert_abs_diff_eq!(v, 1.5f64.ln(), epsilon = 1e-15);
        // spread of more than 700 nats
        let (v, se) = log_mean_exp(&[-1000.0, 0.0, -2000.0, 5.0]).unwrap();
        assert!(v.is_finite() && se.is_finite());
        assert_abs_diff_eq!(v, (1.0 + 5f64.exp()).ln() - 4f64.ln(), epsilon = 1e-12);
        assert!(matches!(
            log_mean_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            Err(Error::AllDrawsImpossible)
        ));
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_abs_diff_eq!(log_sum_exp(&[1000.0, 1000.0]), 1000.0 + 2f64.ln(), epsilon = 1e-12);
    }
}
