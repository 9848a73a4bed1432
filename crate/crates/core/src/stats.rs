//! Regularized count, variance, and covariance.
//!
//! With `S = sum z_i` and `ñ = n + 1/D^2`:
//!
//! ```text
//! Var~(y)    = (1/ñ) [ sum |y_i|^2 - |S_y|^2 / ñ ]
//! Cov~(a, b) = (1/ñ) [ sum conj(a_i) b_i - conj(S_a) S_b / ñ ]
//! ```
//!
//! Both are evaluated in centered form,
//! `sum conj(a_i - ā)(b_i - b̄) + n (1 - n/ñ) conj(ā) b̄`, which is algebraically
//! identical and does not cancel when the points sit far from the origin.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::shape::{DataShape, Regulators};

/// `ñ = n + 1/D^2`.
pub fn regularized_count(n: usize, regs: &Regulators) -> f64 {
    n as f64 + regs.d_inv2
}

pub fn regularized_variance(pts: &DataShape, regs: &Regulators) -> f64 {
    variance_of(pts.points(), regs.d_inv2)
}

/// Regularized covariance with conjugation on the first argument.
pub fn regularized_covariance(a: &DataShape, b: &DataShape, regs: &Regulators) -> Result<Complex64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(covariance_of(a.points(), b.points(), regs.d_inv2))
}

pub(crate) fn mean(z: &[Complex64]) -> Complex64 {
    z.iter().sum::<Complex64>() / z.len() as f64
}

pub(crate) fn variance_of(y: &[Complex64], d_inv2: f64) -> f64 {
    let n = y.len() as f64;
    let nt = n + d_inv2;
    let m = mean(y);
    let centered: f64 = y.iter().map(|&p| (p - m).norm_sqr()).sum();
    (centered + n * d_inv2 / nt * m.norm_sqr()) / nt
}

pub(crate) fn covariance_of(a: &[Complex64], b: &[Complex64], d_inv2: f64) -> Complex64 {
    let n = a.len() as f64;
    let nt = n + d_inv2;
    let (ma, mb) = (mean(a), mean(b));
    let centered: Complex64 = a
        .iter()
        .zip(b)
        .map(|(&p, &q)| (p - ma).conj() * (q - mb))
        .sum();
    (centered + ma.conj() * mb * (n * d_inv2 / nt)) / nt
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn regs(d_inv2: f64) -> Regulators {
        Regulators::new(d_inv2, 0.0, 1.0, 0.0).unwrap()
    }

    fn shape(xy: &[(f64, f64)]) -> DataShape {
        DataShape::from_xy(xy).unwrap()
    }

    /// The defining double-sum formulas, evaluated literally.
    fn var_direct(y: &[Complex64], d_inv2: f64) -> f64 {
        let nt = y.len() as f64 + d_inv2;
        let s: Complex64 = y.iter().sum();
        (y.iter().map(|p| p.norm_sqr()).sum::<f64>() - s.norm_sqr() / nt) / nt
    }

    fn cov_direct(a: &[Complex64], b: &[Complex64], d_inv2: f64) -> Complex64 {
        let nt = a.len() as f64 + d_inv2;
        let sa: Complex64 = a.iter().sum();
        let sb: Complex64 = b.iter().sum();
        let cross: Complex64 = a.iter().zip(b).map(|(p, q)| p.conj() * q).sum();
        (cross - sa.conj() * sb / nt) / nt
    }

    #[test]
    fn count_examples() {
        assert_eq!(regularized_count(2, &regs(0.0)), 2.0);
        assert_eq!(regularized_count(2, &regs(1.0)), 3.0);
        assert_eq!(regularized_count(5, &regs(0.25)), 5.25);
    }

    #[test]
    fn variance_examples() {
        let pair = shape(&[(1.0, 0.0), (-1.0, 0.0)]);
        assert_abs_diff_eq!(regularized_variance(&pair, &regs(0.0)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(regularized_variance(&pair, &regs(1.0)), 2.0 / 3.0, epsilon = 1e-15);
        let zeros = shape(&[(0.0, 0.0), (0.0, 0.0)]);
        assert_eq!(regularized_variance(&zeros, &regs(3.0)), 0.0);
    }

    #[test]
    fn covariance_examples() {
        let a = shape(&[(1.0, 0.0), (-1.0, 0.0)]);
        let b = shape(&[(0.0, 1.0), (0.0, -1.0)]);
        let r = regs(0.0);
        let aa = regularized_covariance(&a, &a, &r).unwrap();
        assert_abs_diff_eq!(aa.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(aa.im, 0.0, epsilon = 1e-15);
        let ab = regularized_covariance(&a, &b, &r).unwrap();
        assert_abs_diff_eq!(ab.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ab.im, 1.0, epsilon = 1e-15);
        let flat = shape(&[(2.0, 3.0), (2.0, 3.0)]);
        assert_eq!(
            regularized_covariance(&a, &flat, &r).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        let three = shape(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        assert!(regularized_covariance(&a, &three, &r).is_err());
    }

    #[test]
    fn translation_breaks_invariance_when_regularized() {
        let y = shape(&[(1.0, 0.0), (-1.0, 0.5), (0.3, -0.2)]);
        let moved = y.transformed(Complex64::new(1.0, 0.0), Complex64::new(4.0, -2.0));
        let (v0, v1) = (
            regularized_variance(&y, &regs(0.0)),
            regularized_variance(&moved, &regs(0.0)),
        );
        assert_abs_diff_eq!(v0, v1, epsilon = 1e-12);
        let (w0, w1) = (
            regularized_variance(&y, &regs(0.5)),
            regularized_variance(&moved, &regs(0.5)),
        );
        assert!((w0 - w1).abs() > 1e-3);
        let c0 = regularized_covariance(&y, &y, &regs(0.5)).unwrap();
        let c1 = regularized_covariance(&y, &moved, &regs(0.5)).unwrap();
        assert!((c0 - c1).norm() > 1e-3);
    }

    fn points(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), n)
            .prop_map(|v| v.into_iter().map(|(x, y)| Complex64::new(x, y)).collect())
    }

    proptest! {
        #[test]
        fn centered_form_matches_definition(
            (a, b) in (2usize..9).prop_flat_map(|n| (points(n), points(n))),
            d in 0.0..5.0f64,
        ) {
            let va = variance_of(&a, d);
            prop_assert!((va - var_direct(&a, d)).abs() <= 1e-9 * (1.0 + va.abs()));
            let c = covariance_of(&a, &b, d);
            prop_assert!((c - cov_direct(&a, &b, d)).norm() <= 1e-9 * (1.0 + c.norm()));
            prop_assert_eq!(covariance_of(&a, &a, d).re, va);
        }

        #[test]
        fn variance_nonnegative_and_cauchy_schwarz(
            (a, b) in (2usize..9).prop_flat_map(|n| (points(n), points(n))),
            d in 0.0..5.0f64,
        ) {
            let (va, vb) = (variance_of(&a, d), variance_of(&b, d));
            prop_assert!(va >= 0.0 && vb >= 0.0);
            let c = covariance_of(&a, &b, d);
            prop_assert!(c.norm_sqr() <= va * vb * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn rotation_equivariance(
            (a, b) in (2usize..9).prop_flat_map(|n| (points(n), points(n))),
            d in 0.0..5.0f64,
            phi in 0.0..std::f64::consts::TAU,
        ) {
            let rot = Complex64::from_polar(1.0, phi);
            let ra: Vec<_> = a.iter().map(|p| p * rot).collect();
            let rb: Vec<_> = b.iter().map(|p| p * rot).collect();
            let c = covariance_of(&a, &b, d);
            prop_assert!((covariance_of(&ra, &rb, d) - c).norm() <= 1e-12 * (1.0 + c.norm() * 100.0));
            prop_assert!((covariance_of(&a, &rb, d) - c * rot).norm() <= 1e-12 * (1.0 + c.norm() * 100.0));
        }
    }
}
