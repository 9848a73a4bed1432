//! Planar point sets and the rectangle shape family.
//!
//! Points are stored as complex numbers `x + iy`, so a rotation plus uniform
//! scaling is a single complex multiplication.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One planar point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(invalid(format!("non-finite point ({x}, {y})")));
        }
        Ok(Self { x, y })
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

impl From<PlanarPoint> for Complex64 {
    fn from(p: PlanarPoint) -> Self {
        p.to_complex()
    }
}

/// An ordered set of `n >= 2` planar points.
#[derive(Debug, Clone, PartialEq)]
pub struct DataShape {
    points: Vec<Complex64>,
}

impl DataShape {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid(format!(
                "a data shape needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !(p.re.is_finite() && p.im.is_finite())) {
            return Err(invalid(format!("non-finite point ({}, {})", p.re, p.im)));
        }
        Ok(Self { points })
    }

    pub fn from_xy(xy: &[(f64, f64)]) -> Result<Self> {
        Self::new(xy.iter().map(|&(x, y)| Complex64::new(x, y)).collect())
    }

    pub fn from_planar(points: &[PlanarPoint]) -> Result<Self> {
        Self::new(points.iter().map(|p| p.to_complex()).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn planar_points(&self) -> impl Iterator<Item = PlanarPoint> + '_ {
        self.points.iter().map(|p| PlanarPoint { x: p.re, y: p.im })
    }

    /// Applies `p -> factor * p + offset` to every point.
    pub fn transformed(&self, factor: Complex64, offset: Complex64) -> Self {
        Self {
            points: self.points.iter().map(|&p| factor * p + offset).collect(),
        }
    }
}

/// Translation and scale regulators plus the noise-variance prior parameters.
///
/// The translation and scale regulators are stored as inverse squares so
/// the unregularized limits `D -> inf`, `B -> inf` are exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regulators {
    /// `1/D^2`.
    pub d_inv2: f64,
    /// `1/B^2`.
    pub b_inv2: f64,
    /// Shape of the inverse-gamma prior on `sigma^2`.
    pub alpha: f64,
    /// Rate of the inverse-gamma prior on `sigma^2`.
    pub c_reg: f64,
}

impl Regulators {
    pub fn new(d_inv2: f64, b_inv2: f64, alpha: f64, c_reg: f64) -> Result<Self> {
        let regs = Self {
            d_inv2,
            b_inv2,
            alpha,
            c_reg,
        };
        regs.validate()?;
        Ok(regs)
    }

    /// All regulators zero except `alpha`.
    pub fn unregularized(alpha: f64) -> Self {
        Self {
            d_inv2: 0.0,
            b_inv2: 0.0,
            alpha,
            c_reg: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("d_inv2", self.d_inv2),
            ("b_inv2", self.b_inv2),
            ("c_reg", self.c_reg),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(invalid(format!(
                "alpha must be finite and > 0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

impl Default for Regulators {
    fn default() -> Self {
        Self {
            d_inv2: 1e-4,
            b_inv2: 1e-4,
            alpha: 1.0,
            c_reg: 1e-4,
        }
    }
}

/// A family of closed planar outlines parametrized by normalized arc length.
pub trait ShapeFamily {
    /// Point at normalized arc length `u` in `[0, 1)`.
    fn boundary(&self, u: f64) -> Result<Complex64>;

    /// Normalized arc length of the boundary point nearest to `w`.
    fn project(&self, w: Complex64) -> f64;

    fn perimeter(&self) -> f64;
}

/// A rectangle modulo similarities, parametrized by its aspect ratio
/// `r = height / width`.
///
/// The canonical embedding is the axis-aligned rectangle of unit area
/// centered at the origin (width `1/sqrt(r)`, height `sqrt(r)`), traversed
/// counterclockwise from the lower-left corner. `r` and `1/r` are then
/// congruent, which keeps the integrated likelihood symmetric between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangleShape {
    aspect_ratio: f64,
}

impl RectangleShape {
    pub fn new(aspect_ratio: f64) -> Result<Self> {
        if !aspect_ratio.is_finite() || aspect_ratio <= 0.0 {
            return Err(invalid(format!(
                "aspect ratio must be finite and > 0, got {aspect_ratio}"
            )));
        }
        Ok(Self { aspect_ratio })
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.aspect_ratio
    }

    pub fn width(&self) -> f64 {
        1.0 / self.aspect_ratio.sqrt()
    }

    pub fn height(&self) -> f64 {
        self.aspect_ratio.sqrt()
    }

    /// Normalized arc lengths of the four corners, starting at the lower-left.
    pub fn corner_positions(&self) -> [f64; 4] {
        let (w, h) = (self.width(), self.height());
        let p = self.perimeter();
        [0.0, w / p, (w + h) / p, (2.0 * w + h) / p]
    }

    /// Boundary points for every entry of a sampling, in sampling order.
    pub fn sample_points(&self, sampling: &Sampling) -> Vec<Complex64> {
        sampling.u.iter().map(|&u| self.boundary_unchecked(u)).collect()
    }

    pub(crate) fn boundary_unchecked(&self, u: f64) -> Complex64 {
        let (w, h) = (self.width(), self.height());
        let (hw, hh) = (0.5 * w, 0.5 * h);
        let d = u * 2.0 * (w + h);
        if d < w {
            Complex64::new(-hw + d, -hh)
        } else if d < w + h {
            Complex64::new(hw, -hh + (d - w))
        } else if d < 2.0 * w + h {
            Complex64::new(hw - (d - w - h), hh)
        } else {
            Complex64::new(-hw, hh - (d - 2.0 * w - h))
        }
    }
}

impl RectangleShape {
    /// Outward unit normal of the side holding arc length `u`.
    pub(crate) fn normal_unchecked(&self, u: f64) -> Complex64 {
        let (w, h) = (self.width(), self.height());
        let d = u * 2.0 * (w + h);
        if d < w {
            Complex64::new(0.0, -1.0)
        } else if d < w + h {
            Complex64::new(1.0, 0.0)
        } else if d < 2.0 * w + h {
            Complex64::new(0.0, 1.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    }
}

impl ShapeFamily for RectangleShape {
    fn boundary(&self, u: f64) -> Result<Complex64> {
        if !(0.0..1.0).contains(&u) {
            return Err(invalid(format!("arc length {u} outside [0, 1)")));
        }
        Ok(self.boundary_unchecked(u))
    }

    fn project(&self, p: Complex64) -> f64 {
        let (w, h) = (self.width(), self.height());
        let (hw, hh) = (0.5 * w, 0.5 * h);
        let per = 2.0 * (w + h);
        let x = p.re.clamp(-hw, hw);
        let y = p.im.clamp(-hh, hh);
        // (arc distance from the start corner, squared distance to the side)
        let sides = [
            (x + hw, (p.re - x).powi(2) + (p.im + hh).powi(2)),
            (w + (y + hh), (p.re - hw).powi(2) + (p.im - y).powi(2)),
            (w + h + (hw - x), (p.re - x).powi(2) + (p.im - hh).powi(2)),
            (2.0 * w + h + (hh - y), (p.re + hw).powi(2) + (p.im - y).powi(2)),
        ];
        let mut best = sides[0];
        for s in &sides[1..] {
            if s.1 < best.1 {
                best = *s;
            }
        }
        let u = best.0 / per;
        if u >= 1.0 {
            u - 1.0
        } else {
            u
        }
    }

    fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }
}

/// Boundary arc-length positions, one per data point, each in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub u: Vec<f64>,
}

impl Sampling {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if let Some(v) = u.iter().find(|v| !(0.0..1.0).contains(*v)) {
            return Err(invalid(format!("sampling entry {v} outside [0, 1)")));
        }
        Ok(Self { u })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// A correspondence between data points and boundary samples.
///
/// `perm[i]` is the index of the boundary sample matched to data point `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bijection {
    perm: Vec<usize>,
}

impl Bijection {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(invalid(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(Self { perm })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        Self { perm: inv }
    }
}

/// Reorders boundary points so output point `i` is input point `perm[i]`.
pub fn apply_correspondence(points: &[Complex64], b: &Bijection) -> Result<Vec<Complex64>> {
    if points.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: b.len(),
            found: points.len(),
        });
    }
    Ok(b.perm.iter().map(|&j| points[j]).collect())
}
