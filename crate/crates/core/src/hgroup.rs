//! Group arithmetic on H¹ in exponential coordinates.
//!
//! A point `(x, y, t)` is identified with `exp(xX + yY + tT)`. The group law is
//! `(x, y, t)(x', y', t') = (x + x', y + y', t + t' + 2(x'y - xy'))`, the
//! identity is the origin and the inverse is componentwise negation. Haar
//! measure is Lebesgue measure on ℝ³.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative tolerance used by [`Point::in_plane_of`].
pub const PLANE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

/// Horizontal vector `aX + bY` in the first layer V₁.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HVector {
    pub a: f64,
    pub b: f64,
}

/// Element `aX + bY + cT` of the full Lie algebra V₁ ⊕ V₂.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TVector {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Point {
    pub const IDENTITY: Point = Point { x: 0.0, y: 0.0, t: 0.0 };

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Point { x, y, t }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, rhs: Point) -> Point {
        Point {
            x: self.x + rhs.x,
            y: self.y + rhs.y,
            t: self.t + rhs.t + 2.0 * (rhs.x * self.y - self.x * rhs.y),
        }
    }

    pub fn inverse(self) -> Point {
        Point {
            x: -self.x,
            y: -self.y,
            t: -self.t,
        }
    }

    /// Anisotropic dilation `δ_λ(x, y, t) = (λx, λy, λ²t)`.
    pub fn dilate(self, lambda: f64) -> Result<Point> {
        if !(lambda >= 0.0) {
            return Err(Error::NegativeDilation(lambda));
        }
        Ok(self.dilate_unchecked(lambda))
    }

    pub(crate) fn dilate_unchecked(self, lambda: f64) -> Point {
        Point {
            x: lambda * self.x,
            y: lambda * self.y,
            t: lambda * lambda * self.t,
        }
    }

    /// Homogeneous gauge `((x² + y²)² + t²)^{1/4}`.
    pub fn gauge(self) -> f64 {
        let r2 = self.x * self.x + self.y * self.y;
        (r2 * r2 + self.t * self.t).sqrt().sqrt()
    }

    /// Left-invariant gauge distance `ρ(g⁻¹g')`.
    pub fn distance(self, other: Point) -> f64 {
        self.inverse().mul(other).gauge()
    }

    /// Horizontal projection ξ₁.
    pub fn xi1(self) -> HVector {
        HVector { a: self.x, b: self.y }
    }

    /// The Lie algebra element ξ(g) = log g.
    pub fn log(self) -> TVector {
        TVector {
            a: self.x,
            b: self.y,
            c: self.t,
        }
    }

    /// Signed vertical offset of `g` from the horizontal plane `H_self`:
    /// `t - (t₀ + 2y₀x - 2x₀y)`.
    pub fn plane_offset(self, g: Point) -> f64 {
        g.t - (self.t + 2.0 * self.y * g.x - 2.0 * self.x * g.y)
    }

    /// Height of the plane `H_self` above `(x, y)`.
    pub fn plane_height(self, x: f64, y: f64) -> f64 {
        self.t + 2.0 * self.y * x - 2.0 * self.x * y
    }

    /// Membership of `g` in `H_self` with the default scale-aware tolerance.
    pub fn in_plane_of(self, g: Point) -> bool {
        let tol = PLANE_TOL * (1.0 + self.t.abs().max(g.t.abs()));
        in_horizontal_plane(self, g, tol)
    }

    /// `self · exp(v)` for a horizontal `v`.
    pub fn exp_horizontal(self, v: HVector) -> Point {
        self.mul(Point::new(v.a, v.b, 0.0))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.t)
    }
}

impl HVector {
    pub const ZERO: HVector = HVector { a: 0.0, b: 0.0 };

    pub const fn new(a: f64, b: f64) -> Self {
        HVector { a, b }
    }

    pub fn from_angle(theta: f64) -> Self {
        HVector {
            a: theta.cos(),
            b: theta.sin(),
        }
    }

    pub fn dot(self, other: HVector) -> f64 {
        self.a * other.a + self.b * other.b
    }

    pub fn cross(self, other: HVector) -> f64 {
        self.a * other.b - self.b * other.a
    }

    pub fn norm(self) -> f64 {
        self.a.hypot(self.b)
    }

    pub fn scale(self, s: f64) -> HVector {
        HVector {
            a: s * self.a,
            b: s * self.b,
        }
    }

    pub fn lerp(self, other: HVector, lambda: f64) -> HVector {
        HVector {
            a: (1.0 - lambda) * self.a + lambda * other.a,
            b: (1.0 - lambda) * self.b + lambda * other.b,
        }
    }
}

impl fmt::Display for HVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

impl Add for HVector {
    type Output = HVector;
    fn add(self, rhs: HVector) -> HVector {
        HVector::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl Sub for HVector {
    type Output = HVector;
    fn sub(self, rhs: HVector) -> HVector {
        HVector::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl Neg for HVector {
    type Output = HVector;
    fn neg(self) -> HVector {
        HVector::new(-self.a, -self.b)
    }
}

impl Mul<HVector> for f64 {
    type Output = HVector;
    fn mul(self, rhs: HVector) -> HVector {
        rhs.scale(self)
    }
}

impl TVector {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        TVector { a, b, c }
    }

    pub fn split(self) -> (HVector, f64) {
        (HVector::new(self.a, self.b), self.c)
    }

    pub fn from_parts(h: HVector, c: f64) -> Self {
        TVector { a: h.a, b: h.b, c }
    }

    pub fn exp(self) -> Point {
        Point::new(self.a, self.b, self.c)
    }

    /// Homogeneous norm `(|v₁|⁴ + v₂²)^{1/4}`.
    pub fn norm(self) -> f64 {
        self.exp().gauge()
    }
}

pub fn mul(g: Point, h: Point) -> Point {
    g.mul(h)
}

pub fn inverse(g: Point) -> Point {
    g.inverse()
}

pub fn dilate(lambda: f64, g: Point) -> Result<Point> {
    g.dilate(lambda)
}

pub fn gauge(g: Point) -> f64 {
    g.gauge()
}

pub fn distance(g: Point, h: Point) -> f64 {
    g.distance(h)
}

pub fn in_horizontal_plane(g0: Point, g: Point, tol: f64) -> bool {
    g0.plane_offset(g).abs() <= tol
}

/// Point `g₀ δ_λ(g₀⁻¹ g')` of the horizontal segment from `g0` to `gp`.
pub fn horizontal_point(g0: Point, gp: Point, lambda: f64) -> Result<Point> {
    if !g0.in_plane_of(gp) {
        return Err(Error::NotInPlane {
            base: g0,
            point: gp,
            offset: g0.plane_offset(gp),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "segment parameter {lambda} outside [0, 1]"
        )));
    }
    Ok(segment_point(g0, gp, lambda))
}

/// Unchecked segment point; callers guarantee `gp ∈ H_{g0}`.
pub(crate) fn segment_point(g0: Point, gp: Point, lambda: f64) -> Point {
    g0.mul(g0.inverse().mul(gp).dilate_unchecked(lambda))
}

/// A point on the line `H_{g1} ∩ H_{g2}`: the one whose `(x, y)` is the
/// Euclidean projection of the midpoint of `ξ₁(g1)`, `ξ₁(g2)` onto the line.
pub fn plane_intersection_point(g1: Point, g2: Point) -> Result<Point> {
    // Subtracting the two plane equations gives n·(x, y) = c.
    let n = HVector::new(2.0 * (g1.y - g2.y), -2.0 * (g1.x - g2.x));
    let c = g2.t - g1.t;
    let nn = n.dot(n);
    let scale = 1.0 + g1.xi1().norm().max(g2.xi1().norm());
    if nn <= (1e-12 * scale).powi(2) {
        return Err(Error::ParallelPlanes(g1, g2));
    }
    let m = g1.xi1().lerp(g2.xi1(), 0.5);
    let q = m - n.scale((n.dot(m) - c) / nn);
    Ok(Point::new(q.a, q.b, g1.plane_height(q.a, q.b)))
}
