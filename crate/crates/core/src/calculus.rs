//! Horizontal differential operators.
//!
//! `X = ∂x + 2y∂t`, `Y = ∂y - 2x∂t`, `T = ∂t`, with `[X, Y] = -4T`.
//! Second-order horizontal derivatives are expanded into Euclidean partials,
//! so the commutator identity holds to rounding error in every mode.

use serde::Serialize;

use crate::fielddsl::{DiffMode, Jet, ScalarField, Smoothness};
use crate::hgroup::{HVector, Point};
use crate::limit::{self, LimitEstimate};
use crate::{Error, Result};

/// Horizontal Hessian `[[XXu, XYu], [YXu, YYu]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Hessian2 {
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
}

/// Symmetric 2×2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Hessian2 {
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.yx
    }

    /// `(M + Mᵀ)/2`.
    pub fn symmetrized(&self) -> Sym2 {
        Sym2 {
            xx: self.xx,
            xy: 0.5 * (self.xy + self.yx),
            yy: self.yy,
        }
    }

    /// Off-diagonal entry `a` of the antisymmetric part `[[0, a], [-a, 0]]`.
    pub fn antisymmetric(&self) -> f64 {
        0.5 * (self.xy - self.yx)
    }
}

impl Sym2 {
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.xx * self.xx + 2.0 * self.xy * self.xy + self.yy * self.yy).sqrt()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let rad = half_diff.hypot(self.xy);
        (mean - rad, mean + rad)
    }
}

/// Horizontal first and second derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct HorizontalJet {
    pub value: f64,
    pub xu: f64,
    pub yu: f64,
    pub tu: f64,
    pub hessian: Hessian2,
}

impl HorizontalJet {
    pub fn from_euclidean(g: Point, j: &Jet) -> Self {
        let (x, y) = (g.x, g.y);
        let hessian = Hessian2 {
            xx: j.dxx + 4.0 * y * j.dxt + 4.0 * y * y * j.dtt,
            xy: j.dxy - 2.0 * j.dt - 2.0 * x * j.dxt + 2.0 * y * j.dyt - 4.0 * x * y * j.dtt,
            yx: j.dxy + 2.0 * j.dt + 2.0 * y * j.dyt - 2.0 * x * j.dxt - 4.0 * x * y * j.dtt,
            yy: j.dyy - 4.0 * x * j.dyt + 4.0 * x * x * j.dtt,
        };
        HorizontalJet {
            value: j.value,
            xu: j.dx + 2.0 * y * j.dt,
            yu: j.dy - 2.0 * x * j.dt,
            tu: j.dt,
            hessian,
        }
    }

    pub fn gradient(&self) -> HVector {
        HVector::new(self.xu, self.yu)
    }
}

pub fn apply_x(u: &ScalarField, g: Point, mode: DiffMode) -> Result<f64> {
    let [ux, _, ut] = u.gradient(g, mode)?;
    Ok(ux + 2.0 * g.y * ut)
}

pub fn apply_y(u: &ScalarField, g: Point, mode: DiffMode) -> Result<f64> {
    let [_, uy, ut] = u.gradient(g, mode)?;
    Ok(uy - 2.0 * g.x * ut)
}

pub fn apply_t(u: &ScalarField, g: Point, mode: DiffMode) -> Result<f64> {
    Ok(u.gradient(g, mode)?[2])
}

/// `(Xu, Yu)`.
pub fn horizontal_gradient(u: &ScalarField, g: Point, mode: DiffMode) -> Result<HVector> {
    let [ux, uy, ut] = u.gradient(g, mode)?;
    Ok(HVector::new(ux + 2.0 * g.y * ut, uy - 2.0 * g.x * ut))
}

/// Full horizontal jet. Requires a `C2` field.
pub fn horizontal_jet(u: &ScalarField, g: Point, mode: DiffMode) -> Result<HorizontalJet> {
    u.require(Smoothness::C2)?;
    let j = u.jet(g, mode)?;
    Ok(HorizontalJet::from_euclidean(g, &j))
}

pub fn horizontal_hessian(u: &ScalarField, g: Point, mode: DiffMode) -> Result<Hessian2> {
    Ok(horizontal_jet(u, g, mode)?.hessian)
}

pub fn symmetrized_hessian(u: &ScalarField, g: Point, mode: DiffMode) -> Result<Sym2> {
    Ok(horizontal_hessian(u, g, mode)?.symmetrized())
}

/// `XYu - YXu + 4Tu`, zero for every `C2` field.
pub fn commutator_residual(u: &ScalarField, g: Point, mode: DiffMode) -> Result<f64> {
    let j = horizontal_jet(u, g, mode)?;
    Ok(j.hessian.xy - j.hessian.yx + 4.0 * j.tu)
}

/// Pansu differential `Du(g)(h) = lim_{λ→0⁺} (u(g·δ_λ h) - u(g))/λ`.
pub fn pansu_differential(u: &ScalarField, g: Point, h: Point, lambdas: &[f64]) -> Result<LimitEstimate> {
    let u0 = u.value(g)?;
    let (est, _) = limit::limit(lambdas, |l| Ok((u.value(g.mul(h.dilate_unchecked(l)))? - u0) / l))?;
    Ok(est)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionalDerivative {
    pub estimate: LimitEstimate,
    /// Whether the quotients were non-increasing as λ decreased.
    pub monotone: bool,
}

impl DirectionalDerivative {
    pub fn value(&self) -> f64 {
        self.estimate.value
    }
}

/// One-sided derivative `u'(g; v) = lim_{λ→0⁺} (u(g exp(λv)) - u(g))/λ`.
///
/// With `assume_convex`, a quotient sequence that fails to decrease is logged
/// as a warning.
pub fn directional_derivative(
    u: &ScalarField,
    g: Point,
    v: HVector,
    lambdas: &[f64],
    assume_convex: bool,
) -> Result<DirectionalDerivative> {
    if v.norm() == 0.0 {
        return Err(Error::InvalidArgument("direction must be non-zero".into()));
    }
    let u0 = u.value(g)?;
    let (estimate, q) = limit::limit(lambdas, |l| Ok((u.value(g.exp_horizontal(v.scale(l)))? - u0) / l))?;
    let monotone = q.windows(2).zip(lambdas.iter().skip(1)).all(|(w, &l)| {
        let noise = 4.0 * f64::EPSILON * (1.0 + u0.abs()) / l + 1e-12 * (1.0 + w[0].abs());
        w[1] <= w[0] + noise
    });
    if assume_convex && !monotone {
        log::warn!(
            "difference quotients of `{}` at {g} along {v} are not monotone",
            u.name()
        );
    }
    Ok(DirectionalDerivative { estimate, monotone })
}
