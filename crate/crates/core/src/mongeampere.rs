//! Monge–Ampère densities of `C2` fields.
//!
//! `ma_density = det[∇²_H u]* + 4(Tu)²` is the horizontal Jacobian of
//! `g ↦ (Xu, Yu)`; the `S_ma` operator uses `+ 12(Tu)²` instead. The
//! measure of a box is the integral of `ma_density` against Lebesgue measure.

use serde::Serialize;

use crate::calculus::horizontal_jet;
use crate::convexity::Region;
use crate::exec::Exec;
use crate::fielddsl::{DiffMode, ScalarField};
use crate::hgroup::Point;
use crate::quadrature::{self, QuadratureSpec};
use crate::Result;

pub fn ma_density(u: &ScalarField, g: Point, mode: DiffMode) -> Result<f64> {
    let j = horizontal_jet(u, g, mode)?;
    Ok(j.hessian.symmetrized().det() + 4.0 * j.tu * j.tu)
}

pub fn sma_operator(u: &ScalarField, g: Point, mode: DiffMode) -> Result<f64> {
    let j = horizontal_jet(u, g, mode)?;
    Ok(j.hessian.symmetrized().det() + 12.0 * j.tu * j.tu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobianCheck {
    /// `det ∇²_H u`, the full (non-symmetric) horizontal Hessian.
    pub full_det: f64,
    /// `det [∇²_H u]* + 4(Tu)²`.
    pub density: f64,
    pub residual: f64,
}

/// Compares `det ∇²_H u` with `det [∇²_H u]* + 4(Tu)²`.
pub fn jacobian_identity_check(u: &ScalarField, g: Point, mode: DiffMode) -> Result<JacobianCheck> {
    let j = horizontal_jet(u, g, mode)?;
    let full_det = j.hessian.det();
    let density = j.hessian.symmetrized().det() + 4.0 * j.tu * j.tu;
    Ok(JacobianCheck {
        full_det,
        density,
        residual: (full_det - density).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaMeasure {
    pub value: f64,
    /// `false` when the caller did not supply a convexity pass; the integral
    /// may then be signed.
    pub convexity_certified: bool,
}

/// `∫_E (det [∇²_H u]* + 4(Tu)²) dg` by tensor-product quadrature.
pub fn ma_measure(
    u: &ScalarField,
    region: &Region,
    spec: &QuadratureSpec,
    convexity_certified: bool,
    exec: Exec,
) -> Result<MaMeasure> {
    if !convexity_certified {
        log::warn!(
            "integrating the Monge–Ampère density of `{}` without a convexity verdict",
            u.name()
        );
    }
    let value = quadrature::integrate(|g| ma_density(u, g, DiffMode::Auto), region, spec, exec)?;
    Ok(MaMeasure {
        value,
        convexity_certified,
    })
}
