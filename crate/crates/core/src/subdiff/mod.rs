//! H-subdifferentials: pointwise subgradient tests, reconstruction of
//! `∂_H u(g)` from directional derivatives, and the H-normal map of radial
//! functions.

mod normalmap;
mod polygon;

use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::Serialize;

use crate::calculus::directional_derivative;
use crate::convexity::{sample_rng, Region};
use crate::exec::Exec;
use crate::fielddsl::ScalarField;
use crate::hgroup::{HVector, Point};
use crate::limit::default_lambdas;
use crate::{Error, Result};

pub use normalmap::{
    boundary_scaling, check_inclusion_radial, disc_image_radius, monotonicity_condition, radial_circle_image,
    BoundaryScaling, DiscImage, FormReport, InclusionReport, MonotonicityReport, SliceReport,
};
pub use polygon::{intersect_half_planes, Clipper, ConvexSet, HalfPlane, Shape, AREA_TOL, VERTEX_MERGE_TOL};

/// Result of testing `p ∈ ∂_H u(g)` on sampled points of `H_g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgradientCheck {
    pub holds: bool,
    /// `min u(g') - u(g) - ⟨p, ξ₁(g') - ξ₁(g)⟩` over the samples.
    pub worst_margin: f64,
    pub witness: Option<Point>,
    pub checked: usize,
}

/// Tolerance for subgradient margins at a point where `|u(g)| = scale`.
pub fn margin_tol(scale: f64) -> f64 {
    1e-9 * (1.0 + scale.abs())
}

/// The subgradient margin at a single `g' ∈ H_g`.
pub fn subgradient_margin(u: &ScalarField, g: Point, p: HVector, gp: Point) -> Result<f64> {
    Ok(u.value(gp)? - u.value(g)? - p.dot(gp.xi1() - g.xi1()))
}

/// Tests the subgradient inequality at `g' = g` and at `n` points of
/// `H_g ∩ region`, drawn one per cell of a stratified grid on the `(x, y)`
/// face of the box. Samples whose `t'` leaves the box are dropped.
pub fn verify_subgradient(
    u: &ScalarField,
    g: Point,
    p: HVector,
    region: &Region,
    n: usize,
    seed: u64,
) -> Result<SubgradientCheck> {
    verify_subgradient_with(u, g, p, region, n, seed, Exec::default())
}

pub fn verify_subgradient_with(
    u: &ScalarField,
    g: Point,
    p: HVector,
    region: &Region,
    n: usize,
    seed: u64,
    exec: Exec,
) -> Result<SubgradientCheck> {
    use rand::Rng;
    let ug = u.value(g)?;
    let (xi0, (lo, hi)) = (g.xi1(), (region.lo, region.hi));
    let k = (n as f64).sqrt().ceil().max(1.0) as usize;
    let margins = exec.map(n, |i| -> Option<(f64, Point)> {
        let mut rng = sample_rng(seed, i as u64);
        let (cx, cy) = ((i % k) as f64, (i / k) as f64);
        let x = lo[0] + (hi[0] - lo[0]) * (cx + rng.gen::<f64>()) / k as f64;
        let y = lo[1] + (hi[1] - lo[1]) * ((cy + rng.gen::<f64>()) / k as f64).min(1.0);
        let gp = Point::new(x, y, g.plane_height(x, y));
        if !region.contains(gp) {
            return None;
        }
        let m = u.value(gp).ok()? - ug - p.dot(gp.xi1() - xi0);
        Some((m, gp))
    });
    let mut worst = (0.0, g);
    let mut checked = 1;
    for (m, gp) in margins.into_iter().flatten() {
        checked += 1;
        if m < worst.0 {
            worst = (m, gp);
        }
    }
    let holds = worst.0 >= -margin_tol(ug);
    Ok(SubgradientCheck {
        holds,
        worst_margin: worst.0,
        witness: (!holds).then_some(worst.1),
        checked,
    })
}

/// `u'(g; v(θ))` with the error estimate of its extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportValue {
    pub theta: f64,
    pub value: f64,
    pub error: f64,
}

/// `u'(g; v(θ_k))` for `θ_k = 2πk / n_dirs`.
pub fn support_values(u: &ScalarField, g: Point, n_dirs: usize, exec: Exec) -> Result<Vec<SupportValue>> {
    if n_dirs == 0 {
        return Err(Error::InvalidArgument("n_dirs must be positive".into()));
    }
    let thetas: Vec<f64> = (0..n_dirs).map(|k| TAU * k as f64 / n_dirs as f64).collect();
    support_at(u, g, &thetas, exec)
}

fn support_at(u: &ScalarField, g: Point, thetas: &[f64], exec: Exec) -> Result<Vec<SupportValue>> {
    let lambdas = default_lambdas();
    exec.map(thetas.len(), |k| {
        let theta = thetas[k];
        let d = directional_derivative(u, g, HVector::from_angle(theta), &lambdas, true)?;
        Ok(SupportValue {
            theta,
            value: d.value(),
            error: d.estimate.error,
        })
    })
    .into_iter()
    .collect()
}

/// Largest horizontal difference quotient `|u(g exp(δv)) - u(g)| / δ` over
/// `n_dirs` unit directions. For convex `u` this bounds `‖p‖` for every
/// `p ∈ ∂_H u(g)`, since the quotients decrease to `u'(g; v)`.
pub fn lipschitz_estimate(u: &ScalarField, g: Point, delta: f64, n_dirs: usize) -> Result<f64> {
    if !(delta > 0.0) || n_dirs == 0 {
        return Err(Error::InvalidArgument("delta and n_dirs must be positive".into()));
    }
    let u0 = u.value(g)?;
    let mut best = 0.0_f64;
    for k in 0..n_dirs {
        let v = HVector::from_angle(TAU * k as f64 / n_dirs as f64);
        let q = (u.value(g.exp_horizontal(v.scale(delta)))? - u0).abs() / delta;
        best = best.max(q);
    }
    Ok(best)
}

/// `∂_H u(g)` as a convex set in V₁.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subdifferential {
    pub at: Point,
    pub set: ConvexSet,
    /// Bound used for the initial square (`max_θ |u'(g; v(θ))|`).
    pub lipschitz: f64,
    pub support: Vec<SupportValue>,
}

impl Subdifferential {
    /// `theta,p1,p2` lines, vertices sorted by angle around the centroid.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,p1,p2\n");
        for (theta, v) in self.set.theta_sorted() {
            let _ = writeln!(out, "{theta},{},{}", v.a, v.b);
        }
        out
    }
}

/// Reconstructs `∂_H u(g) = ⋂_θ {p : ⟨p, v(θ)⟩ ≤ u'(g; v(θ))}` by clipping a
/// square of side `4 L̂` against `n_dirs ≥ 8` half-planes. Each half-plane is
/// relaxed by twice the extrapolation error of its support value plus the
/// rounding floor `8ε(1 + |u(g)|)/λ_min` of the difference quotients.
///
/// The result is an outer approximation: at a kink whose normal falls between
/// two sampled directions a thin wedge survives and its tip need not be a
/// subgradient. [`reconstruct_subdifferential_refined`] closes such wedges.
pub fn reconstruct_subdifferential(u: &ScalarField, g: Point, n_dirs: usize, exec: Exec) -> Result<Subdifferential> {
    check_dirs(n_dirs)?;
    let support = support_values(u, g, n_dirs, exec)?;
    clip(u.value(g)?, g, support)
}

/// Total direction budget for [`reconstruct_subdifferential_refined`]. Clipping is
/// O(n) per plane, so the worst case is about a second in release builds.
pub const MAX_REFINED_DIRS: usize = 1 << 14;

/// Starts from `n_dirs` uniform directions, then repeatedly bisects every
/// angular gap whose midpoint direction `e` still has
/// `h_P(e) > u'(g; e) + tol` for the current polygon `P`. Gaps that pass are
/// never revisited, since later clips only shrink `P`. Stops when every gap
/// passes or the budget of [`MAX_REFINED_DIRS`] directions is spent.
pub fn reconstruct_subdifferential_refined(
    u: &ScalarField,
    g: Point,
    n_dirs: usize,
    tol: f64,
    exec: Exec,
) -> Result<Subdifferential> {
    check_dirs(n_dirs)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let u0 = u.value(g)?;
    let mut support = support_values(u, g, n_dirs, exec)?;
    // past eight directions the square is never active, so L̂ and the slack
    // of the first pass stay valid for every later plane
    let base = clip(u0, g, support.clone())?;
    let slack = slack(u0, base.lipschitz);
    let mut clipper = Clipper::new(2.0 * base.lipschitz, slack);
    for s in &support {
        clipper.add(plane(s));
    }
    let mut set = base.set;
    let mut open: Vec<(f64, f64)> = (0..n_dirs)
        .map(|k| (support[k].theta, support.get(k + 1).map_or(TAU, |s| s.theta)))
        .collect();
    while !open.is_empty() && support.len() < MAX_REFINED_DIRS {
        open.truncate(MAX_REFINED_DIRS - support.len());
        let mids: Vec<f64> = open.iter().map(|&(a, b)| 0.5 * (a + b)).collect();
        let fresh = support_at(u, g, &mids, exec)?;
        let mut next = Vec::new();
        for (&(a, b), s) in open.iter().zip(&fresh) {
            let excess = set.support(HVector::from_angle(s.theta)) - (s.value + 2.0 * s.error + slack);
            if excess > tol && b - a > 1e-12 {
                next.push((a, s.theta));
                next.push((s.theta, b));
            }
            if !clipper.add(plane(s)) {
                return Err(Error::EmptyIntersection);
            }
        }
        set = clipper.set();
        support.extend(fresh);
        open = next;
    }
    if !open.is_empty() {
        log::warn!("subdifferential refinement stopped at {} directions", support.len());
    }
    support.sort_by(|p, q| p.theta.total_cmp(&q.theta));
    let lipschitz = support.iter().map(|s| s.value.abs()).fold(base.lipschitz, f64::max);
    Ok(Subdifferential {
        at: g,
        set,
        lipschitz,
        support,
    })
}

fn plane(s: &SupportValue) -> HalfPlane {
    HalfPlane {
        normal: HVector::from_angle(s.theta),
        offset: s.value + 2.0 * s.error,
    }
}

fn check_dirs(n_dirs: usize) -> Result<()> {
    if n_dirs < 8 {
        return Err(Error::InvalidArgument(format!(
            "n_dirs must be at least 8, got {n_dirs}"
        )));
    }
    Ok(())
}

fn slack(u0: f64, lipschitz: f64) -> f64 {
    let lambda_min = default_lambdas().into_iter().fold(f64::INFINITY, f64::min);
    1e-10 * (1.0 + lipschitz) + 8.0 * f64::EPSILON * (1.0 + u0.abs()) / lambda_min
}

fn clip(u0: f64, g: Point, support: Vec<SupportValue>) -> Result<Subdifferential> {
    let lipschitz = support.iter().map(|s| s.value.abs()).fold(0.0, f64::max).max(1e-9);
    let planes: Vec<HalfPlane> = support.iter().map(plane).collect();
    let set = intersect_half_planes(&planes, 2.0 * lipschitz, slack(u0, lipschitz)).ok_or(Error::EmptyIntersection)?;
    Ok(Subdifferential {
        at: g,
        set,
        lipschitz,
        support,
    })
}

/// Hausdorff distance between two convex sets through their support
/// functions sampled on `n` directions.
pub fn hausdorff(a: &ConvexSet, b: &ConvexSet, n: usize) -> f64 {
    (0..n)
        .map(|k| {
            let v = HVector::from_angle(TAU * k as f64 / n as f64);
            (a.support(v) - b.support(v)).abs()
        })
        .fold(0.0, f64::max)
}
