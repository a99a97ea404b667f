//! Horizontal chains and the reconstruction of `u(g) - u(g₀)` from
//! subgradients along them.
//!
//! For a chain `(g_i, p_i)` with `g_{i+1} ∈ H_{g_i}` and `p_i ∈ ∂_H u(g_i)`,
//!
//! ```text
//! Σ ⟨p_i, ξ₁(g_{i+1}) - ξ₁(g_i)⟩ ≤ u(g_n) - u(g_0)
//!     ≤ Σ ⟨p_i, Δξ₁⟩ + Σ ⟨p_{i+1} - p_i, Δξ₁⟩.
//! ```

use std::fmt::Write as _;

use serde::Serialize;

use crate::calculus::horizontal_gradient;
use crate::convexity::Region;
use crate::exec::{pairwise_sum, Exec};
use crate::fielddsl::{DiffMode, ScalarField, Smoothness};
use crate::hgroup::{plane_intersection_point, segment_point, HVector, Point};
use crate::subdiff::{verify_subgradient, SubgradientCheck};
use crate::{Error, Result};

/// Largest chain resolution tried by [`reconstruct`].
pub const N_MAX: usize = 1 << 20;
/// First resolution tried by [`reconstruct`].
pub const N_START: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainNode {
    pub g: Point,
    pub p: HVector,
}

/// A sequence of nodes in which each point lies on the horizontal plane of
/// its predecessor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chain {
    nodes: Vec<ChainNode>,
}

fn check_link(i: usize, a: Point, b: Point) -> Result<()> {
    if !a.in_plane_of(b) {
        return Err(Error::ChainInvariant {
            index: i + 1,
            reason: format!("{b} is not on the horizontal plane of {a}"),
        });
    }
    if !b.in_plane_of(a) {
        return Err(Error::ChainInvariant {
            index: i,
            reason: format!("{a} is not on the horizontal plane of {b}"),
        });
    }
    Ok(())
}

impl Chain {
    /// Validates plane membership of every consecutive pair.
    pub fn new(nodes: Vec<ChainNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::ChainInvariant {
                index: 0,
                reason: "empty chain".into(),
            });
        }
        for (i, w) in nodes.windows(2).enumerate() {
            check_link(i, w[0].g, w[1].g)?;
        }
        Ok(Chain { nodes })
    }

    pub fn nodes(&self) -> &[ChainNode] {
        &self.nodes
    }

    /// Number of links.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> Point {
        self.nodes[0].g
    }

    pub fn end(&self) -> Point {
        self.nodes[self.nodes.len() - 1].g
    }

    /// `Σ ⟨p_i, ξ₁(g_{i+1}) - ξ₁(g_i)⟩`.
    pub fn sum(&self) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .windows(2)
            .map(|w| w[0].p.dot(w[1].g.xi1() - w[0].g.xi1()))
            .collect();
        pairwise_sum(&terms)
    }

    /// `Σ ⟨p_{i+1} - p_i, ξ₁(g_{i+1}) - ξ₁(g_i)⟩`.
    pub fn gap_bound(&self) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .windows(2)
            .map(|w| (w[1].p - w[0].p).dot(w[1].g.xi1() - w[0].g.xi1()))
            .collect();
        pairwise_sum(&terms)
    }

    /// `u(g_n) - u(g_0) - sum`.
    pub fn gap(&self, u: &ScalarField) -> Result<f64> {
        Ok(u.value(self.end())? - u.value(self.start())? - self.sum())
    }

    /// Runs [`verify_subgradient`] on every node; returns the first failing
    /// index, if any, with all checks.
    pub fn validate_subgradients(
        &self,
        u: &ScalarField,
        region: &Region,
        n: usize,
        seed: u64,
    ) -> Result<(Option<usize>, Vec<SubgradientCheck>)> {
        let checks = self
            .nodes
            .iter()
            .map(|node| verify_subgradient(u, node.g, node.p, region, n, seed))
            .collect::<Result<Vec<_>>>()?;
        Ok((checks.iter().position(|c| !c.holds), checks))
    }

    /// `i,x,y,t,p1,p2` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,x,y,t,p1,p2\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "{i},{},{},{},{},{}", n.g.x, n.g.y, n.g.t, n.p.a, n.p.b);
        }
        out
    }
}

/// Validates `c` and returns its inner-product sum.
pub fn chain_sum(c: &Chain) -> Result<f64> {
    for (i, w) in c.nodes.windows(2).enumerate() {
        check_link(i, w[0].g, w[1].g)?;
    }
    Ok(c.sum())
}

pub fn gap_bound(c: &Chain) -> f64 {
    c.gap_bound()
}

/// Which construction [`chain_points`] used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainCase {
    /// `g = g₀`.
    Trivial,
    /// `g ∈ H_{g₀}`: one segment.
    Planar,
    /// `ξ₁(g) ≠ ξ₁(g₀)`, `g ∉ H_{g₀}`: two segments through `H_{g₀} ∩ H_g`.
    TwoSegments,
    /// `ξ₁(g) = ξ₁(g₀)`: three segments through `g₀ · (1, 0, 0)`.
    ThreeSegments,
}

/// Offset of the auxiliary point used when `ξ₁(g) = ξ₁(g₀)`.
pub const AUX_OFFSET: Point = Point { x: 1.0, y: 0.0, t: 0.0 };

fn corners(g0: Point, g: Point) -> Result<(ChainCase, Vec<Point>)> {
    if g0 == g {
        return Ok((ChainCase::Trivial, vec![g0]));
    }
    if g0.in_plane_of(g) {
        return Ok((ChainCase::Planar, vec![g0, g]));
    }
    let d = (g.xi1() - g0.xi1()).norm();
    if d <= 1e-12 * (1.0 + g0.xi1().norm()) {
        let gp = g0.mul(AUX_OFFSET);
        let gpp = plane_intersection_point(gp, g)?;
        return Ok((ChainCase::ThreeSegments, vec![g0, gp, gpp, g]));
    }
    let gpp = plane_intersection_point(g0, g)?;
    Ok((ChainCase::TwoSegments, vec![g0, gpp, g]))
}

/// The chain points: each segment between consecutive corners split into `n`
/// equal horizontal pieces.
pub fn chain_points(g0: Point, g: Point, n: usize) -> Result<(ChainCase, Vec<Point>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let (case, c) = corners(g0, g)?;
    let mut pts = vec![c[0]];
    for w in c.windows(2) {
        for i in 1..=n {
            pts.push(if i == n {
                w[1]
            } else {
                segment_point(w[0], w[1], i as f64 / n as f64)
            });
        }
    }
    Ok((case, pts))
}

/// Builds the chain from `g0` to `g` with subgradients `p_i = ∇_H u(g_i)`.
/// Requires a C¹ field; use [`build_chain_with`] otherwise.
pub fn build_chain(u: &ScalarField, g0: Point, g: Point, n: usize) -> Result<Chain> {
    u.require(Smoothness::C1)?;
    build_chain_with(g0, g, n, Exec::default(), |p| horizontal_gradient(u, p, DiffMode::Auto))
}

/// Builds the chain with a caller-supplied subgradient selector.
pub fn build_chain_with<S>(g0: Point, g: Point, n: usize, exec: Exec, selector: S) -> Result<Chain>
where
    S: Fn(Point) -> Result<HVector> + Sync + Send,
{
    let (_, pts) = chain_points(g0, g, n)?;
    let ps = exec.map(pts.len(), |i| selector(pts[i]));
    let nodes = pts
        .iter()
        .zip(ps)
        .map(|(&g, p)| Ok(ChainNode { g, p: p? }))
        .collect::<Result<Vec<_>>>()?;
    Chain::new(nodes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub n: usize,
    pub sum: f64,
    pub gap: f64,
    pub gap_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconstruction {
    /// Chain sum approximating `u(g) - u(g₀)` from below.
    pub value: f64,
    pub n_used: usize,
    pub case: ChainCase,
    pub gap: f64,
    pub gap_bound: f64,
    /// `max_N N · gap(N)` over the doubling steps.
    pub fitted_c: f64,
    pub history: Vec<Step>,
}

/// Doubles `N` from [`N_START`] until `u(g) - u(g₀) - chain_sum ≤ eps`.
pub fn reconstruct(u: &ScalarField, g0: Point, g: Point, eps: f64) -> Result<Reconstruction> {
    u.require(Smoothness::C1)?;
    reconstruct_with(u, g0, g, eps, Exec::default(), |p| {
        horizontal_gradient(u, p, DiffMode::Auto)
    })
}

pub fn reconstruct_with<S>(
    u: &ScalarField,
    g0: Point,
    g: Point,
    eps: f64,
    exec: Exec,
    selector: S,
) -> Result<Reconstruction>
where
    S: Fn(Point) -> Result<HVector> + Sync + Send,
{
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let (case, _) = corners(g0, g)?;
    if case == ChainCase::Trivial {
        let step = Step {
            n: 1,
            sum: 0.0,
            gap: 0.0,
            gap_bound: 0.0,
        };
        return Ok(Reconstruction {
            value: 0.0,
            n_used: 1,
            case,
            gap: 0.0,
            gap_bound: 0.0,
            fitted_c: 0.0,
            history: vec![step],
        });
    }
    let target = u.value(g)? - u.value(g0)?;
    let mut history = Vec::new();
    let mut n = N_START;
    while n <= N_MAX {
        let chain = build_chain_with(g0, g, n, exec, &selector)?;
        let sum = chain.sum();
        let step = Step {
            n,
            sum,
            gap: target - sum,
            gap_bound: chain.gap_bound(),
        };
        log::debug!("N = {n}: sum = {sum}, gap = {}", step.gap);
        history.push(step.clone());
        if step.gap <= eps {
            let fitted_c = history.iter().map(|s| s.gap * s.n as f64).fold(0.0, f64::max);
            return Ok(Reconstruction {
                value: sum,
                n_used: n,
                case,
                gap: step.gap,
                gap_bound: step.gap_bound,
                fitted_c,
                history,
            });
        }
        n *= 2;
    }
    Err(Error::NoConvergence(N_MAX))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paraboloid() -> ScalarField {
        ScalarField::parse("x^2+y^2").unwrap()
    }

    const E: Point = Point::IDENTITY;

    #[test]
    fn single_node_chain() {
        let c = build_chain(&paraboloid(), E, E, 5).unwrap();
        assert!(c.is_empty());
        assert_eq!(chain_sum(&c).unwrap(), 0.0);
    }

    #[test]
    fn planar_chain_sum() {
        for n in [10usize, 100, 1000] {
            let c = build_chain(&paraboloid(), E, Point::new(1.0, 0.0, 0.0), n).unwrap();
            let nf = n as f64;
            assert!((chain_sum(&c).unwrap() - (nf - 1.0) / nf).abs() < 1e-12);
            assert!((c.gap_bound() - 2.0 / nf).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_field_has_zero_gap_bound() {
        let u = ScalarField::parse("3*x - 2*y + 1").unwrap();
        let c = build_chain(&u, E, Point::new(0.3, 0.7, 2.0), 16).unwrap();
        assert_eq!(c.gap_bound(), 0.0);
        assert!(c.gap(&u).unwrap().abs() < 1e-12);
    }

    #[test]
    fn vertical_target_uses_three_segments() {
        let (case, pts) = chain_points(E, Point::new(0.0, 0.0, 1.0), 7).unwrap();
        assert_eq!(case, ChainCase::ThreeSegments);
        assert_eq!(pts.len(), 3 * 7 + 1);
        assert_eq!(pts[7], Point::new(1.0, 0.0, 0.0));
        for w in pts.windows(2) {
            assert!(w[0].in_plane_of(w[1]) && w[1].in_plane_of(w[0]));
        }
    }

    #[test]
    fn two_segment_case() {
        let g = Point::new(1.0, 1.0, 3.0);
        let (case, pts) = chain_points(E, g, 4).unwrap();
        assert_eq!(case, ChainCase::TwoSegments);
        assert_eq!(pts.len(), 9);
        let u = paraboloid();
        let c = build_chain(&u, E, g, 64).unwrap();
        let gap = c.gap(&u).unwrap();
        assert!(gap >= -1e-12 && gap <= c.gap_bound() + 1e-9);
    }

    #[test]
    fn reconstruct_planar() {
        let r = reconstruct(&paraboloid(), E, Point::new(1.0, 0.0, 0.0), 1e-3).unwrap();
        assert!(r.n_used <= 1024);
        assert!(r.value >= 0.999 - 1e-12 && r.value <= 1.0);
        assert!((r.gap_bound - 2.0 / r.n_used as f64).abs() < 1e-12);
    }

    #[test]
    fn reconstruct_vertical_from_below() {
        let r = reconstruct(&paraboloid(), E, Point::new(0.0, 0.0, 1.0), 1e-3).unwrap();
        assert!(r.value <= 0.0 && r.value.abs() <= 1e-3);
        assert!(r.history.windows(2).all(|w| w[1].sum >= w[0].sum));
    }

    #[test]
    fn reconstruct_trivial() {
        let r = reconstruct(&paraboloid(), E, E, 1e-3).unwrap();
        assert_eq!((r.value, r.n_used), (0.0, 1));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let c = build_chain(&paraboloid(), E, Point::new(1.0, 0.0, 0.0), 4).unwrap();
        let csv = c.to_csv();
        assert!(csv.starts_with("i,x,y,t,p1,p2\n"));
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn abs_x_with_selector() {
        let u = ScalarField::parse("abs(x)").unwrap();
        let sel = |p: Point| {
            Ok(HVector::new(
                if p.x > 0.0 {
                    1.0
                } else if p.x < 0.0 {
                    -1.0
                } else {
                    0.0
                },
                0.0,
            ))
        };
        let r = reconstruct_with(
            &u,
            Point::new(-1.0, 0.0, 0.0),
            Point::new(1.0, 0.5, 0.0),
            1e-3,
            Exec::Sequential,
            sel,
        )
        .unwrap();
        assert!((r.value - 0.0).abs() <= 1e-3);
    }
}
