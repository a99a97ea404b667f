//! Gauss–Legendre tensor-product quadrature on boxes.

use serde::Serialize;

use crate::convexity::Region;
use crate::exec::{pairwise_sum, Exec};
use crate::hgroup::Point;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Rule {
    Midpoint,
    GaussLegendre(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub rule: Rule,
    /// Cells per axis.
    pub subdivisions: usize,
    /// Absolute tolerance for [`integrate_adaptive`].
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rule: Rule::GaussLegendre(5),
            subdivisions: 8,
            tolerance: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.subdivisions == 0 {
            return Err(Error::InvalidArgument(
                "quadrature needs at least one subdivision".into(),
            ));
        }
        if let Rule::GaussLegendre(0) = self.rule {
            return Err(Error::InvalidArgument("Gauss–Legendre order must be at least 1".into()));
        }
        Ok(())
    }

    /// 1-D nodes and weights on `[-1, 1]`.
    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        match self.rule {
            Rule::Midpoint => (vec![0.0], vec![2.0]),
            Rule::GaussLegendre(n) => gauss_legendre(n),
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Integrates `f` over `region` with `spec`. Each cell is evaluated
/// independently; cell sums are combined by pairwise summation in cell order.
pub fn integrate<F>(f: F, region: &Region, spec: &QuadratureSpec, exec: Exec) -> Result<f64>
where
    F: Fn(Point) -> Result<f64> + Sync + Send,
{
    spec.validate()?;
    let (nodes, weights) = spec.nodes();
    let m = spec.subdivisions;
    let h: [f64; 3] = std::array::from_fn(|a| (region.hi[a] - region.lo[a]) / m as f64);
    let jac = h[0] * h[1] * h[2] / 8.0;
    let cells = exec.map(m * m * m, |c| -> Result<f64> {
        let idx = [c % m, (c / m) % m, c / (m * m)];
        let lo: [f64; 3] = std::array::from_fn(|a| region.lo[a] + h[a] * idx[a] as f64);
        let map = |a: usize, s: f64| lo[a] + 0.5 * h[a] * (s + 1.0);
        let mut terms = Vec::with_capacity(nodes.len().pow(3));
        for (k, &st) in nodes.iter().enumerate() {
            for (j, &sy) in nodes.iter().enumerate() {
                for (i, &sx) in nodes.iter().enumerate() {
                    let w = weights[i] * weights[j] * weights[k];
                    terms.push(w * f(Point::new(map(0, sx), map(1, sy), map(2, st)))?);
                }
            }
        }
        Ok(jac * pairwise_sum(&terms))
    });
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&cells))
}

/// Doubles the subdivisions until two successive estimates agree to
/// `spec.tolerance` (at most 64 cells per axis). Returns the estimate and the
/// subdivisions used.
pub fn integrate_adaptive<F>(f: F, region: &Region, spec: &QuadratureSpec, exec: Exec) -> Result<(f64, usize)>
where
    F: Fn(Point) -> Result<f64> + Sync + Send,
{
    let mut s = *spec;
    let mut prev = integrate(&f, region, &s, exec)?;
    while s.subdivisions < 64 {
        s.subdivisions *= 2;
        let next = integrate(&f, region, &s, exec)?;
        if (next - prev).abs() <= spec.tolerance {
            return Ok((next, s.subdivisions));
        }
        prev = next;
    }
    Ok((prev, s.subdivisions))
}
