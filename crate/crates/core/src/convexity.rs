//! Weak H-convexity tests.
//!
//! Three independent checks: the symmetrized horizontal Hessian on a grid,
//! the defining segment inequality on random horizontal segments, and the
//! closed-form criterion `4z(1 + z'') ≥ 3(z')²` for the radial family.
//! Sampling can only falsify convexity; a pass is evidence, not proof.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::horizontal_jet;
use crate::exec::Exec;
use crate::fielddsl::{DiffMode, RadialField, ScalarField, Smoothness};
use crate::hgroup::{segment_point, Point};
use crate::{Error, Result};

/// Interior segment parameters tested by [`check_convex_segments`].
pub const SEGMENT_LAMBDAS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Axis-aligned box `[x₀,x₁]×[y₀,y₁]×[t₀,t₁]` with a grid resolution per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub n: [usize; 3],
}

impl Region {
    pub fn new(lo: [f64; 3], hi: [f64; 3], n: [usize; 3]) -> Result<Self> {
        for a in 0..3 {
            if !lo[a].is_finite() || !hi[a].is_finite() {
                return Err(Error::InvalidArgument("region bounds must be finite".into()));
            }
            if !(lo[a] < hi[a]) {
                return Err(Error::InvalidArgument(format!(
                    "degenerate region: axis {a} has bounds [{}, {}]",
                    lo[a], hi[a]
                )));
            }
            if n[a] == 0 {
                return Err(Error::InvalidArgument("grid resolution must be at least 1".into()));
            }
        }
        Ok(Region { lo, hi, n })
    }

    pub fn cube(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new([lo; 3], [hi; 3], [n; 3])
    }

    pub fn with_resolution(mut self, n: [usize; 3]) -> Result<Self> {
        self.n = n;
        Self::new(self.lo, self.hi, self.n)
    }

    pub fn contains(&self, g: Point) -> bool {
        let c = [g.x, g.y, g.t];
        (0..3).all(|a| c[a] >= self.lo[a] && c[a] <= self.hi[a])
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn grid_len(&self) -> usize {
        self.n.iter().product()
    }

    fn axis_value(&self, axis: usize, k: usize) -> f64 {
        if self.n[axis] == 1 {
            0.5 * (self.lo[axis] + self.hi[axis])
        } else {
            self.lo[axis] + (self.hi[axis] - self.lo[axis]) * k as f64 / (self.n[axis] - 1) as f64
        }
    }

    /// Grid node `i` in x-fastest order.
    pub fn grid_point(&self, i: usize) -> Point {
        let kx = i % self.n[0];
        let ky = (i / self.n[0]) % self.n[1];
        let kt = i / (self.n[0] * self.n[1]);
        Point::new(self.axis_value(0, kx), self.axis_value(1, ky), self.axis_value(2, kt))
    }

    pub fn grid(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.grid_len()).map(|i| self.grid_point(i))
    }

    fn uniform(&self, rng: &mut impl Rng, axis: usize) -> f64 {
        rng.gen_range(self.lo[axis]..=self.hi[axis])
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Point {
        Point::new(self.uniform(rng, 0), self.uniform(rng, 1), self.uniform(rng, 2))
    }

    /// Splits along `axis` at `at`.
    pub fn split(&self, axis: usize, at: f64) -> Result<(Region, Region)> {
        let mut a = *self;
        let mut b = *self;
        a.hi[axis] = at;
        b.lo[axis] = at;
        Ok((Region::new(a.lo, a.hi, a.n)?, Region::new(b.lo, b.hi, b.n)?))
    }
}

impl FromStr for Region {
    type Err = Error;

    /// `"x0:x1,y0:y1,t0:t1"`, grid resolution 11 per axis.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!("box `{s}` must have three ranges")));
        }
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for (a, part) in parts.iter().enumerate() {
            let (l, h) = part
                .split_once(':')
                .ok_or_else(|| Error::InvalidArgument(format!("range `{part}` must be lo:hi")))?;
            let num = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad number `{v}`")))
            };
            lo[a] = num(l)?;
            hi[a] = num(h)?;
        }
        Region::new(lo, hi, [11; 3])
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{},{}:{},{}:{}",
            self.lo[0], self.hi[0], self.lo[1], self.hi[1], self.lo[2], self.hi[2]
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// Evidence for a failed check, replayable through [`Witness::replay`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    /// Negative eigenvalue of the symmetrized Hessian.
    Hessian { point: Point, min_eigenvalue: f64 },
    /// `u(g_λ) - u(g) - λ(u(g') - u(g)) = violation > 0`.
    Segment {
        g: Point,
        gp: Point,
        lambda: f64,
        violation: f64,
    },
    /// Negative radial margin `4z(1 + z'') - 3(z')²`.
    Radial { t: f64, margin: f64 },
}

impl Witness {
    /// Recomputes the violation from scratch. A positive result (or a negative
    /// eigenvalue/margin) confirms the failure.
    pub fn replay(&self, u: &ScalarField) -> Result<f64> {
        match *self {
            Witness::Hessian { point, .. } => {
                let h = horizontal_jet(u, point, DiffMode::Auto)?.hessian.symmetrized();
                Ok(h.eigenvalues().0)
            }
            Witness::Segment { g, gp, lambda, .. } => segment_violation(u, g, gp, lambda),
            Witness::Radial { .. } => Err(Error::InvalidArgument(
                "radial witnesses replay through radial_margin".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityVerdict {
    pub status: Status,
    pub witness: Option<Witness>,
    /// Points or segments actually tested.
    pub checked: usize,
    /// Grid points skipped because the field could not be differentiated
    /// there, or segment samples that left the region.
    pub skipped: usize,
    /// Smallest eigenvalue / slack / margin seen over the tested set.
    pub worst_margin: f64,
}

impl ConvexityVerdict {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// PSD test of `[∇²_H u]*` on every grid node of `region`.
///
/// An eigenvalue counts as non-negative when it is at least
/// `-1e-9·(1 + ‖M‖)`. Nodes where the field cannot be differentiated (for
/// example the origin for the gauge) are skipped; more than half skipped
/// makes the verdict inconclusive.
pub fn check_convex_hessian(u: &ScalarField, region: &Region, exec: Exec) -> Result<ConvexityVerdict> {
    u.require(Smoothness::C2)?;
    let results = exec.map(region.grid_len(), |i| {
        let g = region.grid_point(i);
        horizontal_jet(u, g, DiffMode::Auto).ok().map(|j| {
            let s = j.hessian.symmetrized();
            let lo = s.eigenvalues().0;
            (g, lo, lo + 1e-9 * (1.0 + s.norm()))
        })
    });
    let mut checked = 0;
    let mut worst: Option<(Point, f64, f64)> = None;
    for r in results.iter().flatten() {
        checked += 1;
        if worst.is_none_or(|w| r.1 < w.1) {
            worst = Some(*r);
        }
    }
    let skipped = results.len() - checked;
    let failing = results
        .iter()
        .flatten()
        .filter(|r| r.2 < 0.0)
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let worst_margin = worst.map_or(f64::NAN, |w| w.1);
    if let Some(&(point, min_eigenvalue, _)) = failing {
        return Ok(ConvexityVerdict {
            status: Status::Fail,
            witness: Some(Witness::Hessian { point, min_eigenvalue }),
            checked,
            skipped,
            worst_margin,
        });
    }
    let status = if 2 * checked < results.len() {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(ConvexityVerdict {
        status,
        witness: None,
        checked,
        skipped,
        worst_margin,
    })
}

fn segment_violation(u: &ScalarField, g: Point, gp: Point, lambda: f64) -> Result<f64> {
    let ug = u.value(g)?;
    let ugp = u.value(gp)?;
    let ul = u.value(segment_point(g, gp, lambda))?;
    Ok(ul - ug - lambda * (ugp - ug))
}

/// Per-sample RNG so parallel and sequential runs draw the same numbers.
pub(crate) fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Samples a point of `H_g` inside `region`: `(x', y')` uniform on the box
/// face, `t'` from the plane equation. `None` if `t'` leaves the box.
pub(crate) fn sample_in_plane(region: &Region, g: Point, rng: &mut impl Rng) -> Option<Point> {
    let x = region.uniform(rng, 0);
    let y = region.uniform(rng, 1);
    let gp = Point::new(x, y, g.plane_height(x, y));
    region.contains(gp).then_some(gp)
}

/// Tests `u(g_λ) ≤ u(g) + λ(u(g') - u(g))` for `n_samples` random pairs
/// `g ∈ region`, `g' ∈ H_g ∩ region` and `λ ∈ {0.1, …, 0.9}`.
///
/// `worst_margin` is the smallest slack `u(g) + λ(u(g') - u(g)) - u(g_λ)`.
pub fn check_convex_segments(
    u: &ScalarField,
    region: &Region,
    n_samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<ConvexityVerdict> {
    let results = exec.map(n_samples, |i| {
        let mut rng = sample_rng(seed, i as u64);
        let g = region.sample(&mut rng);
        let gp = sample_in_plane(region, g, &mut rng)?;
        let ug = u.value(g).ok()?;
        let ugp = u.value(gp).ok()?;
        let tol = 1e-9 * (1.0 + ug.abs() + ugp.abs());
        let mut worst: Option<(f64, f64, f64)> = None;
        for &lambda in &SEGMENT_LAMBDAS {
            let ul = u.value(segment_point(g, gp, lambda)).ok()?;
            let slack = ug + lambda * (ugp - ug) - ul;
            if worst.is_none_or(|w| slack < w.1) {
                worst = Some((lambda, slack, tol));
            }
        }
        worst.map(|(lambda, slack, tol)| (g, gp, lambda, slack, tol))
    });
    let checked = results.iter().flatten().count();
    let skipped = n_samples - checked;
    let worst_margin = results.iter().flatten().map(|r| r.3).fold(f64::INFINITY, f64::min);
    let failing = results
        .iter()
        .flatten()
        .filter(|r| r.3 < -r.4)
        .min_by(|a, b| a.3.total_cmp(&b.3));
    if let Some(&(g, gp, lambda, slack, _)) = failing {
        return Ok(ConvexityVerdict {
            status: Status::Fail,
            witness: Some(Witness::Segment {
                g,
                gp,
                lambda,
                violation: -slack,
            }),
            checked,
            skipped,
            worst_margin,
        });
    }
    let status = if 2 * checked < n_samples.max(1) {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(ConvexityVerdict {
        status,
        witness: None,
        checked,
        skipped,
        worst_margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialCriterion {
    pub verdict: ConvexityVerdict,
    /// `(t, 4z(1 + z'') - 3(z')²)` per grid point.
    pub margins: Vec<(f64, f64)>,
    /// Grid points where `z(t) = 0` exactly (the family touches the gauge
    /// singularity there).
    pub degenerate_points: usize,
}

/// `4z(1 + z'') - 3(z')²` at `t`.
pub fn radial_margin(v: &RadialField, t: f64) -> Result<f64> {
    let (z, dz, d2z) = v.z(t)?;
    Ok(4.0 * z * (1.0 + d2z) - 3.0 * dz * dz)
}

/// Radial convexity criterion on `t_grid`. Fails with an error when
/// `z(t) < 0` at a grid point.
pub fn radial_criterion(v: &RadialField, t_grid: &[f64]) -> Result<RadialCriterion> {
    let mut margins = Vec::with_capacity(t_grid.len());
    let mut witness = None;
    let mut worst = f64::INFINITY;
    let mut degenerate_points = 0;
    for &t in t_grid {
        let (z, dz, d2z) = v.z(t)?;
        if z == 0.0 {
            degenerate_points += 1;
        }
        let lhs = 4.0 * z * (1.0 + d2z);
        let rhs = 3.0 * dz * dz;
        let m = lhs - rhs;
        let tol = 1e-9 * (1.0 + lhs.abs() + rhs.abs());
        if m < worst {
            worst = m;
        }
        if m < -tol && witness.is_none_or(|w: Witness| matches!(w, Witness::Radial { margin, .. } if m < margin)) {
            witness = Some(Witness::Radial { t, margin: m });
        }
        margins.push((t, m));
    }
    let status = if witness.is_some() { Status::Fail } else { Status::Pass };
    Ok(RadialCriterion {
        verdict: ConvexityVerdict {
            status,
            witness,
            checked: t_grid.len(),
            skipped: 0,
            worst_margin: worst,
        },
        margins,
        degenerate_points,
    })
}

/// `n` equally spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(src: &str) -> ScalarField {
        ScalarField::parse(src).unwrap()
    }

    fn cube() -> Region {
        Region::cube(-1.0, 1.0, 6).unwrap()
    }

    #[test]
    fn hessian_check_examples() {
        let pass = check_convex_hessian(&field("x^2+y^2"), &cube(), Exec::Sequential).unwrap();
        assert!(pass.passed());
        assert_eq!(pass.worst_margin, 2.0);
        let t = check_convex_hessian(&field("t"), &cube(), Exec::Sequential).unwrap();
        assert!(t.passed());
        let fail = check_convex_hessian(&field("-x^2"), &cube(), Exec::Parallel).unwrap();
        assert_eq!(fail.status, Status::Fail);
        match fail.witness.unwrap() {
            Witness::Hessian { min_eigenvalue, .. } => assert_eq!(min_eigenvalue, -2.0),
            w => panic!("unexpected witness {w:?}"),
        }
        assert_eq!(fail.witness.unwrap().replay(&field("-x^2")).unwrap(), -2.0);
        assert!(matches!(
            check_convex_hessian(&field("abs(x)"), &cube(), Exec::Sequential),
            Err(Error::Smoothness { .. })
        ));
    }

    #[test]
    fn segment_check_examples() {
        let abs = check_convex_segments(&field("abs(x)"), &cube(), 400, 7, Exec::Parallel).unwrap();
        assert!(abs.passed());
        let neg = field("-((x^2+y^2)^2+t^2)");
        let fail = check_convex_segments(&neg, &cube(), 400, 7, Exec::Parallel).unwrap();
        assert_eq!(fail.status, Status::Fail);
        let w = fail.witness.unwrap();
        let Witness::Segment { violation, .. } = w else {
            panic!()
        };
        assert!((w.replay(&neg).unwrap() - violation).abs() < 1e-12);
        let lin = check_convex_segments(&field("2*x - 3*y + 1"), &cube(), 200, 1, Exec::Sequential).unwrap();
        assert!(lin.passed());
        assert!(lin.worst_margin.abs() < 1e-12);
    }

    #[test]
    fn thin_region_is_inconclusive() {
        let thin = Region::new([-1.0, -1.0, 0.0], [1.0, 1.0, 1e-3], [3; 3]).unwrap();
        let v = check_convex_segments(&field("x^2"), &thin, 200, 3, Exec::Sequential).unwrap();
        assert_eq!(v.status, Status::Inconclusive);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let u = field("x^2 + y^2 + 0.1*t^2");
        let a = check_convex_segments(&u, &cube(), 300, 11, Exec::Sequential).unwrap();
        let b = check_convex_segments(&u, &cube(), 300, 11, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn radial_criterion_examples() {
        let grid = linspace(-2.0, 2.0, 41);
        let gauge = radial_criterion(&RadialField::new("t^2").unwrap(), &grid).unwrap();
        assert!(gauge.verdict.passed());
        assert!(gauge.margins.iter().all(|&(_, m)| m.abs() <= 1e-9));
        assert_eq!(gauge.degenerate_points, 1);
        let shifted = radial_criterion(&RadialField::new("t^2+1").unwrap(), &grid).unwrap();
        assert!(shifted.margins.iter().all(|&(_, m)| (m - 12.0).abs() < 1e-12));
        let e = radial_criterion(&RadialField::new("exp(t)").unwrap(), &grid).unwrap();
        for &(t, m) in &e.margins {
            let expect = 4.0 * t.exp() + (2.0 * t).exp();
            assert!((m - expect).abs() < 1e-12 * expect.max(1.0));
        }
        assert!(radial_criterion(&RadialField::new("-1").unwrap(), &grid).is_err());
    }

    #[test]
    fn radial_criterion_failure() {
        // z = 1 + 10t²: margin 84 - 360t² < 0 for |t| > 0.483
        let v = RadialField::new("1 + 10*t^2").unwrap();
        let c = radial_criterion(&v, &linspace(-1.0, 1.0, 21)).unwrap();
        assert_eq!(c.verdict.status, Status::Fail);
        let Some(Witness::Radial { t, margin }) = c.verdict.witness else {
            panic!()
        };
        assert_eq!(radial_margin(&v, t).unwrap(), margin);
        assert!(margin < 0.0);
    }

    #[test]
    fn region_parsing() {
        let r: Region = "-1:1,-2:2,0:3".parse().unwrap();
        assert_eq!(r.lo, [-1.0, -2.0, 0.0]);
        assert_eq!(r.volume(), 24.0);
        assert!("1:1,0:1,0:1".parse::<Region>().is_err());
        assert!("0:1,0:1".parse::<Region>().is_err());
    }
}
