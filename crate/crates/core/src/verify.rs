//! The invariant suite behind `heis verify`, plus the random generators it
//! shares with the tests.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::calculus::{commutator_residual, horizontal_gradient};
use crate::convexity::{check_convex_hessian, check_convex_segments, linspace, radial_criterion, sample_rng, Region};
use crate::exec::Exec;
use crate::fielddsl::{DiffMode, Expr, RadialField, RadialProfile, ScalarField, Var};
use crate::hgroup::{HVector, Point};
use crate::mongeampere::{jacobian_identity_check, ma_measure, sma_operator};
use crate::quadrature::QuadratureSpec;
use crate::rockafellar::{build_chain, build_chain_with, reconstruct, Chain};
use crate::subdiff::{
    boundary_scaling, check_inclusion_radial, hausdorff, monotonicity_condition, radial_circle_image,
    reconstruct_subdifferential, ConvexSet,
};
use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Uniform point in `[-scale, scale]³`.
pub fn random_point(rng: &mut impl Rng, scale: f64) -> Point {
    Point::new(
        rng.gen_range(-scale..=scale),
        rng.gen_range(-scale..=scale),
        rng.gen_range(-scale..=scale),
    )
}

/// Random polynomial in `x, y, t` of total degree at most `degree`, with
/// integer coefficients in `[-3, 3]` on about half of the monomials.
pub fn random_polynomial(rng: &mut impl Rng, degree: u32) -> Expr {
    let mut acc = Expr::num(0.0);
    for i in 0..=degree {
        for j in 0..=degree - i {
            for k in 0..=degree - i - j {
                if !rng.gen_bool(0.5) {
                    continue;
                }
                let c = rng.gen_range(-3i32..=3);
                if c == 0 {
                    continue;
                }
                let mut term = Expr::num(c as f64);
                for (v, e) in [(Var::X, i), (Var::Y, j), (Var::T, k)] {
                    if e > 0 {
                        term = Expr::mul(term, Expr::pow(Expr::var(v), Expr::num(e as f64)));
                    }
                }
                acc = Expr::add(acc, term);
            }
        }
    }
    acc
}

/// `a x² + 2b xy + c y² + d x + e y + f t + k` with a positive semidefinite
/// quadratic part, hence convex along every horizontal segment.
pub fn random_convex_quadratic(rng: &mut impl Rng) -> ScalarField {
    let (l11, l21, l22) = (
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
    );
    let (a, b, c): (f64, f64, f64) = (l11 * l11, l11 * l21, l21 * l21 + l22 * l22);
    let lin: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let src = format!(
        "{a}*x^2 + {}*x*y + {c}*y^2 + {}*x + {}*y + {}*t + {}",
        2.0 * b,
        lin[0],
        lin[1],
        lin[2],
        lin[3]
    );
    ScalarField::parse(&src.replace("+ -", "- ")).expect("generated source parses")
}

/// A random valid chain of `len` links for `u`, with `p_i = ∇_H u(g_i)` and
/// each `g_{i+1}` drawn from `H_{g_i}`.
pub fn random_chain(u: &ScalarField, rng: &mut impl Rng, len: usize, scale: f64) -> Result<Chain> {
    let mut pts = vec![random_point(rng, scale)];
    for _ in 0..len {
        let g = *pts.last().unwrap();
        let v = HVector::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale));
        pts.push(g.exp_horizontal(v));
    }
    let nodes = pts
        .into_iter()
        .map(|g| {
            Ok(crate::rockafellar::ChainNode {
                g,
                p: horizontal_gradient(u, g, DiffMode::Exact)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Chain::new(nodes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// The measured quantity (worst error, value, ...).
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub exec: Exec,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 7,
            exec: Exec::default(),
        }
    }
}

fn check(name: &'static str, value: f64, tolerance: f64, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name,
        passed: value <= tolerance,
        value,
        tolerance,
        detail: detail.into(),
    }
}

fn boolean(name: &'static str, ok: bool, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name,
        passed: ok,
        value: if ok { 0.0 } else { 1.0 },
        tolerance: 0.0,
        detail: detail.into(),
    }
}

fn guarded(name: &'static str, f: impl FnOnce() -> Result<CheckResult>) -> CheckResult {
    f().unwrap_or_else(|e| boolean(name, false, format!("error: {e}")))
}

fn group_laws(seed: u64) -> CheckResult {
    let mut rng = sample_rng(seed, 0);
    let mut worst = 0.0_f64;
    for _ in 0..10_000 {
        let (a, b, c) = (
            random_point(&mut rng, 2.0),
            random_point(&mut rng, 2.0),
            random_point(&mut rng, 2.0),
        );
        let lam = rng.gen_range(0.0..3.0);
        let d = |p: Point, q: Point| (p.x - q.x).abs().max((p.y - q.y).abs()).max((p.t - q.t).abs());
        worst = worst
            .max(d(a.mul(b).mul(c), a.mul(b.mul(c))))
            .max(d(a.mul(Point::IDENTITY), a))
            .max(d(a.mul(a.inverse()), Point::IDENTITY))
            .max((a.dilate_unchecked(lam).gauge() - lam * a.gauge()).abs())
            .max((c.mul(a).distance(c.mul(b)) - a.distance(b)).abs());
    }
    check(
        "group_laws",
        worst,
        1e-12,
        "associativity, identity, inverse, homogeneity, left invariance on 10^4 samples",
    )
}

fn commutator(seed: u64) -> Result<CheckResult> {
    let mut rng = sample_rng(seed, 1);
    let (mut exact, mut fd) = (0.0_f64, 0.0_f64);
    for _ in 0..20 {
        let u = ScalarField::from_expr(random_polynomial(&mut rng, 3));
        for _ in 0..100 {
            let g = random_point(&mut rng, 1.0);
            exact = exact.max(commutator_residual(&u, g, DiffMode::Exact)?.abs());
            fd = fd.max(commutator_residual(&u, g, DiffMode::FiniteDifference)?.abs());
        }
    }
    let mut c = check(
        "commutator",
        exact.max(fd * 1e-6),
        1e-10,
        format!("exact {exact:.3e}, finite differences {fd:.3e}"),
    );
    c.passed = exact <= 1e-10 && fd <= 1e-4;
    Ok(c)
}

fn radial_boundary(exec: Exec) -> Result<CheckResult> {
    let v = RadialField::new("t^2")?;
    let rc = radial_criterion(&v, &linspace(-1.0, 1.0, 1001))?;
    let worst = rc.margins.iter().map(|m| m.1.abs()).fold(0.0, f64::max);
    let hv = check_convex_hessian(v.field(), &Region::cube(-1.0, 1.0, 11)?, exec)?;
    let mut c = check(
        "radial_boundary",
        worst,
        1e-9,
        format!("hessian check on the gauge: {:?}", hv.status),
    );
    c.passed &= hv.passed();
    Ok(c)
}

fn normal_map_radius(seed: u64) -> Result<CheckResult> {
    let mut rng = sample_rng(seed, 3);
    let mut worst = 0.0_f64;
    for z in ["t^2", "t^2+1", "exp(t)"] {
        let v = RadialField::new(z)?;
        for _ in 0..100 {
            let (r, t, th) = (
                rng.gen_range(0.1..2.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..TAU),
            );
            let closed = radial_circle_image(v.profile(), t, r)?;
            let g = Point::new(r * th.cos(), r * th.sin(), t);
            let grad = horizontal_gradient(v.field(), g, DiffMode::Exact)?.norm();
            worst = worst.max((closed - grad).abs() / closed.abs().max(1e-300));
        }
    }
    Ok(check(
        "normal_map_radius",
        worst,
        1e-8,
        "closed-form radius vs |grad_H v|",
    ))
}

fn monotonicity_and_inclusion() -> Result<CheckResult> {
    let (r, t) = (linspace(0.0, 2.0, 81), linspace(-2.0, 2.0, 81));
    let mut ok = true;
    for z in ["t^2", "t^2+1"] {
        ok &= monotonicity_condition(RadialField::new(z)?.profile(), &r, &t)?.pass;
    }
    let u = RadialProfile::parse("r^4+t^2-1")?;
    let v = RadialProfile::parse("(r^4+t^2-1)/2")?;
    let rep = check_inclusion_radial(&u, &v, &linspace(-0.95, 0.95, 39), &linspace(0.0, 1.5, 31), 200)?;
    let ratio_err = rep.slices.iter().map(|s| (s.ratio - 0.5).abs()).fold(0.0, f64::max);
    let uf = ScalarField::parse("(x^2+y^2)^2+t^2-1")?;
    let vf = ScalarField::parse("((x^2+y^2)^2+t^2-1)/2")?;
    let s = boundary_scaling(&uf, &vf, Point::new(0.36f64.powf(0.25), 0.0, 0.8))?;
    let err = ratio_err.max((s.s - 0.5).abs());
    let mut c = check(
        "monotonicity_inclusion",
        err,
        1e-9,
        format!("{} slices, scaling {}", rep.slices.len(), s.s),
    );
    c.passed &= ok && rep.holds && !rep.slices.is_empty();
    Ok(c)
}

fn monge_ampere(seed: u64, exec: Exec) -> Result<CheckResult> {
    let u = ScalarField::parse("x^2+y^2")?;
    let m = ma_measure(&u, &Region::cube(0.0, 1.0, 2)?, &QuadratureSpec::default(), true, exec)?;
    let t = ScalarField::parse("t")?;
    let sma = sma_operator(&t, Point::new(0.4, -0.7, 0.1), DiffMode::Exact)?;
    let mut rng = sample_rng(seed, 5);
    let mut jac = 0.0_f64;
    for _ in 0..20 {
        let f = ScalarField::from_expr(random_polynomial(&mut rng, 3));
        let g = random_point(&mut rng, 1.0);
        jac = jac.max(jacobian_identity_check(&f, g, DiffMode::Exact)?.residual);
    }
    let mut c = check(
        "monge_ampere",
        (m.value - 4.0).abs(),
        1e-9,
        format!("measure {}, S_ma(t) {sma}, jacobian {jac:.3e}", m.value),
    );
    c.passed &= sma == 12.0 && jac <= 1e-10;
    Ok(c)
}

fn rockafellar_law() -> Result<CheckResult> {
    let u = ScalarField::parse("x^2+y^2")?;
    let (e, x1) = (Point::IDENTITY, Point::new(1.0, 0.0, 0.0));
    let mut err = 0.0_f64;
    for n in [10usize, 100, 1000] {
        let c = build_chain(&u, e, x1, n)?;
        err = err.max((c.sum() - (n as f64 - 1.0) / n as f64).abs());
    }
    let r = reconstruct(&u, e, x1, 1e-3)?;
    err = err.max((r.gap_bound - 2.0 / r.n_used as f64).abs());
    let v = reconstruct(&u, e, Point::new(0.0, 0.0, 1.0), 1e-3)?;
    let mut c = check(
        "rockafellar",
        err,
        1e-12,
        format!(
            "planar value {} at N = {}, vertical value {}",
            r.value, r.n_used, v.value
        ),
    );
    c.passed &= (0.999..=1.0).contains(&r.value) && v.value <= 0.0 && v.value.abs() <= 1e-3;
    Ok(c)
}

fn subdifferentials(exec: Exec) -> Result<CheckResult> {
    let e = Point::IDENTITY;
    let abs = reconstruct_subdifferential(&ScalarField::parse("abs(x)")?, e, 360, exec)?;
    let seg = ConvexSet::from_ccw(vec![HVector::new(-1.0, 0.0), HVector::new(1.0, 0.0)]);
    let h_abs = hausdorff(&abs.set, &seg, 3600);
    let rho = reconstruct_subdifferential(&ScalarField::parse("((x^2+y^2)^2+t^2)^(1/4)")?, e, 720, exec)?;
    let h_rho = (0..3600)
        .map(|k| (rho.set.support(HVector::from_angle(TAU * k as f64 / 3600.0)) - 1.0).abs())
        .fold(0.0, f64::max);
    let smooth = reconstruct_subdifferential(
        &ScalarField::parse("x^2+y^2+x*t")?,
        Point::new(0.2, 0.1, -0.3),
        720,
        exec,
    )?;
    let mut c = check(
        "subdifferential",
        h_rho,
        1e-2,
        format!(
            "abs: {h_abs:.3e}, gauge: {h_rho:.3e}, smooth diameter {:.3e}",
            smooth.set.diameter
        ),
    );
    c.passed &= h_abs <= 0.05 && smooth.set.diameter <= 1e-4;
    Ok(c)
}

fn lower_bound(seed: u64) -> Result<CheckResult> {
    let mut rng = sample_rng(seed, 9);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let u = random_convex_quadratic(&mut rng);
        let len = rng.gen_range(1..12);
        let c = random_chain(&u, &mut rng, len, 1.0)?;
        worst = worst.max(-c.gap(&u)?);
    }
    Ok(check(
        "chain_lower_bound",
        worst,
        1e-9,
        "max of chain_sum - (u(g_n) - u(g_0)) over 10^3 chains",
    ))
}

fn falsification(seed: u64, exec: Exec) -> Result<CheckResult> {
    let region = Region::cube(-1.0, 1.0, 11)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for src in ["-x^2", "-((x^2+y^2)^2+t^2)"] {
        let u = ScalarField::parse(src)?;
        let h = check_convex_hessian(&u, &region, exec)?;
        let s = check_convex_segments(&u, &region, 2000, seed, exec)?;
        let hw = h.witness.map(|w| w.replay(&u)).transpose()?;
        let sw = s.witness.map(|w| w.replay(&u)).transpose()?;
        ok &= !h.passed() && !s.passed() && hw.is_some_and(|v| v < 0.0) && sw.is_some_and(|v| v > 0.0);
        detail.push(format!("{src}: {:?}/{:?}", h.status, s.status));
    }
    Ok(boolean("falsification", ok, detail.join(", ")))
}

fn chain_selector_abs() -> Result<CheckResult> {
    let u = ScalarField::parse("abs(x)")?;
    let (g0, g) = (Point::new(-1.0, 0.2, 0.0), Point::new(1.0, 0.7, 0.5));
    let c = build_chain_with(g0, g, 64, Exec::Sequential, |p| {
        Ok(HVector::new(p.x.signum() * (p.x != 0.0) as i32 as f64, 0.0))
    })?;
    let gap = c.gap(&u)?;
    let excess = (-gap).max(gap - c.gap_bound());
    Ok(check(
        "chain_selector",
        excess,
        1e-9,
        format!(
            "abs(x) with a sign selector: gap {gap:.3e}, bound {:.3e}",
            c.gap_bound()
        ),
    ))
}

/// Runs every invariant and returns a report with one entry per check.
pub fn run_suite(opts: SuiteOptions) -> SuiteReport {
    let start = Instant::now();
    let (seed, exec) = (opts.seed, opts.exec);
    let checks = vec![
        group_laws(seed),
        guarded("commutator", || commutator(seed)),
        guarded("radial_boundary", || radial_boundary(exec)),
        guarded("normal_map_radius", || normal_map_radius(seed)),
        guarded("monotonicity_inclusion", monotonicity_and_inclusion),
        guarded("monge_ampere", || monge_ampere(seed, exec)),
        guarded("rockafellar", rockafellar_law),
        guarded("subdifferential", || subdifferentials(exec)),
        guarded("chain_lower_bound", || lower_bound(seed)),
        guarded("falsification", || falsification(seed, exec)),
        guarded("chain_selector", chain_selector_abs),
    ];
    log::info!("verify suite finished in {:.2?}", start.elapsed());
    SuiteReport {
        schema_version: SCHEMA_VERSION,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_quadratics_are_convex() {
        let mut rng = sample_rng(3, 0);
        for _ in 0..20 {
            let u = random_convex_quadratic(&mut rng);
            let v = check_convex_hessian(&u, &Region::cube(-1.0, 1.0, 3).unwrap(), Exec::Sequential).unwrap();
            assert!(v.passed(), "{}", u.name());
        }
    }

    #[test]
    fn random_chains_are_valid() {
        let mut rng = sample_rng(4, 0);
        let u = random_convex_quadratic(&mut rng);
        let c = random_chain(&u, &mut rng, 10, 1.0).unwrap();
        assert_eq!(c.len(), 10);
    }
}
