//! The H-normal map of radial functions `u = U(r, t)`.
//!
//! On a horizontal circle `{r = R, t}` the map sends the point to a vector
//! of norm `R' = √(U_r² + 4R²U_t²)`, so images of discs are discs.

use serde::Serialize;

use crate::calculus::horizontal_gradient;
use crate::fielddsl::{DiffMode, RadialProfile, ScalarField};
use crate::hgroup::Point;
use crate::{Error, Result};

/// Image radius of the circle `{r = radius}` at height `t`.
pub fn radial_circle_image(profile: &RadialProfile, t: f64, radius: f64) -> Result<f64> {
    if !(radius >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be non-negative, got {radius}"
        )));
    }
    let (ur, ut) = profile.first(radius, t)?;
    let r = (ur * ur + 4.0 * radius * radius * ut * ut).sqrt();
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonsmoothPoint(Point::new(radius, 0.0, t)))
    }
}

/// Image of the open disc `{r < R}` at height `t`, a disc centred at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscImage {
    pub radius: f64,
    /// True when the supremum is only reached in the limit `r → R`.
    pub open: bool,
    pub argmax_r: f64,
    /// Grid radii where the derivatives could not be evaluated.
    pub skipped: usize,
}

/// `sup_{0 ≤ r < R} R'(r)`, taken over `n_r + 1` equispaced radii with the
/// last one standing in for the limit at `R`.
pub fn disc_image_radius(profile: &RadialProfile, t: f64, radius: f64, n_r: usize) -> Result<DiscImage> {
    if n_r == 0 {
        return Err(Error::InvalidArgument("n_r must be positive".into()));
    }
    let mut best: Option<(f64, usize)> = None;
    let mut skipped = 0;
    for k in 0..=n_r {
        let r = radius * k as f64 / n_r as f64;
        match radial_circle_image(profile, t, r) {
            Ok(v) => {
                if best.is_none_or(|b| v > b.0) {
                    best = Some((v, k));
                }
            }
            Err(Error::InvalidArgument(m)) => return Err(Error::InvalidArgument(m)),
            Err(_) => skipped += 1,
        }
    }
    let (value, k) = best.ok_or_else(|| Error::NonsmoothPoint(Point::new(radius, 0.0, t)))?;
    Ok(DiscImage {
        radius: value,
        open: k == n_r && radius > 0.0,
        argmax_r: radius * k as f64 / n_r as f64,
        skipped,
    })
}

/// Worst margin of one form of the monotonicity condition on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormReport {
    pub pass: bool,
    /// Every `r > 0` grid point has a strictly positive margin.
    pub strict: bool,
    pub worst_margin: f64,
    pub witness: Option<(f64, f64)>,
    pub checked: usize,
}

impl FormReport {
    fn new() -> Self {
        FormReport {
            pass: true,
            strict: true,
            worst_margin: f64::INFINITY,
            witness: None,
            checked: 0,
        }
    }

    fn record(&mut self, r: f64, t: f64, m: f64, tol: f64) {
        self.checked += 1;
        if m < self.worst_margin {
            self.worst_margin = m;
            if m < -tol {
                self.witness = Some((r, t));
            }
        }
        if m < -tol {
            self.pass = false;
        }
        if r > 0.0 && m <= tol {
            self.strict = false;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub pass: bool,
    /// Margin `V_r V_rr - r³ V_tr²`.
    pub v_form: FormReport,
    /// Margin `16 z² + r⁴ (16 z - z'²)`, for the `z` family only.
    pub z_form: Option<FormReport>,
    pub skipped: usize,
}

/// Evaluates the radial monotonicity condition `r³V_tr² < V_r V_rr` on the
/// grid `r_grid × t_grid`, and for the `z` family also its polynomial form.
/// Both forms are checked non-strictly; `strict` records whether the
/// inequality is strict away from `r = 0`.
pub fn monotonicity_condition(v: &RadialProfile, r_grid: &[f64], t_grid: &[f64]) -> Result<MonotonicityReport> {
    if r_grid.is_empty() || t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let mut vf = FormReport::new();
    let mut zf = v.family().map(|_| FormReport::new());
    let mut skipped = 0;
    for &t in t_grid {
        for &r in r_grid {
            if r < 0.0 {
                return Err(Error::InvalidArgument(format!("negative radius {r}")));
            }
            match v.jet(r, t) {
                Ok(j) if [j.ur, j.urr, j.urt].iter().all(|x| x.is_finite()) => {
                    let a = j.ur * j.urr;
                    let b = r.powi(3) * j.urt * j.urt;
                    vf.record(r, t, a - b, 1e-12 * (1.0 + a.abs() + b.abs()));
                }
                _ => skipped += 1,
            }
            if let (Some(report), Some(fam)) = (zf.as_mut(), v.family()) {
                let (z, dz, _) = fam.eval(t)?;
                let r4 = r.powi(4);
                let (a, b) = (16.0 * z * z + 16.0 * r4 * z, r4 * dz * dz);
                report.record(r, t, a - b, 1e-12 * (1.0 + a.abs() + b.abs()));
            }
        }
    }
    if vf.checked == 0 {
        return Err(Error::NonsmoothPoint(Point::new(r_grid[0], 0.0, t_grid[0])));
    }
    let pass = vf.pass && zf.as_ref().is_none_or(|z| z.pass);
    Ok(MonotonicityReport {
        pass,
        v_form: vf,
        z_form: zf,
        skipped,
    })
}

/// Scaling between two functions vanishing at a common boundary point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryScaling {
    /// `s̄` with `∇_H v(ḡ) = s̄ ∇_H u(ḡ)`.
    pub s: f64,
    /// `|∇_H u × ∇_H v| / (|∇_H u| |∇_H v|)`.
    pub misalignment: f64,
}

/// At `ḡ ∈ ∂Ω` with `u(ḡ) = v(ḡ) = 0` and `u ≤ v` on `Ω`, the horizontal
/// gradients are parallel and `∇_H v = s̄ ∇_H u` with `0 < s̄ ≤ 1`.
pub fn boundary_scaling(u: &ScalarField, v: &ScalarField, gbar: Point) -> Result<BoundaryScaling> {
    let tol = 1e-8;
    let (u0, v0) = (u.value(gbar)?, v.value(gbar)?);
    if u0.abs() > tol || v0.abs() > tol {
        return Err(Error::Precondition(format!(
            "u = {u0}, v = {v0} at {gbar}; both must vanish"
        )));
    }
    let gu = horizontal_gradient(u, gbar, DiffMode::Auto)?;
    let gv = horizontal_gradient(v, gbar, DiffMode::Auto)?;
    let (nu, nv) = (gu.norm(), gv.norm());
    if nu <= tol {
        return Err(Error::Precondition(format!("∇_H u vanishes at {gbar}")));
    }
    if nv <= tol {
        return Err(Error::Precondition(format!("∇_H v vanishes at {gbar}")));
    }
    let misalignment = gu.cross(gv).abs() / (nu * nv);
    if misalignment > 1e-6 || gu.dot(gv) <= 0.0 {
        return Err(Error::Precondition(format!(
            "gradients at {gbar} are not positively parallel"
        )));
    }
    let s = nv / nu;
    if s > 1.0 + 1e-9 {
        return Err(Error::Precondition(format!(
            "s = {s} exceeds 1, so u ≤ v fails near {gbar}"
        )));
    }
    Ok(BoundaryScaling { s, misalignment })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceReport {
    pub t: f64,
    /// Radius of the slice `Ω ∩ {t}`.
    pub boundary_radius: f64,
    pub radius_u: f64,
    pub radius_v: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub holds: bool,
    pub slices: Vec<SliceReport>,
    /// Largest image radii over all slices.
    pub radius_u: f64,
    pub radius_v: f64,
    pub monotonicity: MonotonicityReport,
}

fn sign_tol(a: f64) -> f64 {
    1e-12 * (1.0 + a.abs())
}

/// Slice radius: the first zero of `r ↦ U(r, t)` past the grid point where it
/// turns non-negative, refined by bisection.
fn slice_radius(u: &RadialProfile, t: f64, r_grid: &[f64]) -> Result<Option<f64>> {
    if u.value(r_grid[0], t)? >= 0.0 {
        return Ok(None);
    }
    for w in r_grid.windows(2) {
        if u.value(w[1], t)? >= 0.0 {
            let (mut a, mut b) = (w[0], w[1]);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if u.value(m, t)? < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
    }
    Err(Error::Precondition(format!(
        "slice t = {t} of the sublevel set is not bounded by the r grid"
    )))
}

/// Compares `∂_H v(Ω)` with `∂_H u(Ω)` for radial `u ≤ v` sharing
/// `Ω = {u < 0} = {v < 0}`, slice by slice in `t`.
///
/// Rejects pairs that do not share the sublevel set on the grid, that
/// violate `u ≤ v` inside it, or where `v` fails the monotonicity condition.
pub fn check_inclusion_radial(
    u: &RadialProfile,
    v: &RadialProfile,
    t_grid: &[f64],
    r_grid: &[f64],
    n_r: usize,
) -> Result<InclusionReport> {
    if r_grid.len() < 2 || t_grid.is_empty() {
        return Err(Error::InvalidArgument("need at least two radii and one height".into()));
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) || r_grid[0] < 0.0 {
        return Err(Error::InvalidArgument(
            "r grid must be increasing and non-negative".into(),
        ));
    }
    for &t in t_grid {
        for &r in r_grid {
            let (a, b) = (u.value(r, t)?, v.value(r, t)?);
            let (za, zb) = (a.abs() <= sign_tol(a), b.abs() <= sign_tol(b));
            if za != zb || (!za && (a < 0.0) != (b < 0.0)) {
                return Err(Error::Precondition(format!("sublevel sets differ at r = {r}, t = {t}")));
            }
            if a < 0.0 && a > b + sign_tol(a) + sign_tol(b) {
                return Err(Error::Precondition(format!("u > v at r = {r}, t = {t}")));
            }
        }
    }
    let monotonicity = monotonicity_condition(v, r_grid, t_grid)?;
    if !monotonicity.pass {
        return Err(Error::Precondition("v fails the monotonicity condition".into()));
    }
    let mut slices = Vec::new();
    for &t in t_grid {
        let Some(rb) = slice_radius(u, t, r_grid)? else {
            continue;
        };
        let du = disc_image_radius(u, t, rb, n_r)?;
        let dv = disc_image_radius(v, t, rb, n_r)?;
        let ratio = if du.radius > 0.0 {
            dv.radius / du.radius
        } else {
            f64::NAN
        };
        slices.push(SliceReport {
            t,
            boundary_radius: rb,
            radius_u: du.radius,
            radius_v: dv.radius,
            ratio,
        });
    }
    let holds = slices
        .iter()
        .all(|s| s.radius_v <= s.radius_u + 1e-9 * (1.0 + s.radius_u));
    let radius_u = slices.iter().map(|s| s.radius_u).fold(0.0, f64::max);
    let radius_v = slices.iter().map(|s| s.radius_v).fold(0.0, f64::max);
    Ok(InclusionReport {
        holds,
        slices,
        radius_u,
        radius_v,
        monotonicity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexity::linspace;
    use crate::fielddsl::RadialField;

    #[test]
    fn circle_image_of_gauge_is_one() {
        let v = RadialField::new("t^2").unwrap();
        for &r in &[0.1, 1.0, 3.0] {
            assert!((radial_circle_image(v.profile(), 0.0, r).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn disc_image_of_paraboloid() {
        let u = RadialProfile::parse("r^4+t^2-1").unwrap();
        let d = disc_image_radius(&u, 0.0, 1.0, 100).unwrap();
        assert!((d.radius - 4.0).abs() < 1e-12);
        assert!(d.open);
    }

    #[test]
    fn monotonicity_examples() {
        let r = linspace(0.0, 2.0, 41);
        let t = linspace(-1.0, 1.0, 41);
        for z in ["t^2", "t^2+1"] {
            let rep = monotonicity_condition(RadialField::new(z).unwrap().profile(), &r, &t).unwrap();
            assert!(rep.pass, "{z}");
        }
        let bad = monotonicity_condition(RadialField::new("exp(3*t)").unwrap().profile(), &r, &t).unwrap();
        assert!(!bad.pass);
        assert!(bad.v_form.witness.is_some());
        assert!(!bad.z_form.unwrap().pass);
    }

    #[test]
    fn scaling_of_half() {
        let u = ScalarField::parse("(x^2+y^2)^2+t^2-1").unwrap();
        let v = ScalarField::parse("((x^2+y^2)^2+t^2-1)/2").unwrap();
        let s = boundary_scaling(&u, &v, Point::new(1.0, 0.0, 0.0)).unwrap();
        assert!((s.s - 0.5).abs() < 1e-12);
        assert!(matches!(
            boundary_scaling(&v, &u, Point::new(1.0, 0.0, 0.0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn inclusion_half_ratio() {
        let u = RadialProfile::parse("r^4+t^2-1").unwrap();
        let v = RadialProfile::parse("(r^4+t^2-1)/2").unwrap();
        let rep = check_inclusion_radial(&u, &v, &linspace(-0.9, 0.9, 19), &linspace(0.0, 1.5, 31), 200).unwrap();
        assert!(rep.holds);
        for s in &rep.slices {
            assert!((s.ratio - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn inclusion_rejects_u_above_v() {
        let u = RadialProfile::parse("(r^4+t^2-1)/2").unwrap();
        let v = RadialProfile::parse("r^4+t^2-1").unwrap();
        assert!(matches!(
            check_inclusion_radial(&u, &v, &[0.0], &linspace(0.0, 1.5, 31), 50),
            Err(Error::Precondition(_))
        ));
    }
}
