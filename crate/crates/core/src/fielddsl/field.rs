use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::expr::{EvalError, Expr, Var};
use super::parse::parse;
use crate::hgroup::Point;
use crate::{Error, Result};

/// Regularity class of a field. Ordered: `C0 < C1 < C2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Smoothness {
    C0,
    C1,
    C2,
}

impl fmt::Display for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Smoothness::C0 => "C0",
            Smoothness::C1 => "C1",
            Smoothness::C2 => "C2",
        })
    }
}

/// How partial derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DiffMode {
    /// Exact when symbolic partials exist, finite differences otherwise.
    #[default]
    Auto,
    Exact,
    FiniteDifference,
}

/// Euclidean partials of a field at a point, up to second order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dt: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dxt: f64,
    pub dyy: f64,
    pub dyt: f64,
    pub dtt: f64,
}

#[derive(Debug)]
struct Partials {
    first: [Expr; 3],
    // xx, xy, xt, yy, yt, tt
    second: [Expr; 6],
}

impl Partials {
    fn of(e: &Expr) -> Self {
        let first = Var::ALL.map(|v| e.diff(v));
        let second = [
            first[0].diff(Var::X),
            first[0].diff(Var::Y),
            first[0].diff(Var::T),
            first[1].diff(Var::Y),
            first[1].diff(Var::T),
            first[2].diff(Var::T),
        ];
        Partials { first, second }
    }
}

type FieldFn = dyn Fn(Point) -> f64 + Send + Sync;

#[derive(Clone)]
enum Source {
    Expr {
        expr: Expr,
        partials: Option<Arc<Partials>>,
    },
    Func(Arc<FieldFn>),
}

/// An evaluatable function `u: H¹ → ℝ`, with symbolic partials when built
/// from an expression.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    source: Source,
    smoothness: Smoothness,
    /// Evaluation requires `domain(g) >= 0`.
    domain: Option<Expr>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("smoothness", &self.smoothness)
            .field("exact", &self.has_exact())
            .finish()
    }
}

const FD_STEP_1: f64 = 1e-5;
const FD_STEP_2: f64 = 1e-4;

impl ScalarField {
    /// Builds a field with exact partials. Smoothness is `C0` if the tree
    /// contains `abs`/`sign`, `C2` otherwise.
    pub fn from_expr(expr: Expr) -> Self {
        let smoothness = if expr.has_kinks() {
            Smoothness::C0
        } else {
            Smoothness::C2
        };
        let partials = Some(Arc::new(Partials::of(&expr)));
        ScalarField {
            name: expr.to_string(),
            source: Source::Expr { expr, partials },
            smoothness,
            domain: None,
        }
    }

    pub fn parse(src: &str) -> Result<Self> {
        Ok(Self::from_expr(parse(src)?))
    }

    /// A field backed by a closure; derivatives come from finite differences.
    pub fn from_fn<F>(name: impl Into<String>, smoothness: Smoothness, f: F) -> Self
    where
        F: Fn(Point) -> f64 + Send + Sync + 'static,
    {
        ScalarField {
            name: name.into(),
            source: Source::Func(Arc::new(f)),
            smoothness,
            domain: None,
        }
    }

    /// Drops the symbolic partials so every derivative goes through finite
    /// differences.
    pub fn without_exact(mut self) -> Self {
        if let Source::Expr { partials, .. } = &mut self.source {
            *partials = None;
        }
        self
    }

    pub fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = s;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Restricts evaluation to points where `guard >= 0`.
    pub fn with_domain(mut self, guard: Expr) -> Self {
        self.domain = Some(guard);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn has_exact(&self) -> bool {
        matches!(&self.source, Source::Expr { partials: Some(_), .. })
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.source {
            Source::Expr { expr, .. } => Some(expr),
            Source::Func(_) => None,
        }
    }

    pub fn require(&self, required: Smoothness) -> Result<()> {
        if self.smoothness < required {
            return Err(Error::Smoothness {
                required,
                found: self.smoothness,
            });
        }
        Ok(())
    }

    fn check_domain(&self, g: Point) -> Result<()> {
        if let Some(guard) = &self.domain {
            let v = guard.eval([g.x, g.y, g.t]).map_err(|e| Error::eval(g, e))?;
            if v < 0.0 {
                return Err(Error::eval(
                    g,
                    EvalError::Domain {
                        func: "domain guard",
                        arg: v,
                    },
                ));
            }
        }
        Ok(())
    }

    pub fn value(&self, g: Point) -> Result<f64> {
        self.check_domain(g)?;
        match &self.source {
            Source::Expr { expr, .. } => expr.eval([g.x, g.y, g.t]).map_err(|e| Error::eval(g, e)),
            Source::Func(f) => {
                let v = f(g);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::eval(g, EvalError::NonFinite))
                }
            }
        }
    }

    fn partials_for(&self, mode: DiffMode) -> Result<Option<&Partials>> {
        let exact = match &self.source {
            Source::Expr { partials: Some(p), .. } => Some(&**p),
            _ => None,
        };
        match mode {
            DiffMode::Auto => Ok(exact),
            DiffMode::FiniteDifference => Ok(None),
            DiffMode::Exact => exact
                .map(Some)
                .ok_or_else(|| Error::InvalidArgument(format!("field `{}` has no exact partials", self.name))),
        }
    }

    fn eval_partial(&self, e: &Expr, g: Point) -> Result<f64> {
        e.eval_strict([g.x, g.y, g.t]).map_err(|err| match err {
            EvalError::Kink => Error::NonsmoothPoint(g),
            other => Error::eval(g, other),
        })
    }

    /// Euclidean gradient `(u_x, u_y, u_t)`.
    pub fn gradient(&self, g: Point, mode: DiffMode) -> Result<[f64; 3]> {
        self.check_domain(g)?;
        match self.partials_for(mode)? {
            Some(p) => Ok([
                self.eval_partial(&p.first[0], g)?,
                self.eval_partial(&p.first[1], g)?,
                self.eval_partial(&p.first[2], g)?,
            ]),
            None => self.fd_gradient(g),
        }
    }

    /// Value with all first and second Euclidean partials.
    pub fn jet(&self, g: Point, mode: DiffMode) -> Result<Jet> {
        let value = self.value(g)?;
        match self.partials_for(mode)? {
            Some(p) => {
                let d = |e: &Expr| self.eval_partial(e, g);
                Ok(Jet {
                    value,
                    dx: d(&p.first[0])?,
                    dy: d(&p.first[1])?,
                    dt: d(&p.first[2])?,
                    dxx: d(&p.second[0])?,
                    dxy: d(&p.second[1])?,
                    dxt: d(&p.second[2])?,
                    dyy: d(&p.second[3])?,
                    dyt: d(&p.second[4])?,
                    dtt: d(&p.second[5])?,
                })
            }
            None => self.fd_jet(g, value),
        }
    }

    fn shifted(g: Point, axis: usize, h: f64) -> Point {
        let mut c = [g.x, g.y, g.t];
        c[axis] += h;
        Point::new(c[0], c[1], c[2])
    }

    fn coord(g: Point, axis: usize) -> f64 {
        [g.x, g.y, g.t][axis]
    }

    fn fd_gradient(&self, g: Point) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        let u0 = self.value(g)?;
        for (axis, slot) in out.iter_mut().enumerate() {
            let h = FD_STEP_1 * (1.0 + Self::coord(g, axis).abs());
            let up = self.value(Self::shifted(g, axis, h))?;
            let dn = self.value(Self::shifted(g, axis, -h))?;
            if self.smoothness == Smoothness::C0 {
                // One-sided slopes disagree at a kink.
                let fwd = (up - u0) / h;
                let bwd = (u0 - dn) / h;
                if (fwd - bwd).abs() > 1e-3 * (1.0 + fwd.abs().max(bwd.abs())) {
                    return Err(Error::NonsmoothPoint(g));
                }
            }
            *slot = (up - dn) / (2.0 * h);
        }
        Ok(out)
    }

    fn fd_jet(&self, g: Point, value: f64) -> Result<Jet> {
        let [dx, dy, dt] = self.fd_gradient(g)?;
        let h: [f64; 3] = std::array::from_fn(|a| FD_STEP_2 * (1.0 + Self::coord(g, a).abs()));
        let u = |p: Point| self.value(p);
        let diag = |a: usize| -> Result<f64> {
            let up = u(Self::shifted(g, a, h[a]))?;
            let dn = u(Self::shifted(g, a, -h[a]))?;
            Ok((up - 2.0 * value + dn) / (h[a] * h[a]))
        };
        let mixed = |a: usize, b: usize| -> Result<f64> {
            let s = |sa: f64, sb: f64| u(Self::shifted(Self::shifted(g, a, sa * h[a]), b, sb * h[b]));
            Ok((s(1.0, 1.0)? - s(1.0, -1.0)? - s(-1.0, 1.0)? + s(-1.0, -1.0)?) / (4.0 * h[a] * h[b]))
        };
        Ok(Jet {
            value,
            dx,
            dy,
            dt,
            dxx: diag(0)?,
            dxy: mixed(0, 1)?,
            dxt: mixed(0, 2)?,
            dyy: diag(1)?,
            dyt: mixed(1, 2)?,
            dtt: diag(2)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_squares_has_constant_second_partials() {
        let u = ScalarField::parse("x^2+y^2").unwrap();
        assert_eq!(u.smoothness(), Smoothness::C2);
        for g in [Point::new(0.3, -2.0, 1.0), Point::new(5.0, 1.0, -3.0)] {
            let j = u.jet(g, DiffMode::Exact).unwrap();
            assert_eq!(j.dxx, 2.0);
            assert_eq!(j.dyy, 2.0);
            assert_eq!(j.dtt, 0.0);
        }
    }

    #[test]
    fn abs_is_flagged_c0() {
        let u = ScalarField::parse("abs(x)").unwrap();
        assert_eq!(u.smoothness(), Smoothness::C0);
        assert!(matches!(
            u.gradient(Point::IDENTITY, DiffMode::Exact),
            Err(Error::NonsmoothPoint(_))
        ));
        assert!(matches!(
            u.clone().without_exact().gradient(Point::IDENTITY, DiffMode::Auto),
            Err(Error::NonsmoothPoint(_))
        ));
        assert_eq!(
            u.gradient(Point::new(-1.0, 0.0, 0.0), DiffMode::Exact).unwrap(),
            [-1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn gauge_expression_value() {
        let u = ScalarField::parse("((x^2+y^2)^2+t^2)^(1/4)").unwrap();
        assert_eq!(u.value(Point::new(0.0, 0.0, 1.0)).unwrap(), 1.0);
    }

    #[test]
    fn exact_mode_requires_partials() {
        let u = ScalarField::from_fn("x", Smoothness::C2, |g| g.x);
        assert!(u.gradient(Point::IDENTITY, DiffMode::Exact).is_err());
        let g = u.gradient(Point::new(1.0, 2.0, 3.0), DiffMode::Auto).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-9 && g[1].abs() < 1e-9 && g[2].abs() < 1e-9);
    }

    #[test]
    fn finite_differences_match_exact() {
        let u = ScalarField::parse("x*t + sin(y)*x^2 - exp(t/3)").unwrap();
        let g = Point::new(0.7, -0.4, 1.1);
        let a = u.jet(g, DiffMode::Exact).unwrap();
        let b = u.jet(g, DiffMode::FiniteDifference).unwrap();
        for (p, q) in [(a.dx, b.dx), (a.dy, b.dy), (a.dt, b.dt)] {
            assert!((p - q).abs() < 1e-8, "{p} vs {q}");
        }
        for (p, q) in [
            (a.dxx, b.dxx),
            (a.dxy, b.dxy),
            (a.dxt, b.dxt),
            (a.dyy, b.dyy),
            (a.dyt, b.dyt),
            (a.dtt, b.dtt),
        ] {
            assert!((p - q).abs() < 1e-5, "{p} vs {q}");
        }
    }

    #[test]
    fn domain_guard() {
        let u = ScalarField::parse("x").unwrap().with_domain(parse("t").unwrap());
        assert!(u.value(Point::new(1.0, 0.0, 1.0)).is_ok());
        assert!(u.value(Point::new(1.0, 0.0, -1.0)).is_err());
    }
}
