//! Radial functions `u(x, y, t) = U(r, t)` with `r = √(x² + y²)`.
//!
//! A [`RadialProfile`] stores `U` as an expression in `(r, t)` together with
//! its symbolic partials. Internally `r` occupies the `x` slot of [`Var`].
//! [`RadialField`] is the family `v = ((x² + y²)² + z(t))^{1/4}` generated by a
//! one-variable function `z`.

use super::expr::{EvalError, Expr, Var};
use super::field::ScalarField;
use super::parse::parse_with_vars;
use crate::hgroup::Point;
use crate::{Error, Result};

const RT: &[(&str, Var)] = &[("r", Var::X), ("t", Var::T)];
const T_ONLY: &[(&str, Var)] = &[("t", Var::T)];

/// `U` and its partials up to second order at one `(r, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProfileJet {
    pub u: f64,
    pub ur: f64,
    pub ut: f64,
    pub urr: f64,
    pub urt: f64,
    pub utt: f64,
}

/// The generating function `z` of the radial family, with `z'` and `z''`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZFamily {
    pub z: Expr,
    pub dz: Expr,
    pub d2z: Expr,
}

impl ZFamily {
    fn at(e: &Expr, t: f64) -> Result<f64> {
        e.eval([0.0, 0.0, t])
            .map_err(|err| Error::eval(Point::new(0.0, 0.0, t), err))
    }

    /// `(z, z', z'')` at `t`. Fails when `z(t) < 0`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64, f64)> {
        let z = Self::at(&self.z, t)?;
        if z < 0.0 {
            return Err(Error::eval(
                Point::new(0.0, 0.0, t),
                EvalError::Domain { func: "z", arg: z },
            ));
        }
        Ok((z, Self::at(&self.dz, t)?, Self::at(&self.d2z, t)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    name: String,
    u: Expr,
    ur: Expr,
    ut: Expr,
    urr: Expr,
    urt: Expr,
    utt: Expr,
    family: Option<ZFamily>,
}

impl RadialProfile {
    /// Builds a profile from an expression in `(r, t)` (with `r` in the `x`
    /// slot). Fails if the expression mentions `y`.
    pub fn from_expr(u: Expr) -> Result<Self> {
        if u.depends_on(Var::Y) {
            return Err(Error::InvalidArgument(
                "radial profile must depend on r and t only".into(),
            ));
        }
        let ur = u.diff(Var::X);
        let ut = u.diff(Var::T);
        let urr = ur.diff(Var::X);
        let urt = ur.diff(Var::T);
        let utt = ut.diff(Var::T);
        let name = u.to_string().replace('x', "r");
        Ok(RadialProfile {
            name,
            u,
            ur,
            ut,
            urr,
            urt,
            utt,
            family: None,
        })
    }

    /// Parses `U(r, t)`, e.g. `"r^4 + t^2 - 1"`.
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Self::from_expr(parse_with_vars(src, RT)?)?;
        p.name = src.to_string();
        Ok(p)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> Option<&ZFamily> {
        self.family.as_ref()
    }

    fn guard(&self, t: f64) -> Result<()> {
        if let Some(f) = &self.family {
            f.eval(t)?;
        }
        Ok(())
    }

    fn at(&self, e: &Expr, r: f64, t: f64) -> Result<f64> {
        e.eval_strict([r, 0.0, t]).map_err(|err| match err {
            EvalError::Kink => Error::NonsmoothPoint(Point::new(r, 0.0, t)),
            other => Error::eval(Point::new(r, 0.0, t), other),
        })
    }

    pub fn value(&self, r: f64, t: f64) -> Result<f64> {
        self.guard(t)?;
        self.at(&self.u, r, t)
    }

    /// `(U_r, U_t)`.
    pub fn first(&self, r: f64, t: f64) -> Result<(f64, f64)> {
        self.guard(t)?;
        Ok((self.at(&self.ur, r, t)?, self.at(&self.ut, r, t)?))
    }

    pub fn jet(&self, r: f64, t: f64) -> Result<ProfileJet> {
        self.guard(t)?;
        Ok(ProfileJet {
            u: self.at(&self.u, r, t)?,
            ur: self.at(&self.ur, r, t)?,
            ut: self.at(&self.ut, r, t)?,
            urr: self.at(&self.urr, r, t)?,
            urt: self.at(&self.urt, r, t)?,
            utt: self.at(&self.utt, r, t)?,
        })
    }

    /// The field `u(x, y, t) = U(√(x² + y²), t)` evaluated by closure; its
    /// derivatives go through finite differences.
    pub fn to_field(&self) -> ScalarField {
        let p = self.clone();
        let smooth = if self.u.has_kinks() {
            super::Smoothness::C0
        } else {
            super::Smoothness::C2
        };
        ScalarField::from_fn(self.name.clone(), smooth, move |g| {
            p.value(g.x.hypot(g.y), g.t).unwrap_or(f64::NAN)
        })
    }
}

/// `v(x, y, t) = ((x² + y²)² + z(t))^{1/4}`.
#[derive(Debug, Clone)]
pub struct RadialField {
    family: ZFamily,
    profile: RadialProfile,
    field: ScalarField,
}

impl RadialField {
    /// Parses `z` as an expression in `t` alone.
    pub fn new(z_src: &str) -> Result<Self> {
        let z = parse_with_vars(z_src, T_ONLY)?;
        let dz = z.diff(Var::T);
        let d2z = dz.diff(Var::T);
        let family = ZFamily { z: z.clone(), dz, d2z };

        let quarter = Expr::num(0.25);
        let r4 = Expr::pow(Expr::var(Var::X), Expr::num(4.0));
        let mut profile = RadialProfile::from_expr(Expr::pow(Expr::add(r4, z.clone()), quarter.clone()))?;
        profile.name = format!("((r^4) + ({z_src}))^(1/4)");
        profile.family = Some(family.clone());

        let s = Expr::add(
            Expr::pow(Expr::var(Var::X), Expr::num(2.0)),
            Expr::pow(Expr::var(Var::Y), Expr::num(2.0)),
        );
        let v = Expr::pow(Expr::add(Expr::pow(s, Expr::num(2.0)), z.clone()), quarter);
        let field = ScalarField::from_expr(v)
            .with_domain(z)
            .with_name(format!("((x^2+y^2)^2 + ({z_src}))^(1/4)"));
        Ok(RadialField { family, profile, field })
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn family(&self) -> &ZFamily {
        &self.family
    }

    pub fn z(&self, t: f64) -> Result<(f64, f64, f64)> {
        self.family.eval(t)
    }

    pub fn value(&self, g: Point) -> Result<f64> {
        self.field.value(g)
    }

    /// `U(r, t)`.
    pub fn u(&self, r: f64, t: f64) -> Result<f64> {
        self.profile.value(r, t)
    }
}
