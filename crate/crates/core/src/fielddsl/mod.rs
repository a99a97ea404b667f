//! Field expression language: parsing, symbolic differentiation and the
//! [`ScalarField`] / [`RadialField`] types built on top of it.

mod expr;
mod field;
mod parse;
mod radial;

pub use expr::{EvalError, Expr, Func, Var, KINK_TOL};
pub use field::{DiffMode, Jet, ScalarField, Smoothness};
pub use parse::{parse, parse_with_vars, ParseError, ParseErrorKind};
pub use radial::{ProfileJet, RadialField, RadialProfile, ZFamily};

/// Symbolic partial derivative.
pub fn diff(e: &Expr, var: Var) -> Expr {
    e.diff(var)
}

/// Builds a field with exact partials from an expression.
pub fn to_field(e: Expr) -> ScalarField {
    ScalarField::from_expr(e)
}

/// Builds the radial family member generated by `z(t)`.
pub fn radial_field(z_src: &str) -> crate::Result<RadialField> {
    RadialField::new(z_src)
}
