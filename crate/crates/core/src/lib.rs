//! Horizontal convex analysis on the first Heisenberg group.
//!
//! The crate covers exact group arithmetic in exponential coordinates, a small
//! expression language with symbolic differentiation, the horizontal vector
//! fields `X`, `Y`, `T` and the operators built on them, weak H-convexity
//! tests, H-subdifferentials and the H-normal map, Monge–Ampère densities and
//! measures, and the chain reconstruction of a convex function from its
//! subgradients.
//!
//! Grid sweeps and sampling loops run on rayon when the `parallel` feature is
//! enabled (the default); every sweep also has a sequential path selected by
//! [`Exec`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod convexity;
mod error;
pub mod exec;
pub mod fielddsl;
pub mod hgroup;
pub mod limit;
pub mod mongeampere;
pub mod quadrature;
pub mod rockafellar;
pub mod subdiff;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use fielddsl::{parse, DiffMode, Expr, RadialField, RadialProfile, ScalarField, Smoothness, Var};
pub use hgroup::{HVector, Point, TVector};
