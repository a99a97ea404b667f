//! Expression trees over `x`, `y`, `t` with evaluation and symbolic partial
//! derivatives.

use std::fmt;

use thiserror::Error;

/// Arguments of `abs`/`sign` closer to zero than this are treated as kinks
/// when evaluating derivative expressions.
pub const KINK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    T,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::X, Var::Y, Var::T];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::T => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
    /// Derivative of `abs`, with `sign(0) = 0`.
    Sign,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("{func} argument {arg} outside its domain")]
    Domain { func: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result")]
    NonFinite,
    #[error("derivative undefined at a kink of abs/sign")]
    Kink,
}

// Smart constructors with light constant folding. They keep derivative
// expressions small; they never change the value of an expression where it
// is defined.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(v) => Expr::Num(-v),
            Expr::Neg(inner) => *inner,
            a => Expr::Neg(Box::new(a)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x + y),
            (Some(0.0), _) => b,
            (_, Some(0.0)) => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x - y),
            (Some(0.0), _) => Expr::neg(b),
            (_, Some(0.0)) => a,
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x * y),
            (Some(0.0), _) | (_, Some(0.0)) => Expr::Num(0.0),
            (Some(1.0), _) => b,
            (_, Some(1.0)) => a,
            (Some(-1.0), _) => Expr::neg(b),
            (_, Some(-1.0)) => Expr::neg(a),
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if y != 0.0 => Expr::Num(x / y),
            (Some(0.0), _) => Expr::Num(0.0),
            (_, Some(1.0)) => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if pow_f64(x, y).is_finite() => Expr::Num(pow_f64(x, y)),
            (_, Some(1.0)) => a,
            (_, Some(0.0)) => Expr::Num(1.0),
            _ => Expr::Pow(Box::new(a), Box::new(b)),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        match (f, a.as_num()) {
            (Func::Sign, Some(v)) => Expr::Num(sign(v)),
            (Func::Abs, Some(v)) => Expr::Num(v.abs()),
            _ => Expr::Call(f, Box::new(a)),
        }
    }

    /// Whether the expression mentions `v`.
    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(v),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on(v) || b.depends_on(v)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        Var::ALL.iter().all(|&v| !self.depends_on(v))
    }

    /// Whether `abs` or `sign` occurs anywhere in the tree.
    pub fn has_kinks(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => false,
            Expr::Call(Func::Abs | Func::Sign, _) => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.has_kinks(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.has_kinks() || b.has_kinks()
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    /// Replaces every occurrence of `v` by `with`.
    pub fn substitute(&self, v: Var, with: &Expr) -> Expr {
        match self {
            Expr::Num(c) => Expr::Num(*c),
            Expr::Var(w) if *w == v => with.clone(),
            Expr::Var(w) => Expr::Var(*w),
            Expr::Neg(a) => Expr::neg(a.substitute(v, with)),
            Expr::Add(a, b) => Expr::add(a.substitute(v, with), b.substitute(v, with)),
            Expr::Sub(a, b) => Expr::sub(a.substitute(v, with), b.substitute(v, with)),
            Expr::Mul(a, b) => Expr::mul(a.substitute(v, with), b.substitute(v, with)),
            Expr::Div(a, b) => Expr::div(a.substitute(v, with), b.substitute(v, with)),
            Expr::Pow(a, b) => Expr::pow(a.substitute(v, with), b.substitute(v, with)),
            Expr::Call(f, a) => Expr::call(*f, a.substitute(v, with)),
        }
    }

    /// Symbolic partial derivative with respect to `v`.
    pub fn diff(&self, v: Var) -> Expr {
        if !self.depends_on(v) {
            return Expr::Num(0.0);
        }
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(w) => Expr::Num(if *w == v { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::neg(a.diff(v)),
            Expr::Add(a, b) => Expr::add(a.diff(v), b.diff(v)),
            Expr::Sub(a, b) => Expr::sub(a.diff(v), b.diff(v)),
            Expr::Mul(a, b) => Expr::add(Expr::mul(a.diff(v), (**b).clone()), Expr::mul((**a).clone(), b.diff(v))),
            Expr::Div(a, b) => {
                let num = Expr::sub(Expr::mul(a.diff(v), (**b).clone()), Expr::mul((**a).clone(), b.diff(v)));
                Expr::div(num, Expr::pow((**b).clone(), Expr::Num(2.0)))
            }
            Expr::Pow(a, b) => {
                if !b.depends_on(v) {
                    // b·a^(b-1)·a'
                    let exponent = Expr::sub((**b).clone(), Expr::Num(1.0));
                    Expr::mul(Expr::mul((**b).clone(), Expr::pow((**a).clone(), exponent)), a.diff(v))
                } else if !a.depends_on(v) {
                    // a^b·ln(a)·b'
                    Expr::mul(Expr::mul(self.clone(), Expr::call(Func::Ln, (**a).clone())), b.diff(v))
                } else {
                    // a^b·(b'·ln a + b·a'/a)
                    let inner = Expr::add(
                        Expr::mul(b.diff(v), Expr::call(Func::Ln, (**a).clone())),
                        Expr::div(Expr::mul((**b).clone(), a.diff(v)), (**a).clone()),
                    );
                    Expr::mul(self.clone(), inner)
                }
            }
            Expr::Call(f, a) => {
                let da = a.diff(v);
                let a = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, a)),
                    Func::Exp => Expr::call(Func::Exp, a),
                    Func::Ln => return Expr::div(da, a),
                    Func::Sqrt => return Expr::div(da, Expr::mul(Expr::Num(2.0), Expr::call(Func::Sqrt, a))),
                    Func::Abs => Expr::call(Func::Sign, a),
                    Func::Sign => return Expr::Num(0.0),
                };
                Expr::mul(outer, da)
            }
        }
    }

    /// Evaluates at `(x, y, t)`. `sign(0)` evaluates to 0.
    pub fn eval(&self, p: [f64; 3]) -> Result<f64, EvalError> {
        self.eval_inner(p, false)
    }

    /// Like [`Expr::eval`], but fails with [`EvalError::Kink`] when an
    /// `abs`/`sign` argument is within [`KINK_TOL`] of zero. Used for
    /// derivative expressions, where the kink makes the value meaningless.
    pub fn eval_strict(&self, p: [f64; 3]) -> Result<f64, EvalError> {
        self.eval_inner(p, true)
    }

    fn eval_inner(&self, p: [f64; 3], strict: bool) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(c) => *c,
            Expr::Var(v) => p[v.index()],
            Expr::Neg(a) => -a.eval_inner(p, strict)?,
            Expr::Add(a, b) => a.eval_inner(p, strict)? + b.eval_inner(p, strict)?,
            Expr::Sub(a, b) => a.eval_inner(p, strict)? - b.eval_inner(p, strict)?,
            Expr::Mul(a, b) => a.eval_inner(p, strict)? * b.eval_inner(p, strict)?,
            Expr::Div(a, b) => {
                let num = a.eval_inner(p, strict)?;
                let den = b.eval_inner(p, strict)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval_inner(p, strict)?;
                let exponent = b.eval_inner(p, strict)?;
                let r = pow_f64(base, exponent);
                if r.is_nan() {
                    return Err(EvalError::Domain { func: "pow", arg: base });
                }
                if base == 0.0 && exponent < 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                r
            }
            Expr::Call(f, a) => {
                let x = a.eval_inner(p, strict)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Ln => {
                        if x <= 0.0 {
                            return Err(EvalError::Domain { func: "ln", arg: x });
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::Domain { func: "sqrt", arg: x });
                        }
                        x.sqrt()
                    }
                    Func::Abs => {
                        if strict && x.abs() <= KINK_TOL {
                            return Err(EvalError::Kink);
                        }
                        x.abs()
                    }
                    Func::Sign => {
                        if strict && x.abs() <= KINK_TOL {
                            return Err(EvalError::Kink);
                        }
                        sign(x)
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `powi` for small integer exponents (exact for negative bases), `powf`
/// otherwise.
fn pow_f64(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => PREC_UNARY,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
            Expr::Neg(_) => PREC_UNARY,
            Expr::Add(..) | Expr::Sub(..) => PREC_ADD,
            Expr::Mul(..) | Expr::Div(..) => PREC_MUL,
            Expr::Pow(..) => PREC_POW,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.fmt_bare(f)?;
            write!(f, ")")
        } else {
            self.fmt_bare(f)
        }
    }

    fn fmt_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_at(f, PREC_UNARY)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.fmt_at(f, PREC_ADD)?;
                write!(f, " {} ", if matches!(self, Expr::Add(..)) { '+' } else { '-' })?;
                b.fmt_at(f, PREC_MUL)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.fmt_at(f, PREC_MUL)?;
                write!(f, "{}", if matches!(self, Expr::Mul(..)) { '*' } else { '/' })?;
                b.fmt_at(f, PREC_UNARY)
            }
            Expr::Pow(a, b) => {
                a.fmt_at(f, PREC_ATOM)?;
                write!(f, "^")?;
                b.fmt_at(f, PREC_UNARY)
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_bare(f)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_bare(f)
    }
}
