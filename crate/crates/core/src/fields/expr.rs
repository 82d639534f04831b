use std::fmt;

use crate::error::{FinjetError, Result};
use crate::jets::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Syntax tree of a coefficient expression. `X(i)` and `Y(i)` are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Num(f64),
    X(usize),
    Y(usize),
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Div(Box<ScalarExpr>, Box<ScalarExpr>),
    Neg(Box<ScalarExpr>),
    Pow(Box<ScalarExpr>, i32),
    Func(Func, Box<ScalarExpr>),
}

fn domain(what: &str, v: f64) -> FinjetError {
    FinjetError::NumericDomain(format!("{what} of {v}"))
}

impl ScalarExpr {
    pub fn uses_fiber(&self) -> bool {
        match self {
            ScalarExpr::Y(_) => true,
            ScalarExpr::Num(_) | ScalarExpr::X(_) => false,
            ScalarExpr::Add(a, b) | ScalarExpr::Sub(a, b) | ScalarExpr::Mul(a, b) | ScalarExpr::Div(a, b) => {
                a.uses_fiber() || b.uses_fiber()
            }
            ScalarExpr::Neg(a) | ScalarExpr::Pow(a, _) | ScalarExpr::Func(_, a) => a.uses_fiber(),
        }
    }

    /// Plain floating-point evaluation. `x` are base coordinates, `y` fiber
    /// coordinates (may be empty when the expression has none).
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(match self {
            ScalarExpr::Num(v) => *v,
            ScalarExpr::X(i) => x[*i],
            ScalarExpr::Y(i) => y[*i],
            ScalarExpr::Add(a, b) => a.eval(x, y)? + b.eval(x, y)?,
            ScalarExpr::Sub(a, b) => a.eval(x, y)? - b.eval(x, y)?,
            ScalarExpr::Mul(a, b) => a.eval(x, y)? * b.eval(x, y)?,
            ScalarExpr::Div(a, b) => {
                let d = b.eval(x, y)?;
                if d == 0.0 {
                    return Err(domain("division by", d));
                }
                a.eval(x, y)? / d
            }
            ScalarExpr::Neg(a) => -a.eval(x, y)?,
            ScalarExpr::Pow(a, e) => {
                let v = a.eval(x, y)?;
                if *e < 0 && v == 0.0 {
                    return Err(domain("negative power", v));
                }
                v.powi(*e)
            }
            ScalarExpr::Func(f, a) => {
                let v = a.eval(x, y)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Log if v > 0.0 => v.ln(),
                    Func::Log => return Err(domain("log", v)),
                    Func::Sqrt if v > 0.0 => v.sqrt(),
                    Func::Sqrt => return Err(domain("sqrt", v)),
                }
            }
        })
    }

    /// Evaluates on jet inputs. `x` and `y` must share one jet space; any
    /// composition (e.g. substituting a map for the coordinates) is done by
    /// the caller choosing those jets.
    pub fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        Ok(match self {
            ScalarExpr::Num(v) => {
                let proto = x.first().or(y.first()).expect("at least one input jet");
                proto.constant_like(*v)
            }
            ScalarExpr::X(i) => x[*i].clone(),
            ScalarExpr::Y(i) => y[*i].clone(),
            ScalarExpr::Add(a, b) => a.eval_jet(x, y)? + b.eval_jet(x, y)?,
            ScalarExpr::Sub(a, b) => a.eval_jet(x, y)? - b.eval_jet(x, y)?,
            ScalarExpr::Mul(a, b) => a.eval_jet(x, y)? * b.eval_jet(x, y)?,
            ScalarExpr::Div(a, b) => a.eval_jet(x, y)?.checked_div(&b.eval_jet(x, y)?)?,
            ScalarExpr::Neg(a) => -a.eval_jet(x, y)?,
            ScalarExpr::Pow(a, e) => a.eval_jet(x, y)?.powi(*e)?,
            ScalarExpr::Func(f, a) => {
                let v = a.eval_jet(x, y)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => v.ln()?,
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sqrt => v.sqrt()?,
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            ScalarExpr::Add(..) | ScalarExpr::Sub(..) => 1,
            ScalarExpr::Mul(..) | ScalarExpr::Div(..) => 2,
            ScalarExpr::Neg(_) => 3,
            ScalarExpr::Pow(..) => 4,
            ScalarExpr::Num(v) if v.is_sign_negative() => 3,
            _ => 5,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarExpr::Num(v) => write!(f, "{v:?}"),
            ScalarExpr::X(i) => write!(f, "x{}", i + 1),
            ScalarExpr::Y(i) => write!(f, "y{}", i + 1),
            ScalarExpr::Add(a, b) | ScalarExpr::Sub(a, b) => {
                a.write_child(f, 1)?;
                f.write_str(if matches!(self, ScalarExpr::Add(..)) { " + " } else { " - " })?;
                // right operand binds tighter to keep left associativity
                b.write_child(f, 2)
            }
            ScalarExpr::Mul(a, b) | ScalarExpr::Div(a, b) => {
                a.write_child(f, 2)?;
                f.write_str(if matches!(self, ScalarExpr::Mul(..)) { "*" } else { "/" })?;
                b.write_child(f, 3)
            }
            ScalarExpr::Neg(a) => {
                f.write_str("-")?;
                a.write_child(f, 3)
            }
            ScalarExpr::Pow(a, e) => {
                a.write_child(f, 5)?;
                write!(f, "^{e}")
            }
            ScalarExpr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
