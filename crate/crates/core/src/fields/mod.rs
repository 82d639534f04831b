//! Coefficient expressions.
//!
//! Grammar (whitespace is ignored between tokens):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary { "^" [ "-" ] integer } ;
//! primary = number | variable | func "(" expr ")" | "(" expr ")" ;
//! func    = "exp" | "log" | "sin" | "cos" | "sqrt" ;
//! variable= "x" index | "y" index ;        (* 1-based, index <= dimension *)
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```
//!
//! So `-x1^2` is `-(x1^2)` and `2*x1^2` is `2*(x1^2)`. Errors carry the byte
//! offset of the offending token.

mod expr;
mod parser;
mod symbol;

pub use expr::{Func, ScalarExpr};
pub use parser::parse_expr;
pub use symbol::{DensityField, SymbolField, SymbolSpec};

use crate::error::{FinjetError, Result};
use crate::jets::{lift_variables, Jet};

/// A parsed scalar field on the base (`x` only) or on the tangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    expr: ScalarExpr,
    base_dim: usize,
    fiber: bool,
}

impl ScalarField {
    pub fn parse(text: &str, base_dim: usize, fiber: bool) -> Result<Self> {
        Ok(ScalarField { expr: parse_expr(text, base_dim, fiber)?, base_dim, fiber })
    }

    pub fn constant(base_dim: usize, value: f64) -> Self {
        ScalarField { expr: ScalarExpr::Num(value), base_dim, fiber: false }
    }

    pub fn expr(&self) -> &ScalarExpr {
        &self.expr
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn has_fiber(&self) -> bool {
        self.fiber
    }

    /// The same expression read as a field on the tangent bundle.
    pub fn on_bundle(&self) -> Self {
        ScalarField { fiber: true, ..self.clone() }
    }

    /// Number of coordinates the field expects: `n` or `2n`.
    pub fn arity(&self) -> usize {
        if self.fiber {
            2 * self.base_dim
        } else {
            self.base_dim
        }
    }

    fn split<'a, T>(&self, vars: &'a [T]) -> Result<(&'a [T], &'a [T])> {
        if vars.len() != self.arity() && !(self.fiber && vars.len() == self.base_dim && !self.expr.uses_fiber()) {
            return Err(FinjetError::Dimension(format!(
                "field expects {} coordinates, got {}",
                self.arity(),
                vars.len()
            )));
        }
        Ok(vars.split_at(self.base_dim.min(vars.len())))
    }

    pub fn eval(&self, vars: &[f64]) -> Result<f64> {
        let (x, y) = self.split(vars)?;
        self.expr.eval(x, y)
    }

    /// Evaluates on arbitrary jet inputs (coordinates in the field's order).
    pub fn eval_jets(&self, vars: &[Jet]) -> Result<Jet> {
        let (x, y) = self.split(vars)?;
        self.expr.eval_jet(x, y)
    }
}

impl std::fmt::Display for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.expr.fmt(f)
    }
}

/// Taylor jet of `field` at `point` to the given order, one jet variable per
/// coordinate.
pub fn eval_field(field: &ScalarField, point: &[f64], order: usize) -> Result<Jet> {
    if point.len() != field.arity() {
        return Err(FinjetError::Dimension(format!(
            "field expects {} coordinates, got {}",
            field.arity(),
            point.len()
        )));
    }
    field.eval_jets(&lift_variables(point, order))
}
