use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::error::{FinjetError, Result};
use crate::jets::{lift_variables, Jet};

/// Symmetric contravariant 2-tensor field on the base with density weight δ.
#[derive(Debug, Clone)]
pub struct SymbolField {
    n: usize,
    components: Vec<ScalarField>,
    weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub components: Vec<Vec<String>>,
    #[serde(default)]
    pub weight: f64,
}

impl SymbolField {
    pub fn new(n: usize, components: Vec<ScalarField>, weight: f64) -> Result<Self> {
        if components.len() != n * n {
            return Err(FinjetError::Dimension(format!("symbol needs {} components", n * n)));
        }
        if components.iter().any(|c| c.has_fiber() && c.expr().uses_fiber()) {
            return Err(FinjetError::Precondition("symbol components must not depend on y".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if components[i * n + j].expr() != components[j * n + i].expr() {
                    return Err(FinjetError::ModelInvalid(format!("symbol entry ({}, {}) is not symmetric", i + 1, j + 1)));
                }
            }
        }
        Ok(SymbolField { n, components, weight })
    }

    /// Row-major component expressions.
    pub fn parse(n: usize, components: &[&str], weight: f64) -> Result<Self> {
        let fields = components.iter().map(|e| ScalarField::parse(e, n, false)).collect::<Result<_>>()?;
        Self::new(n, fields, weight)
    }

    pub fn from_spec(n: usize, spec: &SymbolSpec) -> Result<Self> {
        if spec.components.len() != n || spec.components.iter().any(|r| r.len() != n) {
            return Err(FinjetError::Config(format!("symbol must be {n}x{n}")));
        }
        let flat: Vec<&str> = spec.components.iter().flatten().map(String::as_str).collect();
        Self::parse(n, &flat, spec.weight)
    }

    /// Constant symbol.
    pub fn constant(p: &DMatrix<f64>, weight: f64) -> Self {
        let n = p.nrows();
        let components = (0..n * n).map(|k| ScalarField::constant(n, p[(k / n, k % n)])).collect();
        SymbolField { n, components, weight }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn with_weight(&self, weight: f64) -> Self {
        SymbolField { weight, ..self.clone() }
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarField {
        &self.components[i * self.n + j]
    }

    pub fn values(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let v = self.components.iter().map(|c| c.eval(x)).collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_row_slice(self.n, self.n, &v))
    }

    /// Jets of the components on arbitrary base-coordinate jets, row-major.
    pub fn eval_jets(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        self.components.iter().map(|c| c.eval_jets(x)).collect()
    }

    /// Jets in the `n` base variables at `x`.
    pub fn jets(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.eval_jets(&lift_variables(x, order))
    }
}

/// A scalar density of weight λ.
#[derive(Debug, Clone)]
pub struct DensityField {
    pub scalar: ScalarField,
    pub weight: f64,
}

impl DensityField {
    pub fn new(scalar: ScalarField, weight: f64) -> Self {
        DensityField { scalar, weight }
    }

    pub fn parse(n: usize, expr: &str, weight: f64) -> Result<Self> {
        Ok(DensityField { scalar: ScalarField::parse(expr, n, false)?, weight })
    }
}
