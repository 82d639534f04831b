use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::diffeo::Diffeo;
use crate::error::{FinjetError, Result};
use crate::fields::ScalarField;
use crate::jets::{lift_variables, Jet};

#[derive(Debug, Clone)]
pub enum ModelKind {
    /// `F² = a_ij(x) y^i y^j`; `metric` is row-major `n × n`.
    Riemannian { metric: Vec<ScalarField> },
    /// `F = sqrt(a_ij y^i y^j) + α_i y^i`.
    Randers { metric: Vec<ScalarField>, oneform: Vec<ScalarField> },
    /// `F` given directly on `(x, y)`.
    Custom { f: ScalarField },
    /// `F̃² = ψ(x)·F²`.
    Rescaled { psi: ScalarField, base: Arc<FinslerModel> },
    /// `F̃(x, y) = F(φ(x), Dφ(x)·y)`.
    Pullback { map: Arc<Diffeo>, base: Arc<FinslerModel> },
}

/// A Finsler function on the slit tangent bundle of an `n`-dimensional chart.
#[derive(Debug, Clone)]
pub struct FinslerModel {
    n: usize,
    kind: ModelKind,
}

/// JSON form of a model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oneform: Option<Vec<String>>,
    #[serde(default, rename = "F", skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    /// Optional conformal factor ψ: the model becomes `sqrt(ψ)·F`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescale: Option<String>,
}

fn parse_metric(rows: &[Vec<String>], n: usize) -> Result<Vec<ScalarField>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(FinjetError::Config(format!("metric must be {n}x{n}")));
    }
    rows.iter().flatten().map(|e| ScalarField::parse(e, n, false)).collect()
}

fn check_symmetric(metric: &[ScalarField], n: usize) -> Result<()> {
    for i in 0..n {
        for j in 0..i {
            if metric[i * n + j].expr() != metric[j * n + i].expr() {
                return Err(FinjetError::ModelInvalid(format!(
                    "metric entries ({}, {}) and ({}, {}) differ",
                    i + 1,
                    j + 1,
                    j + 1,
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

fn quadratic(metric: &[ScalarField], x: &[Jet], y: &[Jet]) -> Result<Jet> {
    let n = y.len();
    let mut acc = y[0].zero_like();
    for i in 0..n {
        for j in i..n {
            let a = metric[i * n + j].eval_jets(x)?;
            let w = if i == j { 1.0 } else { 2.0 };
            acc += &(&a * &(&y[i] * &y[j])).scale(w);
        }
    }
    Ok(acc)
}

impl FinslerModel {
    pub fn riemannian(n: usize, metric: Vec<ScalarField>) -> Result<Self> {
        if metric.len() != n * n {
            return Err(FinjetError::Dimension(format!("metric needs {} entries", n * n)));
        }
        if metric.iter().any(|f| f.has_fiber() || f.base_dim() != n) {
            return Err(FinjetError::ModelInvalid("metric entries must be fields over x".into()));
        }
        check_symmetric(&metric, n)?;
        Ok(FinslerModel { n, kind: ModelKind::Riemannian { metric } })
    }

    pub fn randers(n: usize, metric: Vec<ScalarField>, oneform: Vec<ScalarField>) -> Result<Self> {
        if oneform.len() != n {
            return Err(FinjetError::Dimension(format!("one-form needs {n} entries")));
        }
        if oneform.iter().any(|f| f.has_fiber() || f.base_dim() != n) {
            return Err(FinjetError::ModelInvalid("one-form entries must be fields over x".into()));
        }
        let FinslerModel { kind: ModelKind::Riemannian { metric }, .. } = Self::riemannian(n, metric)? else {
            unreachable!()
        };
        Ok(FinslerModel { n, kind: ModelKind::Randers { metric, oneform } })
    }

    pub fn custom(n: usize, f: ScalarField) -> Result<Self> {
        if !f.has_fiber() || f.base_dim() != n {
            return Err(FinjetError::ModelInvalid("custom F must be a field over (x, y)".into()));
        }
        Ok(FinslerModel { n, kind: ModelKind::Custom { f } })
    }

    /// Flat model `F = |y|`.
    pub fn euclidean(n: usize) -> Self {
        let metric = (0..n * n)
            .map(|k| ScalarField::constant(n, if k / n == k % n { 1.0 } else { 0.0 }))
            .collect();
        FinslerModel { n, kind: ModelKind::Riemannian { metric } }
    }

    /// Parses a Riemannian model from row-major entry strings.
    pub fn parse_riemannian(n: usize, metric: &[&str]) -> Result<Self> {
        let fields = metric.iter().map(|e| ScalarField::parse(e, n, false)).collect::<Result<_>>()?;
        Self::riemannian(n, fields)
    }

    pub fn parse_randers(n: usize, metric: &[&str], oneform: &[&str]) -> Result<Self> {
        let m = metric.iter().map(|e| ScalarField::parse(e, n, false)).collect::<Result<_>>()?;
        let a = oneform.iter().map(|e| ScalarField::parse(e, n, false)).collect::<Result<_>>()?;
        Self::randers(n, m, a)
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let n = spec.dim;
        if n == 0 {
            return Err(FinjetError::Config("model dimension must be positive".into()));
        }
        let need = |what: &str| FinjetError::Config(format!("{} model requires `{what}`", spec.kind));
        let model = match spec.kind.as_str() {
            "riemannian" => Self::riemannian(n, parse_metric(spec.metric.as_ref().ok_or_else(|| need("metric"))?, n)?)?,
            "randers" => {
                let metric = parse_metric(spec.metric.as_ref().ok_or_else(|| need("metric"))?, n)?;
                let oneform = spec
                    .oneform
                    .as_ref()
                    .ok_or_else(|| need("oneform"))?
                    .iter()
                    .map(|e| ScalarField::parse(e, n, false))
                    .collect::<Result<Vec<_>>>()?;
                Self::randers(n, metric, oneform)?
            }
            "custom" => Self::custom(n, ScalarField::parse(spec.f.as_ref().ok_or_else(|| need("F"))?, n, true)?)?,
            other => return Err(FinjetError::Config(format!("unknown model kind `{other}`"))),
        };
        match &spec.rescale {
            Some(psi) => Ok(Arc::new(model).rescaled(ScalarField::parse(psi, n, false)?)),
            None => Ok(model),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text).map_err(|e| FinjetError::Config(e.to_string()))?;
        Self::from_spec(&spec)
    }

    /// `sqrt(ψ)·F`.
    pub fn rescaled(self: &Arc<Self>, psi: ScalarField) -> FinslerModel {
        FinslerModel { n: self.n, kind: ModelKind::Rescaled { psi, base: self.clone() } }
    }

    /// `F(φ(x), Dφ(x)·y)`.
    pub fn pullback(self: &Arc<Self>, map: Arc<Diffeo>) -> FinslerModel {
        FinslerModel { n: self.n, kind: ModelKind::Pullback { map, base: self.clone() } }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// The metric `a` when `F² = a(y, y)` by construction.
    pub fn riemannian_metric(&self) -> Option<&[ScalarField]> {
        match &self.kind {
            ModelKind::Riemannian { metric } => Some(metric),
            _ => None,
        }
    }

    /// True when F² is quadratic in y by construction (Riemannian, or a
    /// rescaling/pullback of one).
    pub fn is_riemannian(&self) -> bool {
        match &self.kind {
            ModelKind::Riemannian { .. } => true,
            ModelKind::Randers { .. } | ModelKind::Custom { .. } => false,
            ModelKind::Rescaled { base, .. } | ModelKind::Pullback { base, .. } => base.is_riemannian(),
        }
    }

    /// True for the constant identity metric.
    pub fn is_flat_euclidean(&self) -> bool {
        match &self.kind {
            ModelKind::Riemannian { metric } => metric.iter().enumerate().all(|(k, f)| {
                let want = if k / self.n == k % self.n { 1.0 } else { 0.0 };
                matches!(f.expr(), crate::fields::ScalarExpr::Num(v) if *v == want)
            }),
            _ => false,
        }
    }

    /// F² on jet inputs: `vars` holds the `n` base then the `n` fiber
    /// coordinates, all in one jet space. The result has the same order.
    pub fn f2_jet(&self, vars: &[Jet]) -> Result<Jet> {
        if vars.len() != 2 * self.n {
            return Err(FinjetError::Dimension(format!("model expects {} coordinates", 2 * self.n)));
        }
        let (x, y) = vars.split_at(self.n);
        match &self.kind {
            ModelKind::Riemannian { metric } => quadratic(metric, x, y),
            ModelKind::Randers { metric, oneform } => {
                let norm = quadratic(metric, x, y)?.sqrt()?;
                let mut f = norm;
                for (a, yi) in oneform.iter().zip(y) {
                    f += &(&a.eval_jets(x)? * yi);
                }
                Ok(&f * &f)
            }
            ModelKind::Custom { f } => {
                let v = f.eval_jets(vars)?;
                Ok(&v * &v)
            }
            ModelKind::Rescaled { psi, base } => Ok(psi.eval_jets(x)? * base.f2_jet(vars)?),
            ModelKind::Pullback { map, base } => {
                let order = vars[0].order();
                let at: Vec<f64> = x.iter().map(Jet::value).collect();
                let fj = map.jets(&at, order + 1)?;
                let mut pulled: Vec<Jet> = fj.iter().map(|c| c.truncate(order).compose(x)).collect();
                for c in &fj {
                    let mut yi = y[0].zero_like();
                    for (j, yj) in y.iter().enumerate() {
                        yi += &(&c.derivative(j).compose(x) * yj);
                    }
                    pulled.push(yi);
                }
                base.f2_jet(&pulled)
            }
        }
    }

    /// Plain value of F.
    pub fn f_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let point: Vec<f64> = x.iter().chain(y).copied().collect();
        let f2 = self.f2_jet(&lift_variables(&point, 0))?.value();
        if !(f2 > 0.0) {
            return Err(FinjetError::ModelInvalid(format!("F² = {f2} is not positive at x={x:?}, y={y:?}")));
        }
        Ok(f2.sqrt())
    }
}

/// Whether the Randers condition `a^{ij} α_i α_j < 1` holds at every sample.
pub fn randers_admissible(metric: &[ScalarField], oneform: &[ScalarField], sample_xs: &[Vec<f64>]) -> Result<bool> {
    let n = oneform.len();
    for x in sample_xs {
        let entries = metric.iter().map(|f| f.eval(x)).collect::<Result<Vec<_>>>()?;
        let a = DMatrix::from_row_slice(n, n, &entries);
        let alpha = nalgebra::DVector::from_vec(oneform.iter().map(|f| f.eval(x)).collect::<Result<Vec<_>>>()?);
        let chol = a
            .cholesky()
            .ok_or_else(|| FinjetError::ModelInvalid(format!("metric not positive-definite at {x:?}")))?;
        let norm2 = alpha.dot(&chol.solve(&alpha));
        if !(norm2 < 1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}
