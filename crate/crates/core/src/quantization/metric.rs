use std::sync::Arc;

use crate::error::{FinjetError, Result};
use crate::fields::ScalarField;
use crate::finsler::{FinslerJets, FinslerModel, PointOnSlit};
use crate::jets::{lift_variables, Jet, JetMatrix};
use crate::tensor::Tensor;

/// A Riemannian metric on a chart of dimension `d`.
#[derive(Debug, Clone)]
pub enum MetricField {
    /// Explicit components over the chart coordinates, row-major.
    Explicit { d: usize, components: Vec<ScalarField> },
    /// `e^{2σ} · base`.
    Conformal { sigma: ScalarField, base: Box<MetricField> },
    /// The Sasaki-type metric of a Finsler model, on the `2n` coordinates `(x, y)`.
    Sasaki(Arc<FinslerModel>),
}

impl MetricField {
    pub fn new(d: usize, components: Vec<ScalarField>) -> Result<Self> {
        if components.len() != d * d {
            return Err(FinjetError::Dimension(format!("metric needs {} components", d * d)));
        }
        if components.iter().any(|c| c.arity() != d && c.expr().uses_fiber()) {
            return Err(FinjetError::Dimension("metric components must live on the chart".into()));
        }
        for i in 0..d {
            for j in 0..i {
                if components[i * d + j].expr() != components[j * d + i].expr() {
                    return Err(FinjetError::ModelInvalid(format!("metric entry ({}, {}) is not symmetric", i + 1, j + 1)));
                }
            }
        }
        Ok(MetricField::Explicit { d, components })
    }

    pub fn parse(d: usize, components: &[&str]) -> Result<Self> {
        let fields = components.iter().map(|e| ScalarField::parse(e, d, false)).collect::<Result<_>>()?;
        Self::new(d, fields)
    }

    pub fn euclidean(d: usize) -> Self {
        let components = (0..d * d).map(|k| ScalarField::constant(d, if k / d == k % d { 1.0 } else { 0.0 })).collect();
        MetricField::Explicit { d, components }
    }

    /// The metric of a Riemannian model.
    pub fn from_model(model: &FinslerModel) -> Result<Self> {
        let metric = model
            .riemannian_metric()
            .ok_or_else(|| FinjetError::Precondition("model is not riemannian".into()))?;
        Self::new(model.dim(), metric.to_vec())
    }

    pub fn conformal(self, sigma: ScalarField) -> Self {
        MetricField::Conformal { sigma, base: Box::new(self) }
    }

    pub fn dim(&self) -> usize {
        match self {
            MetricField::Explicit { d, .. } => *d,
            MetricField::Conformal { base, .. } => base.dim(),
            MetricField::Sasaki(model) => 2 * model.dim(),
        }
    }

    /// Jets of the components at `pt`, in `dim()` variables.
    pub fn jets(&self, pt: &[f64], order: usize) -> Result<JetMatrix> {
        let d = self.dim();
        if pt.len() != d {
            return Err(FinjetError::Dimension(format!("metric of dimension {d} evaluated at {} coordinates", pt.len())));
        }
        match self {
            MetricField::Explicit { components, .. } => {
                let vars = lift_variables(pt, order);
                let entries = components.iter().map(|c| c.eval_jets(&vars)).collect::<Result<_>>()?;
                Ok(JetMatrix::from_entries(d, entries))
            }
            MetricField::Conformal { sigma, base } => {
                let vars = lift_variables(pt, order);
                let factor = sigma.eval_jets(&vars)?.scale(2.0).exp();
                Ok(base.jets(pt, order)?.map(|e| &factor * e))
            }
            MetricField::Sasaki(model) => sasaki_jets(model, pt, order),
        }
    }
}

fn sasaki_jets(model: &FinslerModel, pt: &[f64], order: usize) -> Result<JetMatrix> {
    let n = model.dim();
    let point = PointOnSlit::new(pt[..n].to_vec(), pt[n..].to_vec())?;
    let fj = FinslerJets::new(model, &point, order + 4)?;
    let g = fj.g_jets().truncate(order);
    let nl = fj.nonlinear_jets()?.truncate(order);
    let inv_f2 = fj.f2_jet().truncate(order).recip()?;
    // gn[s][j] = g_st N^t_j
    let gn = g.mul(&nl);
    Ok(JetMatrix::from_fn(2 * n, |a, b| match (a < n, b < n) {
        (true, true) => {
            let mut acc = g.get(a, b).clone();
            let mut quad = acc.zero_like();
            for s in 0..n {
                quad += &(nl.get(s, a) * gn.get(s, b));
            }
            acc += &(&quad * &inv_f2);
            acc
        }
        (false, true) => gn.get(a - n, b) * &inv_f2,
        (true, false) => gn.get(b - n, a) * &inv_f2,
        (false, false) => g.get(a - n, b - n) * &inv_f2,
    }))
}

/// Christoffel symbols `Γ^k_ij` as jets of the given order (metric jets one
/// order higher are used), stored `[k][i][j]` flat.
pub(crate) fn christoffel_jets(metric: &MetricField, pt: &[f64], order: usize) -> Result<Vec<Jet>> {
    let d = metric.dim();
    let m = metric.jets(pt, order + 1)?;
    if m.values().cholesky().is_none() {
        return Err(FinjetError::ModelInvalid(format!("metric is not positive-definite at {pt:?}")));
    }
    let inv = m.truncate(order).inverse()?;
    let dm: Vec<JetMatrix> = (0..d).map(|c| m.derivative(c)).collect();
    let mut lower = Vec::with_capacity(d * d * d);
    for s in 0..d {
        for i in 0..d {
            for j in 0..d {
                let v = &(dm[j].get(s, i) + dm[i].get(s, j)) - dm[s].get(i, j);
                lower.push(v.scale(0.5));
            }
        }
    }
    let mut out = Vec::with_capacity(d * d * d);
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = lower[0].zero_like();
                for s in 0..d {
                    acc += &(inv.get(k, s) * &lower[(s * d + i) * d + j]);
                }
                out.push(acc);
            }
        }
    }
    Ok(out)
}

/// Levi-Civita symbols `Γ^k_ij`, tensor slots `[k, i, j]`.
pub fn levi_civita(metric: &MetricField, pt: &[f64]) -> Result<Tensor> {
    let g = christoffel_jets(metric, pt, 0)?;
    Ok(Tensor::from_data(metric.dim(), 3, g.iter().map(Jet::value).collect()))
}

/// `R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb`.
pub fn riemann(metric: &MetricField, pt: &[f64]) -> Result<Tensor> {
    Ok(riemann_from(&christoffel_jets(metric, pt, 1)?, metric.dim()))
}

/// Riemann tensor from first-order jets of the Christoffel symbols.
pub(crate) fn riemann_from(gj: &[Jet], d: usize) -> Tensor {
    let at = |k: usize, i: usize, j: usize| &gj[(k * d + i) * d + j];
    let gv = |k: usize, i: usize, j: usize| at(k, i, j).value();
    Tensor::from_fn(d, 4, |idx| {
        let (a, b, c, e) = (idx[0], idx[1], idx[2], idx[3]);
        let mut v = at(a, e, b).derivative(c).value() - at(a, c, b).derivative(e).value();
        for m in 0..d {
            v += gv(a, c, m) * gv(m, e, b) - gv(a, e, m) * gv(m, c, b);
        }
        v
    })
}

/// Which index of `R^a_bcd` the Ricci tensor contracts against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureSign {
    /// `R_bd = R^a_bad`; the unit sphere has `R = n(n−1)`.
    #[default]
    Standard,
    /// `R_bd = R^a_bda`, the negative of the standard one.
    Reversed,
}

impl CurvatureSign {
    pub fn factor(self) -> f64 {
        match self {
            CurvatureSign::Standard => 1.0,
            CurvatureSign::Reversed => -1.0,
        }
    }
}

/// `R_bd = R^a_bad` and `R = g^{bd} R_bd`.
pub(crate) fn ricci_from(r: &Tensor, inv: &nalgebra::DMatrix<f64>) -> (Tensor, f64) {
    let d = r.n();
    let ric = Tensor::from_fn(d, 2, |idx| (0..d).map(|a| r.get(&[a, idx[0], a, idx[1]])).sum());
    let mut scalar = 0.0;
    for i in 0..d {
        for j in 0..d {
            scalar += inv[(i, j)] * ric.get(&[i, j]);
        }
    }
    (ric, scalar)
}

/// Ricci tensor `R_bd = R^a_bad` and scalar curvature.
pub fn ricci_scalar(metric: &MetricField, pt: &[f64]) -> Result<(Tensor, f64)> {
    ricci_scalar_signed(metric, pt, CurvatureSign::Standard)
}

pub fn ricci_scalar_signed(metric: &MetricField, pt: &[f64], sign: CurvatureSign) -> Result<(Tensor, f64)> {
    let r = riemann(metric, pt)?;
    let inv = metric
        .jets(pt, 0)?
        .values()
        .try_inverse()
        .ok_or_else(|| FinjetError::ModelInvalid("singular metric".into()))?;
    let (ric, scalar) = ricci_from(&r, &inv);
    let s = sign.factor();
    Ok((ric.scale(s), scalar * s))
}
