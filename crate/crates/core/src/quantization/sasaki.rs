use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::metric::{christoffel_jets, ricci_from, riemann_from, CurvatureSign, MetricField};
use super::operator::{beta_constants, density_test_basis, quantize, QuantizedOperator, SymbolJets};
use crate::error::{FinjetError, Result};
use crate::fields::{DensityField, ScalarField, SymbolField};
use crate::finsler::{FinslerJets, FinslerModel, PointOnSlit};
use crate::jets::{lift_variables, Jet, JetMatrix};

/// The Sasaki-type metric on the `2n` coordinates `(x, y)`:
/// `(g + NᵀgN/F²) dx dx + gN/F² (dy dx + dx dy) + g/F² dy dy`.
pub fn sasaki_metric(model: &Arc<FinslerModel>) -> MetricField {
    MetricField::Sasaki(model.clone())
}

fn split(model: &FinslerModel, pt: &[f64]) -> Result<PointOnSlit> {
    let n = model.dim();
    if pt.len() != 2 * n {
        return Err(FinjetError::Dimension(format!("bundle point needs {} coordinates, got {}", 2 * n, pt.len())));
    }
    PointOnSlit::new(pt[..n].to_vec(), pt[n..].to_vec())
}

/// The extension of an x-only symbol to the tangent bundle, with blocks
/// `P`, `−P Nᵀ`, `−N P` and `N P Nᵀ + P F²`.
#[derive(Debug, Clone)]
pub struct LiftedSymbol {
    pub symbol: SymbolField,
    pub model: Arc<FinslerModel>,
    pub weight: f64,
}

impl SymbolJets for LiftedSymbol {
    fn dim(&self) -> usize {
        2 * self.model.dim()
    }

    fn weight(&self) -> f64 {
        self.weight
    }

    fn jets(&self, pt: &[f64], order: usize) -> Result<JetMatrix> {
        let n = self.model.dim();
        let point = split(&self.model, pt)?;
        let fj = FinslerJets::new(&self.model, &point, order + 4)?;
        let nl = fj.nonlinear_jets()?.truncate(order);
        let f2 = fj.f2_jet().truncate(order);
        let vars = lift_variables(pt, order);
        let p = JetMatrix::from_entries(n, self.symbol.eval_jets(&vars[..n])?);
        let nt = JetMatrix::from_fn(n, |a, b| nl.get(b, a).clone());
        let pnt = p.mul(&nt);
        let npnt = nl.mul(&pnt);
        Ok(JetMatrix::from_fn(2 * n, |a, b| match (a < n, b < n) {
            (true, true) => p.get(a, b).clone(),
            (true, false) => -pnt.get(a, b - n),
            (false, true) => -pnt.get(b, a - n),
            (false, false) => npnt.get(a - n, b - n) + &(p.get(a - n, b - n) * &f2),
        }))
    }
}

/// Values of the lifted symbol at `(x, y)`.
pub fn lift_symbol(p: &SymbolField, model: &Arc<FinslerModel>, pt: &PointOnSlit) -> Result<DMatrix<f64>> {
    if p.dim() != model.dim() {
        return Err(FinjetError::Dimension("symbol and model dimensions differ".into()));
    }
    let lifted = LiftedSymbol { symbol: p.clone(), model: model.clone(), weight: p.weight() / 2.0 };
    Ok(lifted.jets(&pt.coords(), 0)?.values())
}

/// A λ-density on the base read as a fiber-constant `λ/2`-density on the
/// tangent bundle.
pub fn embed_density(phi: &DensityField) -> DensityField {
    DensityField::new(phi.scalar.on_bundle(), phi.weight / 2.0)
}

/// `Q^m_{λ,μ}(P̃)` restricted to base densities of weight `2λ`, where `m` is the
/// Sasaki-type metric and `P̃` the lift of a weight-`2δ` symbol.
#[derive(Debug, Clone)]
pub struct RestrictedQuantization {
    model: Arc<FinslerModel>,
    op: QuantizedOperator,
}

impl RestrictedQuantization {
    pub fn new(model: &Arc<FinslerModel>, lambda: f64, mu: f64, p: &SymbolField) -> Result<Self> {
        let n = model.dim();
        let beta = beta_constants(2 * n, lambda, mu)?;
        if p.dim() != n {
            return Err(FinjetError::Dimension("symbol and model dimensions differ".into()));
        }
        if (p.weight() - 2.0 * beta.delta).abs() > 1e-12 {
            return Err(FinjetError::Precondition(format!(
                "symbol weight {} differs from 2(mu - lambda) = {}",
                p.weight(),
                2.0 * beta.delta
            )));
        }
        let lifted = LiftedSymbol { symbol: p.clone(), model: model.clone(), weight: beta.delta };
        let op = quantize(&sasaki_metric(model), lambda, mu, Arc::new(lifted))?;
        Ok(RestrictedQuantization { model: model.clone(), op })
    }

    pub fn operator(&self) -> &QuantizedOperator {
        &self.op
    }

    /// Evaluates on base densities of weight `2λ` at `(x, y)`.
    pub fn eval_many(&self, phis: &[DensityField], pt: &PointOnSlit) -> Result<Vec<f64>> {
        let lambda = self.op.beta().lambda;
        if pt.dim() != self.model.dim() {
            return Err(FinjetError::Dimension("point and model dimensions differ".into()));
        }
        let coords = pt.coords();
        let at = self.op.at(&coords)?;
        let vars = lift_variables(&coords, 2);
        phis.iter()
            .map(|phi| {
                if (phi.weight - 2.0 * lambda).abs() > 1e-12 {
                    return Err(FinjetError::Precondition(format!(
                        "base density weight {} differs from 2 lambda = {}",
                        phi.weight,
                        2.0 * lambda
                    )));
                }
                let lifted = embed_density(phi);
                at.apply_jet(&lifted.scalar.eval_jets(&vars)?)
            })
            .collect()
    }

    pub fn eval(&self, phi: &DensityField, pt: &PointOnSlit) -> Result<f64> {
        Ok(self.eval_many(std::slice::from_ref(phi), pt)?[0])
    }
}

/// `Q^m_{λ,μ}(P̃)φ` at `(x, y)` for a base density `φ` of weight `2λ`.
pub fn restricted_quantization(
    model: &Arc<FinslerModel>,
    lambda: f64,
    mu: f64,
    p: &SymbolField,
    phi: &DensityField,
    pt: &PointOnSlit,
) -> Result<f64> {
    RestrictedQuantization::new(model, lambda, mu, p)?.eval(phi, pt)
}

/// `P^ij ∂_i∂_jφ + (∂_iP^ij − P^sj ∂_{y^i}N^i_s) ∂_jφ`, the restricted operator
/// at `(λ, μ) = (0, 1)` written out.
pub fn kinetic_formula(model: &FinslerModel, p: &SymbolField, phi: &ScalarField, pt: &PointOnSlit) -> Result<f64> {
    let n = model.dim();
    let fj = FinslerJets::new(model, pt, 5)?;
    let nl = fj.nonlinear_jets()?;
    // div_n[s] = ∂_{y^i} N^i_s
    let div_n: Vec<f64> = (0..n).map(|s| (0..n).map(|i| nl.get(i, s).derivative(n + i).value()).sum()).collect();
    let pj = SymbolField::jets(p, &pt.x, 1)?;
    let fjet = phi.eval_jets(&lift_variables(&pt.x, 2))?;
    let mut out = 0.0;
    for j in 0..n {
        let dj = fjet.derivative(j);
        let mut b = 0.0;
        for i in 0..n {
            out += pj[i * n + j].value() * dj.derivative(i).value();
            b += pj[i * n + j].derivative(i).value();
        }
        for s in 0..n {
            b -= pj[s * n + j].value() * div_n[s];
        }
        out += b * dj.value();
    }
    Ok(out)
}

/// `P^ij ∇_i∇_jφ + ∇_i(P^ij) ∇_jφ` for the Levi-Civita connection of `metric`,
/// on a function `φ`. `P` is read with weight 2, the pairing at `(0, 1)`.
pub fn q01_descended(metric: &MetricField, p: &SymbolField, phi: &ScalarField, x: &[f64]) -> Result<f64> {
    let n = metric.dim();
    if p.dim() != n {
        return Err(FinjetError::Dimension("symbol and metric dimensions differ".into()));
    }
    let gj = christoffel_jets(metric, x, 0)?;
    let g = |k: usize, i: usize, j: usize| gj[(k * n + i) * n + j].value();
    let tr: Vec<f64> = (0..n).map(|i| (0..n).map(|t| g(t, t, i)).sum()).collect();
    let pj = SymbolField::jets(p, x, 1)?;
    let pv = |i: usize, j: usize| pj[i * n + j].value();
    let f = phi.eval_jets(&lift_variables(x, 2))?;
    let grad: Vec<Jet> = (0..n).map(|j| f.derivative(j)).collect();
    let mut out = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut h = grad[j].derivative(i).value();
            for t in 0..n {
                h -= g(t, i, j) * grad[t].value();
            }
            out += pv(i, j) * h;
        }
    }
    for j in 0..n {
        let mut w = 0.0;
        for i in 0..n {
            w += pj[i * n + j].derivative(i).value() - 2.0 * tr[i] * pv(i, j);
            for t in 0..n {
                w += g(i, i, t) * pv(t, j) + g(j, i, t) * pv(i, t);
            }
        }
        out += w * grad[j].value();
    }
    Ok(out)
}

/// Outcome of a descent probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescentVerdict {
    Descends,
    Obstructed,
    Inconclusive,
}

/// Fiber variation of the restricted operator at one base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentReport {
    /// Largest difference of outputs between two fiber samples.
    pub variation: f64,
    /// Largest output magnitude, at least 1.
    pub scale: f64,
    pub verdict: DescentVerdict,
    /// Weight of the base densities, `2λ`.
    pub base_weight: f64,
    /// Weight of the same densities on the tangent bundle, `λ`.
    pub bundle_weight: f64,
    /// `3n²λ(μ−1)/(1+2n)`, the coefficient of `ω_iω_jP^ij` in the flat case.
    pub omega_coefficient: f64,
    /// `1 − β₁` for `m = 2n`.
    pub one_minus_beta1: f64,
}

/// Relative thresholds of the descent decision.
pub const DESCENDS_BELOW: f64 = 1e-6;
pub const OBSTRUCTED_ABOVE: f64 = 1e-3;

/// `3n²λ(μ−1)/(1+2n)`.
pub fn omega_coefficient(n: usize, lambda: f64, mu: f64) -> f64 {
    let nf = n as f64;
    3.0 * nf * nf * lambda * (mu - 1.0) / (1.0 + 2.0 * nf)
}

/// Evaluates the restricted operator on the density test basis at each fiber
/// sample over `x` and reports the largest variation between samples.
pub fn descent_probe(
    model: &Arc<FinslerModel>,
    lambda: f64,
    mu: f64,
    p: &SymbolField,
    x: &[f64],
    fiber_samples: &[Vec<f64>],
) -> Result<DescentReport> {
    use rayon::prelude::*;
    if fiber_samples.len() < 2 {
        return Err(FinjetError::Precondition("descent probe needs at least two fiber samples".into()));
    }
    let rq = RestrictedQuantization::new(model, lambda, mu, p)?;
    let basis = density_test_basis(model.dim(), 2.0 * lambda);
    let outputs = fiber_samples
        .par_iter()
        .map(|y| rq.eval_many(&basis, &PointOnSlit::new(x.to_vec(), y.clone())?))
        .collect::<Result<Vec<_>>>()?;
    let mut variation: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for (a, row) in outputs.iter().enumerate() {
        for v in row {
            scale = scale.max(v.abs());
        }
        for other in &outputs[a + 1..] {
            for (u, v) in row.iter().zip(other) {
                variation = variation.max((u - v).abs());
            }
        }
    }
    let verdict = if variation <= DESCENDS_BELOW * scale {
        DescentVerdict::Descends
    } else if variation >= OBSTRUCTED_ABOVE * scale {
        DescentVerdict::Obstructed
    } else {
        DescentVerdict::Inconclusive
    };
    Ok(DescentReport {
        variation,
        scale,
        verdict,
        base_weight: 2.0 * lambda,
        bundle_weight: lambda,
        omega_coefficient: omega_coefficient(model.dim(), lambda, mu),
        one_minus_beta1: 1.0 - rq.op.beta().beta[0],
    })
}

/// The four contractions `R_ij P̃^ij`, `R_īj P̃^īj`, `R_ij̄ P̃^ij̄`, `R_īj̄ P̃^īj̄` of
/// the Ricci tensor of the Sasaki-type metric with the lifted symbol.
pub fn ricci_contractions_flat(
    model: &Arc<FinslerModel>,
    p: &SymbolField,
    pt: &PointOnSlit,
    sign: CurvatureSign,
) -> Result<[f64; 4]> {
    if !model.is_flat_euclidean() {
        return Err(FinjetError::Precondition("ricci contractions need the flat euclidean model".into()));
    }
    let n = model.dim();
    let coords = pt.coords();
    let metric = sasaki_metric(model);
    let gj = christoffel_jets(&metric, &coords, 1)?;
    let inv = metric.jets(&coords, 0)?.values().try_inverse().ok_or_else(|| FinjetError::ModelInvalid("singular metric".into()))?;
    let (ric, _) = ricci_from(&riemann_from(&gj, 2 * n), &inv);
    let lifted = lift_symbol(p, model, pt)?;
    let mut out = [0.0; 4];
    for a in 0..2 * n {
        for b in 0..2 * n {
            let block = match (a < n, b < n) {
                (true, true) => 0,
                (false, true) => 1,
                (true, false) => 2,
                (false, false) => 3,
            };
            out[block] += sign.factor() * ric.get(&[a, b]) * lifted[(a, b)];
        }
    }
    Ok(out)
}
