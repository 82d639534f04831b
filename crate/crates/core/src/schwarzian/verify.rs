use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::btensor::bracket_contract;
use super::lift::{Lift, PulledSymbol, Slot, SymbolSource};
use super::{ell, schwarzian};
use crate::connections::{coeffs_from, covariant_derivative_values, ConnectionKind};
use crate::diffeo::Diffeo;
use crate::error::{FinjetError, Result};
use crate::fields::ScalarField;
use crate::finsler::{FinslerJets, FinslerModel, PointOnSlit};
use crate::jets::lift_variables;
use crate::tensor::Tensor;

/// Largest residual over a sample set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub max: f64,
    pub samples: usize,
    /// Index of the sample attaining `max`.
    pub worst_sample: Option<usize>,
}

impl Residual {
    pub fn from_values(values: &[f64]) -> Self {
        let mut r = Residual { max: 0.0, samples: values.len(), worst_sample: None };
        for (i, v) in values.iter().enumerate() {
            // NaN counts as the worst possible residual
            if v.is_nan() || *v > r.max || r.worst_sample.is_none() {
                if r.max.is_nan() {
                    continue;
                }
                r.max = *v;
                r.worst_sample = Some(i);
            }
        }
        r
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max <= tol
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `max |𝒜((f∘h)^{-1})P − f_♭𝒜(h^{-1})P − 𝒜(f^{-1})P|` over the samples, where
/// `f_♭` pushes forward both the argument and the value of the operator.
pub fn verify_cocycle(
    f: &Arc<Diffeo>,
    h: &Arc<Diffeo>,
    model: &FinslerModel,
    kind: ConnectionKind,
    p: &dyn SymbolSource,
    samples: &[PointOnSlit],
) -> Result<Residual> {
    let fh_inv = Arc::new(f.compose(h)).inverse();
    let f_inv = f.inverse();
    let h_inv = h.inverse();
    let delta = p.weight();
    let values = samples
        .par_iter()
        .map(|pt| {
            let lhs = schwarzian(&fh_inv, model, kind, p, pt)?;
            let second = schwarzian(&f_inv, model, kind, p, pt)?;
            let back = Lift::new(&f_inv, pt)?;
            let pulled = PulledSymbol { map: f.clone(), base: p };
            let inner = schwarzian(&h_inv, model, kind, &pulled, &back.image)?;
            let first = back.pull_vector(&inner.components, delta);
            let rhs: Vec<f64> = first.iter().zip(&second.components).map(|(a, b)| a + b).collect();
            Ok(max_diff(&lhs.components, &rhs))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Residual::from_values(&values))
}

/// The model with `F̃ = √ψ·F`, after checking `ψ > 0` at the sample points.
pub fn rescale_model(model: &Arc<FinslerModel>, psi: &ScalarField, sample_xs: &[Vec<f64>]) -> Result<FinslerModel> {
    if psi.has_fiber() && psi.expr().uses_fiber() {
        return Err(FinjetError::Precondition("rescaling function must depend on x only".into()));
    }
    for x in sample_xs {
        let v = psi.eval(x)?;
        if !(v > 0.0) {
            return Err(FinjetError::Precondition(format!("rescaling function is {v} at {x:?}")));
        }
    }
    Ok(model.rescaled(psi.clone()))
}

/// Residuals of the rescaling checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RescalingReport {
    /// `|𝒜_F̃(f)P − 𝒜_F(f)P|`.
    pub operator: Residual,
    /// Connection after rescaling against `K + S + C`.
    pub connection: Residual,
    /// `D̃P` against its closed form.
    pub derivative: Residual,
    /// `ℓ̃(f)` against `ℓ(f) + f^♯(S + C) − (S + C)`.
    pub ell: Residual,
}

/// `S^k_ij = (ψ_i δ^k_j + ψ_j δ^k_i − ψ_t g^{tk} g_ij)/(2ψ)` and the bracket term
/// `C` at one point.
fn shift_terms(fj: &FinslerJets, kind: ConnectionKind, psi: &ScalarField) -> Result<(Tensor, Tensor, f64, Vec<f64>)> {
    let n = fj.dim();
    let x = &fj.point().x;
    let pj = psi.eval_jets(&lift_variables(x, 1))?;
    let (pv, dpsi) = (pj.value(), pj.gradient());
    let g = fj.g();
    let ginv = fj.g_inv();
    let up: Vec<f64> = (0..n).map(|k| (0..n).map(|t| ginv[(t, k)] * dpsi[t]).sum()).collect();
    let s = Tensor::from_fn(n, 3, |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        let mut v = -up[k] * g[(i, j)];
        if k == j {
            v += dpsi[i];
        }
        if k == i {
            v += dpsi[j];
        }
        v / (2.0 * pv)
    });
    let cov: Vec<f64> = dpsi.iter().map(|d| d / (2.0 * pv)).collect();
    let c = bracket_contract(fj, kind, &cov)?;
    Ok((s, c, pv, dpsi))
}

/// Closed form of `D̃_k P^ij − D_k P^ij` under `F ↦ √ψ F`, slots `[k][i][j]`.
fn derivative_shift(p: &DMatrix<f64>, g: &DMatrix<f64>, ginv: &DMatrix<f64>, psi: f64, dpsi: &[f64], c: &Tensor, delta: f64) -> Tensor {
    let n = p.nrows();
    Tensor::from_fn(n, 3, |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        let mut sym = 0.0;
        for (a, b) in [(i, j), (j, i)] {
            // P^{ma}(ψ_m δ^b_k − ψ_t g^{tb} g_km)
            for m in 0..n {
                let mut inner = -(0..n).map(|t| dpsi[t] * ginv[(t, b)]).sum::<f64>() * g[(k, m)];
                if b == k {
                    inner += dpsi[m];
                }
                sym += p[(m, a)] * inner;
            }
        }
        let mut v = (sym + (2.0 - n as f64 * delta) * p[(i, j)] * dpsi[k]) / (2.0 * psi);
        for s in 0..n {
            v += p[(s, j)] * c.get(&[i, s, k]) + p[(i, s)] * c.get(&[j, s, k]);
        }
        v - delta * p[(i, j)] * (0..n).map(|t| c.get(&[t, t, k])).sum::<f64>()
    })
}

/// Compares the operator built from `√ψ·F` with the one built from `F`, and
/// checks the intermediate transformation rules for the connection, `D P` and
/// `ℓ(f)`.
pub fn verify_rescaling_invariance(
    model: &Arc<FinslerModel>,
    psi: &ScalarField,
    f: &Diffeo,
    kind: ConnectionKind,
    p: &dyn SymbolSource,
    samples: &[PointOnSlit],
) -> Result<RescalingReport> {
    let xs: Vec<Vec<f64>> = samples.iter().map(|s| s.x.clone()).collect();
    let tilde = rescale_model(model, psi, &xs)?;
    let delta = p.weight();
    let order = kind.required_order();
    let rows = samples
        .par_iter()
        .map(|pt| -> Result<[f64; 4]> {
            let a = schwarzian(f, model, kind, p, pt)?;
            let at = schwarzian(f, &tilde, kind, p, pt)?;
            let op = max_diff(&a.components, &at.components);

            let fj = FinslerJets::new(model, pt, order)?;
            let fjt = FinslerJets::new(&tilde, pt, order)?;
            let k0 = coeffs_from(&fj, kind)?.horizontal;
            let k1 = coeffs_from(&fjt, kind)?.horizontal;
            let (s, c, pv, dpsi) = shift_terms(&fj, kind, psi)?;
            let conn = k1.sub(&k0).sub(&s).sub(&c).max_abs();

            let pj = p.jet1(&pt.x)?;
            let pm = pj.values();
            let dp: Vec<DMatrix<f64>> = (0..pt.dim()).map(|r| pj.derivative(r).values()).collect();
            let d0 = covariant_derivative_values(&k0, &pm, &dp, delta);
            let d1 = covariant_derivative_values(&k1, &pm, &dp, delta);
            let expected = derivative_shift(&pm, &fj.g(), &fj.g_inv(), pv, &dpsi, &c, delta);
            let der = d1.sub(&d0).sub(&expected).max_abs();

            let lift = Lift::new(f, pt)?;
            let fj_img = FinslerJets::new(model, &lift.image, order)?;
            let (s_img, c_img, _, _) = shift_terms(&fj_img, kind, psi)?;
            let moved = lift.pull_tensor(&s_img.add(&c_img), &[Slot::Up, Slot::Down, Slot::Down], 0.0);
            let l0 = ell(f, model, kind, pt)?;
            let l1 = ell(f, &tilde, kind, pt)?;
            let el = l1.sub(&l0).sub(&moved).add(&s.add(&c)).max_abs();
            Ok([op, conn, der, el])
        })
        .collect::<Result<Vec<_>>>()?;
    let col = |i: usize| Residual::from_values(&rows.iter().map(|r| r[i]).collect::<Vec<_>>());
    Ok(RescalingReport { operator: col(0), connection: col(1), derivative: col(2), ell: col(3) })
}
