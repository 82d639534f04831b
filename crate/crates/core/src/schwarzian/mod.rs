//! Lifted diffeomorphisms, weighted pullbacks and the Schwarzian-type
//! 1-cocycles built from the Chern, Berwald and Cartan connections.
//!
//! For a symbol `P` of weight δ the operator is evaluated as
//!
//! ```text
//! 𝒜(f)P = (f^♯L − L)P + (2 − δn) T(ℓ(f))·P + (Z − f^♯Z)·P
//! ```
//!
//! with `L P^k = g^{sk} g_ij D_s P^ij`, `ℓ(f) = f^♯K − K` for the horizontal
//! coefficients `K` of the chosen connection, `T` the trace-free projection
//! and `Z = Y(B) + (2 − δn) T(B)` collecting the B-tensor terms. `f^♯` is the
//! ordinary pullback along the lift `(x, y) ↦ (f(x), Df·y)`; on operators it
//! acts by conjugation. The map `f ↦ 𝒜(f^{-1})` is the 1-cocycle.
//!
//! The Cartan variant uses the horizontal block `γ + A·N/F` throughout, pulled
//! back with the connection law on `π*TM`.

mod btensor;
mod lift;
mod verify;

pub use crate::diffeo::{corpus, Diffeo, DiffeoSpec, Domain};
pub use btensor::{
    b_tensor, b_tensor_from, bracket_contract, d_log_f, d_log_f_from, horizontal_d_log_f, horizontal_d_log_f_from,
};
pub use lift::{lift_diffeo, pullback_weighted, Lift, PulledSymbol, Slot, SymbolSource};
pub use verify::{rescale_model, verify_cocycle, verify_rescaling_invariance, RescalingReport, Residual};

use nalgebra::DMatrix;

use crate::connections::{coeffs_from, covariant_derivative_values, ConnectionKind};
use crate::error::{FinjetError, Result};
use crate::fields::ScalarField;
use crate::finsler::{FinslerJets, FinslerModel, PointOnSlit};
use crate::quantization::{levi_civita, MetricField};
use crate::tensor::Tensor;
use btensor::{b_trace_slot, traceless, y_tensor, TraceSlot};

/// Value of `𝒜(f)P` at one point of the slit bundle.
#[derive(Debug, Clone)]
pub struct CocycleValue {
    pub point: PointOnSlit,
    /// `(𝒜(f)P)^k`.
    pub components: Vec<f64>,
    /// Zeroth-order coefficient `𝒜^k_ij` (everything except the conjugated
    /// leading term), slots `[k, i, j]`.
    pub zeroth_order: Tensor,
    /// δ = 2/n, where the cocycle is a coboundary.
    pub degenerate_weight: bool,
}

impl CocycleValue {
    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// True when `delta` is the weight at which the cocycle is trivial.
pub fn is_degenerate_weight(delta: f64, n: usize) -> bool {
    (delta - 2.0 / n as f64).abs() < 1e-12
}

/// Metric, connection and B-term data at one point.
#[derive(Debug, Clone)]
pub(crate) struct Local {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    conn: Tensor,
    z: Tensor,
}

fn local_finsler(model: &FinslerModel, kind: ConnectionKind, delta: f64, pt: &PointOnSlit) -> Result<Local> {
    let fj = FinslerJets::new(model, pt, kind.required_order())?;
    let conn = coeffs_from(&fj, kind)?.horizontal;
    let (g, g_inv) = (fj.g(), fj.g_inv());
    let b = b_tensor_from(&fj, kind)?;
    let c = 2.0 - delta * model.dim() as f64;
    let z = y_tensor(&b, &g, &g_inv, delta, kind).add(&traceless(&b, b_trace_slot(kind)).scale(c));
    Ok(Local { g, g_inv, conn, z })
}

fn local_metric(metric: &MetricField, x: &[f64]) -> Result<Local> {
    let g = metric.jets(x, 0)?.values();
    let g_inv = g.clone().try_inverse().ok_or_else(|| FinjetError::ModelInvalid("singular metric".into()))?;
    let conn = levi_civita(metric, x)?;
    let z = Tensor::zeros(x.len(), 3);
    Ok(Local { g, g_inv, conn, z })
}

/// `g^{sk} g_ij D_s P^ij`.
fn leading(loc: &Local, p: &DMatrix<f64>, dp: &[DMatrix<f64>], delta: f64) -> Vec<f64> {
    let n = p.nrows();
    let d = covariant_derivative_values(&loc.conn, p, dp, delta);
    let contracted: Vec<f64> =
        (0..n).map(|s| (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| loc.g[(i, j)] * d.get(&[s, i, j])).sum()).collect();
    (0..n).map(|k| (0..n).map(|s| loc.g_inv[(s, k)] * contracted[s]).sum()).collect()
}

/// Assembles `𝒜(f)P` at `lift.point` from the local data at the point and at
/// its image.
fn assemble(lift: &Lift, here: &Local, there: &Local, p: &dyn SymbolSource) -> Result<CocycleValue> {
    let n = lift.dim();
    let delta = p.weight();
    let c = 2.0 - delta * n as f64;
    let x = &lift.point.x;
    let pj = p.jet1(x)?;
    let pv = pj.values();
    let dp: Vec<DMatrix<f64>> = (0..n).map(|s| pj.derivative(s).values()).collect();
    let lp = leading(here, &pv, &dp, delta);

    // Q = f_♭P at the image: Q∘f = J P Jᵀ |det J|^{-δ}; ∂̃ = J^{-T} ∂.
    let jj = &lift.jac_jets;
    let jt = crate::jets::JetMatrix::from_fn(n, |a, b| jj.get(b, a).clone());
    let det = jj.determinant()?;
    let det = if det.value() < 0.0 { det.scale(-1.0) } else { det };
    let factor = det.powf(-delta)?;
    let qf = jj.mul(&pj).mul(&jt).map(|e| &factor * e);
    let qv = qf.values();
    let dqf: Vec<DMatrix<f64>> = (0..n).map(|b| qf.derivative(b).values()).collect();
    let dq: Vec<DMatrix<f64>> = (0..n)
        .map(|a| {
            let mut m = DMatrix::zeros(n, n);
            for (b, d) in dqf.iter().enumerate() {
                m += d * lift.jac_inv[(b, a)];
            }
            m
        })
        .collect();
    let lq = leading(there, &qv, &dq, delta);
    let pulled = lift.pull_vector(&lq, delta);

    let ell = lift.pull_connection(&there.conn).sub(&here.conn);
    let fz = lift.pull_tensor(&there.z, &[Slot::Up, Slot::Down, Slot::Down], 0.0);
    let zeroth = traceless(&ell, TraceSlot::First).scale(c).add(&here.z).sub(&fz);
    let components = (0..n)
        .map(|k| {
            let mut v = pulled[k] - lp[k];
            for i in 0..n {
                for j in 0..n {
                    v += zeroth.get(&[k, i, j]) * pv[(i, j)];
                }
            }
            v
        })
        .collect();
    Ok(CocycleValue {
        point: lift.point.clone(),
        components,
        zeroth_order: zeroth,
        degenerate_weight: is_degenerate_weight(delta, n),
    })
}

fn check_dims(model: &FinslerModel, p: &dyn SymbolSource, pt: &PointOnSlit) -> Result<()> {
    if p.dim() != model.dim() || pt.dim() != model.dim() {
        return Err(FinjetError::Dimension("model, symbol and point dimensions differ".into()));
    }
    Ok(())
}

/// `(𝒜(f)P)^k` at `pt` for the chosen variant; δ is the weight of `P`.
pub fn schwarzian(
    f: &Diffeo,
    model: &FinslerModel,
    kind: ConnectionKind,
    p: &dyn SymbolSource,
    pt: &PointOnSlit,
) -> Result<CocycleValue> {
    check_dims(model, p, pt)?;
    let lift = Lift::new(f, pt)?;
    let here = local_finsler(model, kind, p.weight(), pt)?;
    let there = local_finsler(model, kind, p.weight(), &lift.image)?;
    assemble(&lift, &here, &there, p)
}

/// The Riemannian form: leading term and trace-free `ℓ` with the Levi-Civita
/// connection of the model's metric. Independent of the fiber; the returned
/// point carries `y = e₁`.
pub fn schwarzian_reduced(f: &Diffeo, model: &FinslerModel, p: &dyn SymbolSource, x: &[f64]) -> Result<CocycleValue> {
    let metric = MetricField::from_model(model)?;
    let n = model.dim();
    let mut y = vec![0.0; n];
    y[0] = 1.0;
    let pt = PointOnSlit::new(x.to_vec(), y)?;
    check_dims(model, p, &pt)?;
    let lift = Lift::new(f, &pt)?;
    let here = local_metric(&metric, x)?;
    let there = local_metric(&metric, &lift.image.x)?;
    assemble(&lift, &here, &there, p)
}

/// `𝒜(f)` with the vector field `X` substituted for the fiber coordinates.
pub fn breve_schwarzian(
    f: &Diffeo,
    model: &FinslerModel,
    kind: ConnectionKind,
    p: &dyn SymbolSource,
    field: &[ScalarField],
    x: &[f64],
) -> Result<CocycleValue> {
    if field.len() != model.dim() {
        return Err(FinjetError::Dimension("vector field has the wrong number of components".into()));
    }
    let y = field.iter().map(|c| c.eval(x)).collect::<Result<Vec<_>>>()?;
    if y.iter().all(|v| *v == 0.0) {
        return Err(FinjetError::Precondition(format!("vector field vanishes at {x:?}")));
    }
    schwarzian(f, model, kind, p, &PointOnSlit::new(x.to_vec(), y)?)
}

/// `ℓ(f) = f^♯K − K` for the horizontal coefficients `K` of the connection.
pub fn ell(f: &Diffeo, model: &FinslerModel, kind: ConnectionKind, pt: &PointOnSlit) -> Result<Tensor> {
    let lift = Lift::new(f, pt)?;
    let order = kind.required_order();
    let here = coeffs_from(&FinslerJets::new(model, pt, order)?, kind)?.horizontal;
    let there = coeffs_from(&FinslerJets::new(model, &lift.image, order)?, kind)?.horizontal;
    Ok(lift.pull_connection(&there).sub(&here))
}

/// `ℓ` of the Cartan horizontal block `γ + A·N/F`, slots `[upper, section,
/// direction]`.
pub fn ell_cartan(f: &Diffeo, model: &FinslerModel, pt: &PointOnSlit) -> Result<Tensor> {
    ell(f, model, ConnectionKind::Cartan, pt)
}

#[cfg(test)]
mod tests;
