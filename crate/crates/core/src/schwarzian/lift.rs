use std::sync::Arc;

use nalgebra::DMatrix;

use crate::diffeo::Diffeo;
use crate::error::{FinjetError, Result};
use crate::fields::SymbolField;
use crate::finsler::PointOnSlit;
use crate::jets::{Jet, JetMatrix};
use crate::tensor::Tensor;

/// Variance of one tensor slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Up,
    Down,
}

/// A map at one point of the slit bundle: the lifted image point and the
/// first two derivatives of the base map.
#[derive(Debug, Clone)]
pub struct Lift {
    pub point: PointOnSlit,
    pub image: PointOnSlit,
    pub jac: DMatrix<f64>,
    pub jac_inv: DMatrix<f64>,
    pub det: f64,
    /// `hessian[k][(a, j)] = ∂²f^a/∂x^j∂x^k`.
    pub hessian: Vec<DMatrix<f64>>,
    /// Jacobian entries as first-order jets in the base variables.
    pub jac_jets: JetMatrix,
}

impl Lift {
    pub fn new(f: &Diffeo, pt: &PointOnSlit) -> Result<Self> {
        let n = pt.dim();
        if f.dim() != n {
            return Err(FinjetError::Dimension(format!("map of dimension {} at a point of dimension {n}", f.dim())));
        }
        let fj = f.jets(&pt.x, 2)?;
        let jac_jets = JetMatrix::from_fn(n, |a, b| fj[a].derivative(b));
        let jac = jac_jets.values();
        let det = jac.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(FinjetError::NumericDomain(format!("singular jacobian at {:?}", pt.x)));
        }
        let jac_inv = jac.clone().try_inverse().ok_or_else(|| FinjetError::NumericDomain("singular jacobian".into()))?;
        let hessian = (0..n).map(|k| jac_jets.derivative(k).values()).collect();
        let x: Vec<f64> = fj.iter().map(Jet::value).collect();
        let y = (&jac * nalgebra::DVector::from_column_slice(&pt.y)).as_slice().to_vec();
        Ok(Lift { point: pt.clone(), image: PointOnSlit::new(x, y)?, jac, jac_inv, det, hessian, jac_jets })
    }

    pub fn dim(&self) -> usize {
        self.jac.nrows()
    }

    /// Pulls back a tensor given at the image point: `J^{-1}` on upper slots,
    /// `J` on lower slots, times `|det J|^weight`.
    pub fn pull_tensor(&self, t: &Tensor, slots: &[Slot], weight: f64) -> Tensor {
        assert_eq!(slots.len(), t.rank(), "one variance per slot");
        let jt = self.jac.transpose();
        let mut out = t.clone();
        for (s, v) in slots.iter().enumerate() {
            out = match v {
                Slot::Up => out.contract_slot(s, &self.jac_inv),
                Slot::Down => out.contract_slot(s, &jt),
            };
        }
        if weight != 0.0 {
            out = out.scale(self.det.abs().powf(weight));
        }
        out
    }

    /// Pulls back connection coefficients `[upper, section, direction]`:
    /// the tensor law plus `(J^{-1})^i_a ∂_k J^a_j`.
    pub fn pull_connection(&self, k: &Tensor) -> Tensor {
        let n = self.dim();
        let tensorial = self.pull_tensor(k, &[Slot::Up, Slot::Down, Slot::Down], 0.0);
        Tensor::from_fn(n, 3, |idx| {
            let (i, j, d) = (idx[0], idx[1], idx[2]);
            tensorial.get(idx) + (0..n).map(|a| self.jac_inv[(i, a)] * self.hessian[d][(a, j)]).sum::<f64>()
        })
    }

    /// Pulls back a weighted vector given at the image point.
    pub fn pull_vector(&self, v: &[f64], weight: f64) -> Vec<f64> {
        let out = &self.jac_inv * nalgebra::DVector::from_column_slice(v) * self.det.abs().powf(weight);
        out.as_slice().to_vec()
    }

    /// Pushes a weighted vector at `point` forward to the image point.
    pub fn push_vector(&self, v: &[f64], weight: f64) -> Vec<f64> {
        let out = &self.jac * nalgebra::DVector::from_column_slice(v) * self.det.abs().powf(-weight);
        out.as_slice().to_vec()
    }
}

/// `(f(x), Df(x)·y)`.
pub fn lift_diffeo(f: &Diffeo, pt: &PointOnSlit) -> Result<PointOnSlit> {
    Ok(Lift::new(f, pt)?.image)
}

/// The module action `f_* T = T∘f̃^{-1}` with one Jacobian of `f^{-1}` per slot
/// and the `weight`-th power of its determinant. `field` evaluates `T` at a
/// point of the slit bundle; fields on the base may ignore `y`.
pub fn pullback_weighted(
    f: &Arc<Diffeo>,
    field: &dyn Fn(&PointOnSlit) -> Result<Tensor>,
    slots: &[Slot],
    weight: f64,
    pt: &PointOnSlit,
) -> Result<Tensor> {
    let lift = Lift::new(&f.inverse(), pt)?;
    let t = field(&lift.image)?;
    if t.rank() != slots.len() {
        return Err(FinjetError::Dimension(format!("tensor of rank {} with {} slots", t.rank(), slots.len())));
    }
    Ok(lift.pull_tensor(&t, slots, weight))
}

/// A weighted symmetric 2-tensor on the base, known through first-order jets.
pub trait SymbolSource: Sync {
    fn dim(&self) -> usize;
    fn weight(&self) -> f64;
    /// First-order jets of the components at `x`, in the base variables.
    fn jet1(&self, x: &[f64]) -> Result<JetMatrix>;
}

impl SymbolSource for SymbolField {
    fn dim(&self) -> usize {
        SymbolField::dim(self)
    }

    fn weight(&self) -> f64 {
        SymbolField::weight(self)
    }

    fn jet1(&self, x: &[f64]) -> Result<JetMatrix> {
        Ok(JetMatrix::from_entries(self.dim(), self.jets(x, 1)?))
    }
}

/// `φ^♯P = J^{-1} (P∘φ) J^{-T} |det J|^δ` for a base map `φ`.
pub struct PulledSymbol<'a> {
    pub map: Arc<Diffeo>,
    pub base: &'a dyn SymbolSource,
}

impl SymbolSource for PulledSymbol<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn weight(&self) -> f64 {
        self.base.weight()
    }

    fn jet1(&self, x: &[f64]) -> Result<JetMatrix> {
        let n = self.dim();
        let fj = self.map.jets(x, 2)?;
        let jac = JetMatrix::from_fn(n, |a, b| fj[a].derivative(b));
        let inner: Vec<Jet> = fj.iter().map(|c| c.truncate(1)).collect();
        let at: Vec<f64> = fj.iter().map(Jet::value).collect();
        let p = self.base.jet1(&at)?.map(|e| e.compose(&inner));
        let inv = jac.inverse()?;
        let inv_t = JetMatrix::from_fn(n, |a, b| inv.get(b, a).clone());
        let det = jac.determinant()?;
        let det = if det.value() < 0.0 { det.scale(-1.0) } else { det };
        let factor = det.powf(self.weight())?;
        Ok(inv.mul(&p).mul(&inv_t).map(|e| &factor * e))
    }
}
