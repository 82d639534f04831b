use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::FinslerModel;
use crate::error::{FinjetError, Result};
use crate::jets::{lift_variables, Jet, JetMatrix};
use crate::tensor::Tensor;

/// A point `(x, y)` of the slit tangent bundle, `y ≠ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointOnSlit {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PointOnSlit {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(FinjetError::Dimension(format!("x has {} and y has {} entries", x.len(), y.len())));
        }
        if y.iter().all(|v| *v == 0.0) {
            return Err(FinjetError::OutsideDomain("y = 0 is on the zero section".into()));
        }
        Ok(PointOnSlit { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `(x, y)` flattened.
    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }
}

/// Jets of the basic Finsler objects around one point, in the `2n` variables
/// `(x, y)`. With `F²` expanded to order `K`, `g` has order `K-2`, the Cartan
/// tensor `K-3` and the nonlinear connection `K-4`.
#[derive(Debug, Clone)]
pub struct FinslerJets {
    n: usize,
    order: usize,
    point: PointOnSlit,
    vars: Vec<Jet>,
    f2: Jet,
    f: Jet,
    g: JetMatrix,
    g_inv: JetMatrix,
    omega: Vec<Jet>,
    cartan: Option<Vec<Jet>>,
    spray: Option<Vec<Jet>>,
    nonlinear: Option<JetMatrix>,
}

fn missing(requested: usize, order: usize) -> FinjetError {
    FinjetError::OrderExceeded { requested, available: order }
}

impl FinslerJets {
    /// Expands the model at `pt` with `F²` to `order` (at least 2).
    pub fn new(model: &FinslerModel, pt: &PointOnSlit, order: usize) -> Result<Self> {
        let n = model.dim();
        if pt.dim() != n {
            return Err(FinjetError::Dimension(format!("point has dimension {}, model {n}", pt.dim())));
        }
        if order < 2 {
            return Err(missing(2, order));
        }
        let vars = lift_variables(&pt.coords(), order);
        let f2 = model.f2_jet(&vars)?;
        if !(f2.value() > 0.0) {
            return Err(FinjetError::ModelInvalid(format!("F² = {} is not positive at {pt:?}", f2.value())));
        }
        let f = f2.sqrt()?;
        let dy: Vec<Jet> = (0..n).map(|i| f2.derivative(n + i)).collect();
        let g = JetMatrix::from_fn(n, |i, j| dy[i].derivative(n + j).scale(0.5));
        if g.values().cholesky().is_none() {
            return Err(FinjetError::ModelInvalid(format!(
                "fundamental tensor is not positive-definite at x={:?}, y={:?}",
                pt.x, pt.y
            )));
        }
        let g_inv = g.inverse()?;
        let omega = (0..n).map(|i| f.derivative(n + i)).collect();

        let mut out = FinslerJets { n, order, point: pt.clone(), vars, f2, f, g, g_inv, omega, cartan: None, spray: None, nonlinear: None };
        if order >= 3 {
            out.cartan = Some(out.build_cartan());
            out.spray = Some(out.build_spray());
        }
        if order >= 4 {
            let spray = out.spray.as_ref().expect("spray built");
            out.nonlinear = Some(JetMatrix::from_fn(n, |k, m| spray[k].derivative(n + m)));
        }
        Ok(out)
    }

    fn build_cartan(&self) -> Vec<Jet> {
        let n = self.n;
        let half_f = self.f.scale(0.5);
        let mut a = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                let gij = self.g.get(i, j);
                for k in 0..n {
                    a.push(&half_f * &gij.derivative(n + k));
                }
            }
        }
        a
    }

    /// `G^k = ¼ g^{ks} (2 ∂_j g_si − ∂_s g_ij) y^i y^j`.
    fn build_spray(&self) -> Vec<Jet> {
        let n = self.n;
        let y = &self.vars[n..];
        // dx[c][a*n+b] = ∂g_ab/∂x^c
        let dx: Vec<Vec<Jet>> =
            (0..n).map(|c| self.g.entries().iter().map(|e| e.derivative(c)).collect()).collect();
        let h: Vec<Jet> = (0..n)
            .map(|s| {
                let mut acc = y[0].zero_like().truncate(self.order - 3);
                for i in 0..n {
                    for j in 0..n {
                        let coeff = &dx[j][s * n + i].scale(2.0) - &dx[s][i * n + j];
                        acc += &(&coeff * &(&y[i] * &y[j]));
                    }
                }
                acc
            })
            .collect();
        (0..n)
            .map(|k| {
                let mut acc = h[0].zero_like();
                for (s, hs) in h.iter().enumerate() {
                    acc += &(self.g_inv.get(k, s) * hs);
                }
                acc.scale(0.25)
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn point(&self) -> &PointOnSlit {
        &self.point
    }

    /// Coordinate jets `(x, y)` of the expansion.
    pub fn vars(&self) -> &[Jet] {
        &self.vars
    }

    pub fn f2_jet(&self) -> &Jet {
        &self.f2
    }

    pub fn f_jet(&self) -> &Jet {
        &self.f
    }

    pub fn g_jets(&self) -> &JetMatrix {
        &self.g
    }

    pub fn g_inv_jets(&self) -> &JetMatrix {
        &self.g_inv
    }

    pub fn omega_jets(&self) -> &[Jet] {
        &self.omega
    }

    /// `A_ijk` at flat index `(i·n + j)·n + k`.
    pub fn cartan_jets(&self) -> Result<&[Jet]> {
        self.cartan.as_deref().ok_or(missing(3, self.order))
    }

    pub fn spray_jets(&self) -> Result<&[Jet]> {
        self.spray.as_deref().ok_or(missing(3, self.order))
    }

    /// `N^k_m` at row `k`, column `m`.
    pub fn nonlinear_jets(&self) -> Result<&JetMatrix> {
        self.nonlinear.as_ref().ok_or(missing(4, self.order))
    }

    pub fn f(&self) -> f64 {
        self.f.value()
    }

    pub fn g(&self) -> DMatrix<f64> {
        self.g.values()
    }

    pub fn g_inv(&self) -> DMatrix<f64> {
        self.g_inv.values()
    }

    pub fn omega(&self) -> Vec<f64> {
        self.omega.iter().map(Jet::value).collect()
    }

    pub fn cartan(&self) -> Result<Tensor> {
        let a = self.cartan_jets()?;
        Ok(Tensor::from_data(self.n, 3, a.iter().map(Jet::value).collect()))
    }

    pub fn nonlinear(&self) -> Result<DMatrix<f64>> {
        Ok(self.nonlinear_jets()?.values())
    }

    /// `y_i = g_ij y^j`.
    pub fn y_lower(&self) -> Vec<f64> {
        let g = self.g();
        (0..self.n).map(|i| (0..self.n).map(|j| g[(i, j)] * self.point.y[j]).sum()).collect()
    }

    /// `δh/δx^s = ∂h/∂x^s − N^t_s ∂h/∂y^t`, as a jet.
    pub fn horizontal_derivative(&self, h: &Jet, s: usize) -> Result<Jet> {
        let nl = self.nonlinear_jets()?;
        let mut out = h.derivative(s);
        for t in 0..self.n {
            out -= &(nl.get(t, s) * &h.derivative(self.n + t));
        }
        Ok(out)
    }

    /// Contracts `slot` with `g^{-1}`.
    pub fn raise(&self, t: &Tensor, slot: usize) -> Tensor {
        t.contract_slot(slot, &self.g_inv())
    }

    /// Contracts `slot` with `g`.
    pub fn lower(&self, t: &Tensor, slot: usize) -> Tensor {
        t.contract_slot(slot, &self.g())
    }
}
