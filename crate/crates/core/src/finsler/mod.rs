//! Finsler functions and their first-order objects: fundamental tensor,
//! Cartan tensor, Hilbert form and the nonlinear connection.

mod model;
mod point;

pub use model::{randers_admissible, FinslerModel, ModelKind, ModelSpec};
pub use point::{FinslerJets, PointOnSlit};

use nalgebra::DMatrix;

use crate::error::Result;
use crate::tensor::Tensor;

/// `g_ij = ½ ∂²F²/∂y^i∂y^j`.
pub fn fundamental_tensor(model: &FinslerModel, pt: &PointOnSlit) -> Result<DMatrix<f64>> {
    Ok(FinslerJets::new(model, pt, 2)?.g())
}

/// `A_ijk = (F/2) ∂g_ij/∂y^k`.
pub fn cartan_tensor(model: &FinslerModel, pt: &PointOnSlit) -> Result<Tensor> {
    FinslerJets::new(model, pt, 3)?.cartan()
}

/// `ω_i = ∂F/∂y^i`.
pub fn hilbert_form(model: &FinslerModel, pt: &PointOnSlit) -> Result<Vec<f64>> {
    Ok(FinslerJets::new(model, pt, 2)?.omega())
}

/// `N^k_m`, row `k`, column `m`.
pub fn nonlinear_connection(model: &FinslerModel, pt: &PointOnSlit) -> Result<DMatrix<f64>> {
    FinslerJets::new(model, pt, 4)?.nonlinear()
}

pub fn raise_index(model: &FinslerModel, pt: &PointOnSlit, t: &Tensor, slot: usize) -> Result<Tensor> {
    Ok(FinslerJets::new(model, pt, 2)?.raise(t, slot))
}

pub fn lower_index(model: &FinslerModel, pt: &PointOnSlit, t: &Tensor, slot: usize) -> Result<Tensor> {
    Ok(FinslerJets::new(model, pt, 2)?.lower(t, slot))
}

/// Residuals of the identities every Finsler function satisfies at a point.
/// Scaled entries are relative to `F`, `F²` or `|g|` as noted.
#[derive(Debug, Clone, Default)]
pub struct HomogeneityResiduals {
    /// `max_λ |F(x, λy) − λF| / (λF)` over λ ∈ {0.5, 2, 3}.
    pub f_degree_one: f64,
    /// `max_λ |g(x, λy) − g(x, y)| / |g|`.
    pub g_degree_zero: f64,
    /// `|ω_i y^i − F| / F`.
    pub euler_f: f64,
    /// `|ω_i − g_ij y^j / F|`.
    pub omega_vs_g: f64,
    /// `|g_ij y^i y^j − F²| / F²`.
    pub g_yy: f64,
    /// `max |A_ijk y^k|`.
    pub cartan_y: f64,
    /// Largest asymmetry of `A` under slot permutations.
    pub cartan_symmetry: f64,
    /// `max |∂g_ij/∂y^k − 2A_ijk/F|`.
    pub cartan_vs_dg: f64,
}

impl HomogeneityResiduals {
    pub fn worst(&self) -> f64 {
        [
            self.f_degree_one,
            self.g_degree_zero,
            self.euler_f,
            self.omega_vs_g,
            self.g_yy,
            self.cartan_y,
            self.cartan_symmetry,
            self.cartan_vs_dg,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn homogeneity_residuals(model: &FinslerModel, pt: &PointOnSlit) -> Result<HomogeneityResiduals> {
    let n = model.dim();
    let fj = FinslerJets::new(model, pt, 3)?;
    let f = fj.f();
    let g = fj.g();
    let gnorm = g.amax();
    let y = &pt.y;
    let mut r = HomogeneityResiduals::default();
    for lambda in [0.5, 2.0, 3.0] {
        let ly: Vec<f64> = y.iter().map(|v| v * lambda).collect();
        let fl = model.f_value(&pt.x, &ly)?;
        r.f_degree_one = r.f_degree_one.max((fl - lambda * f).abs() / (lambda * f));
        let gl = fundamental_tensor(model, &PointOnSlit::new(pt.x.clone(), ly)?)?;
        r.g_degree_zero = r.g_degree_zero.max((gl - &g).amax() / gnorm);
    }
    let omega = fj.omega();
    let oy: f64 = omega.iter().zip(y).map(|(a, b)| a * b).sum();
    r.euler_f = (oy - f).abs() / f;
    let gy = &g * nalgebra::DVector::from_column_slice(y);
    r.omega_vs_g = (0..n).map(|i| (omega[i] - gy[i] / f).abs()).fold(0.0, f64::max);
    r.g_yy = (gy.dot(&nalgebra::DVector::from_column_slice(y)) - f * f).abs() / (f * f);
    let a = fj.cartan()?;
    for i in 0..n {
        for j in 0..n {
            let ay: f64 = (0..n).map(|k| a.get(&[i, j, k]) * y[k]).sum();
            r.cartan_y = r.cartan_y.max(ay.abs());
            for k in 0..n {
                let dg = fj.g_jets().get(i, j).derivative(n + k).value();
                r.cartan_vs_dg = r.cartan_vs_dg.max((dg - 2.0 * a.get(&[i, j, k]) / f).abs());
            }
        }
    }
    r.cartan_symmetry = a.symmetry_defect();
    Ok(r)
}
