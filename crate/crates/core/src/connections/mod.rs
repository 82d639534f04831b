//! Chern, Berwald and Cartan connection coefficients, the Landsberg tensor and
//! covariant derivatives of weighted symbols.
//!
//! Coefficient tensors are stored as `[upper, section, direction]`: entry
//! `(k, i, j)` of a horizontal block is `γ^k_ij` where `j` is the direction of
//! differentiation. Chern and Berwald blocks are symmetric in `(i, j)`; the
//! Cartan block is not.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{FinjetError, Result};
use crate::fields::SymbolField;
use crate::finsler::{FinslerJets, FinslerModel, PointOnSlit};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectionKind {
    Chern,
    Berwald,
    Cartan,
}

impl ConnectionKind {
    pub const ALL: [ConnectionKind; 3] = [ConnectionKind::Chern, ConnectionKind::Berwald, ConnectionKind::Cartan];

    pub fn name(self) -> &'static str {
        match self {
            ConnectionKind::Chern => "chern",
            ConnectionKind::Berwald => "berwald",
            ConnectionKind::Cartan => "cartan",
        }
    }

    /// Order of the `F²` expansion needed to evaluate the coefficients.
    pub fn required_order(self) -> usize {
        match self {
            ConnectionKind::Chern | ConnectionKind::Cartan => 4,
            ConnectionKind::Berwald => 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConnectionCoeffs {
    pub kind: ConnectionKind,
    pub horizontal: Tensor,
    /// `A^i_jk / F` (both mixed blocks of the Cartan connection).
    pub vertical_mixed: Option<Tensor>,
    pub point: PointOnSlit,
}

/// `∂g_ij/∂x^c` as `[c][i][j]`.
fn dx_metric(fj: &FinslerJets) -> Tensor {
    let g = fj.g_jets();
    Tensor::from_fn(fj.dim(), 3, |idx| g.get(idx[1], idx[2]).derivative(idx[0]).value())
}

/// `A^i_jk`, first slot raised.
pub fn cartan_mixed(fj: &FinslerJets) -> Result<Tensor> {
    Ok(fj.raise(&fj.cartan()?, 0))
}

pub fn chern_from(fj: &FinslerJets) -> Result<Tensor> {
    let n = fj.dim();
    let ginv = fj.g_inv();
    let dg = dx_metric(fj);
    let a = fj.cartan()?;
    let nl = fj.nonlinear()?;
    let f = fj.f();
    // lowered symbol Γ_sij, then raise
    let lower = Tensor::from_fn(n, 3, |idx| {
        let (s, i, j) = (idx[0], idx[1], idx[2]);
        let metric = 0.5 * (dg.get(&[j, s, i]) + dg.get(&[i, s, j]) - dg.get(&[s, i, j]));
        let mut corr = 0.0;
        for m in 0..n {
            corr += nl[(m, j)] * a.get(&[m, s, i]) + nl[(m, i)] * a.get(&[m, s, j]) - nl[(m, s)] * a.get(&[m, i, j]);
        }
        metric - corr / f
    });
    Ok(lower.contract_slot(0, &ginv))
}

/// `♭γ^i_jk = ∂N^i_j/∂y^k`.
pub fn berwald_from(fj: &FinslerJets) -> Result<Tensor> {
    let n = fj.dim();
    let nl = fj.nonlinear_jets()?;
    if nl.order() < 1 {
        return Err(FinjetError::OrderExceeded { requested: 5, available: fj.order() });
    }
    Ok(Tensor::from_fn(n, 3, |idx| nl.get(idx[0], idx[1]).derivative(n + idx[2]).value()))
}

/// Horizontal block `γ^i_jk + A^i_jt N^t_k / F` and the mixed block `A^i_jk/F`.
pub fn cartan_from(fj: &FinslerJets) -> Result<(Tensor, Tensor)> {
    let n = fj.dim();
    let chern = chern_from(fj)?;
    let am = cartan_mixed(fj)?;
    let nl = fj.nonlinear()?;
    let f = fj.f();
    let horizontal = Tensor::from_fn(n, 3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        chern.get(idx) + (0..n).map(|t| am.get(&[i, j, t]) * nl[(t, k)]).sum::<f64>() / f
    });
    Ok((horizontal, am.scale(1.0 / f)))
}

/// `Ȧ_ijk = −½ y_l ∂²N^l_i/∂y^j∂y^k`.
pub fn landsberg_from(fj: &FinslerJets) -> Result<Tensor> {
    let n = fj.dim();
    let nl = fj.nonlinear_jets()?;
    if nl.order() < 2 {
        return Err(FinjetError::OrderExceeded { requested: 6, available: fj.order() });
    }
    let yl = fj.y_lower();
    Ok(Tensor::from_fn(n, 3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        let s: f64 = (0..n).map(|l| yl[l] * nl.get(l, i).derivative(n + j).derivative(n + k).value()).sum();
        -0.5 * s
    }))
}

pub fn coeffs_from(fj: &FinslerJets, kind: ConnectionKind) -> Result<ConnectionCoeffs> {
    let (horizontal, vertical_mixed) = match kind {
        ConnectionKind::Chern => (chern_from(fj)?, None),
        ConnectionKind::Berwald => (berwald_from(fj)?, None),
        ConnectionKind::Cartan => {
            let (h, v) = cartan_from(fj)?;
            (h, Some(v))
        }
    };
    Ok(ConnectionCoeffs { kind, horizontal, vertical_mixed, point: fj.point().clone() })
}

fn expand(model: &FinslerModel, pt: &PointOnSlit, order: usize) -> Result<FinslerJets> {
    FinslerJets::new(model, pt, order)
}

pub fn chern_coeffs(model: &FinslerModel, pt: &PointOnSlit) -> Result<ConnectionCoeffs> {
    coeffs_from(&expand(model, pt, 4)?, ConnectionKind::Chern)
}

pub fn berwald_coeffs(model: &FinslerModel, pt: &PointOnSlit) -> Result<ConnectionCoeffs> {
    coeffs_from(&expand(model, pt, 5)?, ConnectionKind::Berwald)
}

pub fn cartan_coeffs(model: &FinslerModel, pt: &PointOnSlit) -> Result<ConnectionCoeffs> {
    coeffs_from(&expand(model, pt, 4)?, ConnectionKind::Cartan)
}

pub fn landsberg_tensor(model: &FinslerModel, pt: &PointOnSlit) -> Result<Tensor> {
    landsberg_from(&expand(model, pt, 6)?)
}

/// `max |δg_ij/δx^s − γ^t_is g_tj − γ^t_js g_it|` for the Chern connection.
pub fn chern_compatibility_defect(fj: &FinslerJets) -> Result<f64> {
    let n = fj.dim();
    let gamma = chern_from(fj)?;
    let g = fj.g();
    let mut worst: f64 = 0.0;
    for s in 0..n {
        for i in 0..n {
            for j in 0..n {
                let dg = fj.horizontal_derivative(fj.g_jets().get(i, j), s)?.value();
                let conn: f64 =
                    (0..n).map(|t| gamma.get(&[t, i, s]) * g[(t, j)] + gamma.get(&[t, j, s]) * g[(i, t)]).sum();
                worst = worst.max((dg - conn).abs());
            }
        }
    }
    Ok(worst)
}

/// `D_s P^ij = ∂_s P^ij + γ^i_ts P^tj + γ^j_ts P^it − δ γ^t_ts P^ij`, as
/// `[s][i][j]`. `p` and `dp[s]` are the values and first partials of `P`.
pub fn covariant_derivative_values(gamma: &Tensor, p: &DMatrix<f64>, dp: &[DMatrix<f64>], weight: f64) -> Tensor {
    let n = p.nrows();
    Tensor::from_fn(n, 3, |idx| {
        let (s, i, j) = (idx[0], idx[1], idx[2]);
        let mut v = dp[s][(i, j)];
        for t in 0..n {
            v += gamma.get(&[i, t, s]) * p[(t, j)] + gamma.get(&[j, t, s]) * p[(i, t)];
        }
        let trace: f64 = (0..n).map(|t| gamma.get(&[t, t, s])).sum();
        v - weight * trace * p[(i, j)]
    })
}

/// Values and first partials of a symbol at `x`.
pub fn symbol_with_gradient(p: &SymbolField, x: &[f64]) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    let n = p.dim();
    let jets = p.jets(x, 1)?;
    let vals = DMatrix::from_fn(n, n, |i, j| jets[i * n + j].value());
    let grads = (0..n).map(|s| DMatrix::from_fn(n, n, |i, j| jets[i * n + j].gradient()[s])).collect();
    Ok((vals, grads))
}

pub fn covariant_derivative_symbol(
    model: &FinslerModel,
    kind: ConnectionKind,
    p: &SymbolField,
    pt: &PointOnSlit,
) -> Result<Tensor> {
    if p.dim() != model.dim() {
        return Err(FinjetError::Dimension("symbol and model dimensions differ".into()));
    }
    let fj = expand(model, pt, kind.required_order())?;
    let conn = coeffs_from(&fj, kind)?;
    let (vals, grads) = symbol_with_gradient(p, &pt.x)?;
    Ok(covariant_derivative_values(&conn.horizontal, &vals, &grads, p.weight()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(x: &[f64], y: &[f64]) -> PointOnSlit {
        PointOnSlit::new(x.to_vec(), y.to_vec()).unwrap()
    }

    fn exp_metric() -> FinslerModel {
        FinslerModel::parse_riemannian(2, &["exp(2*x1)", "0", "0", "1"]).unwrap()
    }

    fn randers_closed() -> FinslerModel {
        FinslerModel::parse_randers(2, &["1", "0", "0", "1"], &["0.25*x2", "0.25*x1"]).unwrap()
    }

    #[test]
    fn flat_connections_vanish() {
        let m = FinslerModel::euclidean(2);
        let p = pt(&[0.2, 0.3], &[1.0, -0.5]);
        assert_eq!(chern_coeffs(&m, &p).unwrap().horizontal.max_abs(), 0.0);
        assert_eq!(berwald_coeffs(&m, &p).unwrap().horizontal.max_abs(), 0.0);
        let c = cartan_coeffs(&m, &p).unwrap();
        assert_eq!(c.horizontal.max_abs(), 0.0);
        assert_eq!(c.vertical_mixed.unwrap().max_abs(), 0.0);
        assert_eq!(landsberg_tensor(&m, &p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn riemannian_connections_are_levi_civita() {
        let m = exp_metric();
        for y in [[2.0, 5.0], [-0.3, 1.0]] {
            let p = pt(&[0.4, -0.2], &y);
            let ch = chern_coeffs(&m, &p).unwrap().horizontal;
            assert_relative_eq!(ch.get(&[0, 0, 0]), 1.0, epsilon = 1e-12);
            let rest: f64 = ch.data()[1..].iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(rest < 1e-12);
            let bw = berwald_coeffs(&m, &p).unwrap().horizontal;
            let ca = cartan_coeffs(&m, &p).unwrap().horizontal;
            assert!(ch.max_abs_diff(&bw) < 1e-8);
            assert!(ch.max_abs_diff(&ca) < 1e-8);
            assert!(landsberg_tensor(&m, &p).unwrap().max_abs() < 1e-8);
        }
    }

    #[test]
    fn randers_chern_is_symmetric_and_compatible() {
        let m = randers_closed();
        let p = pt(&[0.3, -0.4], &[0.8, 0.6]);
        let fj = FinslerJets::new(&m, &p, 6).unwrap();
        let ch = chern_from(&fj).unwrap();
        assert!(ch.max_abs() > 1e-3);
        assert!(ch.max_abs_diff(&ch.permuted(&[0, 2, 1])) < 1e-13);
        assert!(chern_compatibility_defect(&fj).unwrap() < 1e-7);
        let bw = berwald_from(&fj).unwrap();
        assert!(bw.max_abs_diff(&bw.permuted(&[0, 2, 1])) < 1e-12);
        let (h, v) = cartan_from(&fj).unwrap();
        let am = cartan_mixed(&fj).unwrap();
        let nl = fj.nonlinear().unwrap();
        let corr = Tensor::from_fn(2, 3, |i| (0..2).map(|t| am.get(&[i[0], i[1], t]) * nl[(t, i[2])]).sum::<f64>() / fj.f());
        assert!(h.sub(&ch).max_abs_diff(&corr) < 1e-12);
        assert!(v.max_abs_diff(&am.scale(1.0 / fj.f())) < 1e-15);
    }

    #[test]
    fn symbol_derivative_examples() {
        let flat = FinslerModel::euclidean(2);
        let p = pt(&[0.7, 0.1], &[1.0, 0.0]);
        let sym = SymbolField::parse(2, &["x1", "0", "0", "0"], 0.0).unwrap();
        let d = covariant_derivative_symbol(&flat, ConnectionKind::Chern, &sym, &p).unwrap();
        assert_eq!(d.get(&[0, 0, 0]), 1.0);
        assert_eq!(d.max_abs(), 1.0);
        let with_y = SymbolField::new(
            2,
            vec![crate::fields::ScalarField::parse("y1", 2, true).unwrap(); 4],
            0.0,
        );
        assert!(matches!(with_y, Err(FinjetError::Precondition(_))));
    }
}
