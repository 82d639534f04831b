use nalgebra::DMatrix;

use crate::connections::ConnectionKind;
use crate::error::Result;
use crate::finsler::{FinslerJets, FinslerModel, PointOnSlit};
use crate::jets::Jet;
use crate::tensor::Tensor;

/// `∂(log F)/∂x^r`, the covector the B-tensors are contracted with.
pub fn d_log_f_from(fj: &FinslerJets) -> Vec<f64> {
    let f = fj.f();
    (0..fj.dim()).map(|r| fj.f_jet().derivative(r).value() / f).collect()
}

/// `δ(log F)/δx^r = ∂_r log F − N^j_r ω_j / F`. Vanishes for every Finsler
/// function since `F` is constant along the horizontal lift of its geodesic
/// spray.
pub fn horizontal_d_log_f_from(fj: &FinslerJets) -> Result<Vec<f64>> {
    let n = fj.dim();
    let f = fj.f();
    let nl = fj.nonlinear()?;
    let w = fj.omega();
    let plain = d_log_f_from(fj);
    Ok((0..n).map(|r| plain[r] - (0..n).map(|j| nl[(j, r)] * w[j]).sum::<f64>() / f).collect())
}

pub fn d_log_f(model: &FinslerModel, pt: &PointOnSlit) -> Result<Vec<f64>> {
    Ok(d_log_f_from(&FinslerJets::new(model, pt, 2)?))
}

pub fn horizontal_d_log_f(model: &FinslerModel, pt: &PointOnSlit) -> Result<Vec<f64>> {
    horizontal_d_log_f_from(&FinslerJets::new(model, pt, 4)?)
}

/// The Cartan-tensor bracket of the given variant contracted with `v_r`,
/// slots `[k, i, j]`. With `v = d log F` this is `B`; with `v = ψ_r/(2ψ)` it is
/// the `C` term by which the connection moves under `F ↦ √ψ F`.
pub fn bracket_contract(fj: &FinslerJets, kind: ConnectionKind, v: &[f64]) -> Result<Tensor> {
    let n = fj.dim();
    let ginv = fj.g_inv();
    let am = fj.raise(&fj.cartan()?, 0); // A^k_ij
    let a2 = am.contract_slot(1, &ginv); // A^{kr}_j at [k, r, j]
    let w = fj.omega();
    let wu: Vec<f64> = (0..n).map(|k| (0..n).map(|i| ginv[(k, i)] * w[i]).sum()).collect();
    let f = fj.f();
    let dya = if kind == ConnectionKind::Berwald { Some(dy_raised_cartan(fj)?) } else { None };
    Ok(Tensor::from_fn(n, 3, |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        let mut total = 0.0;
        for (r, vr) in v.iter().enumerate() {
            if *vr == 0.0 {
                continue;
            }
            let b = match kind {
                ConnectionKind::Chern => {
                    let mut s = a2.get(&[k, r, i]) * w[j] + a2.get(&[k, r, j]) * w[i]
                        - am.get(&[k, i, j]) * wu[r]
                        - am.get(&[r, i, j]) * wu[k];
                    for t in 0..n {
                        s -= am.get(&[k, i, t]) * a2.get(&[t, r, j]) + am.get(&[k, j, t]) * a2.get(&[t, r, i]);
                        s += a2.get(&[r, k, t]) * am.get(&[t, i, j]);
                    }
                    s
                }
                ConnectionKind::Berwald => {
                    let d = dya.as_ref().expect("vertical derivative computed");
                    f * d[((k * n + r) * n + i) * n + j] + a2.get(&[k, r, i]) * w[j] + 2.0 * a2.get(&[r, k, j]) * w[i]
                }
                ConnectionKind::Cartan => {
                    let mut s = a2.get(&[k, r, j]) * w[i] - am.get(&[r, i, j]) * wu[k];
                    for t in 0..n {
                        s -= am.get(&[k, t, j]) * a2.get(&[t, r, i]);
                        s += a2.get(&[r, k, t]) * am.get(&[t, i, j]);
                    }
                    s
                }
            };
            total += b * vr;
        }
        total
    }))
}

/// `∂(A^{kr}_i)/∂y^j` at flat index `((k·n + r)·n + i)·n + j`.
fn dy_raised_cartan(fj: &FinslerJets) -> Result<Vec<f64>> {
    let n = fj.dim();
    let gi = fj.g_inv_jets().truncate(1);
    let a: Vec<Jet> = fj.cartan_jets()?.iter().map(|e| e.truncate(1)).collect();
    let mut out = vec![0.0; n * n * n * n];
    for k in 0..n {
        for r in 0..n {
            for i in 0..n {
                let mut acc = a[0].zero_like();
                for p in 0..n {
                    for q in 0..n {
                        acc += &(&(gi.get(k, p) * gi.get(r, q)) * &a[(p * n + q) * n + i]);
                    }
                }
                for j in 0..n {
                    out[((k * n + r) * n + i) * n + j] = acc.derivative(n + j).value();
                }
            }
        }
    }
    Ok(out)
}

/// `B^k_ij` of the chosen variant.
pub fn b_tensor_from(fj: &FinslerJets, kind: ConnectionKind) -> Result<Tensor> {
    bracket_contract(fj, kind, &d_log_f_from(fj))
}

pub fn b_tensor(model: &FinslerModel, kind: ConnectionKind, pt: &PointOnSlit) -> Result<Tensor> {
    b_tensor_from(&FinslerJets::new(model, pt, kind.required_order())?, kind)
}

/// Which lower slot of a `[k, i, j]` tensor is traced against the upper one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TraceSlot {
    First,
    Second,
}

fn trace(x: &Tensor, slot: TraceSlot, j: usize) -> f64 {
    let n = x.n();
    match slot {
        TraceSlot::First => (0..n).map(|t| x.get(&[t, t, j])).sum(),
        TraceSlot::Second => (0..n).map(|t| x.get(&[t, j, t])).sum(),
    }
}

/// `X^k_ij − (1/n)(δ^k_i X^t_(tj) + δ^k_j X^t_(ti))`.
pub(crate) fn traceless(x: &Tensor, slot: TraceSlot) -> Tensor {
    let n = x.n();
    let tr: Vec<f64> = (0..n).map(|j| trace(x, slot, j)).collect();
    Tensor::from_fn(n, 3, |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        let mut v = x.get(idx);
        if k == i {
            v -= tr[j] / n as f64;
        }
        if k == j {
            v -= tr[i] / n as f64;
        }
        v
    })
}

/// Trace conventions of the displayed operators: Chern and Berwald contract
/// `B^s_li`, `B^t_lt` and trace `B^t_jt`; Cartan contracts `B^s_il`, `B^t_tl`
/// and traces `B^t_tj`.
pub(crate) fn b_trace_slot(kind: ConnectionKind) -> TraceSlot {
    match kind {
        ConnectionKind::Cartan => TraceSlot::First,
        _ => TraceSlot::Second,
    }
}

/// `g^{kl}(Sym_ij g_sj B^s_(li) − δ g_ij B^t_(lt))`.
pub(crate) fn y_tensor(b: &Tensor, g: &DMatrix<f64>, ginv: &DMatrix<f64>, delta: f64, kind: ConnectionKind) -> Tensor {
    let n = b.n();
    let cartan = kind == ConnectionKind::Cartan;
    let bl = |s: usize, l: usize, i: usize| if cartan { b.get(&[s, i, l]) } else { b.get(&[s, l, i]) };
    let tr: Vec<f64> = (0..n).map(|l| trace(b, if cartan { TraceSlot::First } else { TraceSlot::Second }, l)).collect();
    // inner[l][i][j]
    let inner = Tensor::from_fn(n, 3, |idx| {
        let (l, i, j) = (idx[0], idx[1], idx[2]);
        let mut v = -delta * g[(i, j)] * tr[l];
        for s in 0..n {
            v += g[(s, j)] * bl(s, l, i) + g[(s, i)] * bl(s, l, j);
        }
        v
    });
    inner.contract_slot(0, ginv)
}
