//! Connection coefficients against finite differences of F² alone.

use std::sync::Arc;

use finjet::connections::{berwald_coeffs, chern_coeffs, landsberg_tensor};
use finjet::finsler::{fundamental_tensor, nonlinear_connection, FinslerModel, PointOnSlit};
use finjet::jets::oracle::fd_oracle;
use nalgebra::DMatrix;

fn models() -> Vec<Arc<FinslerModel>> {
    vec![
        Arc::new(FinslerModel::parse_randers(2, &["1 + 0.1*x2^2", "0", "0", "1"], &["0.25*x2", "0.25*x1"]).unwrap()),
        Arc::new(FinslerModel::parse_riemannian(2, &["1 + 0.2*x1^2", "0.1*x2", "0.1*x2", "exp(0.3*x1)"]).unwrap()),
        Arc::new(
            FinslerModel::parse_randers(3, &["1 + x3^2", "0", "0", "0", "1", "0.2*x1", "0", "0.2*x1", "2"], &["0.2*x2", "0", "0.1*x1*x3"])
                .unwrap(),
        ),
    ]
}

fn at(n: usize) -> PointOnSlit {
    let x = [0.3, -0.2, 0.4][..n].to_vec();
    let y = [0.8, 0.5, -0.3][..n].to_vec();
    PointOnSlit::new(x, y).unwrap()
}

fn f2(model: &FinslerModel, v: &[f64]) -> f64 {
    let n = model.dim();
    model.f_value(&v[..n], &v[n..]).unwrap().powi(2)
}

fn unit(n: usize, i: usize) -> Vec<usize> {
    let mut a = vec![0; n];
    a[i] += 1;
    a
}

fn pair(n: usize, i: usize, j: usize) -> Vec<usize> {
    let mut a = vec![0; n];
    a[i] += 1;
    a[j] += 1;
    a
}

/// Spray coefficients `G^i = ¼ g^il (y^k ∂²F²/∂y^l∂x^k − ∂F²/∂x^l)` from
/// finite differences.
fn spray(model: &FinslerModel, x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = model.dim();
    let v: Vec<f64> = x.iter().chain(y).copied().collect();
    let f = |w: &[f64]| f2(model, w);
    let g = DMatrix::from_fn(n, n, |i, j| 0.5 * fd_oracle(&f, &v, &pair(2 * n, n + i, n + j), 1e-2));
    let ginv = g.try_inverse().unwrap();
    let rhs: Vec<f64> = (0..n)
        .map(|l| {
            let mixed: f64 = (0..n).map(|k| y[k] * fd_oracle(&f, &v, &pair(2 * n, n + l, k), 1e-2)).sum();
            mixed - fd_oracle(&f, &v, &unit(2 * n, l), 1e-2)
        })
        .collect();
    (0..n).map(|i| 0.25 * (0..n).map(|l| ginv[(i, l)] * rhs[l]).sum::<f64>()).collect()
}

/// `∂^α G^i / ∂y^α` by central differences of the spray.
fn spray_y_derivative(model: &FinslerModel, pt: &PointOnSlit, i: usize, alpha: &[usize], step: f64) -> f64 {
    let x = pt.x.clone();
    let h = |y: &[f64]| spray(model, &x, y)[i];
    fd_oracle(&h, &pt.y, alpha, step)
}

#[test]
fn fundamental_tensor_matches_second_differences() {
    for model in models() {
        let n = model.dim();
        let p = at(n);
        let g = fundamental_tensor(&model, &p).unwrap();
        let y = p.y.clone();
        let x = p.x.clone();
        let f = |w: &[f64]| model.f_value(&x, w).unwrap().powi(2);
        for i in 0..n {
            for j in 0..n {
                let fd = 0.5 * fd_oracle(&f, &y, &pair(n, i, j), 1e-3);
                assert!((g[(i, j)] - fd).abs() < 1e-8, "g_{i}{j}: {} vs {fd}", g[(i, j)]);
            }
        }
    }
}

#[test]
fn nonlinear_connection_is_the_y_gradient_of_the_spray() {
    for model in models() {
        let n = model.dim();
        let p = at(n);
        let nl = nonlinear_connection(&model, &p).unwrap();
        for i in 0..n {
            for j in 0..n {
                let fd = spray_y_derivative(&model, &p, i, &unit(n, j), 1e-2);
                assert!((nl[(i, j)] - fd).abs() < 1e-7, "N^{i}_{j}: {} vs {fd}", nl[(i, j)]);
            }
        }
    }
}

#[test]
fn berwald_is_the_hessian_of_the_spray() {
    for model in models() {
        let n = model.dim();
        let p = at(n);
        let b = berwald_coeffs(&model, &p).unwrap().horizontal;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let fd = spray_y_derivative(&model, &p, k, &pair(n, i, j), 3e-2);
                    assert!((b.get(&[k, i, j]) - fd).abs() < 1e-5, "B^{k}_{i}{j}: {} vs {fd}", b.get(&[k, i, j]));
                }
            }
        }
    }
}

#[test]
fn berwald_is_the_y_gradient_of_the_nonlinear_connection() {
    for model in models() {
        let n = model.dim();
        let p = at(n);
        let b = berwald_coeffs(&model, &p).unwrap().horizontal;
        for k in 0..n {
            for i in 0..n {
                let h = |y: &[f64]| nonlinear_connection(&model, &PointOnSlit::new(p.x.clone(), y.to_vec()).unwrap()).unwrap()[(k, i)];
                for j in 0..n {
                    let fd = fd_oracle(&h, &p.y, &unit(n, j), 1e-2);
                    assert!((b.get(&[k, i, j]) - fd).abs() < 1e-9, "B^{k}_{i}{j}: {} vs {fd}", b.get(&[k, i, j]));
                }
            }
        }
    }
}

#[test]
fn landsberg_and_chern_from_the_y_gradient_of_berwald() {
    for model in models() {
        let n = model.dim();
        let p = at(n);
        let g = fundamental_tensor(&model, &p).unwrap();
        let ginv = g.clone().try_inverse().unwrap();
        let ylow: Vec<f64> = (0..n).map(|i| (0..n).map(|j| g[(i, j)] * p.y[j]).sum()).collect();
        // Ȧ_ijk = −½ y_l ∂B^l_ij/∂y^k
        let mut dot = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let h = |y: &[f64]| {
                        let q = PointOnSlit::new(p.x.clone(), y.to_vec()).unwrap();
                        let b = berwald_coeffs(&model, &q).unwrap().horizontal;
                        (0..n).map(|l| ylow[l] * b.get(&[l, i, j])).sum::<f64>()
                    };
                    dot[(i * n + j) * n + k] = -0.5 * fd_oracle(&h, &p.y, &unit(n, k), 1e-2);
                }
            }
        }
        let l = landsberg_tensor(&model, &p).unwrap();
        let chern = chern_coeffs(&model, &p).unwrap().horizontal;
        let berwald = berwald_coeffs(&model, &p).unwrap().horizontal;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let fd = dot[(i * n + j) * n + k];
                    assert!((l.get(&[i, j, k]) - fd).abs() < 1e-9, "L_{i}{j}{k}: {} vs {fd}", l.get(&[i, j, k]));
                    let raised: f64 = (0..n).map(|m| ginv[(k, m)] * dot[(m * n + i) * n + j]).sum();
                    let want = berwald.get(&[k, i, j]) - raised;
                    assert!((chern.get(&[k, i, j]) - want).abs() < 1e-9, "Γ^{k}_{i}{j}");
                }
            }
        }
    }
}
