//! Finite-difference reference derivatives.
//!
//! This is deliberately independent of the jet arithmetic: it only calls the
//! scalar program on plain `f64` inputs. Tests use it as the oracle against
//! which jets are checked.

/// Central-difference weights (offsets in units of the step) for the `a`-th
/// derivative, second-order accurate.
fn stencil(a: usize) -> (Vec<(i32, f64)>, f64) {
    match a {
        0 => (vec![(0, 1.0)], 1.0),
        1 => (vec![(-1, -0.5), (1, 0.5)], 1.0),
        2 => (vec![(-1, 1.0), (0, -2.0), (1, 1.0)], 1.0),
        3 => (vec![(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)], 1.0),
        4 => (vec![(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)], 1.0),
        5 => (
            vec![(-3, -0.5), (-2, 2.0), (-1, -2.5), (1, 2.5), (2, -2.0), (3, 0.5)],
            1.0,
        ),
        6 => (
            vec![(-3, 1.0), (-2, -6.0), (-1, 15.0), (0, -20.0), (1, 15.0), (2, -6.0), (3, 1.0)],
            1.0,
        ),
        _ => panic!("finite-difference stencil only available up to sixth order"),
    }
}

fn central(f: &dyn Fn(&[f64]) -> f64, point: &[f64], alpha: &[usize], h: f64) -> f64 {
    let stencils: Vec<_> = alpha.iter().map(|&a| stencil(a).0).collect();
    let mut total = 0.0;
    let mut cursor = vec![0usize; point.len()];
    let mut x = point.to_vec();
    loop {
        let mut w = 1.0;
        for d in 0..point.len() {
            let (off, c) = stencils[d][cursor[d]];
            x[d] = point[d] + off as f64 * h;
            w *= c;
        }
        total += w * f(&x);
        // odometer over the tensor-product stencil
        let mut d = 0;
        loop {
            if d == point.len() {
                let order: usize = alpha.iter().sum();
                return total / h.powi(order as i32);
            }
            cursor[d] += 1;
            if cursor[d] < stencils[d].len() {
                break;
            }
            cursor[d] = 0;
            d += 1;
        }
    }
}

/// Central finite-difference estimate of `∂^α f(point)` refined by two levels
/// of Richardson extrapolation (steps `h`, `h/2`, `h/4`).
///
/// On analytic test functions with `|α| ≤ 4` and a step around `1e-2`, the
/// relative error is typically below `1e-7`.
pub fn fd_oracle(f: &dyn Fn(&[f64]) -> f64, point: &[f64], alpha: &[usize], step: f64) -> f64 {
    assert_eq!(point.len(), alpha.len(), "multi-index length must match the point");
    assert!(step > 0.0, "step must be positive");
    let a0 = central(f, point, alpha, step);
    let a1 = central(f, point, alpha, step / 2.0);
    let a2 = central(f, point, alpha, step / 4.0);
    let r0 = (4.0 * a1 - a0) / 3.0;
    let r1 = (4.0 * a2 - a1) / 3.0;
    (16.0 * r1 - r0) / 15.0
}

/// Recommended step for a derivative of total order `k` in double precision.
pub fn default_step(k: usize) -> f64 {
    match k {
        0 | 1 => 1e-3,
        2 => 5e-3,
        3 => 1.5e-2,
        _ => 3e-2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_second_derivative() {
        let f = |x: &[f64]| x[0].powi(3);
        let d = fd_oracle(&f, &[2.0], &[2], 1e-3);
        assert!((d - 12.0).abs() / 12.0 < 1e-6);
    }

    #[test]
    fn sine_first_derivative() {
        let f = |x: &[f64]| x[0].sin();
        let d = fd_oracle(&f, &[0.0], &[1], 1e-4);
        assert!((d - 1.0).abs() < 1e-9);
    }

    #[test]
    fn randers_hessian_entry() {
        // F^2 = (|y| + 0.5 y1)^2 at y = (1, 0)
        let f = |y: &[f64]| ((y[0] * y[0] + y[1] * y[1]).sqrt() + 0.5 * y[0]).powi(2);
        let d = fd_oracle(&f, &[1.0, 0.0], &[2, 0], 5e-3);
        assert!((d - 4.5).abs() < 1e-7);
    }
}
