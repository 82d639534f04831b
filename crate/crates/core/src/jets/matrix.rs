use nalgebra::DMatrix;

use super::Jet;
use crate::error::{FinjetError, Result};

/// Dense square matrix with jet entries, row-major.
#[derive(Clone, Debug)]
pub struct JetMatrix {
    n: usize,
    entries: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Jet) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        JetMatrix { n, entries }
    }

    pub fn from_entries(n: usize, entries: Vec<Jet>) -> Self {
        assert_eq!(entries.len(), n * n);
        JetMatrix { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Jet] {
        &self.entries
    }

    pub fn order(&self) -> usize {
        self.entries.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).value())
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Self {
        JetMatrix { n: self.n, entries: self.entries.iter().map(f).collect() }
    }

    pub fn derivative(&self, var: usize) -> Self {
        self.map(|j| j.derivative(var))
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.map(|j| j.truncate(order))
    }

    pub fn mul(&self, other: &JetMatrix) -> JetMatrix {
        let n = self.n;
        JetMatrix::from_fn(n, |i, j| {
            let mut acc = self.get(i, 0) * other.get(0, j);
            for k in 1..n {
                acc += &(self.get(i, k) * other.get(k, j));
            }
            acc
        })
    }

    /// Gauss-Jordan inverse with partial pivoting on the leading values.
    pub fn inverse(&self) -> Result<JetMatrix> {
        let n = self.n;
        let mut a: Vec<Vec<Jet>> = (0..n).map(|i| (0..n).map(|j| self.get(i, j).clone()).collect()).collect();
        let proto = self.get(0, 0);
        let order = self.order();
        let mut inv: Vec<Vec<Jet>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Jet::constant(proto.dim(), order, if i == j { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect();
        let scale = self.values().amax().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r][col].value().abs().total_cmp(&a[s][col].value().abs()))
                .expect("non-empty pivot range");
            if a[pivot][col].value().abs() <= 1e-14 * scale {
                return Err(FinjetError::ModelInvalid("singular matrix in jet inversion".into()));
            }
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let r = a[col][col].recip()?;
            for j in 0..n {
                a[col][j] = &a[col][j] * &r;
                inv[col][j] = &inv[col][j] * &r;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a[row][col].clone();
                if factor.coeffs().iter().all(|c| *c == 0.0) {
                    continue;
                }
                for j in 0..n {
                    let t = &factor * &a[col][j];
                    a[row][j] -= &t;
                    let t = &factor * &inv[col][j];
                    inv[row][j] -= &t;
                }
            }
        }
        Ok(JetMatrix { n, entries: inv.into_iter().flatten().collect() })
    }

    /// Determinant by cofactor-free elimination (no pivoting on structure).
    pub fn determinant(&self) -> Result<Jet> {
        let n = self.n;
        let mut a: Vec<Vec<Jet>> = (0..n).map(|i| (0..n).map(|j| self.get(i, j).clone()).collect()).collect();
        let mut det = self.get(0, 0).constant_like(1.0).truncate(self.order());
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r][col].value().abs().total_cmp(&a[s][col].value().abs()))
                .expect("non-empty pivot range");
            if a[pivot][col].value() == 0.0 {
                return Err(FinjetError::NumericDomain("singular jacobian".into()));
            }
            if pivot != col {
                a.swap(col, pivot);
                det = -det;
            }
            det = &det * &a[col][col];
            let r = a[col][col].recip()?;
            for row in col + 1..n {
                let factor = &a[row][col] * &r;
                for j in col..n {
                    let t = &factor * &a[col][j];
                    a[row][j] -= &t;
                }
            }
        }
        Ok(det)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::lift_variables;
    use approx::assert_relative_eq;

    #[test]
    fn inverse_times_matrix_is_identity_as_jets() {
        let v = lift_variables(&[0.3, -0.2], 3);
        let m = JetMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => v[0].exp(),
            (0, 1) | (1, 0) => &v[0] * &v[1],
            _ => v[1].add_scalar(2.0),
        });
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        for i in 0..2 {
            for j in 0..2 {
                let e = id.get(i, j);
                assert_relative_eq!(e.value(), if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
                assert!(e.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
            }
        }
        let det = m.determinant().unwrap();
        let direct = &(m.get(0, 0) * m.get(1, 1)) - &(m.get(0, 1) * m.get(1, 0));
        for (a, b) in det.coeffs().iter().zip(direct.coeffs()) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let z = Jet::constant(1, 1, 0.0);
        let m = JetMatrix::from_fn(2, |_, _| z.clone());
        assert!(m.inverse().is_err());
    }
}
