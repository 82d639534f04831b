use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{FinjetError, Result};

/// Exponent vector of a monomial.
pub type MultiIndex = Vec<u8>;

/// Shared layout for jets of one `(dim, order)`: monomial ordering, the
/// convolution table used by products and per-variable derivative maps.
pub struct JetSpace {
    dim: usize,
    order: usize,
    monomials: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    product: Vec<(u32, u32, u32)>,
    // derivative[var][target] = (source index, exponent factor)
    derivative: Vec<Vec<(usize, f64)>>,
}

type Cache = Mutex<HashMap<(usize, usize), Arc<JetSpace>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Monomials of exact total degree `deg` in `dim` variables, lexicographically
/// descending in the first exponent.
fn monomials_of_degree(dim: usize, deg: usize) -> Vec<MultiIndex> {
    if dim == 0 {
        return if deg == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=deg).rev() {
        for mut rest in monomials_of_degree(dim - 1, deg - first) {
            let mut m = Vec::with_capacity(dim);
            m.push(first as u8);
            m.append(&mut rest);
            out.push(m);
        }
    }
    out
}

impl JetSpace {
    /// Returns the (cached) space for the given dimension and order.
    pub fn get(dim: usize, order: usize) -> Arc<JetSpace> {
        assert!(dim > 0, "jets need at least one variable");
        let key = (dim, order);
        if let Some(s) = cache().lock().expect("jet space cache poisoned").get(&key) {
            return s.clone();
        }
        let space = Arc::new(Self::build(dim, order));
        cache()
            .lock()
            .expect("jet space cache poisoned")
            .entry(key)
            .or_insert(space)
            .clone()
    }

    fn build(dim: usize, order: usize) -> JetSpace {
        let mut monomials = Vec::new();
        let mut degree_start = Vec::new();
        for deg in 0..=order {
            degree_start.push(monomials.len());
            monomials.extend(monomials_of_degree(dim, deg));
        }
        degree_start.push(monomials.len());
        let lookup: HashMap<MultiIndex, usize> =
            monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();

        let degree = |m: &MultiIndex| m.iter().map(|&e| e as usize).sum::<usize>();
        let mut product = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            let room = order - degree(a);
            for (j, b) in monomials[..degree_start[room + 1]].iter().enumerate() {
                let sum: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                product.push((i as u32, j as u32, lookup[&sum] as u32));
            }
        }

        let mut derivative = Vec::with_capacity(dim);
        if order > 0 {
            let lower = degree_start[order];
            for var in 0..dim {
                let table = monomials[..lower]
                    .iter()
                    .map(|m| {
                        let mut up = m.clone();
                        up[var] += 1;
                        (lookup[&up], up[var] as f64)
                    })
                    .collect();
                derivative.push(table);
            }
        }

        JetSpace { dim, order, monomials, lookup, product, derivative }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    pub fn index_of(&self, alpha: &[usize]) -> Result<usize> {
        if alpha.len() != self.dim {
            return Err(FinjetError::Precondition(format!(
                "multi-index has {} entries, jet has {} variables",
                alpha.len(),
                self.dim
            )));
        }
        let total: usize = alpha.iter().sum();
        if total > self.order {
            return Err(FinjetError::OrderExceeded { requested: total, available: self.order });
        }
        let key: MultiIndex = alpha.iter().map(|&a| a as u8).collect();
        Ok(self.lookup[&key])
    }

    pub(crate) fn product_table(&self) -> &[(u32, u32, u32)] {
        &self.product
    }

    pub(crate) fn derivative_table(&self, var: usize) -> &[(usize, f64)] {
        &self.derivative[var]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_order_makes_truncation_a_prefix() {
        let hi = JetSpace::get(3, 4);
        let lo = JetSpace::get(3, 2);
        assert_eq!(&hi.monomials()[..lo.len()], lo.monomials());
    }

    #[test]
    fn product_table_covers_all_pairs() {
        // pairs (a, b) with |a| + |b| <= K in d variables = monomials of degree <= K in 2d variables
        let s = JetSpace::get(2, 3);
        assert_eq!(s.product_table().len(), JetSpace::get(4, 3).len());
    }
}
