use nalgebra::DMatrix;

/// Dense real tensor with every slot of extent `n`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    n: usize,
    rank: usize,
    data: Vec<f64>,
}

fn advance(idx: &mut [usize], n: usize) -> bool {
    for slot in (0..idx.len()).rev() {
        idx[slot] += 1;
        if idx[slot] < n {
            return true;
        }
        idx[slot] = 0;
    }
    false
}

impl Tensor {
    pub fn zeros(n: usize, rank: usize) -> Self {
        Tensor { n, rank, data: vec![0.0; n.pow(rank as u32)] }
    }

    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut data = Vec::with_capacity(n.pow(rank as u32));
        let mut idx = vec![0; rank];
        loop {
            data.push(f(&idx));
            if !advance(&mut idx, n) {
                break;
            }
        }
        Tensor { n, rank, data }
    }

    pub fn from_data(n: usize, rank: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n.pow(rank as u32), "tensor data length");
        Tensor { n, rank, data }
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        Tensor::from_fn(n, 2, |i| m[(i[0], i[1])])
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank, 2, "only rank-2 tensors convert to matrices");
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(&[i, j]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor { n: self.n, rank: self.rank, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
        assert_eq!((self.n, self.rank), (other.n, other.rank), "tensor shape mismatch");
        Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Tensor {
        self.map(|v| v * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        self.sub(other).max_abs()
    }

    /// Contracts `slot` with `m`: `out[.., k, ..] = Σ_l m[k, l] self[.., l, ..]`.
    /// With `m = g^{-1}` this raises an index, with `m = g` it lowers one.
    pub fn contract_slot(&self, slot: usize, m: &DMatrix<f64>) -> Tensor {
        assert!(slot < self.rank, "slot {slot} out of range for rank {}", self.rank);
        let mut src = vec![0; self.rank];
        Tensor::from_fn(self.n, self.rank, |idx| {
            src.copy_from_slice(idx);
            (0..self.n)
                .map(|l| {
                    src[slot] = l;
                    m[(idx[slot], l)] * self.get(&src)
                })
                .sum()
        })
    }

    /// Tensor with slots reordered: `out[idx] = self[idx ∘ perm]`, i.e. slot
    /// `s` of the result is slot `perm[s]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Tensor {
        assert_eq!(perm.len(), self.rank);
        let mut src = vec![0; self.rank];
        Tensor::from_fn(self.n, self.rank, |idx| {
            for (s, &p) in perm.iter().enumerate() {
                src[p] = idx[s];
            }
            self.get(&src)
        })
    }

    /// Largest deviation between the tensor and any reordering of its slots.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for perm in permutations(self.rank) {
            worst = worst.max(self.max_abs_diff(&self.permuted(&perm)));
        }
        worst
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raise_then_lower_restores() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.5]);
        let ginv = g.clone().try_inverse().unwrap();
        let t = Tensor::from_fn(2, 3, |i| (i[0] + 2 * i[1]) as f64 - 0.7 * i[2] as f64 + 0.1);
        let back = t.contract_slot(1, &ginv).contract_slot(1, &g);
        assert!(back.max_abs_diff(&t) < 1e-12);
    }

    #[test]
    fn permutation_semantics() {
        let t = Tensor::from_fn(3, 3, |i| (100 * i[0] + 10 * i[1] + i[2]) as f64);
        let p = t.permuted(&[2, 0, 1]);
        // slot 0 of p is slot 2 of t
        assert_eq!(p.get(&[1, 2, 0]), t.get(&[2, 0, 1]));
        assert_eq!(permutations(3).len(), 6);
        assert!(t.symmetry_defect() > 0.0);
    }
}
