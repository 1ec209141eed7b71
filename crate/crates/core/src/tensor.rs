//! Dense multi-index arrays with a common extent on every axis.

use std::ops::{Index, IndexMut};

/// A rank-`r` array of extent `dim` on each axis, stored row-major
/// (last index fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dim: usize,
    rank: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        Self {
            dim,
            rank,
            data: vec![0.0; dim.pow(rank as u32)],
        }
    }

    pub fn from_fn(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dim, rank);
        let mut idx = vec![0usize; rank];
        for slot in t.data.iter_mut() {
            *slot = f(&idx);
            // odometer increment
            for axis in (0..rank).rev() {
                idx[axis] += 1;
                if idx[axis] < dim {
                    break;
                }
                idx[axis] = 0;
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute entrywise difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        assert_eq!((self.dim, self.rank), (other.dim, other.rank));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Tensor) {
        assert_eq!((self.dim, self.rank), (other.dim, other.rank));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Contract the last axis with a vector, dropping the rank by one.
    pub fn contract_last(&self, v: &[f64]) -> Tensor {
        assert_eq!(v.len(), self.dim);
        assert!(self.rank >= 1);
        let mut out = Tensor::zeros(self.dim, self.rank - 1);
        for (o, chunk) in out.data.iter_mut().zip(self.data.chunks(self.dim)) {
            *o = chunk.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Evaluate a rank-4 tensor on four vectors.
    pub fn eval4(&self, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
        assert_eq!(self.rank, 4);
        let n = self.dim;
        let mut total = 0.0;
        for i in 0..n {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let ab = a[i] * b[j];
                if ab == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let abc = ab * c[k];
                    if abc == 0.0 {
                        continue;
                    }
                    let base = ((i * n + j) * n + k) * n;
                    for l in 0..n {
                        total += abc * d[l] * self.data[base + l];
                    }
                }
            }
        }
        total
    }
}

impl<const R: usize> Index<[usize; R]> for Tensor {
    type Output = f64;
    fn index(&self, idx: [usize; R]) -> &f64 {
        &self.data[self.offset(&idx)]
    }
}

impl<const R: usize> IndexMut<[usize; R]> for Tensor {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut f64 {
        let o = self.offset(&idx);
        &mut self.data[o]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_fn_visits_in_row_major_order() {
        let t = Tensor::from_fn(2, 3, |i| (i[0] * 100 + i[1] * 10 + i[2]) as f64);
        assert_eq!(t[[1, 0, 1]], 101.0);
        assert_eq!(t[[0, 1, 1]], 11.0);
        assert_eq!(t.data().len(), 8);
    }

    #[test]
    fn contract_last_matches_manual_sum() {
        let t = Tensor::from_fn(3, 2, |i| (i[0] + 2 * i[1]) as f64);
        let v = [1.0, -1.0, 0.5];
        let c = t.contract_last(&v);
        for i in 0..3 {
            let want: f64 = (0..3).map(|j| t[[i, j]] * v[j]).sum();
            assert_eq!(c[[i]], want);
        }
    }
}
