//! Sparse real vectors with strictly increasing indices.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVec {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, indices: Vec::new(), values: Vec::new() }
    }

    /// Builds from `(index, value)` pairs; indices must be strictly increasing
    /// and below `dim`. Zero values are kept out.
    pub fn from_sorted_pairs(dim: usize, pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, v) in pairs {
            debug_assert!((i as usize) < dim);
            debug_assert!(indices.last().is_none_or(|&last| last < i));
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        Self { dim, indices, values }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        Self::from_sorted_pairs(
            values.len(),
            values.iter().enumerate().map(|(i, &v)| (i as u32, v)),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().zip(&self.values).map(|(&i, &v)| (i as usize, v))
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * dense[i]).sum()
    }

    /// `out += alpha * self`
    pub fn add_scaled_to(&self, alpha: f64, out: &mut [f64]) {
        for (i, v) in self.iter() {
            out[i] += alpha * v;
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

/// A feature row usable by the linear learners: dense slices and sparse vectors.
pub trait Row: Sync {
    fn dim(&self) -> usize;
    fn dot(&self, w: &[f64]) -> f64;
    fn add_scaled_to(&self, alpha: f64, out: &mut [f64]);
}

impl Row for SparseVec {
    fn dim(&self) -> usize {
        self.dim
    }
    fn dot(&self, w: &[f64]) -> f64 {
        SparseVec::dot(self, w)
    }
    fn add_scaled_to(&self, alpha: f64, out: &mut [f64]) {
        SparseVec::add_scaled_to(self, alpha, out)
    }
}

impl Row for Vec<f64> {
    fn dim(&self) -> usize {
        self.len()
    }
    fn dot(&self, w: &[f64]) -> f64 {
        self.iter().zip(w).map(|(a, b)| a * b).sum()
    }
    fn add_scaled_to(&self, alpha: f64, out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(self) {
            *o += alpha * v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_drops_zeros() {
        let v = SparseVec::from_dense(&[0.0, 1.5, 0.0, -2.0]);
        assert_eq!(v.nnz(), 2);
        assert_eq!(v.to_dense(), vec![0.0, 1.5, 0.0, -2.0]);
        assert_eq!(v.dot(&[1.0, 2.0, 3.0, 4.0]), 3.0 - 8.0);
        assert!((v.norm() - (1.5f64 * 1.5 + 4.0).sqrt()).abs() < 1e-15);
    }
}
